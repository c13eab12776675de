"""Benchmark text generation: prompt construction and transcript validation.

Prompts assemble from packaged template files; attribute example
snippets come from an editable YAML bank. Generated transcripts must
carry the scenario delimiters and strictly alternating speaker
prefixes, otherwise the entry is retried and finally quarantined.
"""
from __future__ import annotations

import calendar
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
import yaml

from .attributes import canonical_order, display_name, is_direct
from .resources import data_path, prompt_template

START_DELIM = "[START OF TRANSCRIPT]"
END_DELIM = "[END OF TRANSCRIPT]"

LANGUAGE_NAMES = {
    "en": "English",
    "es": "Spanish",
    "zh-hans": "Simplified Chinese",
}

WORD_RANGES = {1: (750, 1000), 2: (750, 1000), 3: (1500, 2000)}


@dataclass(frozen=True)
class Scenario:
    name: str
    speakers: tuple[str, str]
    phrase: str  # substituted into scenario-slotted anonymizer templates

    @property
    def text(self) -> str:
        return prompt_template(f"scenario_{self.name}_text")

    @property
    def formatting(self) -> str:
        return prompt_template(f"scenario_{self.name}_formatting")


SCENARIOS: dict[str, Scenario] = {
    "medical": Scenario("medical", ("Patient", "Doctor"), "medical consultation"),
    "chatbot": Scenario("chatbot", ("Person", "Chatbot"), "chatbot conversation"),
    "meeting": Scenario("meeting", ("Target", "Other"), "meeting transcript"),
}


@dataclass(frozen=True)
class GenerationSpec:
    scenario: str
    level: int
    language: str
    target_attrs: tuple[str, ...]

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.level not in WORD_RANGES:
            raise ValueError(f"unknown difficulty level {self.level}")
        if self.language not in LANGUAGE_NAMES:
            raise ValueError(f"unknown language {self.language!r}")
        if self.level == 3 and any(is_direct(a) for a in self.target_attrs):
            raise ValueError("level 3 entries must not target direct identifiers")
        if not self.target_attrs:
            raise ValueError("target_attrs is empty")

    @property
    def word_range(self) -> tuple[int, int]:
        return WORD_RANGES[self.level]


@dataclass(frozen=True)
class BenchmarkEntry:
    entry_id: str
    scenario: str
    level: int
    language: str
    target_attrs: tuple[str, ...]
    ground_truth: dict[str, str]
    text: str
    profile_ref: str
    seed: int

    def __post_init__(self):
        if set(self.ground_truth) != set(self.target_attrs):
            raise ValueError("ground_truth keys must equal target_attrs")


class TranscriptFormatError(ValueError):
    """Generated text violates the scenario's formatting contract."""


class ExampleBankError(ValueError):
    """The example bank lacks snippets for a requested (attribute, level)."""


def load_example_bank(path: str | Path | None = None) -> dict[str, dict[int, list[str]]]:
    """attribute -> level -> snippet list, from the editable YAML bank."""
    raw = yaml.safe_load(Path(path or data_path("example_bank.yaml")).read_text(encoding="utf-8"))
    bank: dict[str, dict[int, list[str]]] = {}
    for attribute, levels in raw.items():
        bank[attribute] = {int(level): [str(s) for s in snippets] for level, snippets in levels.items()}
    return bank


def format_long_date(iso: str) -> str:
    d = date.fromisoformat(iso)
    return f"{d.day} {calendar.month_name[d.month]} {d.year}"


def render_profile(values: dict[str, str]) -> str:
    """PROFILE block: one attribute per line in canonical order."""
    lines = []
    for attribute in canonical_order(values):
        value = values[attribute]
        if attribute == "date_of_birth":
            value = format_long_date(value)
        label = display_name(attribute)
        lines.append(f"- {label[0].upper()}{label[1:]}: {value}")
    return "\n".join(lines)


def select_examples(
    bank: dict[str, dict[int, list[str]]],
    attribute: str,
    level: int,
    rng: np.random.Generator,
) -> list[str]:
    """Two or three snippets for (attribute, level), chosen with the run seed."""
    snippets = bank.get(attribute, {}).get(level, [])
    if len(snippets) < 2:
        raise ExampleBankError(f"example bank needs at least 2 snippets for ({attribute}, level {level})")
    count = int(rng.integers(2, 4))
    count = min(count, len(snippets))
    picked = rng.choice(len(snippets), size=count, replace=False)
    return [snippets[i] for i in sorted(picked)]


def render_examples(
    bank: dict[str, dict[int, list[str]]],
    target_attrs,
    level: int,
    rng: np.random.Generator,
) -> str:
    blocks = []
    for attribute in canonical_order(target_attrs):
        chosen = select_examples(bank, attribute, level, rng)
        lines = [f"- {display_name(attribute)} (Level {level}):"]
        lines.extend(f'  - "{snippet}"' for snippet in chosen)
        blocks.append("\n".join(lines))
    return "\n".join(blocks)


def build_prompt(
    profile_values: dict[str, str],
    spec: GenerationSpec,
    bank: dict[str, dict[int, list[str]]],
    rng: np.random.Generator,
) -> str:
    """Assemble the full generation prompt for one benchmark entry."""
    scenario = SCENARIOS[spec.scenario]
    lo, hi = spec.word_range
    targets = ", ".join(display_name(a) for a in canonical_order(spec.target_attrs))
    prompt = (
        prompt_template("generation_body")
        .replace("<SCENARIO TEXT>", scenario.text.strip())
        .replace("<PROFILE>", "\n" + render_profile(profile_values))
        .replace("<DIFFICULTY LEVEL>", f"Level {spec.level}")
        .replace("<TARGET ATTRIBUTES>", targets)
        .replace("<EXAMPLES>", "\n" + render_examples(bank, spec.target_attrs, spec.level, rng))
        .replace("<SCENARIO_FORMATTING>", scenario.formatting.strip())
        .replace("<WORDLIMIT>", f"between {lo} and {hi}")
    )
    if spec.language != "en":
        footer = prompt_template("footer_generation_language").replace(
            "<TARGET_LANGUAGE>", LANGUAGE_NAMES[spec.language]
        )
        prompt = f"{prompt.rstrip()}\n\n{footer}"
    return prompt


def validate_transcript(text: str, scenario_name: str) -> None:
    """Check delimiters and strict speaker alternation; raise on violation."""
    scenario = SCENARIOS[scenario_name]
    stripped = text.strip()
    if stripped.count(START_DELIM) != 1 or stripped.count(END_DELIM) != 1:
        raise TranscriptFormatError("transcript delimiters missing or repeated")
    if not stripped.startswith(START_DELIM) or not stripped.endswith(END_DELIM):
        raise TranscriptFormatError("text does not start and end with the transcript delimiters")
    body = stripped[len(START_DELIM) : -len(END_DELIM)]
    prefixes = tuple(f"{s}:" for s in scenario.speakers)
    last_speaker = None
    turns = 0
    for line in body.splitlines():
        line = line.strip()
        if not line:
            continue
        speaker = next((s for s in scenario.speakers if line.startswith(f"{s}:")), None)
        if speaker is None:
            raise TranscriptFormatError(f"line lacks a speaker prefix {prefixes}: {line[:60]!r}")
        if speaker == last_speaker:
            raise TranscriptFormatError(f"consecutive turns by {speaker!r} break alternation")
        last_speaker = speaker
        turns += 1
    if turns < 2:
        raise TranscriptFormatError("transcript holds fewer than two dialogue turns")


def generate_entry(
    client,
    entry_id: str,
    profile_values: dict[str, str],
    ground_truth: dict[str, str],
    spec: GenerationSpec,
    bank: dict[str, dict[int, list[str]]],
    rng: np.random.Generator,
    profile_ref: str,
    seed: int,
    max_attempts: int = 3,
) -> BenchmarkEntry:
    """Generate and validate one entry; raises TranscriptFormatError when
    every attempt fails (callers quarantine the entry)."""
    prompt = build_prompt(profile_values, spec, bank, rng)
    last_error: TranscriptFormatError | None = None
    for attempt in range(max_attempts):
        response = client.complete(prompt, stage="generate", attempt=attempt)
        try:
            validate_transcript(response, spec.scenario)
        except TranscriptFormatError as exc:
            last_error = exc
            continue
        return BenchmarkEntry(
            entry_id=entry_id,
            scenario=spec.scenario,
            level=spec.level,
            language=spec.language,
            target_attrs=tuple(spec.target_attrs),
            ground_truth=dict(ground_truth),
            text=response.strip(),
            profile_ref=profile_ref,
            seed=seed,
        )
    raise TranscriptFormatError(f"{entry_id}: {max_attempts} attempts failed; last: {last_error}")
