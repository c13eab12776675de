"""Inference attack: prompt construction, response parsing, adjudication."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .attributes import canonical_order, display_name, is_indirect
from .matching import MatchRule, match_guess
from .population import PopulationIndex
from .resources import prompt_template
from .textgen import LANGUAGE_NAMES


class AttackParseError(ValueError):
    """No guess structure could be recovered from the model response."""


@dataclass(frozen=True)
class AttackGuess:
    inference: str = ""
    guess: str = ""
    certainty: str = ""


@dataclass(frozen=True)
class AttackReport:
    entry_id: str
    tool_id: str
    guesses: dict[str, AttackGuess]
    verdicts: dict[str, bool]
    inferred: dict[str, str] = field(default_factory=dict)


def _attribute_lines(target_attrs, index: PopulationIndex | None) -> str:
    lines = []
    for attribute in canonical_order(target_attrs):
        label = display_name(attribute)
        if attribute == "date_of_birth":
            lines.append(f"- {label} (a full date: day, month and year)")
            continue
        vocab = index.vocabulary(attribute) if (index is not None and is_indirect(attribute)) else None
        if vocab:
            allowed = "; ".join(sorted(vocab))
            lines.append(f"- {label} (allowed values: {allowed})")
        else:
            lines.append(f"- {label}")
    return "\n".join(lines)


def build_attack_prompt(
    text: str,
    target_attrs,
    index: PopulationIndex | None = None,
    language: str = "en",
) -> str:
    """Guessing-game prompt asking for inference, guess and certainty per
    attribute; categorical attributes list their allowed values in English."""
    prompt = (
        prompt_template("attack")
        .replace("<TEXT>", text.strip())
        .replace("<TARGET ATTRIBUTES>", _attribute_lines(target_attrs, index))
    )
    if language != "en":
        footer = prompt_template("footer_attacker_language").replace(
            "<TARGET_LANGUAGE>", LANGUAGE_NAMES[language]
        )
        prompt = f"{prompt.rstrip()}\n\n{footer}"
    return prompt


_FENCE = re.compile(r"^```[a-zA-Z]*\s*|\s*```$", re.MULTILINE)


def _extract_json_object(response: str) -> dict | None:
    cleaned = _FENCE.sub("", response.strip())
    start = cleaned.find("{")
    if start < 0:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i, ch in enumerate(cleaned[start:], start):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                try:
                    parsed = json.loads(cleaned[start : i + 1])
                except json.JSONDecodeError:
                    return None
                return parsed if isinstance(parsed, dict) else None
    return None


def _normalize_key(key: str) -> str:
    return re.sub(r"[^a-z0-9]+", " ", key.lower()).strip()


def parse_attack_response(response: str, target_attrs) -> dict[str, AttackGuess]:
    """One AttackGuess per requested attribute.

    Attributes the model skipped come back with an empty guess (scored
    incorrect); a response bearing no parsable structure at all raises
    AttackParseError so the caller can retry.
    """
    parsed = _extract_json_object(response)
    if parsed is None:
        raise AttackParseError("no JSON object found in attacker response")
    by_key: dict[str, dict] = {}
    for key, value in parsed.items():
        if isinstance(value, dict):
            by_key[_normalize_key(str(key))] = value
    out: dict[str, AttackGuess] = {}
    for attribute in target_attrs:
        candidates = (_normalize_key(display_name(attribute)), _normalize_key(attribute))
        block = next((by_key[k] for k in candidates if k in by_key), None)
        if block is None:
            out[attribute] = AttackGuess()
            continue
        out[attribute] = AttackGuess(
            inference=str(block.get("inference", "")),
            guess=str(block.get("guess", "") or ""),
            certainty=str(block.get("certainty", "")),
        )
    if all(not g.guess for g in out.values()):
        raise AttackParseError("attacker response held no guesses for the requested attributes")
    return out


def adjudicate(
    entry_id: str,
    tool_id: str,
    guesses: dict[str, AttackGuess],
    ground_truth: dict[str, str],
    rules: dict[str, MatchRule],
) -> AttackReport:
    """Score guesses against ground truth; collect the correct subset."""
    verdicts: dict[str, bool] = {}
    inferred: dict[str, str] = {}
    for attribute, truth in ground_truth.items():
        try:
            rule = rules[attribute]
        except KeyError:
            raise KeyError(f"no match rule configured for attribute {attribute!r}") from None
        correct = match_guess(rule, guesses[attribute].guess, truth)
        verdicts[attribute] = correct
        if correct:
            inferred[attribute] = truth
    return AttackReport(
        entry_id=entry_id,
        tool_id=tool_id,
        guesses=guesses,
        verdicts=verdicts,
        inferred=inferred,
    )


def attack_text(
    client,
    entry_id: str,
    tool_id: str,
    text: str,
    target_attrs,
    ground_truth: dict[str, str],
    rules: dict[str, MatchRule],
    index: PopulationIndex | None,
    language: str = "en",
    max_attempts: int = 3,
) -> AttackReport:
    """Run the attacker on one (entry, tool) text and adjudicate."""
    prompt = build_attack_prompt(text, target_attrs, index, language)
    last: AttackParseError | None = None
    for attempt in range(max_attempts):
        response = client.complete(prompt, stage="attack", attempt=attempt)
        try:
            guesses = parse_attack_response(response, target_attrs)
        except AttackParseError as exc:
            last = exc
            continue
        return adjudicate(entry_id, tool_id, guesses, ground_truth, rules)
    raise AttackParseError(f"{entry_id}/{tool_id}: {max_attempts} attempts failed; last: {last}")
