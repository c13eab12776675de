"""Prompt-driven anonymization tools: redaction variants, privacy-preserving
summarization, and detect-then-mask entity listing."""
from __future__ import annotations

import json
import logging
import re

from ..resources import prompt_template
from ..textgen import LANGUAGE_NAMES, SCENARIOS

log = logging.getLogger(__name__)

REDACT_VARIANTS = {
    "plain": "anonymizer_redact",
    "direct": "anonymizer_redact_direct",
    "all": "anonymizer_redact_all",
}


class AnonymizerParseError(ValueError):
    """The model response lacked the structure the tool requires."""


def scenario_phrase(scenario: str) -> str:
    return SCENARIOS[scenario].phrase


def redact_llm(client, text: str, variant: str = "plain", language: str = "en") -> str:
    """Redaction-prompt anonymization; the response is the anonymized text."""
    try:
        template = prompt_template(REDACT_VARIANTS[variant])
    except KeyError:
        raise ValueError(f"unknown redaction variant {variant!r}") from None
    if language != "en":
        footer = prompt_template("footer_anonymizer_language").replace(
            "<TARGET_LANGUAGE>", LANGUAGE_NAMES[language]
        )
        template = f"{template.rstrip()}\n\n{footer}"
    response = client.complete(f"{template.rstrip()}\n\n{text}", stage="anonymize")
    return response.strip()


_ANSWER = re.compile(r"<answer>(.*?)</answer>", re.DOTALL | re.IGNORECASE)


def summarize_llm(client, text: str, scenario: str, max_attempts: int = 3) -> str:
    """Summarization anonymizer; output is the content of the answer tags."""
    template = prompt_template("anonymizer_summary").replace("<<SCENARIO>>", scenario_phrase(scenario))
    prompt = f"{text.strip()}\n\n{template.rstrip()}"
    last = None
    for attempt in range(max_attempts):
        response = client.complete(prompt, stage="anonymize", attempt=attempt)
        m = _ANSWER.search(response)
        if m:
            return m.group(1).strip()
        last = "no answer tags in response"
    raise AnonymizerParseError(f"summarization anonymizer: {last} after {max_attempts} attempts")


def entity_mask_llm(client, text: str, scenario: str, mask: str = "XXX") -> str:
    """Detect-then-mask anonymizer: the model lists PII entities as JSON
    lines; every listed span is masked wherever it occurs. Unparsable
    lines are skipped with a log message."""
    template = prompt_template("anonymizer_entities").replace("<SCENARIO>", scenario_phrase(scenario))
    response = client.complete(f"{template.rstrip()}\n{text}", stage="anonymize")
    spans: list[str] = []
    skipped = 0
    for line in response.splitlines():
        line = line.strip().strip("`")
        if not line:
            continue
        try:
            parsed = json.loads(line)
        except json.JSONDecodeError:
            skipped += 1
            continue
        if isinstance(parsed, dict):
            span = str(parsed.get("text", "") or "")
            if span.strip():
                spans.append(span)
        else:
            skipped += 1
    if skipped:
        log.warning("entity anonymizer: skipped %d unparsable response lines", skipped)
    out = text
    for span in sorted(set(spans), key=len, reverse=True):
        out = out.replace(span, mask)
    return out
