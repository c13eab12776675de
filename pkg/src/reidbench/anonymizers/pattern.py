"""Regex and dictionary masking baseline.

Rules load from a YAML file (regex patterns plus dictionary term lists)
and replace every match with a fixed mask token. The rule set is
deliberately surface-level: it catches standard formats and known
terms, and by design misses spelled-out or obfuscated values.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from ..resources import data_path


@dataclass(frozen=True)
class PatternRules:
    mask: str
    rules: tuple[tuple[str, re.Pattern], ...]


def load_pattern_rules(path: str | Path | None = None) -> PatternRules:
    """Compile the rule file; malformed patterns fail here, not mid-run."""
    raw = yaml.safe_load(Path(path or data_path("pattern_rules.yaml")).read_text(encoding="utf-8"))
    mask = str(raw.get("mask", "XXX"))
    compiled: list[tuple[str, re.Pattern]] = []
    for rule in raw.get("rules", []):
        name = rule.get("name", "<unnamed>")
        kind = rule.get("kind")
        try:
            if kind == "regex":
                regex = re.compile(rule["pattern"])
            elif kind == "dictionary":
                terms = [t for t in rule.get("terms", []) if str(t).strip()]
                if not terms:
                    raise ValueError("dictionary rule with no terms")
                alternation = "|".join(re.escape(str(t)) for t in sorted(terms, key=len, reverse=True))
                regex = re.compile(rf"\b(?:{alternation})\b", re.IGNORECASE)
            else:
                raise ValueError(f"unknown rule kind {kind!r}")
        except (re.error, KeyError, ValueError) as exc:
            raise ValueError(f"malformed pattern rule {name!r}: {exc}") from exc
        compiled.append((name, regex))
    if not compiled:
        raise ValueError(f"no rules loaded from {path}")
    for name, regex in compiled:
        if regex.search(mask):
            raise ValueError(f"rule {name!r} matches the mask token; masking would not be idempotent")
    return PatternRules(mask=mask, rules=tuple(compiled))


def pattern_anonymize(text: str, rules: PatternRules) -> str:
    """Mask every rule match; text without matches passes through unchanged."""
    out = text
    for _, regex in rules.rules:
        out = regex.sub(rules.mask, out)
    return out
