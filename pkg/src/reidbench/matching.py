"""Attack guess adjudication: string similarity plus per-attribute match rules.

Rules live in a CSV data file (one rule per line: attribute,mode,threshold
and an optional semicolon-separated override list). That file is the
single source of truth for thresholds and participates in the run
fingerprint.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

import numpy as np

from .attributes import ALL_ATTRIBUTES
from .kernels import jaro_codes

MODES = ("exact_numeric", "jaro_winkler")
KNOWN_OVERRIDES = ("numeric_tokens_equal",)

_WS = re.compile(r"\s+")
_DIGITS = re.compile(r"\d+")

_DATE_FORMATS = (
    "%Y-%m-%d",
    "%d %B %Y",
    "%d %b %Y",
    "%B %d, %Y",
    "%b %d, %Y",
    "%B %d %Y",
    "%d-%m-%Y",
)


def normalize(text: str) -> str:
    """Lowercase, drop periods, collapse runs of whitespace."""
    return _WS.sub(" ", text.lower().replace(".", "")).strip()


def jaro_winkler(a: str, b: str, prefix_scale: float = 0.1, max_prefix: int = 4) -> float:
    """Jaro-Winkler similarity in [0, 1].

    The Winkler prefix boost is applied unconditionally, capped at a
    common prefix of ``max_prefix`` characters with scaling factor
    ``prefix_scale``. Equal strings score 1.0; strings with no matching
    characters score 0.0.
    """
    if a == b:
        return 1.0
    ca = np.array([ord(c) for c in a], dtype=np.int64)
    cb = np.array([ord(c) for c in b], dtype=np.int64)
    j = jaro_codes(ca, cb)
    prefix = 0
    for x, y in zip(a[:max_prefix], b[:max_prefix]):
        if x != y:
            break
        prefix += 1
    return j + prefix * prefix_scale * (1.0 - j)


@dataclass(frozen=True)
class MatchRule:
    attribute: str
    mode: str
    threshold: float | None = None
    overrides: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown match mode {self.mode!r} for {self.attribute!r}")
        if self.mode == "jaro_winkler":
            if self.threshold is None or not (0.0 < self.threshold < 1.0):
                raise ValueError(f"jaro_winkler rule for {self.attribute!r} needs a threshold in (0, 1)")
        elif self.threshold is not None:
            raise ValueError(f"threshold given for non-similarity rule on {self.attribute!r}")
        for ov in self.overrides:
            if ov not in KNOWN_OVERRIDES:
                raise ValueError(f"unknown semantic override {ov!r} on {self.attribute!r}")


def load_match_rules(path: str | Path) -> dict[str, MatchRule]:
    """Load one MatchRule per attribute from a rule CSV."""
    rules: dict[str, MatchRule] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip() == "attribute":
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected attribute,mode[,threshold[,overrides]]")
            attribute = row[0].strip()
            if attribute not in ALL_ATTRIBUTES:
                raise ValueError(f"{path}:{lineno}: unknown attribute {attribute!r}")
            if attribute in rules:
                raise ValueError(f"{path}:{lineno}: duplicate rule for {attribute!r}")
            mode = row[1].strip()
            threshold = None
            if len(row) > 2 and row[2].strip():
                threshold = float(row[2])
            overrides: tuple[str, ...] = ()
            if len(row) > 3 and row[3].strip():
                overrides = tuple(t.strip() for t in row[3].split(";") if t.strip())
            rules[attribute] = MatchRule(attribute, mode, threshold, overrides)
    return rules


def parse_date(text: str) -> date | None:
    """Parse a date from the formats the benchmark emits; None if unparsable."""
    cleaned = _WS.sub(" ", text.strip().rstrip("."))
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(cleaned, fmt).date()
        except ValueError:
            continue
    return None


def _numeric_tokens(text: str) -> list[int]:
    return [int(tok) for tok in _DIGITS.findall(text)]


def match_guess(rule: MatchRule, guess: str, truth: str) -> bool:
    """Adjudicate one guess against the ground-truth value.

    Empty guesses are always incorrect. exact_numeric compares full
    dates when both sides parse as dates, digit strings otherwise.
    jaro_winkler compares normalized strings against the rule threshold,
    then applies any conservative semantic overrides.
    """
    if not guess or not guess.strip():
        return False
    if rule.mode == "exact_numeric":
        truth_date = parse_date(truth)
        if truth_date is not None:
            guess_date = parse_date(guess)
            return guess_date is not None and guess_date == truth_date
        g = _DIGITS.findall(guess)
        t = _DIGITS.findall(truth)
        return bool(t) and "".join(g) == "".join(t)
    ng, nt = normalize(guess), normalize(truth)
    if jaro_winkler(ng, nt) <= rule.threshold:
        return False
    if "numeric_tokens_equal" in rule.overrides:
        if _numeric_tokens(ng) != _numeric_tokens(nt):
            return False
    return True
