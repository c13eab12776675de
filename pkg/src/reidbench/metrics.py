"""Population re-identification risk and text utility scoring."""
from __future__ import annotations

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .attributes import canonical_order, is_direct, is_indirect
from .kernels import lcs_len
from .matching import parse_date
from .population import PopulationIndex

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"\w+")


def reid_risk(index: PopulationIndex, inferred: dict[str, str]) -> float:
    """Re-identification risk of a set of correctly inferred attributes.

    Any correctly inferred direct identifier pins the individual: risk
    1.0. Otherwise risk is 1/k where k counts population records whose
    values match the inferred indirect attributes. An empty inferred set
    scores 1/N. Categorical values outside the population vocabulary are
    dropped from the count (logged); dates only need to parse.
    """
    if any(is_direct(a) for a in inferred):
        return 1.0
    usable: dict[str, str] = {}
    for attribute, value in inferred.items():
        if not is_indirect(attribute):
            raise ValueError(f"unknown attribute id: {attribute}")
        if attribute == "date_of_birth":
            if parse_date(value) is None:
                log.warning("dropping unparsable date_of_birth value %r", value)
                continue
        else:
            vocab = index.vocabulary(attribute)
            if vocab and value not in vocab:
                log.warning("dropping out-of-vocabulary %s value %r", attribute, value)
                continue
        usable[attribute] = value
    if not usable:
        return 1.0 / len(index)
    subset = tuple(canonical_order(usable))
    k = index.class_size(subset, tuple(usable[a] for a in subset))
    if k == 0:
        # unreachable from pipeline verdicts; guard keeps risk in (0, 1]
        log.warning("inferred tuple matches no population record; treating as unique")
        k = 1
    return 1.0 / k


def r_succ(risks, theta: float = 0.5) -> float:
    """Percentage of reports whose risk reaches the success threshold."""
    values = list(risks)
    if not values:
        return 0.0
    hits = sum(1 for r in values if r >= theta)
    return 100.0 * hits / len(values)


def threshold_sweep(risks, thetas) -> list[tuple[float, float]]:
    """R_succ across a grid of thresholds (non-increasing in theta)."""
    values = list(risks)
    return [(float(t), r_succ(values, float(t))) for t in thetas]


def recall_flags(pre: dict[str, bool], post: dict[str, bool]) -> dict[str, bool | None]:
    """Per-attribute anonymization recall flags for one entry.

    True: correct before anonymization, incorrect after (recalled).
    False: correct before and still correct after. None: incorrect
    before anonymization, excluded from the denominator.
    """
    if set(pre) != set(post):
        raise ValueError("pre and post verdicts cover different attributes")
    out: dict[str, bool | None] = {}
    for attribute, was_correct in pre.items():
        out[attribute] = (not post[attribute]) if was_correct else None
    return out


def aggregate_recall(flag_dicts) -> dict[str, tuple[int, int]]:
    """Sum recall flags across entries: attribute -> (recalled, denominator)."""
    totals: dict[str, tuple[int, int]] = {}
    for flags in flag_dicts:
        for attribute, flag in flags.items():
            recalled, denom = totals.get(attribute, (0, 0))
            if flag is not None:
                totals[attribute] = (recalled + int(flag), denom + 1)
            else:
                totals.setdefault(attribute, (recalled, denom))
    return totals


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, max_order: int = 4) -> float:
    """BLEU with uniform weights up to 4-grams and brevity penalty.

    Orders for which the candidate has no n-grams are dropped from the
    geometric mean; an included order with zero clipped matches yields
    0.0. No smoothing.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 1.0 if cand == ref else 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, max_order + 1):
        cand_ngrams = _ngrams(cand, n)
        total = sum(cand_ngrams.values())
        if total == 0:
            continue
        ref_ngrams = _ngrams(ref, n)
        clipped = sum(min(c, ref_ngrams[g]) for g, c in cand_ngrams.items())
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / total)
        orders += 1
    if orders == 0:
        return 0.0
    geo = math.exp(log_sum / orders)
    c, r = len(cand), len(ref)
    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    return bp * geo


def _f1(overlap: float, cand_total: int, ref_total: int) -> float:
    if overlap == 0 or cand_total == 0 or ref_total == 0:
        return 0.0
    p = overlap / cand_total
    r = overlap / ref_total
    return 2.0 * p * r / (p + r)


def rouge(candidate: str, reference: str) -> dict[str, float]:
    """ROUGE-1, ROUGE-2 and ROUGE-L F1 scores."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        score = 1.0 if cand == ref else 0.0
        return {"rouge1": score, "rouge2": score, "rougeL": score}
    out: dict[str, float] = {}
    for key, n in (("rouge1", 1), ("rouge2", 2)):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        overlap = sum(min(c, ref_ngrams[g]) for g, c in cand_ngrams.items())
        out[key] = _f1(overlap, sum(cand_ngrams.values()), sum(ref_ngrams.values()))
    ids = {tok: i for i, tok in enumerate(dict.fromkeys(cand + ref))}
    a = np.asarray([ids[t] for t in cand], dtype=np.int64)
    b = np.asarray([ids[t] for t in ref], dtype=np.int64)
    out["rougeL"] = _f1(lcs_len(a, b), len(cand), len(ref))
    return out


@dataclass(frozen=True)
class RiskReport:
    """Scored outcome of one attack on one (entry, tool) pair."""

    entry_id: str
    tool_id: str
    risk: float
    success: bool
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    inferred: dict[str, str] = field(default_factory=dict)
