"""Risk scoring and text-similarity metrics against independent references."""
from __future__ import annotations

import itertools
import logging
import math
import random
from collections import Counter

import pytest

from reidbench.metrics import (
    aggregate_recall,
    bleu,
    r_succ,
    recall_flags,
    reid_risk,
    rouge,
    threshold_sweep,
    tokenize,
)


# --- independent similarity references -------------------------------------

def bleu_reference(candidate: str, reference: str, max_order: int = 4) -> float:
    """Straight-from-the-definition BLEU, written without the package code."""
    cand = candidate.lower().split()
    ref = reference.lower().split()
    cand = [w.strip(".,!?;:") for w in cand if w.strip(".,!?;:")]
    ref = [w.strip(".,!?;:") for w in ref if w.strip(".,!?;:")]
    if not cand or not ref:
        return 1.0 if cand == ref else 0.0
    precisions = []
    for n in range(1, max_order + 1):
        cn = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
        rn = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        total = sum(cn.values())
        if total == 0:
            continue
        match = sum(min(v, rn[g]) for g, v in cn.items())
        precisions.append((match, total))
    if not precisions:
        return 0.0
    if any(m == 0 for m, _ in precisions):
        return 0.0
    geo = math.exp(sum(math.log(m / t) for m, t in precisions) / len(precisions))
    bp = 1.0 if len(cand) > len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * geo


def lcs_reference(a: list[str], b: list[str]) -> int:
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def rouge_reference(candidate: str, reference: str) -> dict[str, float]:
    def toks(s):
        return [w.strip(".,!?;:") for w in s.lower().split() if w.strip(".,!?;:")]

    def f1(overlap, c, r):
        if overlap == 0 or c == 0 or r == 0:
            return 0.0
        p, q = overlap / c, overlap / r
        return 2 * p * q / (p + q)

    cand, ref = toks(candidate), toks(reference)
    if not cand or not ref:
        v = 1.0 if cand == ref else 0.0
        return {"rouge1": v, "rouge2": v, "rougeL": v}
    out = {}
    for key, n in (("rouge1", 1), ("rouge2", 2)):
        cn = Counter(tuple(cand[i : i + n]) for i in range(len(cand) - n + 1))
        rn = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
        out[key] = f1(sum(min(v, rn[g]) for g, v in cn.items()), sum(cn.values()), sum(rn.values()))
    out["rougeL"] = f1(lcs_reference(cand, ref), len(cand), len(ref))
    return out


WORDS = "the patient asked about recurring headaches and slept badly since march".split()


def random_sentence(rnd: random.Random, length: int) -> str:
    return " ".join(rnd.choice(WORDS) for _ in range(length))


# --- reid_risk --------------------------------------------------------------

def brute_force_count(index, inferred: dict[str, str]) -> int:
    return sum(
        1
        for record in index.records
        if all(record.values[a] == v for a, v in inferred.items())
    )


def test_direct_identifier_pins_risk(tiny_index):
    assert reid_risk(tiny_index, {"ssn": "212-55-0001"}) == 1.0
    assert reid_risk(tiny_index, {"email": "x@y.z", "state": "Oregon/OR"}) == 1.0


def test_empty_inferred_scores_one_over_population(tiny_index):
    assert reid_risk(tiny_index, {}) == 1.0 / len(tiny_index)


def test_risk_is_inverse_class_size(tiny_index):
    assert reid_risk(tiny_index, {"state": "Oregon/OR"}) == 1.0
    assert reid_risk(tiny_index, {"state": "California/CA"}) == 0.25
    assert reid_risk(tiny_index, {"state": "Montana/MT"}) == 0.2


def test_out_of_vocabulary_value_is_dropped(tiny_index, caplog):
    with caplog.at_level(logging.WARNING):
        risk = reid_risk(tiny_index, {"state": "Narnia", "sex": "Female"})
    assert "out-of-vocabulary" in caplog.text
    assert risk == reid_risk(tiny_index, {"sex": "Female"})


def test_unparsable_date_is_dropped(tiny_index, caplog):
    with caplog.at_level(logging.WARNING):
        risk = reid_risk(tiny_index, {"date_of_birth": "sometime in spring"})
    assert "unparsable" in caplog.text
    assert risk == 1.0 / len(tiny_index)


def test_no_matching_record_guard(tiny_index, caplog):
    # in-vocabulary combination that no record carries
    inferred = {"state": "Oregon/OR", "sex": "Female"}
    assert brute_force_count(tiny_index, inferred) == 0
    with caplog.at_level(logging.WARNING):
        assert reid_risk(tiny_index, inferred) == 1.0
    assert "no population record" in caplog.text


def test_unknown_attribute_rejected(tiny_index):
    with pytest.raises(ValueError, match="unknown attribute"):
        reid_risk(tiny_index, {"favorite_color": "blue"})


def test_risk_equals_brute_force_over_random_tuples(tiny_index):
    rnd = random.Random(5)
    attributes = ["state", "sex", "marital_status"]
    for _ in range(300):
        record = rnd.choice(tiny_index.records)
        chosen = rnd.sample(attributes, rnd.randint(1, 3))
        inferred = {a: record.values[a] for a in chosen}
        k = brute_force_count(tiny_index, inferred)
        assert k >= 1
        assert reid_risk(tiny_index, inferred) == 1.0 / k


def test_risk_monotone_in_inferred_subset(tiny_index):
    """Adding attributes can only shrink the class, never the risk."""
    record = tiny_index.records[5]
    attributes = ["state", "sex", "marital_status", "education"]
    for r in range(1, len(attributes)):
        for smaller in itertools.combinations(attributes, r):
            for extra in attributes:
                if extra in smaller:
                    continue
                larger = smaller + (extra,)
                risk_small = reid_risk(tiny_index, {a: record.values[a] for a in smaller})
                risk_large = reid_risk(tiny_index, {a: record.values[a] for a in larger})
                assert risk_large >= risk_small


# --- aggregation ------------------------------------------------------------

def test_r_succ():
    assert r_succ([1.0, 0.5, 0.49, 0.1], theta=0.5) == 50.0
    assert r_succ([], theta=0.5) == 0.0
    assert r_succ([0.5], theta=0.5) == 100.0  # threshold is inclusive


def test_threshold_sweep_non_increasing():
    rnd = random.Random(11)
    risks = [rnd.choice([1.0, 0.5, 0.25, 0.2, 0.01]) for _ in range(200)]
    thetas = [t / 10 for t in range(1, 11)]
    sweep = threshold_sweep(risks, thetas)
    assert [t for t, _ in sweep] == pytest.approx(thetas)
    values = [v for _, v in sweep]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_recall_flags():
    pre = {"state": True, "sex": True, "race": False}
    post = {"state": False, "sex": True, "race": False}
    assert recall_flags(pre, post) == {"state": True, "sex": False, "race": None}
    with pytest.raises(ValueError, match="different attributes"):
        recall_flags({"state": True}, {"sex": True})


def test_aggregate_recall():
    flags = [
        {"state": True, "sex": None},
        {"state": False, "sex": True},
        {"state": True, "sex": None},
    ]
    assert aggregate_recall(flags) == {"state": (2, 3), "sex": (1, 1)}
    assert aggregate_recall([{"state": None}]) == {"state": (0, 0)}


# --- text similarity --------------------------------------------------------

def test_tokenize():
    assert tokenize("Hello, World! It's 3 PM.") == ["hello", "world", "it", "s", "3", "pm"]


def test_identical_texts_score_one():
    text = "The quick brown fox jumps over the lazy dog near the river bank today."
    assert bleu(text, text) == pytest.approx(1.0)
    scores = rouge(text, text)
    assert scores == {"rouge1": pytest.approx(1.0), "rouge2": pytest.approx(1.0), "rougeL": pytest.approx(1.0)}


def test_disjoint_texts_score_zero():
    a = "alpha beta gamma delta epsilon"
    b = "one two three four five"
    assert bleu(a, b) == 0.0
    assert rouge(a, b) == {"rouge1": 0.0, "rouge2": 0.0, "rougeL": 0.0}


def test_empty_candidate():
    assert bleu("", "something") == 0.0
    assert bleu("", "") == 1.0
    assert rouge("", "words here")["rouge1"] == 0.0


def test_bleu_matches_reference_on_random_pairs():
    rnd = random.Random(2024)
    for _ in range(60):
        cand = random_sentence(rnd, rnd.randint(4, 30))
        ref = random_sentence(rnd, rnd.randint(4, 30))
        assert bleu(cand, ref) == pytest.approx(bleu_reference(cand, ref), abs=1e-9)


def test_rouge_matches_reference_on_random_pairs():
    rnd = random.Random(77)
    for _ in range(60):
        cand = random_sentence(rnd, rnd.randint(3, 25))
        ref = random_sentence(rnd, rnd.randint(3, 25))
        expected = rouge_reference(cand, ref)
        got = rouge(cand, ref)
        for key in ("rouge1", "rouge2", "rougeL"):
            assert got[key] == pytest.approx(expected[key], abs=1e-9)


def test_bleu_brevity_penalty_direction():
    ref = "a b c d e f g h"
    short = "a b c d"
    # perfect precision but half length: penalized below 1
    assert 0 < bleu(short, ref) < 1.0
