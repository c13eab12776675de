"""Word-level metric-DP perturbation mechanisms over a shared embedding space.

Both mechanisms tokenize identically, replace only in-vocabulary words
(lowercased for lookup) and pass every other segment through untouched,
so punctuation, whitespace and casing of untouched tokens survive.
"""
from __future__ import annotations

import re
import threading
from pathlib import Path

import numpy as np

from ..kernels import nearest_vocab, sq_dist_row

_SEGMENTS = re.compile(r"\w+|\s+|[^\w\s]+")

DEFAULT_EPSILONS = (5.0, 11.0, 17.0)


class EmbeddingSpace:
    """Vocabulary with one vector per word, loaded from 'word v1 .. vd' lines."""

    def __init__(self, words: list[str], matrix: np.ndarray):
        if len(words) != matrix.shape[0]:
            raise ValueError("word count and matrix rows disagree")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in embedding vocabulary")
        self.words = list(words)
        self.matrix = np.ascontiguousarray(matrix, dtype=np.float64)
        self.index = {w: i for i, w in enumerate(self.words)}
        self._dist_rows: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingSpace":
        words: list[str] = []
        rows: list[list[float]] = []
        dim = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                if dim is None:
                    dim = len(parts) - 1
                    if dim < 1:
                        raise ValueError(f"{path}:{lineno}: no vector components")
                elif len(parts) - 1 != dim:
                    raise ValueError(f"{path}:{lineno}: expected {dim} components")
                words.append(parts[0])
                rows.append([float(x) for x in parts[1:]])
        if not words:
            raise ValueError(f"empty embedding file: {path}")
        return cls(words, np.asarray(rows, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.words)

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[1])

    def dist_row(self, word_index: int) -> np.ndarray:
        """Euclidean distances from one vocabulary word to all words, cached."""
        with self._lock:
            row = self._dist_rows.get(word_index)
        if row is None:
            row = np.sqrt(sq_dist_row(self.matrix[word_index], self.matrix))
            row.setflags(write=False)
            with self._lock:
                self._dist_rows[word_index] = row
        return row


def _segment(text: str) -> list[str]:
    return _SEGMENTS.findall(text)


def _word_slots(segments: list[str], space: EmbeddingSpace) -> list[tuple[int, int]]:
    """(segment position, vocabulary index) for every in-vocabulary word."""
    slots = []
    for pos, seg in enumerate(segments):
        if seg.strip() and re.match(r"\w", seg):
            idx = space.index.get(seg.lower())
            if idx is not None:
                slots.append((pos, idx))
    return slots


def madlib(text: str, space: EmbeddingSpace, epsilon: float, rng: np.random.Generator) -> str:
    """Calibrated-noise mechanism: add spherical noise with Gamma-distributed
    magnitude (shape = dimension, scale = 1/epsilon) to each word vector and
    emit the nearest vocabulary word."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    segments = _segment(text)
    slots = _word_slots(segments, space)
    if not slots:
        return text
    idx = np.asarray([i for _, i in slots], dtype=np.int64)
    vecs = space.matrix[idx]
    directions = rng.standard_normal(vecs.shape)
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    directions /= norms
    magnitudes = rng.gamma(shape=space.dim, scale=1.0 / epsilon, size=len(slots))
    noisy = vecs + directions * magnitudes[:, None]
    nearest = nearest_vocab(noisy, space.matrix)
    for (pos, _), out_idx in zip(slots, nearest):
        segments[pos] = space.words[int(out_idx)]
    return "".join(segments)


def tem(
    text: str,
    space: EmbeddingSpace,
    epsilon: float,
    gamma: float,
    rng: np.random.Generator,
) -> str:
    """Truncated exponential mechanism: candidates within gamma weighted
    exp(-epsilon * distance / 2); the pooled far bucket carries score
    -gamma + (2/epsilon) * ln |V \\ C| and resolves to a uniform far word."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    segments = _segment(text)
    slots = _word_slots(segments, space)
    if not slots:
        return text
    vocab_size = len(space)
    for pos, word_idx in slots:
        dists = space.dist_row(word_idx)
        cand = np.flatnonzero(dists <= gamma)
        n_far = vocab_size - len(cand)
        scores = [-dists[c] for c in cand]
        if n_far > 0:
            scores.append(-gamma + (2.0 / epsilon) * np.log(n_far))
        scores = np.asarray(scores)
        logw = (epsilon / 2.0) * scores
        logw -= logw.max()
        weights = np.exp(logw)
        weights /= weights.sum()
        choice = int(rng.choice(len(weights), p=weights))
        if choice < len(cand):
            out_idx = int(cand[choice])
        else:
            far = np.setdiff1d(np.arange(vocab_size), cand, assume_unique=True)
            out_idx = int(far[rng.integers(len(far))])
        segments[pos] = space.words[out_idx]
    return "".join(segments)
