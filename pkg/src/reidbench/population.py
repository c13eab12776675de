"""Microdata-backed population: loading, equivalence classes, profile sampling.

Records decode to category strings through a code book at load time.
Dates of birth extrapolate the source age against a reference year, with
month and day synthesized deterministically from the run seed and the
row's content (identical source rows share a birth date, and the result
does not depend on row order).
"""
from __future__ import annotations

import calendar
import csv
import hashlib
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .attributes import INDIRECT_ATTRIBUTES, canonical_order, display_name

DEFAULT_COLUMNS = {
    "state": "ST",
    "sex": "SEX",
    "race": "RAC2P",
    "marital_status": "MAR",
    "education": "SCHL",
    "employment": "ESR",
    "occupation": "OCCP",
    "citizenship": "CIT",
}
AGE_COLUMN = "AGE"
PUMA_COLUMN = "PUMA"


class SchemaError(ValueError):
    """The CSV header does not carry a required column."""


class RowDecodeError(ValueError):
    """A row holds a code the code book cannot decode."""


@dataclass(frozen=True)
class PopulationSchema:
    """Column mapping and date extrapolation settings for one microdata file."""

    columns: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    age_column: str = AGE_COLUMN
    puma_column: str = PUMA_COLUMN
    record_id_column: str | None = None
    reference_year: int = 2025


@dataclass(frozen=True)
class SamplingSpec:
    """How target profiles are drawn.

    n_indirect indirect attributes form the uniqueness subset; the
    subset is redrawn per entry by default, or once per run cell with
    subset_policy='per_batch'.
    """

    n_indirect: int = 5
    subset_policy: str = "per_entry"

    def __post_init__(self):
        if not 1 <= self.n_indirect <= len(INDIRECT_ATTRIBUTES):
            raise ValueError(f"n_indirect must be in 1..{len(INDIRECT_ATTRIBUTES)}")
        if self.subset_policy not in ("per_entry", "per_batch"):
            raise ValueError(f"unknown subset_policy {self.subset_policy!r}")


@dataclass(frozen=True)
class DemographicRecord:
    record_id: str
    values: dict[str, str]  # attribute id -> decoded label (date_of_birth is ISO)
    puma: str
    age: int

    def value_tuple(self, attributes) -> tuple[str, ...]:
        return tuple(self.values[a] for a in attributes)


def load_codebook(path: str | Path) -> dict[tuple[str, str], str]:
    """column,code,label rows -> (column, code) to label."""
    book: dict[tuple[str, str], str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#") or row[0].strip() == "column":
                continue
            if len(row) < 3:
                raise ValueError(f"{path}:{lineno}: expected column,code,label")
            book[(row[0].strip(), row[1].strip())] = row[2].strip()
    if not book:
        raise ValueError(f"empty code book: {path}")
    return book


def _birth_date(seed: int, row_key: str, year: int) -> date:
    digest = hashlib.sha256(f"{seed}|{row_key}".encode()).digest()
    sub = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "big")))
    month = int(sub.integers(1, 13))
    day = int(sub.integers(1, calendar.monthrange(year, month)[1] + 1))
    return date(year, month, day)


class PopulationIndex:
    """Loaded population with memoized equivalence-class grouping."""

    def __init__(self, records: list[DemographicRecord], codebook: dict[tuple[str, str], str],
                 schema: PopulationSchema):
        if not records:
            raise ValueError("population is empty")
        self.records = records
        self.schema = schema
        self._codebook = codebook
        self._class_maps: dict[tuple[str, ...], dict[tuple[str, ...], np.ndarray]] = {}
        self._lock = threading.Lock()
        self._vocab: dict[str, frozenset[str]] = {}
        for attribute, column in schema.columns.items():
            labels = {label for (col, _), label in codebook.items() if col == column}
            self._vocab[attribute] = frozenset(labels)

    def __len__(self) -> int:
        return len(self.records)

    def vocabulary(self, attribute: str) -> frozenset[str]:
        """Full category vocabulary for a coded attribute (empty for dates)."""
        return self._vocab.get(attribute, frozenset())

    def class_map(self, attributes) -> dict[tuple[str, ...], np.ndarray]:
        """Value tuple -> member record indices, for a canonicalized subset."""
        subset = tuple(canonical_order(attributes))
        with self._lock:
            cached = self._class_maps.get(subset)
        if cached is not None:
            return cached
        groups: dict[tuple[str, ...], list[int]] = {}
        for i, record in enumerate(self.records):
            groups.setdefault(record.value_tuple(subset), []).append(i)
        built = {k: np.asarray(v, dtype=np.int64) for k, v in groups.items()}
        with self._lock:
            self._class_maps[subset] = built
        return built

    def equivalence_classes(self, attributes) -> list[tuple[tuple[str, ...], int]]:
        """(value tuple, class size) pairs in lexicographic value order."""
        cmap = self.class_map(attributes)
        return [(values, len(ids)) for values, ids in sorted(cmap.items())]

    def class_size(self, attributes, values: tuple[str, ...]) -> int:
        return len(self.class_map(attributes).get(tuple(values), ()))


def load_population(
    csv_path: str | Path,
    codebook_path: str | Path,
    schema: PopulationSchema | None = None,
    seed: int = 0,
) -> PopulationIndex:
    """Load microdata, decode codes to labels, synthesize birth dates."""
    schema = schema or PopulationSchema()
    codebook = load_codebook(codebook_path)
    records: list[DemographicRecord] = []
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        required = dict(schema.columns)
        required["age"] = schema.age_column
        required["puma"] = schema.puma_column
        for attribute, column in required.items():
            if column not in header:
                label = display_name(attribute) if attribute not in ("age", "puma") else attribute
                raise SchemaError(f"{csv_path}: missing column {column!r} ({label})")
        for i, row in enumerate(reader):
            try:
                age = int(row[schema.age_column])
            except ValueError:
                raise RowDecodeError(f"{csv_path} row {i}: non-integer age {row[schema.age_column]!r}") from None
            values: dict[str, str] = {}
            for attribute, column in schema.columns.items():
                code = (row[column] or "").strip()
                label = codebook.get((column, code))
                if label is None:
                    raise RowDecodeError(
                        f"{csv_path} row {i}: column {column} code {code!r} not in code book"
                    )
                values[attribute] = label
            year = schema.reference_year - age
            row_key = "|".join((row.get(c) or "").strip() for c in sorted(header))
            values["date_of_birth"] = _birth_date(seed, row_key, year).isoformat()
            record_id = (
                (row.get(schema.record_id_column) or "").strip()
                if schema.record_id_column
                else f"r{i:06d}"
            )
            records.append(
                DemographicRecord(
                    record_id=record_id,
                    values=values,
                    puma=(row[schema.puma_column] or "").strip(),
                    age=age,
                )
            )
    return PopulationIndex(records, codebook, schema)


def sample_target(
    index: PopulationIndex,
    spec: SamplingSpec,
    rng: np.random.Generator,
    subset: tuple[str, ...] | None = None,
) -> tuple[DemographicRecord, tuple[str, ...]]:
    """Draw one target profile biased toward population uniqueness.

    A uniform random subset of n_indirect indirect attributes is drawn
    (unless a fixed subset is passed in), then an equivalence class over
    that subset with probability proportional to 1/size, then a uniform
    member of the class.
    """
    if subset is None:
        picked = rng.choice(len(INDIRECT_ATTRIBUTES), size=spec.n_indirect, replace=False)
        subset = tuple(canonical_order([INDIRECT_ATTRIBUTES[i] for i in picked]))
    else:
        subset = tuple(canonical_order(subset))
        if len(subset) != spec.n_indirect:
            raise ValueError("fixed subset size disagrees with spec.n_indirect")
    classes = sorted(index.class_map(subset).items())
    weights = np.asarray([1.0 / len(ids) for _, ids in classes])
    weights /= weights.sum()
    class_idx = int(rng.choice(len(classes), p=weights))
    ids = np.sort(classes[class_idx][1])
    record = index.records[int(ids[rng.integers(len(ids))])]
    return record, subset
