"""Shared test fixtures: tiny populations, mock clients, demo helpers."""
from __future__ import annotations

import csv
import importlib.util
import sys
from pathlib import Path

import numpy as np
import pytest

from reidbench.client import ClientConfig, LLMClient
from reidbench.population import PopulationSchema, load_population

REPO = Path(__file__).resolve().parents[1]

CODEBOOK_ROWS = [
    ("ST", "41", "Oregon/OR"),
    ("ST", "06", "California/CA"),
    ("ST", "30", "Montana/MT"),
    ("SEX", "1", "Male"),
    ("SEX", "2", "Female"),
    ("RAC2P", "01", "White alone"),
    ("RAC2P", "02", "Black or African American alone"),
    ("MAR", "1", "Married"),
    ("MAR", "5", "Never married or under 15 years old"),
    ("SCHL", "16", "Regular high school diploma"),
    ("SCHL", "21", "Bachelor's degree"),
    ("ESR", "1", "Civilian employed, at work"),
    ("ESR", "3", "Unemployed"),
    ("OCCP", "3255", "Registered nurses"),
    ("OCCP", "1021", "Software developers"),
    ("CIT", "1", "Born in the US"),
    ("CIT", "4", "US citizen by naturalization"),
]

POPULATION_HEADER = ["ST", "SEX", "RAC2P", "MAR", "SCHL", "ESR", "OCCP", "CIT", "AGE", "PUMA"]


def write_population(dirpath: Path, rows: list[list], codebook=CODEBOOK_ROWS) -> tuple[Path, Path]:
    """Write a microdata CSV plus codebook; returns their paths."""
    dirpath.mkdir(parents=True, exist_ok=True)
    pop = dirpath / "population.csv"
    book = dirpath / "codebook.csv"
    with open(pop, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(POPULATION_HEADER)
        writer.writerows(rows)
    with open(book, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["column", "code", "label"])
        writer.writerows(codebook)
    return pop, book


def base_row(st="41", sex="1", race="01", mar="1", schl="16", esr="1", occp="3255",
             cit="1", age=40, puma="4101") -> list:
    return [st, sex, race, mar, schl, esr, occp, cit, age, puma]


@pytest.fixture
def tiny_index(tmp_path):
    """Ten-record population: class sizes 1, 4 and 5 over the state attribute."""
    rows = [base_row(st="41", age=30 + i) for i in range(1)]
    rows += [base_row(st="06", sex="2", age=40 + i) for i in range(4)]
    rows += [base_row(st="30", mar="5", age=50 + i) for i in range(5)]
    pop, book = write_population(tmp_path, rows)
    return load_population(pop, book, PopulationSchema(), seed=7)


def mock_client(responder, **config) -> LLMClient:
    return LLMClient(ClientConfig(backend="mock", model="test-model", **config), responder=responder)


class ScriptedResponder:
    """Returns queued responses in order and records every prompt."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls: list[tuple[str, str, int]] = []

    def __call__(self, prompt: str, stage: str = "", attempt: int = 0) -> str:
        self.calls.append((prompt, stage, attempt))
        if not self.responses:
            raise AssertionError("scripted responder ran out of responses")
        return self.responses.pop(0)


_demo_module = None


@pytest.fixture(scope="session")
def demo_support():
    """Import the demo builder script as a module (it is not packaged)."""
    global _demo_module
    if _demo_module is None:
        spec = importlib.util.spec_from_file_location("build_demo", REPO / "scripts" / "build_demo.py")
        module = importlib.util.module_from_spec(spec)
        sys.modules["build_demo"] = module
        spec.loader.exec_module(module)
        _demo_module = module
    return _demo_module


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
