"""Synthetic direct identifiers: name, SSN, credit card, phone, address, email.

Five generators are table- or rule-driven and fully deterministic under a
seeded numpy Generator. Email generation goes through the language-model
client so the address stays consistent with the demographic profile.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .resources import prompt_template

DEFAULT_EMAIL_DOMAINS = ("gmail.com", "yahoo.com", "outlook.com", "hotmail.com")

# NXX prefixes never assigned to subscribers: N11 service codes plus 555.
RESERVED_NXX = frozenset({211, 311, 411, 511, 611, 711, 811, 911, 555})


class CoverageError(ValueError):
    """Requested key falls outside the loaded table's coverage."""


class EmailSynthesisError(RuntimeError):
    """The model failed to produce a valid email within the attempt budget."""


def luhn_check_digit(payload: str) -> int:
    """Check digit that makes payload+digit pass the Luhn checksum.

    The appended digit sits at an odd position (from the right), so every
    payload digit at an even offset from the payload's right end gets
    doubled.
    """
    total = 0
    for i, ch in enumerate(reversed(payload)):
        d = int(ch)
        if i % 2 == 0:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return (10 - total % 10) % 10


@dataclass(frozen=True)
class Issuer:
    name: str
    prefixes: tuple[str, ...]
    length: int


ISSUERS: dict[str, Issuer] = {
    "visa": Issuer("visa", ("4",), 16),
    "mastercard": Issuer("mastercard", ("51", "52", "53", "54", "55"), 16),
    "amex": Issuer("amex", ("34", "37"), 15),
    "discover": Issuer("discover", ("6011",), 16),
}


def gen_credit_card(rng: np.random.Generator, issuer: str | None = None) -> str:
    """Issuer-prefixed card number of the issuer's length, Luhn-valid."""
    if issuer is None:
        issuer = sorted(ISSUERS)[rng.integers(len(ISSUERS))]
    try:
        spec = ISSUERS[issuer]
    except KeyError:
        raise ValueError(f"unknown card issuer {issuer!r}") from None
    prefix = spec.prefixes[rng.integers(len(spec.prefixes))]
    body_len = spec.length - len(prefix) - 1
    body = "".join(map(str, rng.integers(0, 10, size=body_len)))
    payload = prefix + body
    return payload + str(luhn_check_digit(payload))


def gen_ssn(rng: np.random.Generator) -> str:
    """AAA-GG-SSSS with area in [001, 899] minus 666 and no all-identical digits."""
    while True:
        area = int(rng.integers(1, 900))
        if area == 666:
            continue
        group = int(rng.integers(1, 100))
        serial = int(rng.integers(1, 10000))
        digits = f"{area:03d}{group:02d}{serial:04d}"
        if len(set(digits)) == 1:
            continue
        return f"{area:03d}-{group:02d}-{serial:04d}"


def gen_phone(
    rng: np.random.Generator,
    state: str,
    area_codes: dict[str, list[int]],
    reserved_nxx: frozenset[int] = RESERVED_NXX,
) -> str:
    """(NPA) NXX-XXXX with the area code drawn from the state's list."""
    try:
        npas = area_codes[state]
    except KeyError:
        raise CoverageError(f"no area codes listed for state {state!r}") from None
    npa = npas[rng.integers(len(npas))]
    while True:
        nxx = int(rng.integers(2, 10)) * 100 + int(rng.integers(100))
        if nxx not in reserved_nxx:
            break
    line = int(rng.integers(10000))
    return f"({npa}) {nxx:03d}-{line:04d}"


def load_area_codes(path: str | Path) -> dict[str, list[int]]:
    """state,npa rows -> state label to sorted area-code list."""
    table: dict[str, list[int]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#") or row[0].strip() == "state":
                continue
            table.setdefault(row[0].strip(), []).append(int(row[1]))
    for npas in table.values():
        npas.sort()
    return table


class NameTables:
    """First-name counts by (birth year, sex) plus a surname count table.

    First names load from a directory of per-year files (yob<YYYY> stem,
    rows name,sex,count). Surnames load from a single name,count CSV.
    Sampling is independent for first and last name, proportional to
    count.
    """

    def __init__(self, names_dir: str | Path, surnames_path: str | Path):
        self._first: dict[tuple[int, str], tuple[list[str], np.ndarray]] = {}
        year_re = re.compile(r"yob(\d{4})")
        for path in sorted(Path(names_dir).iterdir()):
            m = year_re.search(path.name)
            if not m:
                continue
            year = int(m.group(1))
            buckets: dict[str, tuple[list[str], list[int]]] = {}
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.reader(fh):
                    if not row or row[0].strip().startswith("#"):
                        continue
                    name, sex, count = row[0].strip(), row[1].strip().upper(), int(row[2])
                    names, counts = buckets.setdefault(sex, ([], []))
                    names.append(name)
                    counts.append(count)
            for sex, (names, counts) in buckets.items():
                weights = np.asarray(counts, dtype=np.float64)
                self._first[(year, sex)] = (names, weights / weights.sum())
        if not self._first:
            raise ValueError(f"no yob<year> name files found under {names_dir}")
        self.years = sorted({y for y, _ in self._first})

        surnames: list[str] = []
        counts: list[int] = []
        with open(surnames_path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#") or row[0].strip() == "name":
                    continue
                surnames.append(row[0].strip())
                counts.append(int(row[1]))
        if not surnames:
            raise ValueError(f"no surnames in {surnames_path}")
        weights = np.asarray(counts, dtype=np.float64)
        self._surnames = (surnames, weights / weights.sum())

    def sample_first(self, rng: np.random.Generator, year: int, sex: str) -> str:
        key = (year, sex.upper())
        if key not in self._first:
            raise CoverageError(
                f"no first-name data for year {year}, sex {sex!r} "
                f"(covered years: {self.years[0]}..{self.years[-1]})"
            )
        names, p = self._first[key]
        return names[rng.choice(len(names), p=p)]

    def sample_surname(self, rng: np.random.Generator) -> str:
        names, p = self._surnames
        return names[rng.choice(len(names), p=p)]


def gen_name(rng: np.random.Generator, birth_year: int, sex: str, tables: NameTables) -> str:
    """'First Last' conditioned on (birth year, sex) for the first name."""
    first = tables.sample_first(rng, birth_year, sex)
    return f"{first} {tables.sample_surname(rng)}"


class GeoResources:
    """PUMA-to-ZCTA crosswalk plus a ZCTA-keyed venue address pool."""

    def __init__(self, crosswalk_path: str | Path, venues_path: str | Path):
        self.crosswalk: dict[str, list[str]] = {}
        with open(crosswalk_path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#") or row[0].strip() == "puma":
                    continue
                self.crosswalk.setdefault(row[0].strip(), []).append(row[1].strip())
        for zctas in self.crosswalk.values():
            zctas.sort()
        self.venues: dict[str, list[str]] = {}
        with open(venues_path, newline="", encoding="utf-8") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#") or row[0].strip() == "zcta":
                    continue
                zcta, street, city, state, zipcode = (c.strip() for c in row[:5])
                self.venues.setdefault(zcta, []).append(f"{street}, {city}, {state} {zipcode}")
        for pool in self.venues.values():
            pool.sort()


def gen_address(rng: np.random.Generator, puma: str, geo: GeoResources) -> str:
    """Venue address drawn from the pool of a ZCTA mapped to the PUMA.

    Addresses come back verbatim from the venue pool; nothing is
    synthesized, so the string never names a real residence.
    """
    zctas = geo.crosswalk.get(puma)
    if not zctas:
        raise CoverageError(f"PUMA {puma!r} missing from the crosswalk")
    candidates = [z for z in zctas if geo.venues.get(z)]
    if not candidates:
        raise CoverageError(f"no venue addresses pooled for any ZCTA of PUMA {puma!r}")
    zcta = candidates[rng.integers(len(candidates))]
    pool = geo.venues[zcta]
    return pool[rng.integers(len(pool))]


_EMAIL_LINE = re.compile(r"personal email address:\s*<?([^\s<>]+@[^\s<>]+?)>?\s*$", re.IGNORECASE | re.MULTILINE)
_EMAIL_SHAPE = re.compile(r"^[A-Za-z0-9._%+-]+@([A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)+)$")


def parse_email_response(response: str) -> str | None:
    """Extract the address from a 'personal email address: ...' line."""
    m = _EMAIL_LINE.search(response)
    if not m:
        return None
    candidate = m.group(1).strip().rstrip(".")
    return candidate if _EMAIL_SHAPE.match(candidate) else None


def email_domain(address: str) -> str:
    return address.rsplit("@", 1)[1].lower()


def gen_email(
    client,
    profile_text: str,
    allowed_domains=DEFAULT_EMAIL_DOMAINS,
    max_attempts: int = 3,
) -> str:
    """Model-generated address consistent with the profile.

    Responses with a disallowed domain or an unparsable body are
    regenerated with a fresh attempt counter; the budget exhausting
    raises EmailSynthesisError.
    """
    prompt = prompt_template("email_generation").replace("<PROFILE>", profile_text)
    allowed = {d.lower() for d in allowed_domains}
    failures = []
    for attempt in range(max_attempts):
        response = client.complete(prompt, stage="synth", attempt=attempt)
        address = parse_email_response(response)
        if address is None:
            failures.append(f"attempt {attempt}: unparsable response")
            continue
        if email_domain(address) not in allowed:
            failures.append(f"attempt {attempt}: disallowed domain {email_domain(address)!r}")
            continue
        return address
    raise EmailSynthesisError("; ".join(failures))
