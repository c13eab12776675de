"""Synthetic direct identifiers: formats, validity rules, resource sampling."""
from __future__ import annotations

import numpy as np
import pytest

from conftest import ScriptedResponder, mock_client
from reidbench.identifiers import (
    ISSUERS,
    RESERVED_NXX,
    CoverageError,
    EmailSynthesisError,
    GeoResources,
    NameTables,
    gen_address,
    gen_credit_card,
    gen_email,
    gen_name,
    gen_phone,
    gen_ssn,
    load_area_codes,
    luhn_check_digit,
    parse_email_response,
)


def luhn_valid_reference(number: str) -> bool:
    """Independent check: walk right to left, double every second digit."""
    total = 0
    for i, ch in enumerate(reversed(number)):
        d = int(ch)
        if i % 2 == 1:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


def ssn_valid_reference(ssn: str) -> bool:
    area, group, serial = ssn.split("-")
    if len(area) != 3 or len(group) != 2 or len(serial) != 4:
        return False
    if not (1 <= int(area) <= 899) or int(area) == 666:
        return False
    if not (1 <= int(group) <= 99) or not (1 <= int(serial) <= 9999):
        return False
    return len(set(area + group + serial)) > 1


def test_luhn_check_digit_anchor():
    assert luhn_check_digit("406370276175203") == 6
    assert luhn_valid_reference("4063702761752036")
    assert luhn_valid_reference("6011923747407481")


def test_credit_cards_per_issuer(rng):
    for issuer, spec in ISSUERS.items():
        for _ in range(200):
            card = gen_credit_card(rng, issuer)
            assert len(card) == spec.length
            assert any(card.startswith(p) for p in spec.prefixes)
            assert luhn_valid_reference(card)


def test_credit_card_issuer_mix(rng):
    prefixes = {"4": 0, "5": 0, "3": 0, "6": 0}
    for _ in range(2000):
        prefixes[gen_credit_card(rng)[0]] += 1
    # uniform issuer mix: each first digit bucket near 25%
    for count in prefixes.values():
        assert 350 < count < 650


def test_unknown_issuer_raises(rng):
    with pytest.raises(ValueError, match="unknown card issuer"):
        gen_credit_card(rng, "diners")


def test_ssns_satisfy_all_rules(rng):
    for _ in range(2000):
        assert ssn_valid_reference(gen_ssn(rng))


def test_phone_format_and_reserved_exchanges(rng):
    codes = {"Oregon/OR": [503, 541], "Montana/MT": [406]}
    for _ in range(500):
        phone = gen_phone(rng, "Oregon/OR", codes)
        npa, rest = phone.split(") ")
        npa = int(npa.lstrip("("))
        nxx = int(rest.split("-")[0])
        assert npa in (503, 541)
        assert nxx not in RESERVED_NXX
        assert 200 <= nxx <= 999
    assert gen_phone(rng, "Montana/MT", codes).startswith("(406)")
    with pytest.raises(CoverageError, match="Nevada"):
        gen_phone(rng, "Nevada/NV", codes)


def test_load_area_codes(tmp_path):
    path = tmp_path / "area_codes.csv"
    path.write_text("state,npa\nOregon/OR,541\nOregon/OR,503\n# comment\nMontana/MT,406\n")
    table = load_area_codes(path)
    assert table == {"Oregon/OR": [503, 541], "Montana/MT": [406]}


@pytest.fixture
def name_tables(tmp_path):
    names = tmp_path / "names"
    names.mkdir()
    (names / "yob1980.csv").write_text("Emily,F,600\nSarah,F,400\nJames,M,900\nDavid,M,100\n")
    (names / "yob1981.csv").write_text("Emily,F,10\nJames,M,10\n")
    (tmp_path / "surnames.csv").write_text("name,count\nSmith,750\nLee,250\n")
    return NameTables(names, tmp_path / "surnames.csv")


def test_name_sampling_is_count_weighted(name_tables, rng):
    firsts = {"James": 0, "David": 0}
    lasts = {"Smith": 0, "Lee": 0}
    for _ in range(2000):
        first, last = gen_name(rng, 1980, "M", name_tables).split()
        firsts[first] += 1
        lasts[last] += 1
    assert firsts["James"] / 2000 == pytest.approx(0.9, abs=0.03)
    assert lasts["Smith"] / 2000 == pytest.approx(0.75, abs=0.04)


def test_name_coverage_error_names_year_range(name_tables, rng):
    with pytest.raises(CoverageError, match="1980..1981"):
        gen_name(rng, 1999, "F", name_tables)


@pytest.fixture
def geo(tmp_path):
    (tmp_path / "crosswalk.csv").write_text("puma,zcta\n4101,97301\n4101,97401\n0614,92101\n")
    (tmp_path / "venues.csv").write_text(
        "zcta,street,city,state,zip\n"
        "97301,100 Commerce St,Salem,OR,97301\n"
        "97301,200 Harbor Ave,Salem,OR,97301\n"
        "92101,300 Granite Rd,San Diego,CA,92101\n"
    )
    return GeoResources(tmp_path / "crosswalk.csv", tmp_path / "venues.csv")


def test_address_comes_back_verbatim_from_pool(geo, rng):
    pool = {"100 Commerce St, Salem, OR 97301", "200 Harbor Ave, Salem, OR 97301"}
    for _ in range(50):
        assert gen_address(rng, "4101", geo) in pool


def test_address_coverage_errors(geo, rng):
    with pytest.raises(CoverageError, match="missing from the crosswalk"):
        gen_address(rng, "9999", geo)
    geo.crosswalk["7777"] = ["00000"]
    with pytest.raises(CoverageError, match="no venue addresses"):
        gen_address(rng, "7777", geo)


@pytest.mark.parametrize(
    "response,expected",
    [
        ("personal email address: jane.doe84@gmail.com", "jane.doe84@gmail.com"),
        ("Sure!\nPersonal email address: <j.d@yahoo.com>\nHope that helps.", "j.d@yahoo.com"),
        ("personal email address: j.d@outlook.com.", "j.d@outlook.com"),
        ("here you go: j.d@gmail.com", None),
        ("personal email address: not-an-email", None),
    ],
)
def test_parse_email_response(response, expected):
    assert parse_email_response(response) == expected


def test_gen_email_regenerates_on_bad_domain():
    responder = ScriptedResponder(
        [
            "personal email address: jane@example.com",
            "no address today",
            "personal email address: jane.doe@gmail.com",
        ]
    )
    client = mock_client(responder)
    assert gen_email(client, "- Name: Jane Doe", max_attempts=3) == "jane.doe@gmail.com"
    # each retry carries a fresh attempt counter so caching cannot pin the failure
    assert [attempt for _, _, attempt in responder.calls] == [0, 1, 2]


def test_gen_email_exhausts_budget():
    responder = ScriptedResponder(["nope", "nope", "nope"])
    with pytest.raises(EmailSynthesisError, match="unparsable"):
        gen_email(mock_client(responder), "- Name: Jane Doe", max_attempts=3)


def test_gen_email_rejects_disallowed_domain_list():
    responder = ScriptedResponder(["personal email address: a@gmail.com"])
    with pytest.raises(EmailSynthesisError, match="disallowed domain"):
        gen_email(mock_client(responder), "- Name: A", allowed_domains=("yahoo.com",), max_attempts=1)


def test_identifier_determinism():
    a = np.random.default_rng(99)
    b = np.random.default_rng(99)
    assert [gen_ssn(a) for _ in range(5)] == [gen_ssn(b) for _ in range(5)]
    assert gen_credit_card(a) == gen_credit_card(b)
