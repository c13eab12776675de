#!/usr/bin/env python3
"""Build the offline demo bundle.

Writes every fixture the demo run needs (population microdata, codebook,
name/surname tables, area codes, geographic crosswalk and venue pool,
run config), then records a replay bundle by executing the full pipeline
against canned local responders. The responders derive every response
from the prompt alone: the generator writes a scenario transcript from
the profile block it is given, and the attacker only reports values it
can actually find in the text it is shown. Finishes with a replay
verification run and prints the headline numbers.

Population rows are written in clone blocks of four identical rows, so
every equivalence class holds at least four people and a fully masked
text can never score above 1/4 risk.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from reidbench.attributes import DISPLAY_NAMES
from reidbench.client import BundleRecorder, ClientConfig, LLMClient
from reidbench.config import load_run_config
from reidbench.pipeline import PipelineRun
from reidbench.textgen import SCENARIOS, validate_transcript

REPO = Path(__file__).resolve().parents[1]
DEMO = REPO / "demo"

CLONES = 4
SEED = 20250822

# -- fixture data ---------------------------------------------------------

STATES = [
    ("41", "Oregon/OR", "4101", ["97301", "97401"], [503, 541, 971]),
    ("06", "California/CA", "0614", ["92101", "90012"], [213, 310, 415, 619, 916]),
    ("30", "Montana/MT", "3001", ["59101"], [406]),
    ("53", "Washington/WA", "5302", ["98101", "98501"], [206, 253, 360, 425]),
    ("08", "Colorado/CO", "0803", ["80202"], [303, 719, 970]),
    ("32", "Nevada/NV", "3201", ["89101"], [702, 775]),
]

SEXES = [("1", "Male"), ("2", "Female")]
RACES = [
    ("01", "White alone"),
    ("02", "Black or African American alone"),
    ("38", "Chinese alone"),
    ("44", "Asian Indian alone"),
    ("57", "Some Other Race alone"),
    ("59", "Two or More Races"),
]
MARITALS = [
    ("1", "Married"),
    ("2", "Widowed"),
    ("3", "Divorced"),
    ("4", "Separated"),
    ("5", "Never married or under 15 years old"),
]
EDUCATIONS = [
    ("16", "Regular high school diploma"),
    ("18", "Some college, but less than 1 year"),
    ("20", "Associate's degree"),
    ("21", "Bachelor's degree"),
    ("22", "Master's degree"),
    ("24", "Doctorate degree"),
]
EMPLOYMENTS = [
    ("1", "Civilian employed, at work"),
    ("2", "Civilian employed, with a job but not at work"),
    ("3", "Unemployed"),
    ("4", "Armed forces, at work"),
    ("6", "Not in labor force"),
]
OCCUPATIONS = [
    ("3255", "Registered nurses"),
    ("1021", "Software developers"),
    ("2310", "Elementary and middle school teachers"),
    ("4760", "Retail salespersons"),
    ("4060", "Gaming services workers"),
    ("4000", "Chefs and head cooks"),
    ("6230", "Carpenters"),
    ("0800", "Accountants and auditors"),
]
CITIZENSHIPS = [
    ("1", "Born in the US"),
    ("2", "Born in Puerto Rico, Guam, the US Virgin Islands, or Northern Marianas"),
    ("3", "Born abroad of American parent(s)"),
    ("4", "US citizen by naturalization"),
    ("5", "Not a citizen of the US"),
]

# all names below also appear in the packaged masking dictionaries
FIRST_M = ["James", "Michael", "David", "Daniel", "Matthew", "Christopher", "Andrew", "Joshua"]
FIRST_F = ["Emily", "Sarah", "Jessica", "Ashley", "Amanda", "Jennifer", "Elizabeth", "Michelle"]
SURNAMES = [
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller",
    "Davis", "Martinez", "Wilson", "Anderson", "Taylor", "Moore", "Jackson",
    "Martin", "Lee", "Walker", "Young", "King", "Wright",
]

VENUE_STREETS = [
    "Commerce St", "Harbor Ave", "Granite Rd", "Cascade Blvd", "Juniper Way", "Meridian Dr",
]
VENUE_CITIES = {
    "97301": ("Salem", "OR"),
    "97401": ("Eugene", "OR"),
    "92101": ("San Diego", "CA"),
    "90012": ("Los Angeles", "CA"),
    "59101": ("Billings", "MT"),
    "98101": ("Seattle", "WA"),
    "98501": ("Olympia", "WA"),
    "80202": ("Denver", "CO"),
    "89101": ("Las Vegas", "NV"),
}


def write_csv(path: Path, header: list[str] | None, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header is not None:
            writer.writerow(header)
        writer.writerows(rows)


def write_fixtures() -> None:
    base_rows = []
    for i in range(24):
        st_code, _, puma, _, _ = STATES[i % 6]
        base_rows.append(
            [
                st_code,
                SEXES[i % 2][0],
                RACES[i % 6][0],
                MARITALS[i % 5][0],
                EDUCATIONS[(i // 2) % 6][0],
                EMPLOYMENTS[(i // 3) % 5][0],
                OCCUPATIONS[i % 8][0],
                CITIZENSHIPS[(i // 4) % 5][0],
                25 + i,
                puma,
            ]
        )
    rows = [row for row in base_rows for _ in range(CLONES)]
    write_csv(
        DEMO / "population.csv",
        ["ST", "SEX", "RAC2P", "MAR", "SCHL", "ESR", "OCCP", "CIT", "AGE", "PUMA"],
        rows,
    )

    codebook = []
    for code, label, _, _, _ in STATES:
        codebook.append(["ST", code, label])
    for column, pairs in [
        ("SEX", SEXES),
        ("RAC2P", RACES),
        ("MAR", MARITALS),
        ("SCHL", EDUCATIONS),
        ("ESR", EMPLOYMENTS),
        ("OCCP", OCCUPATIONS),
        ("CIT", CITIZENSHIPS),
    ]:
        for code, label in pairs:
            codebook.append([column, code, label])
    write_csv(DEMO / "codebook.csv", ["column", "code", "label"], codebook)

    names_dir = DEMO / "names"
    if names_dir.exists():
        shutil.rmtree(names_dir)
    for year in range(1977, 2001):
        rows = []
        for j, name in enumerate(FIRST_F):
            rows.append([name, "F", 9000 - 250 * j + 13 * (year % 7)])
        for j, name in enumerate(FIRST_M):
            rows.append([name, "M", 9500 - 260 * j + 17 * (year % 5)])
        # SSA-style files carry no header row
        write_csv(names_dir / f"yob{year}.csv", None, rows)
    write_csv(
        DEMO / "surnames.csv",
        ["name", "count"],
        [[name, 24000 - 700 * j] for j, name in enumerate(SURNAMES)],
    )

    write_csv(
        DEMO / "area_codes.csv",
        ["state", "npa"],
        [[label, npa] for _, label, _, _, npas in STATES for npa in npas],
    )
    write_csv(
        DEMO / "crosswalk.csv",
        ["puma", "zcta"],
        [[puma, zcta] for _, _, puma, zctas, _ in STATES for zcta in zctas],
    )
    venue_rows = []
    for zcta, (city, st) in VENUE_CITIES.items():
        for k in range(3):
            street = VENUE_STREETS[(k + len(city)) % len(VENUE_STREETS)]
            number = 400 + 37 * k + int(zcta) % 97
            venue_rows.append([zcta, f"{number} {street}", city, st, zcta])
    write_csv(DEMO / "venues.csv", ["zcta", "street", "city", "state", "zip"], venue_rows)

    (DEMO / "config.yaml").write_text(
        """\
# Offline demo: 9 entries (3 scenarios x 3 difficulty levels), English,
# identity baseline vs pattern masking, canned responses via --replay.
seed: 20250822
output_dir: runs
workers: 1
population:
  csv: population.csv
  codebook: codebook.csv
  schema:
    reference_year: 2025
resources:
  names_dir: names
  surnames: surnames.csv
  area_codes: area_codes.csv
  crosswalk: crosswalk.csv
  venues: venues.csv
sampling:
  n_indirect: 5
  subset_policy: per_entry
matrix:
  scenarios: [medical, chatbot, meeting]
  levels: [1, 2, 3]
  languages: [en]
  entries_per_cell: 1
  n_direct: 2
risk:
  theta: 0.5
clients:
  default:
    model: canned-demo
    temperature: 0.0
tools:
  - id: identity
    type: identity
  - id: pattern
    type: pattern
""",
        encoding="utf-8",
    )


# -- canned generation ----------------------------------------------------

_ID_BY_DISPLAY = {label.lower(): attr for attr, label in DISPLAY_NAMES.items()}
_PROFILE_LINE = re.compile(r"^- ([A-Za-z' ]+): (.+)$", re.MULTILINE)

SENTENCES_L1 = {
    "state": "I live in {v}, and I have for years.",
    "sex": "For the record, I am {v}.",
    "date_of_birth": "My date of birth is {v}.",
    "race": "On official forms I put my race down as {v}.",
    "marital_status": "My marital status is {v}.",
    "education": "My highest schooling is listed as {v}.",
    "employment": "My employment status is {v}.",
    "occupation": "My occupation is listed as {v}.",
    "citizenship": "My citizenship status is {v}.",
    "name": "My name is {v}.",
    "ssn": "My social security number is {v}.",
    "credit_card": "The card number I use is {v}.",
    "phone": "My phone number is {v}.",
    "address": "I was last over at {v}.",
    "email": "My email address is {v}.",
}
SENTENCES_L2 = {
    "state": "After all the moving around, the plates on my truck still say {v}.",
    "sex": "The intake form shows {v} under sex, same as every year.",
    "date_of_birth": "The file they keep lists the birth date as {v}.",
    "race": "When the survey came around I told them to write {v}.",
    "marital_status": "Officially the paperwork reads {v}, whatever the neighbors assume.",
    "education": "The framed paper on the wall says {v}, and it took long enough.",
    "employment": "Payroll still files me under {v}, believe it or not.",
    "occupation": "The badge by the door reads {v}.",
    "citizenship": "The immigration folder closed years ago with {v} stamped on it.",
    "name": "The name on the letters still reads {v}, spelled right for once.",
    "ssn": "I read the card number out again, {v}, before they believed me.",
    "credit_card": "The deposit went through on the long number {v}.",
    "phone": "The callback number I left was {v}.",
    "address": "The courier dropped everything at {v} again.",
    "email": "Receipts keep landing at {v} like always.",
}
SENTENCES_L3 = {
    "state": "The winters drag on out here, and the mountain passes close earlier every year.",
    "sex": "The nurse got my pronouns right without me having to say a word.",
    "date_of_birth": "Another birthday slipped by recently; the cake held more candles than I cared to count.",
    "race": "Most of my grandparents' stories start an ocean away from this town.",
    "marital_status": "The house has been a lot quieter these past couple of years.",
    "education": "I stopped collecting diplomas once the job offers started arriving.",
    "employment": "My alarm still goes off at six sharp every weekday, same as always.",
    "occupation": "By nine in the morning my hands are usually full of other people's problems.",
    "citizenship": "My passport and my birth certificate tell slightly different stories.",
}

QUESTIONS = [
    "Noted. What else should I have on file?",
    "Understood. Could you go on?",
    "Thanks, that is clear. Anything more for the form?",
    "Got it. Let's keep going.",
    "Alright, I wrote that down. Next item?",
    "Okay. And after that?",
    "That matches what I have here. Please continue.",
    "Good. What should I record next?",
]

OPENINGS = {
    "medical": (
        "Good morning, thanks for coming in. Before we begin, could you walk me through your details for the chart?",
        "Of course. Happy to go through whatever the chart needs.",
    ),
    "chatbot": (
        "Hello! I can help finish your account profile. Could you share a few details about yourself?",
        "Sure, ask away. I'd rather get the profile right the first time.",
    ),
    "meeting": (
        "Thanks for joining the call. We keep notes for the file, so please introduce yourself as we go.",
        "Will do. Let's get through the checklist.",
    ),
}
CLOSINGS = {
    "medical": (
        "That covers everything I needed for today. We'll follow up after the results come back.",
        "Sounds good. I'll keep an eye on the mail.",
    ),
    "chatbot": (
        "Perfect, your profile is complete. Is there anything else I can help with?",
        "No, that's all for now. Thanks for the help.",
    ),
    "meeting": (
        "That closes out the agenda. Thanks for walking me through it.",
        "Glad it's sorted. Reach out if anything else comes up.",
    ),
}


def parse_profile(prompt: str) -> dict[str, str]:
    values = {}
    for label, value in _PROFILE_LINE.findall(prompt):
        attr = _ID_BY_DISPLAY.get(label.strip().lower())
        if attr is not None and attr not in values:
            values[attr] = value.strip()
    return values


def detect_scenario(prompt: str) -> str:
    if "Patient" in prompt:
        return "medical"
    if "Chatbot" in prompt:
        return "chatbot"
    return "meeting"


def detect_level(prompt: str) -> int:
    m = re.search(r"\bLevel (\d)\b", prompt)
    if not m:
        raise ValueError("generation prompt names no difficulty level")
    return int(m.group(1))


def build_transcript(scenario: str, level: int, profile: dict[str, str]) -> str:
    target, other = SCENARIOS[scenario].speakers
    sentences = {1: SENTENCES_L1, 2: SENTENCES_L2, 3: SENTENCES_L3}[level]
    open_other, open_target = OPENINGS[scenario]
    close_other, close_target = CLOSINGS[scenario]
    lines = [f"{other}: {open_other}", f"{target}: {open_target}"]
    for i, (attr, value) in enumerate(profile.items()):
        template = sentences.get(attr)
        if template is None:
            continue
        lines.append(f"{other}: {QUESTIONS[i % len(QUESTIONS)]}")
        lines.append(f"{target}: {template.format(v=value)}")
    lines.append(f"{other}: {close_other}")
    lines.append(f"{target}: {close_target}")
    body = "\n\n".join(lines)
    return f"[START OF TRANSCRIPT]\n\n{body}\n\n[END OF TRANSCRIPT]"


def generation_responder(prompt: str, stage: str = "", attempt: int = 0) -> str:
    scenario = detect_scenario(prompt)
    level = detect_level(prompt)
    profile = parse_profile(prompt)
    if not profile:
        raise ValueError("generation prompt carries no profile block")
    text = build_transcript(scenario, level, profile)
    validate_transcript(text, scenario)
    return text


# -- canned synthesis (email) ---------------------------------------------


def email_responder(prompt: str, stage: str = "", attempt: int = 0) -> str:
    profile = parse_profile(prompt)
    name = profile.get("name")
    if name:
        local = ".".join(part.lower() for part in name.split())
    else:
        local = "user" + hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:6]
    dob = profile.get("date_of_birth", "")
    year = re.search(r"(\d{4})", dob)
    if year:
        local += year.group(1)[2:]
    return f"personal email address: {local}@gmail.com"


# -- canned attacker ------------------------------------------------------

_TEXT_BLOCK = re.compile(r"\[START OF TEXT\]\n(.*)\n\[END OF TEXT\]", re.DOTALL)
_ATTR_BLOCK = re.compile(r"TARGET ATTRIBUTES:\n(.*?)\n\nRespond with", re.DOTALL)
_ATTR_LINE = re.compile(r"^- (.+?)(?: \((a full date[^)]*|allowed values: .*)\))?$")

_MONTHS = "January|February|March|April|May|June|July|August|September|October|November|December"
_DIRECT_PATTERNS = {
    "name": re.compile(r"name (?:is|on the letters still reads) ([A-Z][a-z]+ [A-Z][a-z]+)"),
    "social security number": re.compile(r"\b\d{3}-\d{2}-\d{4}\b"),
    "credit card number": re.compile(r"\b\d{15,16}\b"),
    "phone number": re.compile(r"\(\d{3}\) \d{3}-\d{4}"),
    "address": re.compile(r"\b\d{1,5} [A-Za-z][A-Za-z. ]*, [A-Za-z ]+, [A-Z]{2} \d{5}\b"),
    "email address": re.compile(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+\.[A-Za-z]{2,}\b"),
}
_DATE_PATTERN = re.compile(rf"\b\d{{1,2}} (?:{_MONTHS}) \d{{4}}\b")


def _find_allowed(text: str, allowed: list[str]) -> str | None:
    hits = [
        value
        for value in allowed
        if re.search(rf"\b{re.escape(value)}\b", text, re.IGNORECASE)
    ]
    return max(hits, key=len) if hits else None


def attack_responder(prompt: str, stage: str = "", attempt: int = 0) -> str:
    text_m = _TEXT_BLOCK.search(prompt)
    attrs_m = _ATTR_BLOCK.search(prompt)
    if not text_m or not attrs_m:
        raise ValueError("attack prompt is missing its text or attribute block")
    text = text_m.group(1)
    answers: dict[str, dict] = {}
    for line in attrs_m.group(1).splitlines():
        m = _ATTR_LINE.match(line.strip())
        if not m:
            continue
        label, qualifier = m.group(1), m.group(2) or ""
        guess, certainty = "", 1
        inference = "No usable cue in the text."
        if qualifier.startswith("allowed values: "):
            allowed = qualifier[len("allowed values: "):].split("; ")
            found = _find_allowed(text, allowed)
            if found is not None:
                guess, certainty = found, 5
                inference = "Found an explicit mention of a listed value."
            else:
                guess, certainty = sorted(allowed)[0], 1
                inference = "No listed value appears; defaulting to the first option."
        elif qualifier.startswith("a full date"):
            found = _DATE_PATTERN.search(text)
            if found:
                guess, certainty = found.group(0), 5
                inference = "Found an explicit full date."
        else:
            pattern = _DIRECT_PATTERNS.get(label.lower())
            found = pattern.search(text) if pattern is not None else None
            if found:
                guess, certainty = found.group(found.re.groups), 5
                inference = "Found a value in the expected surface format."
        answers[label] = {"inference": inference, "guess": guess, "certainty": certainty}
    return json.dumps(answers, ensure_ascii=False)


# -- record and verify ----------------------------------------------------


def make_recording_clients() -> tuple[dict[str, BundleRecorder], dict[str, dict]]:
    shared: dict[str, dict] = {}
    clients = {}
    for role, responder in [
        ("synth", email_responder),
        ("generate", generation_responder),
        ("attack", attack_responder),
    ]:
        inner = LLMClient(ClientConfig(backend="mock", model="canned-demo"), responder=responder)
        clients[role] = BundleRecorder(inner, records=shared)
    return clients, shared


def read_rsucc_by_level(report_dir: Path) -> dict[tuple[str, int], float]:
    table = {}
    with open(report_dir / "rsucc_by_level.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            table[(row["tool_id"], int(row["level"]))] = float(row["rsucc"])
    return table


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--skip-verify", action="store_true", help="skip the replay verification run")
    args = parser.parse_args()

    DEMO.mkdir(exist_ok=True)
    write_fixtures()
    config = load_run_config(DEMO / "config.yaml")

    bundle_path = DEMO / "replay_bundle.jsonl"
    with tempfile.TemporaryDirectory() as tmp:
        clients, _ = make_recording_clients()
        run = PipelineRun(dataclasses.replace(config, output_dir=Path(tmp)), clients=clients)
        run.run()
        clients["generate"].save(bundle_path)
        recorded = read_rsucc_by_level(Path(tmp) / "reports")
    print(f"recorded {sum(1 for _ in open(bundle_path))} responses -> {bundle_path}")

    if not args.skip_verify:
        with tempfile.TemporaryDirectory() as tmp:
            replay = PipelineRun(
                dataclasses.replace(config, output_dir=Path(tmp), replay_bundle=bundle_path)
            )
            replay.run()
            replayed = read_rsucc_by_level(Path(tmp) / "reports")
        if replayed != recorded:
            print("error: replay run disagrees with the recording run", file=sys.stderr)
            return 1
        if not (replayed[("none", 1)] > replayed[("pattern", 1)]):
            print("error: masking shows no risk reduction at level 1", file=sys.stderr)
            return 1
        print("replay verified; R_succ by (tool, level):")
        for (tool, level), value in sorted(replayed.items()):
            print(f"  {tool:>8} L{level}: {value:6.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
