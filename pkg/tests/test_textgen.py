"""Scenario text generation: prompts, example bank, transcript validation."""
from __future__ import annotations

import numpy as np
import pytest

from conftest import ScriptedResponder, mock_client
from reidbench.attributes import DIRECT_ATTRIBUTES, INDIRECT_ATTRIBUTES
from reidbench.textgen import (
    SCENARIOS,
    BenchmarkEntry,
    ExampleBankError,
    GenerationSpec,
    TranscriptFormatError,
    build_prompt,
    format_long_date,
    generate_entry,
    load_example_bank,
    render_profile,
    select_examples,
    validate_transcript,
)

PROFILE = {
    "state": "Oregon/OR",
    "sex": "Female",
    "date_of_birth": "1984-11-26",
    "education": "Bachelor's degree",
    "occupation": "Registered nurse",
}


def make_spec(scenario="medical", level=1, language="en", targets=tuple(PROFILE)):
    return GenerationSpec(scenario=scenario, level=level, language=language, target_attrs=tuple(targets))


class TestExampleBank:
    def test_packaged_bank_covers_all_attribute_levels(self):
        bank = load_example_bank()
        for attribute in INDIRECT_ATTRIBUTES:
            for level in (1, 2, 3):
                assert len(bank[attribute][level]) >= 2, (attribute, level)
        for attribute in DIRECT_ATTRIBUTES:
            for level in (1, 2):
                assert len(bank[attribute][level]) >= 2, (attribute, level)

    def test_select_examples_two_or_three_in_bank_order(self):
        bank = {"state": {1: ["s0", "s1", "s2", "s3", "s4"]}}
        rng = np.random.default_rng(8)
        for _ in range(30):
            chosen = select_examples(bank, "state", 1, rng)
            assert 2 <= len(chosen) <= 3
            order = [int(s[1]) for s in chosen]
            assert order == sorted(order)

    def test_select_examples_needs_two(self):
        with pytest.raises(ExampleBankError, match="state, level 3"):
            select_examples({"state": {3: ["only one"]}}, "state", 3, np.random.default_rng(0))


class TestProfileRendering:
    def test_canonical_order_and_long_date(self):
        rendered = render_profile(PROFILE)
        assert rendered.splitlines() == [
            "- State of residence: Oregon/OR",
            "- Sex: Female",
            "- Date of birth: 26 November 1984",
            "- Educational attainment: Bachelor's degree",
            "- Occupation: Registered nurse",
        ]

    def test_format_long_date(self):
        assert format_long_date("2001-03-07") == "7 March 2001"


class TestBuildPrompt:
    def test_prompt_carries_all_sections(self):
        rng = np.random.default_rng(3)
        prompt = build_prompt(PROFILE, make_spec(level=1), load_example_bank(), rng)
        assert SCENARIOS["medical"].text.strip().splitlines()[0] in prompt
        assert "- State of residence: Oregon/OR" in prompt
        assert "Level 1" in prompt
        assert "between 750 and 1000" in prompt
        assert "state of residence, sex, date of birth" in prompt
        assert "Patient:" in prompt  # formatting block names the speakers

    def test_level_three_word_budget(self):
        rng = np.random.default_rng(3)
        spec = make_spec(level=3, targets=tuple(a for a in PROFILE))
        prompt = build_prompt(PROFILE, spec, load_example_bank(), rng)
        assert "between 1500 and 2000" in prompt
        assert "Level 3" in prompt

    def test_language_footer(self):
        rng = np.random.default_rng(3)
        bank = load_example_bank()
        es = build_prompt(PROFILE, make_spec(language="es"), bank, np.random.default_rng(3))
        en = build_prompt(PROFILE, make_spec(language="en"), bank, rng)
        assert "Spanish" in es
        assert "Spanish" not in en


class TestGenerationSpec:
    def test_level_three_rejects_direct_targets(self):
        with pytest.raises(ValueError, match="direct identifiers"):
            make_spec(level=3, targets=("state", "ssn"))

    def test_unknown_scenario_level_language(self):
        with pytest.raises(ValueError, match="scenario"):
            make_spec(scenario="courtroom")
        with pytest.raises(ValueError, match="level"):
            make_spec(level=4)
        with pytest.raises(ValueError, match="language"):
            make_spec(language="fr")
        with pytest.raises(ValueError, match="empty"):
            make_spec(targets=())


class TestValidateTranscript:
    def test_accepts_canned_transcripts_for_every_cell(self, demo_support):
        for scenario in ("medical", "chatbot", "meeting"):
            for level in (1, 2, 3):
                values = dict(PROFILE)
                text = demo_support.build_transcript(scenario, level, values)
                validate_transcript(text, scenario)

    def make_valid(self, demo_support):
        return demo_support.build_transcript("medical", 1, dict(PROFILE))

    def test_rejects_missing_end_delimiter(self, demo_support):
        text = self.make_valid(demo_support).rsplit("[END OF TRANSCRIPT]", 1)[0]
        with pytest.raises(TranscriptFormatError, match="delimiters"):
            validate_transcript(text, "medical")

    def test_rejects_prose_outside_delimiters(self, demo_support):
        text = "Sure, here is the transcript:\n" + self.make_valid(demo_support)
        with pytest.raises(TranscriptFormatError, match="start and end"):
            validate_transcript(text, "medical")

    def test_rejects_duplicate_delimiters(self, demo_support):
        text = self.make_valid(demo_support) + "\n[END OF TRANSCRIPT]"
        with pytest.raises(TranscriptFormatError, match="delimiters"):
            validate_transcript(text, "medical")

    def test_rejects_unprefixed_line(self, demo_support):
        text = self.make_valid(demo_support).replace("Doctor:", "Dr.", 1)
        with pytest.raises(TranscriptFormatError, match="speaker prefix"):
            validate_transcript(text, "medical")

    def test_rejects_broken_alternation(self, demo_support):
        text = self.make_valid(demo_support)
        lines = text.splitlines()
        doctor_lines = [l for l in lines if l.startswith("Doctor:")]
        idx = lines.index(doctor_lines[0])
        lines.insert(idx + 1, "")
        lines.insert(idx + 2, "Doctor: And another thing.")
        with pytest.raises(TranscriptFormatError, match="alternation"):
            validate_transcript("\n".join(lines), "medical")

    def test_rejects_single_turn(self):
        text = "[START OF TRANSCRIPT]\nPatient: Hello?\n[END OF TRANSCRIPT]"
        with pytest.raises(TranscriptFormatError, match="two dialogue turns"):
            validate_transcript(text, "medical")

    def test_wrong_scenario_speakers_rejected(self, demo_support):
        text = self.make_valid(demo_support)  # Patient/Doctor speakers
        with pytest.raises(TranscriptFormatError, match="speaker prefix"):
            validate_transcript(text, "meeting")


class TestGenerateEntry:
    def good_text(self, demo_support):
        return demo_support.build_transcript("medical", 1, dict(PROFILE))

    def test_retry_then_success(self, demo_support):
        responder = ScriptedResponder(["no delimiters here", self.good_text(demo_support)])
        entry = generate_entry(
            mock_client(responder),
            entry_id="e0001",
            profile_values=PROFILE,
            ground_truth=PROFILE,
            spec=make_spec(),
            bank=load_example_bank(),
            rng=np.random.default_rng(0),
            profile_ref="r000001",
            seed=7,
            max_attempts=3,
        )
        assert entry.text == self.good_text(demo_support).strip()
        assert [a for _, _, a in responder.calls] == [0, 1]
        assert entry.target_attrs == tuple(PROFILE)

    def test_exhausted_attempts_raise(self):
        responder = ScriptedResponder(["bad", "bad"])
        with pytest.raises(TranscriptFormatError, match="2 attempts failed"):
            generate_entry(
                mock_client(responder),
                entry_id="e0002",
                profile_values=PROFILE,
                ground_truth=PROFILE,
                spec=make_spec(),
                bank=load_example_bank(),
                rng=np.random.default_rng(0),
                profile_ref="r000001",
                seed=7,
                max_attempts=2,
            )

    def test_entry_ground_truth_must_match_targets(self):
        with pytest.raises(ValueError, match="ground_truth"):
            BenchmarkEntry(
                entry_id="e",
                scenario="medical",
                level=1,
                language="en",
                target_attrs=("state",),
                ground_truth={"sex": "Female"},
                text="[START OF TRANSCRIPT]\nPatient: a\n\nDoctor: b\n[END OF TRANSCRIPT]",
                profile_ref="r0",
                seed=0,
            )
