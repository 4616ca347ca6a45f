"""Tests for the faithfulness checker: verdicts on the pinned ice-for-neck
responses, era normalization, numeric strictness, and the structural
guarantees the pipeline's output gate relies on."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acurai.faithfulness import (
    FAITHFUL,
    HALLUCINATION,
    SUPPORTED,
    UNSUPPORTED,
    check_response,
    coverage,
    is_supported,
    normalize,
    segment_response,
)

ICE_PASSAGES = [
    (
        "All it requires is that every day you lay on your tummy. Place an ice cube at "
        "the base of your skull on your neck (see the point on the neck shown in the "
        "video), and allow it to rest there for 20 minutes. Do this in the morning on "
        "an empty stomach and before you go to sleep. It has been said that this "
        "technique can provide a variety of benefits to your body, as well as boost "
        "your mood and mental health. After consistent use for a month potential "
        "health benefits include improved digestion and sleep, reduced thyroid issues "
        "and PMS symptoms, cure common colds, alleviate headaches or toothaches, and "
        "reduce overall risks associated with lung and cardiovascular diseases."
    ),
    (
        "For the hardcore: Ice bath Grab three bags of ice from a convenience store "
        "and fill your bath tub halfway full with cold water. Pour the ice in. (The "
        "first few times you take an ice bath, only immerse your lower body, from the "
        "hips down. After you get more comfortable with sitting in the ice bath, begin "
        "slowly lowering your upper torso until submerged, up to your neck if you can "
        "handle it.) Sip a cup of hot tea and read a magazine to take your mind off "
        "the bath."
    ),
    (
        "Woman Places An Ice Cube On This Spot Of Her Neck For A Month. I Had No Idea "
        "It Would Do THIS For as long as man has existed on earth he has been "
        "searching for a fountain of youth."
    ),
]

BASELINE_RESPONSE = (
    "Applying ice to the base of the neck has been suggested to provide a variety of "
    "benefits. This includes improved digestion and sleep, reduced thyroid issues and "
    "PMS symptoms, alleviation of common colds, headaches or toothaches, and reduced "
    "risks associated with lung and cardiovascular diseases. It can also potentially "
    "boost mood and mental health."
)

MIDDLEWARE_RESPONSE = (
    "**Benefits of ice for neck**\n"
    "\n"
    "Placing an ice cube at the base of your skull, on your neck, can provide a "
    "variety of benefits. The technique is simple: just let the ice cube rest there "
    "for about 20 minutes. Besides providing an overall boost to your mood and mental "
    "health, consistent use of this technique for a period of one month can lead to "
    "potential health benefits such as improved digestion and sleep. Additionally, "
    "it's been found to help reduce symptoms associated with thyroid issues and "
    "Pre-menstrual Syndrome (PMS). But the benefits don't stop there, this technique "
    "can also help to cure common colds and alleviate discomfort from headaches or "
    "toothaches. Furthermore, using this technique can contribute to a reduction in "
    "risks associated with lung and cardiovascular diseases.\n"
    "\n"
    "**Specifics**\n"
    "\n"
    "Detail 1: All it requires is that every day you lay on your tummy. Place an ice "
    "cube at the base of your skull on your neck. See the point on the neck shown in "
    "the video. Allow it to rest there for 20 minutes. Do this in the morning on an "
    "empty stomach. Do this before you go to sleep."
)


class TestPinnedVerdicts:
    def test_baseline_response_is_hallucination(self):
        report = check_response(BASELINE_RESPONSE, ICE_PASSAGES)
        assert report.verdict == HALLUCINATION

    def test_baseline_failure_is_the_neck_statement(self):
        report = check_response(BASELINE_RESPONSE, ICE_PASSAGES)
        unsupported = report.unsupported
        assert len(unsupported) == 1
        assert "base of the neck" in unsupported[0].statement
        assert unsupported[0].status == UNSUPPORTED
        assert unsupported[0].score < 1.0

    def test_middleware_response_is_faithful(self):
        report = check_response(MIDDLEWARE_RESPONSE, ICE_PASSAGES)
        assert report.verdict == FAITHFUL
        assert all(r.status == SUPPORTED for r in report.statement_results)

    def test_statement_results_carry_best_match(self):
        report = check_response(MIDDLEWARE_RESPONSE, ICE_PASSAGES)
        for result in report.statement_results:
            assert result.best_match
            assert result.score == 1.0


class TestEraNormalization:
    SOURCE = "The industrial revolution occurred between the late 1700s and the early 1900s."

    def test_century_form_supported_by_decade_form(self):
        ok, match, score = is_supported(
            "It occurred between the late 18th and early 20th century.", [self.SOURCE]
        )
        assert ok and score == 1.0 and match == self.SOURCE

    def test_century_and_decade_spellings_share_one_canonical_form(self):
        assert normalize("late 18th century") == normalize("late 1700s") == "late 1700s"

    def test_century_word_required_for_folding(self):
        # an ordinal with no century word nearby must stay an ordinal
        assert "1700s" not in normalize("the 18th item on the list")

    def test_possessive_rewrites_to_of_form(self):
        assert normalize("calcium's density") == normalize("density of calcium")

    def test_normalize_lowercases_and_lemmatizes(self):
        assert normalize("Reacts with WATER!") == "react with water"


class TestGenitivePrecision:
    def test_conflicting_genitive_pairs_are_unsupported(self):
        ok, _, _ = is_supported(
            "Apply ice to the base of the neck.",
            ["Place an ice cube at the base of your skull on your neck."],
        )
        assert not ok

    def test_matching_genitive_pairs_are_supported(self):
        ok, _, score = is_supported(
            "Place an ice cube at the base of your skull.",
            ["Place an ice cube at the base of your skull on your neck."],
        )
        assert ok and score == 1.0


class TestAcronymExpansion:
    def test_expansion_in_statement_matches_bare_acronym_in_source(self):
        ok, _, score = is_supported(
            "The technique reduces Pre-menstrual Syndrome (PMS) symptoms.",
            ["The technique reduces PMS symptoms."],
        )
        assert ok and score == 1.0

    def test_acronym_itself_must_appear_in_source(self):
        ok, _, _ = is_supported(
            "The technique reduces Pre-menstrual Syndrome (ABC) symptoms.",
            ["The technique reduces PMS symptoms."],
        )
        assert not ok


class TestNumericStrictness:
    def test_verbatim_number_supported(self):
        ok, _, _ = is_supported("Calcium melts at 840°C.", ["Calcium melts at 840°C."])
        assert ok

    def test_mutated_number_unsupported(self):
        ok, _, _ = is_supported("Calcium melts at 841°C.", ["Calcium melts at 840°C."])
        assert not ok

    def test_number_from_other_source_does_not_bleed(self):
        # each source must independently cover the statement
        ok, _, _ = is_supported(
            "Calcium melts at 840°C.",
            ["Calcium melts quickly.", "The oven reached 840°C."],
        )
        assert not ok


class TestSegmentation:
    def test_title_specifics_and_labels_skipped(self):
        statements = segment_response(MIDDLEWARE_RESPONSE)
        assert all("**" not in s for s in statements)
        assert all(not s.startswith("Detail") for s in statements)
        assert any("skull" in s for s in statements)

    def test_bullets_stripped(self):
        statements = segment_response("- Calcium melts at 840°C.\n• Calcium is a metal.")
        assert statements == ["Calcium melts at 840°C.", "Calcium is a metal."]

    def test_empty_response_segments_to_nothing(self):
        assert segment_response("") == []


class TestCheckResponseContract:
    def test_empty_response_is_vacuously_faithful(self):
        report = check_response("", ICE_PASSAGES)
        assert report.verdict == FAITHFUL
        assert report.empty

    def test_empty_sources_rejected(self):
        with pytest.raises(ValueError):
            is_supported("Calcium is a metal.", [])

    def test_normalizations_are_reported(self):
        report = check_response(
            "It occurred between the late 18th and early 20th century.",
            [TestEraNormalization.SOURCE],
        )
        assert "century-decade" in report.normalizations_applied

    def test_report_serializes(self):
        report = check_response(BASELINE_RESPONSE, ICE_PASSAGES)
        payload = report.to_json()
        assert payload["verdict"] == HALLUCINATION
        assert len(payload["statements"]) == len(report.statement_results)

    def test_verdict_is_deterministic(self):
        first = check_response(BASELINE_RESPONSE, ICE_PASSAGES)
        second = check_response(BASELINE_RESPONSE, ICE_PASSAGES)
        assert first.to_json() == second.to_json()


_SOURCE_SENTENCES = st.sampled_from(
    [
        "Place an ice cube at the base of your skull on your neck.",
        "Calcium melts at 840°C.",
        "Magnesium is a vital ingredient in fireworks.",
        "The minimum wage in the United States is a network of federal, state, and local laws.",
        "The industrial revolution changed society.",
        "Food on the outer edge of the dish cooks faster.",
    ]
)


class TestStructuralGuarantees:
    @settings(max_examples=60, deadline=None)
    @given(_SOURCE_SENTENCES)
    def test_verbatim_sentences_always_supported(self, sentence):
        ok, match, score = is_supported(sentence, [sentence])
        assert ok and score == 1.0 and match == sentence

    @settings(max_examples=60, deadline=None)
    @given(_SOURCE_SENTENCES, st.sampled_from(["Unrelated filler text.", "Another passage."]))
    def test_adding_sources_never_breaks_support(self, sentence, extra):
        assert is_supported(sentence, [sentence])[0]
        assert is_supported(sentence, [extra, sentence])[0]
        assert is_supported(sentence, [sentence, extra])[0]
