"""Tests for fully-formatted fact extraction: the statement validator, the
deterministic rewriter, and fact-set assembly replayed from the bundled
cassette."""

import json
from pathlib import Path

import pytest

from acurai.facts import (
    FFFConfig,
    build_fact_sets,
    load_prompts,
    validate_statement,
)
from acurai.llm import CallableClient, ReplayClient, default_cassette_path
from acurai.nlp import extract_noun_phrases
from acurai.query_split import AtomicQuery, split_query

SAMPLES = Path(__file__).resolve().parents[1] / "src" / "acurai" / "resources" / "samples"

CHEMICAL_SECTION = (
    "The chemical properties of calcium react with oxygen.",
    "The chemical properties of calcium react with water.",
)

CALCIUM_SECTION = (
    "Calcium is a silver-grey metal.",
    "Calcium melts at 840°C.",
    "Calcium boils at 1484°C to produce monatomic gas.",
    "Calcium's density is 1540 kg/m^3.",
    "Calcium is a conductor of electricity.",
    "Calcium is diamagnetic.",
    "Calcium tarnishes rapidly in air to produce a powdery, flaky oxide coating.",
    "Calcium reacts steadily with water.",
    "Calcium gives off bubbles of hydrogen.",
    "Calcium produces a solution/slurry of alkaline, sparingly soluble calcium hydroxide.",
    "Calcium is flammable at high temperatures with oxygen.",
    "Calcium is flammable at high temperatures with air.",
    "Calcium can also burn in nitrogen to form calcium nitride.",
    "Calcium can also burn in carbon dioxide to form calcium carbonate.",
    "Nearly all Calcium's compounds are in oxidation state +2.",
    "The water chemistry of calcium is dominated by the hydrated Ca(2+) ion.",
)

CALCIUM_SOURCE_GROUPS = (
    ("Calcium is a silver-grey metal.",),
    ("Melts at 840°C.", "Boils at 1484°C to produce monatomic gas."),
    ("Calcium's density is 1540 kg/m^3.",),
    ("Calcium is a conductor of electricity.",),
    ("Calcium is diamagnetic.",),
    ("Tarnishes rapidly in air to produce a powdery, flaky oxide coating.",),
    (
        "Reacts steadily with water, giving off bubbles of hydrogen and a "
        "solution/slurry or alkaline, sparingly soluble calcium hydroxide.",
    ),
    (
        "Calcium is flammable at high temperatures with oxygen.",
        "Calcium is flammable at high temperatures with air.",
    ),
    ("An also burn in nitrogen to form calcium nitride or carbon dioxide to form calcium carbonate.",),
    (
        "Nearly all compounds are in oxidation state +2.",
        "The water chemistry of calcium is dominated by the hydrated Ca(2+) ion.",
    ),
)

MAGNESIUM_SECTION = (
    "Magnesium is one of the most important elements.",
    "Magnesium is present in many compounds as well as alloys.",
    "Magnesium is widely used as a chemical reagent.",
    "Magnesium is widely used as a desulfurization agent.",
    "Magnesium is a vital ingredient in fireworks.",
    "Magnesium finds multiple applications.",
    "Magnesium is present in many other compounds.",
    "Magnesium carbonate is also known as magnesite.",
    "Magnesium sulfate is also known as epsomite.",
)


def _entity_query(text: str) -> AtomicQuery:
    nps = extract_noun_phrases(text)
    return AtomicQuery(text=text, focal_nps=(nps[-1],), parent_query=text)


@pytest.fixture(scope="module")
def flagship_packets():
    sample = json.loads((SAMPLES / "flagship.json").read_text("utf-8"))
    split = split_query(sample["query"])
    client = ReplayClient(default_cassette_path())
    packets = build_fact_sets(sample["passages"], list(split.queries), llm=client)
    return {q.text: packets[q] for q in split.queries}


class TestValidateStatement:
    def test_simple_subject_verb_statement_passes(self):
        assert validate_statement("Calcium is a silver-grey metal.", "calcium").valid

    def test_disallowed_pronoun_rejected(self):
        result = validate_statement("It is widely used as a chemical reagent.", "magnesium")
        assert not result.valid
        assert any(v.startswith("(a)") for v in result.violations)

    def test_second_person_pronouns_allowed(self):
        assert validate_statement("You lay on your tummy every day.").valid

    def test_imperative_has_no_subject(self):
        result = validate_statement("Place the chicken on a microwave-safe plate.")
        assert not result.valid
        assert any(v.startswith("(b)") for v in result.violations)

    def test_subject_must_mention_entity(self):
        result = validate_statement("Magnesium is a vital ingredient in fireworks.", "calcium")
        assert not result.valid
        assert any("calcium" in v for v in result.violations)

    def test_two_independent_clauses_rejected(self):
        result = validate_statement(
            "Calcium is a metal, and calcium is a conductor.", "calcium"
        )
        assert result.violations == ("(c) 2 independent finite clauses (need exactly 1)",)

    def test_length_cap_enforced(self):
        long = "Calcium reacts with " + " and ".join(["oxygen"] * 30) + "."
        result = validate_statement(long, "calcium", config=FFFConfig(max_statement_tokens=10))
        assert any(v.startswith("(d)") for v in result.violations)

    def test_internal_collision_rejected(self):
        result = validate_statement("Calcium is heavier than magnesium.", "calcium")
        assert not result.valid
        assert any(v.startswith("(e)") for v in result.violations)

    def test_violations_reported_exhaustively(self):
        result = validate_statement("It melts and it boils.", "calcium")
        assert len(result.violations) >= 2


class TestPrompts:
    def test_prompt_resource_has_all_templates(self):
        prompts = load_prompts()
        assert set(prompts) >= {"fff_assist", "answer", "retry"}
        assert "{entity}" in prompts["fff_assist"]["user"]
        assert "{sentence}" in prompts["fff_assist"]["user"]
        assert "{query}" in prompts["answer"]["user"]
        assert "{violations}" in prompts["retry"]["user"]


class TestFlagshipFactSets:
    def test_chemical_calcium_sections(self, flagship_packets):
        fact_set = flagship_packets["What are the chemical properties of calcium?"].fact_set
        assert len(fact_set.sections) == 2
        assert tuple(s.text for s in fact_set.sections[0].statements) == CHEMICAL_SECTION
        assert tuple(s.text for s in fact_set.sections[1].statements) == CALCIUM_SECTION

    def test_physical_packet_equals_chemical_packet(self, flagship_packets):
        chemical = flagship_packets["What are the chemical properties of calcium?"].fact_set
        physical = flagship_packets["What are the physical properties of calcium?"].fact_set
        assert chemical.statement_texts() == physical.statement_texts()

    def test_magnesium_statements(self, flagship_packets):
        fact_set = flagship_packets["What are the chemical properties of magnesium?"].fact_set
        assert len(fact_set.sections) == 1
        assert tuple(s.text for s in fact_set.sections[0].statements) == MAGNESIUM_SECTION

    def test_entities_follow_the_query(self, flagship_packets):
        for text, packet in flagship_packets.items():
            expected = "calcium" if "calcium" in text else "magnesium"
            assert packet.fact_set.entity.text == expected

    def test_rival_entity_excluded_from_packet(self, flagship_packets):
        calcium = flagship_packets["What are the chemical properties of calcium?"].fact_set
        assert not any("magnesium" in t.lower() for t in calcium.statement_texts())
        magnesium = flagship_packets["What are the chemical properties of magnesium?"].fact_set
        assert not any("calcium" in t.lower() for t in magnesium.statement_texts())

    def test_repeated_passage_text_deduplicated(self, flagship_packets):
        # passage 1 states its two facts twice; the section keeps one copy each
        fact_set = flagship_packets["What are the chemical properties of calcium?"].fact_set
        texts = fact_set.statement_texts()
        assert len(texts) == len(set(texts))

    def test_source_lines_grouped_per_origin_sentence(self, flagship_packets):
        fact_set = flagship_packets["What are the chemical properties of calcium?"].fact_set
        assert fact_set.sections[1].source_lines == CALCIUM_SOURCE_GROUPS

    def test_sections_remember_their_passage(self, flagship_packets):
        fact_set = flagship_packets["What are the chemical properties of calcium?"].fact_set
        assert [s.source_passage_index for s in fact_set.sections] == [1, 3]

    def test_statements_carry_source_spans(self, flagship_packets):
        fact_set = flagship_packets["What are the chemical properties of calcium?"].fact_set
        for section in fact_set.sections:
            for statement in section.statements:
                lo, hi = statement.source_span
                assert 0 <= lo < hi

    def test_nothing_degraded_under_replay(self, flagship_packets):
        assert not any(p.fact_set.degraded for p in flagship_packets.values())

    def test_to_json_shape(self, flagship_packets):
        payload = flagship_packets["What are the chemical properties of calcium?"].fact_set.to_json()
        assert payload["entity"] == "calcium"
        assert [sec["index"] for sec in payload["sections"]] == [1, 2]
        assert payload["sections"][0]["statements"] == list(CHEMICAL_SECTION)


class TestAssistGating:
    # the heading ties the pronoun sentence to the entity, and its two
    # finite clauses force the assist path
    PASSAGE = "Calcium. It melts at 840°C and it boils at 1484°C."

    def test_missing_cassette_entry_degrades_not_raises(self):
        query = _entity_query("calcium")
        packets = build_fact_sets([self.PASSAGE], [query], llm=ReplayClient({}))
        assert packets[query].fact_set.degraded
        assert packets[query].fact_set.empty

    def test_assist_output_with_foreign_number_dropped(self):
        # the reply invents 900, which never occurs in the passage
        query = _entity_query("calcium")
        client = CallableClient(lambda req: "Calcium melts at 900°C.")
        packets = build_fact_sets([self.PASSAGE], [query], llm=client)
        assert packets[query].fact_set.statement_texts() == []

    def test_assist_output_with_source_numbers_kept(self):
        query = _entity_query("calcium")
        client = CallableClient(
            lambda req: "Calcium melts at 840°C.\nCalcium boils at 1484°C."
        )
        packets = build_fact_sets([self.PASSAGE], [query], llm=client)
        assert packets[query].fact_set.statement_texts() == [
            "Calcium melts at 840°C.",
            "Calcium boils at 1484°C.",
        ]

    def test_assist_none_reply_yields_no_statements(self):
        query = _entity_query("calcium")
        packets = build_fact_sets(
            [self.PASSAGE], [query], llm=CallableClient(lambda req: "NONE")
        )
        assert packets[query].fact_set.empty

    def test_invalid_assist_lines_filtered(self):
        query = _entity_query("calcium")
        client = CallableClient(
            lambda req: "Calcium melts at 840°C.\nIt boils at 1484°C."
        )
        packets = build_fact_sets([self.PASSAGE], [query], llm=client)
        assert packets[query].fact_set.statement_texts() == ["Calcium melts at 840°C."]
