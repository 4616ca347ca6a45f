"""Atomic query generation from collision groups."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acurai import nlp
from acurai.collision import detect_collisions
from acurai.query_split import (
    MAX_ATOMIC_QUERIES,
    SlotNotFoundError,
    rewrite_with_member,
    split_query,
)

FLAGSHIP = "What are the chemical and physical properties of calcium and magnesium?"


def flagship_pairs():
    nps = [m for n in nlp.extract_noun_phrases(FLAGSHIP) for m in nlp.expand_coordination(n)]
    return detect_collisions(nps)


class TestSplitQuery:
    def test_flagship_produces_four_atomic_queries_in_order(self):
        result = split_query(FLAGSHIP)
        assert [q.text for q in result.queries] == [
            "What are the chemical properties of calcium?",
            "What are the chemical properties of magnesium?",
            "What are the physical properties of calcium?",
            "What are the physical properties of magnesium?",
        ]
        assert result.was_split and not result.truncated

    def test_choices_track_group_members(self):
        result = split_query(FLAGSHIP)
        assert result.queries[0].choices == ("chemical properties", "calcium")
        assert result.queries[3].choices == ("physical properties", "magnesium")

    def test_focal_nps_and_provenance(self):
        result = split_query(FLAGSHIP)
        for i, atomic in enumerate(result.queries):
            assert atomic.index == i
            assert atomic.parent_query == FLAGSHIP
            assert len(atomic.focal_nps) == 2
            assert not atomic.fallback

    def test_collision_free_query_round_trips(self):
        for query in [
            "benefits of ice for neck",
            "How do I reheat chicken already cooked?",
            "history of minimum wage",
            "what did the industrial revolution do for society",
        ]:
            result = split_query(query)
            assert not result.was_split
            assert result.queries[0].text == query
            assert result.queries[0].choices == ()

    def test_atomic_queries_are_closed_under_splitting(self):
        for atomic in split_query(FLAGSHIP).queries:
            again = split_query(atomic.text)
            assert not again.was_split, atomic.text

    def test_id_like_comparison_splits(self):
        result = split_query("Compare part A-1234 with part B-5678.")
        texts = [q.text for q in result.queries]
        assert len(texts) == 2
        assert "A-1234" in texts[0] and "B-5678" not in texts[0]
        assert "B-5678" in texts[1] and "A-1234" not in texts[1]

    def test_scattered_mentions_substitute(self):
        result = split_query("Was it calcium? Some say magnesium.")
        assert [q.text for q in result.queries] == [
            "Was it calcium? Some say calcium.",
            "Was it magnesium? Some say magnesium.",
        ]

    def test_cartesian_product_is_capped(self):
        query = (
            "Compare calcium and magnesium, the chemical and physical properties, "
            "part A-1234 with part B-5678, PMID 28193456 with PMID 28193457, "
            "and the 28193458 and 28193459 records."
        )
        result = split_query(query)
        assert len(result.queries) == MAX_ATOMIC_QUERIES
        assert result.truncated

    def test_rewrite_with_member_single_pair(self):
        pair = next(p for p in flagship_pairs() if p.key() == ("calcium", "magnesium"))
        assert (
            rewrite_with_member(FLAGSHIP, pair, pair.left)
            == "What are the chemical and physical properties of calcium?"
        )
        assert (
            rewrite_with_member(FLAGSHIP, pair, pair.right)
            == "What are the chemical and physical properties of magnesium?"
        )

    def test_rewrite_rejects_non_member(self):
        pairs = flagship_pairs()
        cal_mag = next(p for p in pairs if p.key() == ("calcium", "magnesium"))
        props = next(p for p in pairs if "properties" in p.left.text)
        with pytest.raises(ValueError):
            rewrite_with_member(FLAGSHIP, cal_mag, props.left)

    def test_rewrite_missing_slot_raises(self):
        pair = next(p for p in flagship_pairs() if p.key() == ("calcium", "magnesium"))
        with pytest.raises(SlotNotFoundError):
            rewrite_with_member("an unrelated query about the weather today, nothing more", pair, pair.left)

    def test_slot_failure_falls_back_to_template(self):
        pair = next(p for p in flagship_pairs() if p.key() == ("calcium", "magnesium"))
        result = split_query("an unrelated query about the weather today, nothing more", pairs=[pair])
        assert all(q.fallback for q in result.queries)
        assert result.queries[0].text == "Tell me about calcium."
        assert result.queries[1].text == "Tell me about magnesium."

    def test_entity_common_noun_overlap_does_not_split(self):
        result = split_query("Cruise LLC announced cruise control improvements.")
        assert not result.was_split
        assert any(p.reason == "entity-common-noun-overlap" for p in result.collisions)

    @settings(max_examples=50)
    @given(
        st.sampled_from(
            [
                "benefits of ice for neck",
                "history of minimum wage",
                "How do I reheat chicken already cooked?",
                FLAGSHIP,
            ]
        )
    )
    def test_split_is_deterministic(self, query):
        first = split_query(query)
        second = split_query(query)
        assert [q.text for q in first.queries] == [q.text for q in second.queries]
        assert first.truncated == second.truncated
