"""Tokenizer, sentence splitter, tagger, and NP chunker behaviour."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acurai import nlp


class TestTokenize:
    def test_degree_unit_stays_fused(self):
        toks = nlp.tokenize("Calcium melts at 840°C.")
        assert [t.text for t in toks] == ["Calcium", "melts", "at", "840", "°C", "."]
        kinds = {t.text: t.kind for t in toks}
        assert kinds["840"] == nlp.NUMBER
        assert kinds["°C"] == nlp.SYMBOL

    def test_possessive_clitic_splits(self):
        toks = nlp.tokenize("Calcium's density")
        assert [t.text for t in toks] == ["Calcium", "'s", "density"]

    def test_hyphenated_word_and_part_number(self):
        toks = nlp.tokenize("a silver-grey metal, part A-1234")
        texts = [t.text for t in toks]
        assert "silver-grey" in texts
        assert "A-1234" in texts

    def test_ordinal_and_decade_suffixes(self):
        toks = nlp.tokenize("the late 18th and early 20th century, the 1700s")
        texts = [t.text for t in toks]
        assert "18th" in texts and "20th" in texts and "1700s" in texts

    def test_spans_are_byte_offsets(self):
        text = "°C rises"
        toks = nlp.tokenize(text)
        raw = text.encode("utf-8")
        for tok in toks:
            assert raw[tok.span[0] : tok.span[1]].decode("utf-8") == tok.text

    def test_reconstruct_round_trip(self):
        text = 'He said: "Calcium reacts with water, giving off hydrogen…" (p. 3).'
        assert nlp.reconstruct(text, nlp.tokenize(text)) == text

    @settings(max_examples=200)
    @given(st.text(max_size=120))
    def test_reconstruct_round_trips_arbitrary_text(self, text):
        assert nlp.reconstruct(text, nlp.tokenize(text)) == text


class TestNormalizeEscapes:
    def test_unicode_and_caret_escapes(self):
        assert nlp.normalize_escapes("840 \\u00b0C") == "840 °C"
        assert nlp.normalize_escapes("1540 kg/m\\^3") == "1540 kg/m^3"

    def test_plain_text_unchanged(self):
        assert nlp.normalize_escapes("no escapes here") == "no escapes here"


class TestSplitSentences:
    def texts(self, source):
        return [s for s, _ in nlp.split_sentences(source)]

    def test_splits_missing_space_after_period(self):
        text = "Calcium reacts with water.These properties are shared."
        assert self.texts(text) == [
            "Calcium reacts with water.",
            "These properties are shared.",
        ]

    def test_lowercase_continuation_still_splits(self):
        text = "Calcium tarnishes in air.an oxide coating forms."
        assert self.texts(text) == [
            "Calcium tarnishes in air.",
            "an oxide coating forms.",
        ]

    def test_decimals_and_abbreviations_do_not_split(self):
        text = "Dr. Smith pays $7.25 per hour."
        assert self.texts(text) == ["Dr. Smith pays $7.25 per hour."]

    def test_newline_is_a_boundary(self):
        text = "Calcium: Chemical Properties\nThe chemical properties are reactive."
        assert self.texts(text) == [
            "Calcium: Chemical Properties",
            "The chemical properties are reactive.",
        ]

    def test_spans_locate_each_sentence(self):
        text = "One. Two! Three? Four."
        raw = text.encode("utf-8")
        parts = nlp.split_sentences(text)
        assert [s for s, _ in parts] == ["One.", "Two!", "Three?", "Four."]
        for sentence, (lo, hi) in parts:
            assert raw[lo:hi].decode("utf-8") == sentence


class TestPosTag:
    def tags(self, text):
        return [(tt.token.text, tt.pos) for tt in nlp.pos_tag(nlp.tokenize(text))]

    def test_copula_and_nouns(self):
        got = dict(self.tags("The properties are reactive."))
        assert got["The"] == nlp.DET
        assert got["properties"] == nlp.NOUN
        assert got["are"] == nlp.VERB

    def test_unknown_capitalised_word_mid_sentence_is_proper(self):
        got = dict(self.tags("We visited Qephraxia yesterday."))
        assert got["Qephraxia"] == nlp.PROPN

    def test_sentence_initial_capital_is_not_proper_when_known(self):
        got = dict(self.tags("Calcium reacts."))
        assert got["Calcium"] == nlp.NOUN

    def test_participle_before_noun_reads_as_adjective(self):
        got = dict(self.tags("the hydrated ion dissolves"))
        assert got["hydrated"] == nlp.ADJ
        assert got["dissolves"] == nlp.VERB

    def test_color_terms_are_adjectives(self):
        got = dict(self.tags("red, blue, and green cars"))
        assert got["red"] == nlp.ADJ and got["green"] == nlp.ADJ


class TestLemma:
    @pytest.mark.parametrize(
        "word,expected",
        [
            ("properties", "property"),
            ("reacts", "react"),
            ("gave", "give"),
            ("cars", "car"),
            ("boils", "boil"),
            ("is", "be"),
            ("are", "be"),
            ("found", "find"),
            ("reduction", "reduce"),
        ],
    )
    def test_inflection_and_irregulars(self, word, expected):
        assert nlp.lemma(word) == expected

    @pytest.mark.parametrize(
        "word,expected",
        [("giving", "give"), ("reacted", "react"), ("tarnishes", "tarnish")],
    )
    def test_verb_lemmas(self, word, expected):
        assert nlp.lemma(word, nlp.VERB) == expected

    def test_lemma_is_idempotent(self):
        for word in ["property", "react", "calcium", "be"]:
            assert nlp.lemma(nlp.lemma(word)) == nlp.lemma(word)


class TestNounPhrases:
    def nps(self, text):
        return [n.text for n in nlp.extract_noun_phrases(text)]

    def expanded(self, text):
        return [
            m.text
            for n in nlp.extract_noun_phrases(text)
            for m in nlp.expand_coordination(n)
        ]

    def test_coordinated_modifiers_share_head(self):
        text = "What are the chemical and physical properties of calcium and magnesium?"
        assert self.expanded(text) == [
            "chemical properties",
            "physical properties",
            "calcium",
            "magnesium",
        ]

    def test_three_way_coordination(self):
        assert self.expanded("red, blue, and green cars") == [
            "red cars",
            "blue cars",
            "green cars",
        ]

    @pytest.mark.parametrize(
        "text,expected",
        [
            ("benefits of ice for neck", ["benefits", "ice", "neck"]),
            ("How do I reheat chicken already cooked?", ["chicken"]),
            ("history of minimum wage", ["history", "minimum wage"]),
            (
                "what did the industrial revolution do for society",
                ["the industrial revolution", "society"],
            ),
        ],
    )
    def test_query_chunking(self, text, expected):
        assert self.expanded(text) == expected

    def test_posessive_subject_with_numeric_tail(self):
        got = self.nps("Nearly all Calcium's compounds are in oxidation state +2.")
        assert got[:3] == ["all Calcium", "compounds", "oxidation state"]

    def test_part_numbers_chunk_whole(self):
        assert self.nps("Compare part A-1234 with part B-5678.") == [
            "part A-1234",
            "part B-5678",
        ]

    def test_decade_phrases(self):
        got = self.nps(
            "The industrial revolution occurred between the late 1700s and the early 1900s."
        )
        assert got == ["The industrial revolution", "the late 1700s", "the early 1900s"]

    def test_singleton_expansion_is_identity(self):
        (np_,) = nlp.extract_noun_phrases("calcium")
        assert [m.text for m in nlp.expand_coordination(np_)] == ["calcium"]

    @settings(max_examples=100)
    @given(
        st.lists(
            st.sampled_from(
                ["calcium", "magnesium", "water", "the oxide coating", "ice", "neck"]
            ),
            min_size=1,
            max_size=4,
        )
    )
    def test_expansion_conserves_heads(self, nouns):
        text = " and ".join(nouns) + " react."
        for np_ in nlp.extract_noun_phrases(text):
            for member in nlp.expand_coordination(np_):
                assert member.head == np_.head or member.text in text
