"""Statement-level faithfulness checking.

Decides whether a candidate response stays inside its sources.  The
response is segmented into declarative statements, each statement is
reduced to content anchors (noun/verb/adjective lemmas, numbers, unit
symbols), and a statement counts as supported only when one single
source covers every anchor.  Paraphrase classes that routinely trip
lexical matching are normalized away first: Unicode escape variants,
case, inflection, century/decade era spellings, possessive-versus-"of"
genitives, and parenthesized acronym expansions.  Whatever the
normalizer cannot reconcile is reported as unsupported — the checker
prefers a false alarm over a missed deviation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources as _importlib_resources

from . import nlp
from .nlp import ADJ, NOUN, NUMBER, PROPN, PUNCT, SYMBOL, VERB, WORD

FAITHFUL = "faithful"
HALLUCINATION = "hallucination"
SUPPORTED = "supported"
UNSUPPORTED = "unsupported"

# POS classes whose words carry checkable content.
_CONTENT_POS = frozenset({NOUN, PROPN, ADJ, VERB})
# POS classes a genitive complement scan may step over.
_SKIPPABLE_POS = frozenset({nlp.DET, nlp.PRON, ADJ, nlp.OTHER})

_BOLD_LINE_RE = re.compile(r"^\*\*.+\*\*$")
_DETAIL_LABEL_RE = re.compile(r"^Detail\s+\d+:\s*")
_BULLET_RE = re.compile(r"^[-•]\s+")
_CENTURY_WORD_RE = re.compile(r"\s*\bcentur(?:y|ies)\b", re.IGNORECASE)
_ORDINAL_RE = re.compile(r"\b(\d{1,2})(?:st|nd|rd|th)\b", re.IGNORECASE)
_ACRONYM_RE = re.compile(r"^[A-Z]{2,6}$")


@dataclass(frozen=True)
class StatementResult:
    """Support verdict for one response statement."""

    statement: str
    status: str  # SUPPORTED or UNSUPPORTED
    best_match: str | None
    score: float

    def to_json(self) -> dict:
        return {
            "statement": self.statement,
            "status": self.status,
            "best_match": self.best_match,
            "score": round(self.score, 4),
        }


@dataclass(frozen=True)
class FaithfulnessReport:
    """Outcome of checking a whole response against its sources.

    ``verdict`` is ``faithful`` exactly when every statement is
    supported; an empty response is vacuously faithful and flagged via
    ``empty`` so callers can tell the two apart.
    """

    verdict: str
    statement_results: tuple[StatementResult, ...] = ()
    normalizations_applied: tuple[str, ...] = ()
    empty: bool = False

    @property
    def unsupported(self) -> tuple[StatementResult, ...]:
        return tuple(r for r in self.statement_results if r.status == UNSUPPORTED)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "empty": self.empty,
            "statements": [r.to_json() for r in self.statement_results],
            "normalizations_applied": list(self.normalizations_applied),
        }


@lru_cache(maxsize=1)
def _exclusions() -> frozenset[str]:
    raw = (
        _importlib_resources.files("acurai.resources")
        .joinpath("anchor_exclusions.json")
        .read_text("utf-8")
    )
    table = json.loads(raw)
    words: set[str] = set()
    for key, values in table.items():
        if not key.startswith("_"):
            words.update(values)
    return frozenset(words)


def _variants(word: str) -> frozenset[str]:
    """Surface form plus lemma and crude de-inflections of ``word``.

    Membership tests run variants-against-set on both sides, so a
    response "using" meets a source "use" even though neither is the
    other's lexicon lemma.
    """
    low = word.lower()
    forms = {low, nlp.lemma(low, NOUN), nlp.lemma(low, VERB)}
    for suffix in ("s", "es", "ed", "ing", "ion"):
        if low.endswith(suffix) and len(low) > len(suffix) + 1:
            stem = low[: -len(suffix)]
            forms.add(stem)
            forms.add(stem + "e")
            if len(stem) >= 2 and stem[-1] == stem[-2]:
                forms.add(stem[:-1])  # stopped -> stop
    return frozenset(forms)


def _fold_eras(text: str) -> str:
    """Rewrite "Nth century" mentions to the matching decade form.

    "late 18th century" becomes "late 1700s", which is what a source
    written the other way round already contains; the decade token also
    participates in the strict numeric rule, so mismatched eras fail
    loudly.  Ordinals are only touched when "century" actually appears,
    keeping "Step 4" and friends intact.
    """
    if not _CENTURY_WORD_RE.search(text):
        return text
    folded = _ORDINAL_RE.sub(lambda m: f"{int(m.group(1)) - 1}00s", text)
    return _CENTURY_WORD_RE.sub("", folded)


def _prepare(text: str, used: set[str]) -> str:
    unescaped = nlp.normalize_escapes(text)
    if unescaped != text:
        used.add("unicode-escapes")
    folded = _fold_eras(unescaped)
    if folded != unescaped:
        used.add("century-decade")
    return folded


def _forward_nominal(tagged: list[nlp.TaggedToken], start: int) -> str | None:
    """Head noun of the NP starting at ``start``, or None."""
    for tt in tagged[start:]:
        if tt.pos in (NOUN, PROPN):
            return nlp.lemma(tt.text.lower(), NOUN)
        if tt.token.kind == WORD and tt.pos in _SKIPPABLE_POS:
            continue
        break
    return None


def _genitive_pairs(
    tagged: list[nlp.TaggedToken], used: set[str]
) -> set[tuple[str, str]]:
    """(head, complement) pairs from "X of Y" and "Y's X" constructions.

    Both spellings canonicalize to the same pair, which is what makes
    "calcium's density" and "density of calcium" interchangeable.
    """
    exclusions = _exclusions()
    pairs: set[tuple[str, str]] = set()
    for i, tt in enumerate(tagged):
        low = tt.text.lower()
        if low == "of" and i > 0:
            prev = tagged[i - 1]
            if prev.pos not in (NOUN, PROPN):
                continue
            head = nlp.lemma(prev.text.lower(), NOUN)
            comp = _forward_nominal(tagged, i + 1)
        elif low == "'s" and i > 0:
            prev = tagged[i - 1]
            if prev.pos not in (NOUN, PROPN):
                continue
            comp = nlp.lemma(prev.text.lower(), NOUN)
            head = _forward_nominal(tagged, i + 1)
            if head is not None:
                used.add("possessive-of")
        else:
            continue
        if head is None or comp is None:
            continue
        if _variants(head) & exclusions or _variants(comp) & exclusions:
            continue
        pairs.add((head, comp))
    return pairs


def _drop_acronym_expansions(
    tagged: list[nlp.TaggedToken], used: set[str]
) -> set[int]:
    """Indexes of expansion words preceding a parenthesized acronym.

    "Pre-menstrual Syndrome (PMS)" keeps only the PMS anchor: the
    acronym pins the reference, so a source that spells just "PMS"
    still supports the expanded mention.
    """
    dropped: set[int] = set()
    for i in range(len(tagged) - 2):
        if tagged[i].text != "(" or tagged[i + 2].text != ")":
            continue
        acro = tagged[i + 1].text
        if not _ACRONYM_RE.match(acro):
            continue
        initials = ""
        candidates: list[int] = []
        for j in range(i - 1, max(i - 7, -1), -1):
            if tagged[j].token.kind != WORD:
                break
            candidates.append(j)
            first_letters = "".join(
                part[0] for part in tagged[j].text.split("-") if part
            )
            initials = first_letters.upper() + initials
            if initials == acro:
                dropped.update(candidates)
                used.add("acronym-expansion")
                break
            if len(initials) > len(acro):
                break
    return dropped


@dataclass(frozen=True)
class _Anchor:
    surface: str
    forms: frozenset[str]
    numeric: bool


@dataclass(frozen=True)
class _Profile:
    """Content anchors and genitive pairs of one response statement."""

    anchors: tuple[_Anchor, ...]
    numbers: frozenset[str]
    pairs: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class _SourceIndex:
    """Match targets precomputed for one source text."""

    text: str
    forms: frozenset[str]
    numbers: frozenset[str]
    pairs: tuple[tuple[str, frozenset[str]], ...]

    def complements(self, head: str) -> frozenset[str] | None:
        for h, comps in self.pairs:
            if h == head:
                return comps
        return None


def _statement_profile(text: str, used: set[str]) -> _Profile:
    prep = _prepare(text, used)
    tagged = nlp.pos_tag(nlp.tokenize(prep))
    dropped = _drop_acronym_expansions(tagged, used)
    exclusions = _exclusions()
    used.update(("lowercase", "lemmatization"))

    anchors: dict[str, _Anchor] = {}
    numbers: set[str] = set()
    for i, tt in enumerate(tagged):
        if i in dropped:
            continue
        low = tt.text.lower()
        kind = tt.token.kind
        if kind == NUMBER:
            numbers.add(low)
            anchors[low] = _Anchor(low, frozenset({low}), numeric=True)
        elif kind == SYMBOL and "°" in low:
            anchors[low] = _Anchor(low, frozenset({low}), numeric=False)
        elif kind == WORD and tt.pos in _CONTENT_POS:
            forms = _variants(low)
            if forms & exclusions:
                continue
            anchors[low] = _Anchor(low, forms, numeric=False)
    return _Profile(
        anchors=tuple(anchors.values()),
        numbers=frozenset(numbers),
        pairs=frozenset(_genitive_pairs(tagged, used)),
    )


def _source_index(text: str, used: set[str]) -> _SourceIndex:
    prep = _prepare(text, used)
    tagged = nlp.pos_tag(nlp.tokenize(prep))
    forms: set[str] = set()
    numbers: set[str] = set()
    for tt in tagged:
        low = tt.text.lower()
        kind = tt.token.kind
        if kind == NUMBER:
            numbers.add(low)
            forms.add(low)
        elif kind == WORD:
            forms.update(_variants(low))
        elif kind == SYMBOL:
            forms.add(low)
    grouped: dict[str, set[str]] = {}
    for head, comp in _genitive_pairs(tagged, used):
        grouped.setdefault(head, set()).add(comp)
    return _SourceIndex(
        text=text,
        forms=frozenset(forms),
        numbers=frozenset(numbers),
        pairs=tuple((h, frozenset(c)) for h, c in sorted(grouped.items())),
    )


def _coverage(profile: _Profile, source: _SourceIndex) -> float:
    if not profile.anchors:
        return 1.0
    covered = sum(1 for a in profile.anchors if a.forms & source.forms)
    return covered / len(profile.anchors)


def _eligible(profile: _Profile, source: _SourceIndex) -> bool:
    """Strict gates: every number present, no conflicting genitive pair."""
    if not profile.numbers <= source.numbers:
        return False
    for head, comp in profile.pairs:
        comps = source.complements(head)
        if comps is not None and comp not in comps:
            return False
    return True


def _support(
    profile: _Profile, indexed: list[_SourceIndex]
) -> tuple[bool, str | None, float]:
    best: tuple[bool, float] = (False, -1.0)
    best_text: str | None = None
    for source in indexed:
        key = (_eligible(profile, source), _coverage(profile, source))
        if key > best:
            best = key
            best_text = source.text
    supported = best[0] and best[1] >= 1.0
    return supported, best_text, max(best[1], 0.0)


def _source_text(source) -> str:
    return getattr(source, "text", source)


def segment_response(response: str) -> list[str]:
    """Split a response into checkable statements.

    Layout furniture — the bold title line, the "Specifics" heading,
    "Detail N:" labels, bullet markers — is dropped; everything else is
    sentence-split and checked.
    """
    statements: list[str] = []
    for raw_line in response.splitlines():
        line = raw_line.strip()
        if not line or _BOLD_LINE_RE.match(line):
            continue
        if line.rstrip(":").lower() == "specifics":
            continue
        line = _DETAIL_LABEL_RE.sub("", line)
        line = _BULLET_RE.sub("", line)
        if not line:
            continue
        statements.extend(sent for sent, _ in nlp.split_sentences(line))
    return statements


def normalize(text: str) -> str:
    """Canonical comparison form of ``text``.

    Lower-cased, escape-normalized, era-folded ("late 18th century" and
    "late 1700s" both come out as "late 1700s"), lemmatized per token,
    possessives rewritten to the "of" spelling, punctuation dropped.
    """
    used: set[str] = set()
    prep = _prepare(text, used).lower()
    tokens = nlp.tokenize(prep)

    def canonical(token: nlp.Token) -> str:
        if token.kind != WORD:
            return token.text
        verb = nlp.lemma(token.text, VERB)
        return verb if verb != token.text else nlp.lemma(token.text, NOUN)

    out: list[str] = []
    i = 0
    while i < len(tokens):
        if (
            i + 2 < len(tokens)
            and tokens[i + 1].text == "'s"
            and tokens[i].kind == WORD
            and tokens[i + 2].kind == WORD
        ):
            out.extend((canonical(tokens[i + 2]), "of", canonical(tokens[i])))
            i += 3
            continue
        token = tokens[i]
        if token.kind != PUNCT:
            out.append(canonical(token))
        i += 1
    return " ".join(out)


def is_supported(
    response_statement: str, sources
) -> tuple[bool, str | None, float]:
    """Whether one source fully covers the statement's content anchors.

    Returns ``(supported, best_match, score)`` where ``score`` is the
    covered-anchor fraction against the best source.  Numbers are
    strict: a number missing from the best source is disqualifying
    regardless of how much else matches, and so is a genitive pair the
    source spells with a different complement ("base of the neck"
    against "base of your skull on your neck").
    """
    texts = [_source_text(s) for s in sources]
    if not texts:
        raise ValueError("is_supported requires at least one source")
    used: set[str] = set()
    profile = _statement_profile(response_statement, used)
    indexed = [_source_index(t, used) for t in texts]
    return _support(profile, indexed)


def coverage(text: str, reference: str) -> float:
    """Fraction of ``text``'s content anchors present in ``reference``."""
    used: set[str] = set()
    profile = _statement_profile(text, used)
    return _coverage(profile, _source_index(reference, used))


def check_response(response: str, sources) -> FaithfulnessReport:
    """Check every statement of ``response`` against ``sources``."""
    statements = segment_response(response)
    if not statements:
        return FaithfulnessReport(verdict=FAITHFUL, empty=True)

    used: set[str] = set()
    texts = [_source_text(s) for s in sources]
    indexed = [_source_index(t, used) for t in texts]
    results: list[StatementResult] = []
    for statement in statements:
        if not indexed:
            results.append(StatementResult(statement, UNSUPPORTED, None, 0.0))
            continue
        profile = _statement_profile(statement, used)
        supported, best_text, score = _support(profile, indexed)
        results.append(
            StatementResult(
                statement,
                SUPPORTED if supported else UNSUPPORTED,
                best_text,
                score,
            )
        )
    verdict = (
        FAITHFUL if all(r.status == SUPPORTED for r in results) else HALLUCINATION
    )
    return FaithfulnessReport(
        verdict=verdict,
        statement_results=tuple(results),
        normalizations_applied=tuple(sorted(used)),
    )
