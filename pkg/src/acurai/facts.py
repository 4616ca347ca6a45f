"""Fully-Formatted Fact extraction.

Converts retrieved passages into short, self-contained, collision-free
statements and pairs each atomic query with exactly the fact sections about
its focal entity.  Extraction is hybrid: a deterministic pass handles sentence
splitting, heading context, pronoun-subject repair, and conjunct splitting;
sentences the deterministic pass cannot validate are handed to an LLM rewriter
whose output is re-validated and numerically checked before acceptance, so the
guarantees never rest on model behavior.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from importlib import resources

from . import nlp
from .collision import (
    DEFAULT_THRESHOLD,
    AliasTable,
    EmbeddingProvider,
    OfflineHashEmbedding,
    are_coreferent,
    default_aliases,
    detect_collisions,
    normalize_np_text,
)
from .llm import ChatClient, ChatRequest, LLMError
from .nlp import (
    ADJ,
    CONJ,
    DET,
    NOUN,
    NUMBER,
    OTHER,
    PREP,
    PRON,
    PROPN,
    PUNCT,
    SYMBOL,
    VERB,
    WORD,
    NounPhrase,
    TaggedToken,
)
from .query_split import AtomicQuery

log = logging.getLogger(__name__)

#: Second-person and first-person pronouns are allowed: instructional passages
#: ("place the ice cube on your neck") cannot be restated without them, and
#: they never conflate two source entities.
ALLOWED_PRONOUNS = frozenset(
    {"you", "your", "yours", "i", "me", "my", "we", "us", "our", "ours"}
)
MAX_STATEMENT_TOKENS = 40

_BE_FORMS = frozenset({"am", "is", "are", "was", "were", "be", "been", "being"})
_NONE_SENTINEL = "NONE"
#: Third-person pronouns that can be resolved to the running heading entity.
_RESOLVABLE_PRONOUNS = frozenset({"it", "they", "this", "these", "that", "those", "he", "she"})
#: Participles that never head a finite clause on their own ("the neck shown
#: in the video", "risks associated with ..." are reduced relatives).
_BARE_PARTICIPLES = frozenset({"shown", "known", "seen", "given", "taken", "done", "associated"})
#: Words that open a dependent clause; a finite verb governed by one of these
#: does not count as an independent clause.
_SUBORDINATORS = frozenset(
    {"that", "if", "when", "whenever", "while", "because", "since", "until",
     "unless", "although", "though", "after", "before", "once", "whereas",
     "wherever", "where", "which", "who", "whom", "whose"}
)
#: Words the lexicon lists as nouns but that open imperative clauses in
#: instructional text ("Place an ice cube...", "You place an ice cube...").
_IMPERATIVE_HINTS = frozenset(
    {"place", "allow", "see", "do", "grab", "pour", "sip", "lay", "fill",
     "take", "put", "let", "use", "apply", "mix", "add", "keep", "read"}
)


def load_prompts() -> dict:
    """Load the pinned prompt templates (kept in a resource file because
    recorded cassette keys depend on their exact wording)."""
    text = resources.files("acurai.resources").joinpath("prompts.json").read_text("utf-8")
    return json.loads(text)


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Statement:
    """One Fully-Formatted Fact with best-effort provenance."""

    text: str
    subject_np: NounPhrase
    source_passage_index: int
    source_span: tuple[int, int]


@dataclass(frozen=True)
class Section:
    """Statements contributed by a single source passage.

    ``source_lines`` holds one tuple per contributing sentence: the
    near-verbatim atomization of that sentence, which downstream response
    composition quotes in its "Detail N:" blocks.
    """

    index: int
    statements: tuple[Statement, ...]
    source_lines: tuple[tuple[str, ...], ...] = ()
    source_passage_index: int = 0


@dataclass(frozen=True)
class FactSet:
    entity: NounPhrase | None
    sections: tuple[Section, ...]
    degraded: bool = False

    @property
    def empty(self) -> bool:
        return not self.sections

    def statement_texts(self) -> list[str]:
        return [s.text for sec in self.sections for s in sec.statements]

    def to_json(self) -> dict:
        return {
            "entity": self.entity.text if self.entity else "",
            "sections": [
                {"index": sec.index, "statements": [s.text for s in sec.statements]}
                for sec in self.sections
            ],
        }


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class QueryPacket:
    """An atomic query plus exactly the fact sections about its focal entity —
    the unit handed to the answering LLM."""

    atomic_query: AtomicQuery
    fact_set: FactSet
    placeholder_table_ref: str = ""

    @property
    def empty(self) -> bool:
        return self.fact_set.empty


@dataclass
class FFFConfig:
    model: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_statement_tokens: int = MAX_STATEMENT_TOKENS
    collision_threshold: float = DEFAULT_THRESHOLD
    use_llm: bool = True


# --------------------------------------------------------------------------
# small text helpers (token spans are byte offsets)


def _bslice(text: str, lo: int, hi: int) -> str:
    return text.encode("utf-8")[lo:hi].decode("utf-8")


def _bytelen(text: str) -> int:
    return len(text.encode("utf-8"))


def _squeeze(text: str) -> str:
    out = " ".join(text.split())
    for wrong, right in ((" ,", ","), (" .", "."), (" ;", ";"), (" :", ":"), ("( ", "("), (" )", ")")):
        out = out.replace(wrong, right)
    return out


def _finish(text: str, *, capitalize: bool = True) -> str:
    """Trim stray separators, close with a period, upper-case the first letter."""
    out = _squeeze(text).strip()
    out = out.lstrip("([{ ").rstrip(",;:- ")
    while out and out[-1] in ")]}" and out.count(")") > out.count("("):
        out = out[:-1].rstrip(",;: ")
    if not out:
        return out
    if capitalize:
        out = out[0].upper() + out[1:]
    if out[-1] not in ".!?":
        out += "."
    return out


def _tag(text: str) -> list[TaggedToken]:
    """Tokenize and tag, then repair imperative openers the lexicon lists as
    nouns ("Place an ice cube...", "You place an ice cube...")."""
    tagged = nlp.pos_tag(nlp.tokenize(text))
    words = [i for i, tt in enumerate(tagged) if tt.token.kind == WORD]
    for position, idx in enumerate(words[:2]):
        tt = tagged[idx]
        if tt.pos == VERB:
            break
        if position == 0 and tt.pos == PRON and tt.text.lower() in ALLOWED_PRONOUNS:
            continue
        if tt.text.lower() in _IMPERATIVE_HINTS:
            tagged[idx] = TaggedToken(tt.token, VERB)
        break
    # a "verb" between a determiner and a nominal is attributive ("an empty
    # stomach"); no finite verb can occupy that slot
    for i in range(1, len(tagged) - 1):
        if (
            tagged[i].pos == VERB
            and tagged[i - 1].pos == DET
            and tagged[i + 1].pos in (NOUN, PROPN, ADJ)
        ):
            tagged[i] = TaggedToken(tagged[i].token, ADJ)
    return tagged


def _word_lemmas(text: str) -> set[str]:
    out: set[str] = set()
    for tt in _tag(text):
        if tt.token.kind == WORD:
            low = tt.text.lower()
            out.add(low)
            out.add(nlp.lemma(low, tt.pos if tt.pos in (NOUN, VERB) else NOUN))
    return out


def _np_lemmas(np_or_text: NounPhrase | str) -> set[str]:
    text = np_or_text.text if isinstance(np_or_text, NounPhrase) else np_or_text
    out: set[str] = set()
    for tt in _tag(text):
        if tt.token.kind == NUMBER:
            out.add(tt.text.lower())
        elif tt.token.kind == WORD and tt.pos in (NOUN, PROPN, ADJ):
            out.add(nlp.lemma(tt.text.lower(), NOUN) if tt.pos in (NOUN, PROPN) else tt.text.lower())
    return out


def _mentions(lemmas: set[str], target: NounPhrase | str) -> bool:
    want = _np_lemmas(target)
    return bool(want) and want <= lemmas


# --------------------------------------------------------------------------
# finite-verb machinery


def _is_gap(tt: TaggedToken) -> bool:
    return (tt.pos == OTHER and tt.token.kind == WORD) or tt.text.lower() in ("not", "n't")


def _is_finite(tagged: list[TaggedToken], m: int) -> bool:
    """Approximate finiteness: a verb token that is not an -ing form, not a
    bare irregular participle, and not the complement of a preceding "to".
    A verb glued to an ellipsis ("com …pared") is the tail of a spliced word,
    not a predicate."""
    word = tagged[m].text.lower()
    if tagged[m].pos != VERB or word.endswith("ing") or word in _BARE_PARTICIPLES:
        return False
    k = m - 1
    while k >= 0 and _is_gap(tagged[k]):
        k -= 1
    if k < 0:
        return True
    prev = tagged[k].text.lower()
    ellipsis = "…" in prev or (len(prev) >= 2 and set(prev) == {"."})
    return prev != "to" and not ellipsis


def _verb_groups(tagged: list[TaggedToken]) -> list[tuple[int, int]]:
    """Maximal runs of verb tokens, bridging at most two adverb-like gaps."""
    groups: list[tuple[int, int]] = []
    i, n = 0, len(tagged)
    while i < n:
        if tagged[i].pos != VERB:
            i += 1
            continue
        j, k, gap = i, i + 1, 0
        while k < n:
            if tagged[k].pos == VERB:
                j, k, gap = k, k + 1, 0
            elif _is_gap(tagged[k]) and gap < 2:
                gap, k = gap + 1, k + 1
            else:
                break
        groups.append((i, j))
        i = k
    return groups


def _finite_groups(tagged: list[TaggedToken]) -> list[tuple[int, int]]:
    return [
        (i, j)
        for (i, j) in _verb_groups(tagged)
        if any(_is_finite(tagged, m) for m in range(i, j + 1))
    ]


def _is_subordinate(tagged: list[TaggedToken], start: int) -> bool:
    """True when the verb group at ``start`` sits inside a dependent clause:
    a subordinator appears between it and the previous verb (or the start)."""
    for k in range(start - 1, -1, -1):
        if tagged[k].pos == VERB:
            return False
        if tagged[k].text.lower() in _SUBORDINATORS:
            return True
    return False


def _main_finite_groups(tagged: list[TaggedToken]) -> list[tuple[int, int]]:
    """Finite groups heading independent clauses ("before you go to sleep"
    contributes none)."""
    return [(i, j) for (i, j) in _finite_groups(tagged) if not _is_subordinate(tagged, i)]


# --------------------------------------------------------------------------
# validation


def _subject_state(tagged: list[TaggedToken], text: str) -> tuple[bool, bool, str]:
    """(subject slot filled, filled by a pronoun alone, pre-verb region)."""
    finite = _finite_groups(tagged)
    if not finite:
        return False, False, ""
    start = finite[0][0]
    region = _bslice(text, 0, tagged[start].token.span[0]) if start else ""
    pronoun = any(tt.pos == PRON for tt in tagged[:start])
    limit = tagged[start].token.span[0]
    has_np = any(np.span[1] <= limit for np in nlp.extract_noun_phrases(text, tagged))
    return has_np or pronoun, pronoun and not has_np, region


def _collision_violations(
    text: str,
    provider: EmbeddingProvider,
    threshold: float,
    aliases: AliasTable,
) -> list[str]:
    """Colliding noun-phrase pairs inside one statement.

    Surface chunks are compared without distributing coordination: "a powdery,
    flaky oxide coating" names one referent, so its expansions must not collide
    with each other.  Word-subset pairs (calcium / calcium nitride) are benign
    for the same reason.
    """
    nps = nlp.extract_noun_phrases(text, _tag(text))
    pairs = detect_collisions(nps, provider=provider, threshold=threshold, aliases=aliases)
    out = []
    for pair in pairs:
        left = set(normalize_np_text(pair.left.text).split())
        right = set(normalize_np_text(pair.right.text).split())
        if left <= right or right <= left:
            continue
        out.append(f"(e) colliding noun phrases {pair.left.text!r} / {pair.right.text!r}")
    return out


def validate_statement(
    s: str,
    entity: NounPhrase | str | None = None,
    *,
    provider: EmbeddingProvider | None = None,
    aliases: AliasTable | None = None,
    config: FFFConfig | None = None,
) -> ValidationResult:
    """Check a candidate statement against the Fully-Formatted Fact rules.

    Violations are reported exhaustively, in rule order: (a) disallowed
    pronouns, (b) subject present and about the entity, (c) exactly one finite
    clause, (d) length cap, (e) no internal noun-phrase collisions.  A pronoun
    subject satisfies the presence half of (b) but is already flagged by (a),
    so it is not double-reported as an entity mismatch.
    """
    config = config or FFFConfig()
    provider = provider or OfflineHashEmbedding()
    aliases = aliases or default_aliases()
    tagged = _tag(s)
    violations: list[str] = []

    banned = sorted(
        {tt.text.lower() for tt in tagged if tt.pos == PRON and tt.text.lower() not in ALLOWED_PRONOUNS}
    )
    if banned:
        violations.append("(a) pronoun tokens: " + ", ".join(banned))

    filled, by_pronoun, region = _subject_state(tagged, s)
    if not filled:
        violations.append("(b) no subject before the finite verb")
    elif entity is not None and not by_pronoun:
        region_lemmas = _word_lemmas(region)
        limit = _bytelen(region)
        region_nps = [np for np in nlp.extract_noun_phrases(s, tagged) if np.span[1] <= limit]
        ok = _mentions(region_lemmas, entity)
        if not ok and isinstance(entity, NounPhrase):
            ok = any(are_coreferent(np, entity, aliases) for np in region_nps)
        if not ok:
            name = entity.text if isinstance(entity, NounPhrase) else entity
            violations.append(f"(b) subject does not mention {name!r}")

    finite = _main_finite_groups(tagged)
    if len(finite) != 1:
        violations.append(f"(c) {len(finite)} independent finite clauses (need exactly 1)")

    if len(tagged) > config.max_statement_tokens:
        violations.append(f"(d) {len(tagged)} tokens exceeds {config.max_statement_tokens}")

    violations.extend(
        _collision_violations(s, provider, config.collision_threshold, aliases)
    )
    return ValidationResult(valid=not violations, violations=tuple(violations))


def _numbers_ok(statement: str, passage_tokens: set[str]) -> bool:
    """Every number and degree token must occur verbatim in the source."""
    for tok in nlp.tokenize(statement):
        if tok.kind == NUMBER and tok.text not in passage_tokens:
            return False
        if tok.kind == SYMBOL and tok.text.startswith("°") and tok.text not in passage_tokens:
            return False
    return True


# --------------------------------------------------------------------------
# deterministic sentence atomization

_HEADING_POS = {DET, ADJ, NOUN, PROPN, CONJ, PREP, OTHER}


@dataclass
class _Context:
    """Running heading scope within one passage."""

    np: NounPhrase | None = None
    rival: bool = False


def _np_only(tagged: list[TaggedToken]) -> bool:
    words = [tt for tt in tagged if tt.token.kind == WORD]
    if not words or any(tt.pos not in _HEADING_POS for tt in words):
        return False
    if any(tt.token.kind == NUMBER for tt in tagged):
        return False
    return any(tt.pos in (NOUN, PROPN) for tt in words)


def _np_prefix(tagged: list[TaggedToken], end: int) -> bool:
    """True when tokens[:end] form a bare heading noun phrase."""
    head = tagged[:end]
    words = [tt for tt in head if tt.token.kind == WORD]
    if not words or words[0].pos not in (DET, ADJ, NOUN, PROPN):
        return False
    return len(head) <= 6 and _np_only(head)


def _first_np(text: str) -> NounPhrase | None:
    nps = nlp.extract_noun_phrases(text, _tag(text))
    return nps[0] if nps else None


def _last_np(text: str) -> NounPhrase | None:
    nps = nlp.extract_noun_phrases(text, _tag(text))
    return nps[-1] if nps else None


def _third_person(verb: str) -> str:
    base = nlp.lemma(verb.lower(), VERB)
    if base == "be":
        return "is"
    if base == "have":
        return "has"
    if base.endswith(("s", "sh", "ch", "x", "z", "o")):
        return base + "es"
    if base.endswith("y") and len(base) > 1 and base[-2] not in "aeiou":
        return base[:-1] + "ies"
    return base + "s"


def _head_is_plural(surface: str) -> bool:
    low = surface.lower()
    return low.endswith("s") and not low.endswith("ss") and nlp.lemma(low, NOUN) != low


def _subject_head(tagged: list[TaggedToken], verb_start: int) -> str:
    """Agreement head of the pre-verb region: the last noun before the first
    prepositional attachment ("properties" in "the properties of calcium")."""
    nouns: list[int] = []
    for i in range(verb_start):
        if tagged[i].pos in (NOUN, PROPN):
            nouns.append(i)
        elif tagged[i].pos == PREP and nouns:
            return tagged[nouns[-1]].text
    return tagged[nouns[-1]].text if nouns else ""


def _replace_token(text: str, span: tuple[int, int], replacement: str) -> str:
    data = text.encode("utf-8")
    return (data[: span[0]] + replacement.encode("utf-8") + data[span[1] :]).decode("utf-8")


def _inflected_s_form(word: str) -> bool:
    low = word.lower()
    return low.endswith("s") and nlp.lemma(low, VERB) != low


def _repair_copulas(text: str) -> tuple[str, bool]:
    """Drop a be-form glued to a tensed verb ("are reacts" → "reacts").

    Only an inflected -s form triggers the repair; "is dominated" and other
    legitimate passives stay untouched."""
    repaired = False
    for _ in range(4):
        tagged = _tag(text)
        hit = False
        for i in range(len(tagged) - 1):
            if (
                tagged[i].pos == VERB
                and tagged[i].text.lower() in _BE_FORMS
                and tagged[i + 1].pos == VERB
                and _is_finite(tagged, i + 1)
                and _inflected_s_form(tagged[i + 1].text)
            ):
                data = text.encode("utf-8")
                text = (
                    data[: tagged[i].token.span[0]] + data[tagged[i + 1].token.span[0] :]
                ).decode("utf-8")
                hit = repaired = True
                break
        if not hit:
            break
    return text, repaired


def _fix_agreement(text: str) -> str:
    """Re-inflect the finite verb for its subject head after a copula drop."""
    tagged = _tag(text)
    finite = _finite_groups(tagged)
    if not finite:
        return text
    v = next(m for m in range(finite[0][0], finite[0][1] + 1) if _is_finite(tagged, m))
    head = _subject_head(tagged, finite[0][0])
    if not head:
        return text
    verb = tagged[v].text
    if verb.lower() in _BE_FORMS or nlp.lemma(verb.lower(), VERB) == "be":
        return text
    fixed = nlp.lemma(verb.lower(), VERB) if _head_is_plural(head) else _third_person(verb)
    if fixed == verb.lower():
        return text
    return _replace_token(text, tagged[v].token.span, fixed)


def _finitize_participle(text: str) -> str:
    """Turn a participial adjunct into a finite clause once a subject has been
    attached ("calcium giving off bubbles" → "calcium gives off bubbles")."""
    tagged = _tag(text)
    if _finite_groups(tagged):
        return text
    for i, tt in enumerate(tagged):
        if tt.pos == VERB and tt.text.lower().endswith("ing"):
            head = _subject_head(tagged, i)
            if not head:
                return text
            base = nlp.lemma(tt.text.lower(), VERB)
            fixed = base if _head_is_plural(head) else _third_person(base)
            return _replace_token(text, tt.token.span, fixed)
    return text


def _promote_parentheticals(text: str) -> tuple[str, list[tuple[int, str]]]:
    """Lift clause-like parentheticals out of the sentence.

    Returns the trimmed sentence plus (byte position in the trimmed text,
    inner text) for each promoted span; short appositives like "(PMS)" or
    "(2+)" stay inline.
    """
    data = text.encode("utf-8")
    spans: list[tuple[int, int]] = []
    depth, start = 0, -1
    for i in range(len(data)):
        ch = chr(data[i])
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")" and depth:
            depth -= 1
            if depth == 0:
                spans.append((start, i + 1))
    main = bytearray()
    promoted: list[tuple[int, str]] = []
    cursor = 0
    for lo, hi in spans:
        inner = data[lo + 1 : hi - 1].decode("utf-8").strip()
        tagged = _tag(inner)
        if len(tagged) >= 4 and any(tt.pos == VERB for tt in tagged):
            main += data[cursor:lo]
            promoted.append((len(main), inner))
            cursor = hi
    main += data[cursor:]
    return _squeeze(main.decode("utf-8")), promoted


def _has_clause_ahead(tagged: list[TaggedToken], k: int) -> bool:
    """A noun-ish token followed by a finite verb — an independent clause."""
    saw_np = False
    for m in range(k, len(tagged)):
        if tagged[m].pos in (DET, NOUN, PROPN, PRON, ADJ):
            saw_np = True
        elif tagged[m].pos == VERB and _is_finite(tagged, m):
            return saw_np
    return False


def _split_clause_units(text: str) -> list[tuple[str, int]]:
    """Split a clause chain into (unit text, byte position) pieces.

    Shared-subject conjuncts ("reacts with oxygen and reacts with water") get
    the first clause's subject copied in; independent clauses after
    ", and"/", but" stand alone.
    """
    tagged = _tag(text)
    finite = _finite_groups(tagged)
    if len(finite) <= 1:
        return [(text, 0)]

    first_start = finite[0][0]
    subject = _bslice(text, 0, tagged[first_start].token.span[0]).strip() if first_start else ""

    cuts: list[tuple[int, bool]] = []  # (token index the next unit starts at, reuse subject)
    n = len(tagged)
    for i, tt in enumerate(tagged):
        if i <= first_start:
            continue
        prev = tagged[i - 1]
        after_comma = prev.text == ","
        is_conj = tt.pos == CONJ and tt.text.lower() in ("and", "but", "or", "nor")
        if is_conj:
            k = i + 1
            while k < n and _is_gap(tagged[k]):
                k += 1
            if k < n and tagged[k].pos == VERB and _is_finite(tagged, k):
                cuts.append((k, True))
            elif after_comma and k < n and _has_clause_ahead(tagged, k):
                cuts.append((k, False))
        elif after_comma and tt.pos == VERB:
            if _is_finite(tagged, i) or tt.text.lower().endswith("ing"):
                cuts.append((i, True))

    if not cuts:
        return [(text, 0)]

    units: list[tuple[str, int]] = []
    bounds = [c for c, _ in cuts]
    starts = [0] + bounds
    for idx, start_tok in enumerate(starts):
        end_tok = (bounds[idx] - 1) if idx < len(bounds) else len(tagged) - 1
        while end_tok > start_tok and (
            tagged[end_tok].text in (",", ";")
            or (tagged[end_tok].pos == CONJ and idx < len(bounds))
        ):
            end_tok -= 1
        lo = tagged[start_tok].token.span[0]
        hi = tagged[end_tok].token.span[1]
        piece = _bslice(text, lo, hi)
        if idx > 0 and cuts[idx - 1][1] and subject:
            units.append((subject + " " + piece, lo))
        else:
            units.append((piece, lo))
    return units


def _distribute_pp_coordination(text: str) -> list[tuple[str, int]]:
    """"Do this in the morning and before sleep" → one unit per adjunct."""
    tagged = _tag(text)
    finite = _finite_groups(tagged)
    if not finite:
        return [(text, 0)]
    g_end = finite[0][1]
    first_prep = None
    conj_at = None
    for i in range(g_end + 1, len(tagged)):
        if tagged[i].pos == PREP and first_prep is None:
            first_prep = i
        if (
            tagged[i].pos == CONJ
            and tagged[i].text.lower() in ("and", "or")
            and first_prep is not None
            and i > first_prep
            and i + 1 < len(tagged)
            and tagged[i + 1].pos == PREP
        ):
            conj_at = i
            break
    if first_prep is None or conj_at is None:
        return [(text, 0)]
    head = _bslice(text, 0, tagged[first_prep].token.span[0]).rstrip()
    adj1_end = conj_at - 1
    while adj1_end > first_prep and tagged[adj1_end].text == ",":
        adj1_end -= 1
    adj1 = _bslice(text, tagged[first_prep].token.span[0], tagged[adj1_end].token.span[1])
    last = len(tagged) - 1
    while last > conj_at and tagged[last].token.kind in (PUNCT, SYMBOL):
        last -= 1
    adj2 = _bslice(text, tagged[conj_at + 1].token.span[0], tagged[last].token.span[1])
    return [
        (head + " " + adj1, tagged[first_prep].token.span[0]),
        (head + " " + adj2, tagged[conj_at + 1].token.span[0]),
    ]


def _distribute_fragment_or(text: str) -> list[str]:
    """"with oxygen, or air" → "with oxygen" / "with air"."""
    tagged = _tag(text)
    last = len(tagged) - 1
    while last >= 0 and tagged[last].token.kind in (PUNCT, SYMBOL):
        last -= 1
    i = last
    while i >= 0 and tagged[i].pos in (NOUN, PROPN, ADJ, DET):
        i -= 1
    if i < 2 or i == last or tagged[i].pos != CONJ or tagged[i].text.lower() not in ("or", "and"):
        return [text]
    j = i - 1
    if tagged[j].text == ",":
        j -= 1
    np1_end = j
    while j >= 0 and tagged[j].pos in (NOUN, PROPN, ADJ, DET):
        j -= 1
    if j < 0 or j == np1_end or tagged[j].pos != PREP:
        return [text]
    variant_a = _bslice(text, 0, tagged[np1_end].token.span[1])
    np2 = _bslice(text, tagged[i + 1].token.span[0], tagged[last].token.span[1])
    variant_b = _bslice(text, 0, tagged[j].token.span[1]) + " " + np2
    return [variant_a, variant_b]


_VOWELS = "aeiou"


def _fragment_candidates(frag: str, ctx: NounPhrase) -> list[str] | None:
    """Copula-ize a verbless fragment against the running heading entity.

    Returns None when the fragment looks like clausal debris (a dangling
    determiner or a stray verb) that the LLM rewriter should handle instead.
    """
    out: list[str] = []
    for piece in _distribute_fragment_or(frag):
        if " but " in piece:
            piece = piece.split(" but ")[0]
        tagged = _tag(piece)
        words = [tt for tt in tagged if tt.token.kind in (WORD, NUMBER)]
        if not words:
            continue
        if any(tt.pos == VERB for tt in tagged):
            return None
        for a, b in zip(tagged, tagged[1:]):
            if a.pos == DET and not (
                b.pos in (DET, ADJ, NOUN, PROPN) or b.token.kind == NUMBER
            ):
                return None
        first = words[0]
        lowered = piece if first.pos == PROPN else piece[0].lower() + piece[1:]
        run_end = 0
        saw_noun = False
        for tt in tagged:
            if tt.token.kind == WORD and tt.pos in (DET, ADJ, NOUN, PROPN):
                saw_noun = saw_noun or tt.pos in (NOUN, PROPN)
                run_end = tt.token.span[1]
            else:
                break
        number_tok = next((tt for tt in tagged if tt.token.kind == NUMBER), None)
        if saw_noun and number_tok is not None and number_tok.token.span[0] >= run_end:
            left = _bslice(piece, 0, run_end).strip()
            right_hi = max(tt.token.span[1] for tt in tagged if tt.token.kind != PUNCT)
            right = _bslice(piece, number_tok.token.span[0], right_hi).strip()
            out.append(_finish(f"{ctx.text}'s {left} is {right}"))
        elif saw_noun:
            head = _bslice(piece, 0, run_end).split()[-1]
            article = ""
            if first.pos != DET and not _head_is_plural(head):
                article = "an " if lowered.lstrip()[0].lower() in _VOWELS else "a "
            out.append(_finish(f"{ctx.text} is {article}{lowered}"))
        else:
            out.append(_finish(f"{ctx.text} is {lowered}"))
    return out


# --------------------------------------------------------------------------
# per-sentence extraction


@dataclass
class _SentenceResult:
    candidates: list[str] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    needs_assist: bool = False
    heading: bool = False


def _atomize_sentence(sent: str, ctx: _Context, entity: NounPhrase | None) -> _SentenceResult:
    """Deterministic pass over one sentence; validation happens afterwards."""
    res = _SentenceResult()
    working = sent.strip()
    tagged = _tag(working)
    if not any(tt.token.kind == WORD for tt in tagged):
        return res

    # 1. colon heading: "Calcium: ..." scopes the rest of the passage
    colon = next((i for i, tt in enumerate(tagged) if tt.text == ":"), None)
    if colon is not None and _np_prefix(tagged, colon):
        prefix = _bslice(working, 0, tagged[colon].token.span[0])
        ctx.np = _first_np(prefix) or ctx.np
        ctx.rival = False
        working = _bslice(working, tagged[colon].token.span[1], _bytelen(working)).strip()
        if not working:
            res.heading = True
            return res
        tagged = _tag(working)
        colon = next((i for i, tt in enumerate(tagged) if tt.text == ":"), None)
    if colon is not None:
        # an unconsumed colon marks compound structure the deterministic
        # rules cannot atomize faithfully
        res.lines.append(_finish(working))
        res.needs_assist = True
        return res

    # 2. dash-introduced fragment: "Chemical properties --tarnishes ..."
    saw_dash = False
    dash = next(
        (i for i, tt in enumerate(tagged) if set(tt.text) == {"-"} and len(tt.text) >= 2), None
    )
    if dash is not None and (dash == 0 or _np_prefix(tagged, dash)):
        saw_dash = True
        working = _bslice(working, tagged[dash].token.span[1], _bytelen(working)).strip()
        if not working:
            res.heading = True
            return res
        tagged = _tag(working)

    # 3. full-sentence heading: a short bare noun phrase with no verbs,
    # numbers, or commas ("Chemical and Physical Properties of Magnesium.")
    word_count = sum(1 for tt in tagged if tt.token.kind == WORD)
    has_comma = any(tt.text == "," for tt in tagged)
    if not saw_dash and word_count <= 6 and not has_comma and _np_only(tagged):
        np = _last_np(working)
        if np is not None:
            ctx.np = np
            ctx.rival = False
            res.heading = True
            return res

    # 4. mixed and/or coordination is ambiguous; defer to the LLM rewriter
    conj_words = {tt.text.lower() for tt in tagged if tt.pos == CONJ}
    if "and" in conj_words and conj_words & {"or", "nor"}:
        res.lines.append(_finish(working))
        res.needs_assist = True
        return res

    finite = _finite_groups(tagged)
    if not finite:
        # fragment path: needs a usable heading entity
        if ctx.np is None or ctx.rival:
            return res
        candidates = _fragment_candidates(working, ctx.np)
        if candidates is None:
            res.lines.append(_finish(working))
            res.needs_assist = True
            return res
        res.candidates.extend(candidates)
        res.lines.extend(candidates)
        return res

    # 5. clause path
    main, promoted = _promote_parentheticals(working)
    main, repaired = _repair_copulas(main)

    units = _distribute_pp_coordination(main)
    if len(units) == 1:
        units = _split_clause_units(main)

    pieces = sorted(units + [(inner, pos) for pos, inner in promoted], key=lambda u: u[1])
    for unit, _pos in pieces:
        raw_line = unit
        t = _tag(unit)
        fin = _finite_groups(t)
        if fin:
            start = fin[0][0]
            pre = t[:start]
            pre_words = [tt for tt in pre if tt.token.kind in (WORD, NUMBER)]
            has_subject = any(tt.pos in (NOUN, PROPN, PRON) for tt in pre)
            lone_pron = (
                len(pre_words) == 1
                and pre_words[0].pos == PRON
                and pre_words[0].text.lower() in _RESOLVABLE_PRONOUNS
            )
            if lone_pron and ctx.np is not None and not ctx.rival:
                unit = _replace_token(unit, pre_words[0].token.span, ctx.np.text)
            elif not has_subject:
                if any(not _is_gap(tt) for tt in pre_words):
                    # dangling pre-verb material ("an also burn ...") marks
                    # damaged text the deterministic rules cannot repair
                    res.lines.append(_finish(raw_line))
                    res.needs_assist = True
                    continue
                if ctx.np is not None and not ctx.rival:
                    unit = ctx.np.text + " " + (unit[0].lower() + unit[1:] if unit else unit)
                elif ctx.rival:
                    continue
                # no heading scope: keep verbatim and let validation decide
        if repaired:
            unit = _fix_agreement(unit)
        unit = _finitize_participle(unit)
        res.candidates.append(_finish(unit))
        res.lines.append(_finish(raw_line))
    return res


# --------------------------------------------------------------------------
# passage-level extraction


@dataclass
class PassageExtraction:
    """Everything one passage yields for one entity."""

    statements: list[Statement]
    source_lines: list[tuple[str, ...]]
    degraded: bool = False


def _assist_rewrite(
    sentence: str,
    entity: NounPhrase | None,
    llm: ChatClient,
    config: FFFConfig,
) -> list[str]:
    prompts = load_prompts()["fff_assist"]
    entity_text = entity.text if entity is not None else "the subject of the passage"
    request = ChatRequest.build(
        prompts["system"],
        prompts["user"].format(entity=entity_text, sentence=sentence.strip()),
        model=config.model,
        temperature=config.temperature,
    )
    content = llm.chat(request).content.strip()
    if content.upper() == _NONE_SENTINEL:
        return []
    lines = []
    for line in content.splitlines():
        line = line.strip().lstrip("-*•").strip()
        if line and line.upper() != _NONE_SENTINEL:
            lines.append(line)
    return lines


def extract_passage(
    passage: str,
    passage_index: int,
    entity: NounPhrase | None = None,
    llm: ChatClient | None = None,
    config: FFFConfig | None = None,
    *,
    rivals: tuple[NounPhrase, ...] = (),
    provider: EmbeddingProvider | None = None,
    aliases: AliasTable | None = None,
) -> PassageExtraction:
    """Run the hybrid extraction over one passage for one focal entity."""
    config = config or FFFConfig()
    provider = provider or OfflineHashEmbedding()
    aliases = aliases or default_aliases()
    text = nlp.normalize_escapes(passage)
    passage_tokens = {t.text for t in nlp.tokenize(text)}

    ctx = _Context()
    out = PassageExtraction(statements=[], source_lines=[])
    seen: set[str] = set()

    def accept(candidate: str, sent_span: tuple[int, int]) -> int:
        key = candidate.casefold()
        if key in seen:
            return 0
        if not _numbers_ok(candidate, passage_tokens):
            log.info("dropping statement with numbers missing from source: %r", candidate)
            return 0
        if rivals and any(_mentions(_word_lemmas(candidate), r) for r in rivals):
            log.info("dropping statement about a rival entity: %r", candidate)
            return 0
        verdict = validate_statement(
            candidate, entity, provider=provider, aliases=aliases, config=config
        )
        if not verdict.valid:
            log.info("rejecting %r: %s", candidate, "; ".join(verdict.violations))
            return 0
        subject = _first_np(candidate) or NounPhrase(
            text=candidate.split()[0], head=candidate.split()[0].lower(), span=(0, 0)
        )
        out.statements.append(
            Statement(
                text=candidate,
                subject_np=subject,
                source_passage_index=passage_index,
                source_span=sent_span,
            )
        )
        seen.add(key)
        return 1

    for sent, span in nlp.split_sentences(text):
        sent_lemmas = _word_lemmas(sent)
        if rivals and any(_mentions(sent_lemmas, r) for r in rivals):
            # a rival-entity sentence may still be a heading that scopes the
            # fragments after it; capture that scope, then drop the sentence
            probe = _Context()
            _atomize_sentence(sent, probe, entity)
            if probe.np is not None:
                ctx.np, ctx.rival = probe.np, True
            continue

        res = _atomize_sentence(sent, ctx, entity)
        if res.heading:
            if entity is not None and ctx.np is not None:
                ctx.rival = not (
                    are_coreferent(ctx.np, entity, aliases)
                    or _mentions(_word_lemmas(ctx.np.text), entity)
                )
            continue

        use_assist = res.needs_assist
        accepted = 0
        if res.candidates and not use_assist:
            ok = all(
                _numbers_ok(c, passage_tokens)
                and validate_statement(
                    c, entity, provider=provider, aliases=aliases, config=config
                ).valid
                for c in res.candidates
            )
            if ok:
                for cand in res.candidates:
                    accepted += accept(cand, span)
            else:
                use_assist = True
        elif not res.candidates and not use_assist:
            # nothing extractable and no heading scope to lean on
            use_assist = ctx.np is None and not ctx.rival

        if not accepted and use_assist:
            eligible = (
                entity is None
                or _mentions(sent_lemmas, entity)
                or (
                    ctx.np is not None
                    and not ctx.rival
                    and (
                        are_coreferent(ctx.np, entity, aliases)
                        or _mentions(_word_lemmas(ctx.np.text), entity)
                    )
                )
            )
            if eligible and config.use_llm and llm is not None:
                try:
                    lines = _assist_rewrite(sent, entity, llm, config)
                except LLMError as err:
                    log.warning("LLM assist unavailable for %r: %s", sent[:60], err)
                    out.degraded = True
                    lines = []
                for line in lines:
                    accepted += accept(_finish(line, capitalize=False), span)

        if accepted:
            out.source_lines.append(tuple(res.lines) if res.lines else (_finish(sent),))
    return out


def passage_to_statements(
    passage: str,
    passage_index: int,
    entity: NounPhrase | None = None,
    llm: ChatClient | None = None,
    config: FFFConfig | None = None,
    **kwargs,
) -> list[Statement]:
    """Public wrapper returning just the validated statements."""
    return extract_passage(passage, passage_index, entity, llm, config, **kwargs).statements


# --------------------------------------------------------------------------
# packet assembly


def _select_entity(query: AtomicQuery) -> tuple[NounPhrase | None, int]:
    """The focal phrase naming the entity: fewest content words wins, with the
    later span breaking ties ("calcium" over "chemical properties")."""
    if not query.focal_nps:
        return None, -1
    scored = [
        (len(np.content_words()) or len(np.text.split()), -np.span[0], i)
        for i, np in enumerate(query.focal_nps)
    ]
    _, _, idx = min(scored)
    return query.focal_nps[idx], idx


def build_fact_sets(
    passages: list[str],
    atomic_queries: list[AtomicQuery],
    llm: ChatClient | None = None,
    config: FFFConfig | None = None,
    *,
    provider: EmbeddingProvider | None = None,
    aliases: AliasTable | None = None,
) -> dict[AtomicQuery, QueryPacket]:
    """Pair every atomic query with the fact sections about its focal entity.

    Queries sharing an entity share the per-passage extraction; the cache is
    keyed by (normalized entity, passage index) and synchronized so concurrent
    callers never duplicate LLM traffic.
    """
    config = config or FFFConfig()
    aliases = aliases or default_aliases()
    cache: dict[tuple[str, int], PassageExtraction] = {}
    lock = threading.Lock()

    def cached_extract(
        entity: NounPhrase | None, rivals: tuple[NounPhrase, ...], idx: int, passage: str
    ) -> PassageExtraction:
        key = (normalize_np_text(entity.text) if entity else "", idx)
        with lock:
            hit = cache.get(key)
        if hit is not None:
            return hit
        result = extract_passage(
            passage,
            idx + 1,
            entity,
            llm,
            config,
            rivals=rivals,
            provider=provider,
            aliases=aliases,
        )
        with lock:
            return cache.setdefault(key, result)

    packets: dict[AtomicQuery, QueryPacket] = {}
    for query in atomic_queries:
        entity, pos = _select_entity(query)
        rivals: tuple[NounPhrase, ...] = ()
        if entity is not None:
            dedup: dict[str, NounPhrase] = {}
            for other in atomic_queries:
                if pos < len(other.focal_nps):
                    np = other.focal_nps[pos]
                    if not are_coreferent(np, entity, aliases):
                        dedup.setdefault(normalize_np_text(np.text), np)
            rivals = tuple(dedup.values())

        sections: list[Section] = []
        degraded = False
        for idx, passage in enumerate(passages):
            extraction = cached_extract(entity, rivals, idx, passage)
            degraded = degraded or extraction.degraded
            if extraction.statements:
                sections.append(
                    Section(
                        index=len(sections) + 1,
                        statements=tuple(extraction.statements),
                        source_lines=tuple(extraction.source_lines),
                        source_passage_index=idx + 1,
                    )
                )
        fact_set = FactSet(entity=entity, sections=tuple(sections), degraded=degraded)
        if fact_set.empty:
            log.warning("no supporting facts extracted for query %r", query.text)
        packets[query] = QueryPacket(atomic_query=query, fact_set=fact_set)
    return packets
