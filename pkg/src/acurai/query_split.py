"""Split multi-referent queries into atomic single-referent queries.

"What are the chemical and physical properties of calcium and magnesium?"
asks four questions at once. Each collision group found in the query becomes
an axis of a cartesian product; every atomic query keeps exactly one member
per group, with the surrounding syntax (determiners, coordination) repaired.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import nlp
from .collision import (
    EMBEDDING_SIMILARITY,
    ID_LIKE_SPAN,
    CollisionPair,
    EmbeddingProvider,
    detect_collisions,
    normalize_np_text,
)
from .nlp import NounPhrase

#: Largest number of atomic queries produced for one input. A query with more
#: than four binary collision groups is almost certainly mis-parsed; capping
#: keeps downstream fan-out (one LLM call per atomic query) bounded.
MAX_ATOMIC_QUERIES = 16

_COORD_GAP_RE = re.compile(r"^[\s,]*(?:and|or|nor|&|versus|vs\.?)?[\s,]*$", re.IGNORECASE)

#: Collision reasons that denote alternate referents worth splitting over.
#: Entity/common-noun overlaps mark spans for placeholder protection instead.
SPLITTING_REASONS = frozenset({EMBEDDING_SIMILARITY, ID_LIKE_SPAN})


class SlotNotFoundError(ValueError):
    """The collision pair's span could not be located in the query text."""


@dataclass(frozen=True)
class AtomicQuery:
    text: str
    #: one chosen member per collision group of the parent, in group order
    focal_nps: tuple[NounPhrase, ...] = ()
    parent_query: str = ""
    index: int = 0
    #: True when span surgery failed and the template fallback was used
    fallback: bool = False

    @property
    def choices(self) -> tuple[str, ...]:
        return tuple(normalize_np_text(n.text) for n in self.focal_nps)


@dataclass(frozen=True)
class SplitResult:
    original: str
    collisions: tuple[CollisionPair, ...]
    queries: tuple[AtomicQuery, ...]
    truncated: bool = False

    @property
    def was_split(self) -> bool:
        return len(self.queries) > 1


@dataclass(frozen=True)
class _Group:
    members: tuple[NounPhrase, ...]
    similarity: float  # strongest pair similarity inside the group


def _collision_groups(pairs: Sequence[CollisionPair]) -> list[_Group]:
    """Union collision pairs into groups of mutually colliding NPs."""
    parent: dict[str, str] = {}
    members: dict[str, NounPhrase] = {}

    def find(key: str) -> str:
        while parent[key] != key:
            parent[key] = parent[parent[key]]
            key = parent[key]
        return key

    for pair in pairs:
        for np_ in (pair.left, pair.right):
            key = normalize_np_text(np_.text)
            parent.setdefault(key, key)
            members.setdefault(key, np_)
        left, right = find(normalize_np_text(pair.left.text)), find(normalize_np_text(pair.right.text))
        if left != right:
            parent[right] = left

    grouped: dict[str, list[NounPhrase]] = {}
    for key, np_ in members.items():
        grouped.setdefault(find(key), []).append(np_)

    best: dict[str, float] = {}
    for pair in pairs:
        root = find(normalize_np_text(pair.left.text))
        best[root] = max(best.get(root, 0.0), pair.similarity)

    groups = [
        _Group(tuple(sorted(nps, key=lambda n: (n.span, n.text))), best.get(root, 0.0))
        for root, nps in grouped.items()
    ]
    groups.sort(key=lambda g: g.members[0].span)
    return groups


def _leading_determiner(text: str) -> str | None:
    first = text.split(" ", 1)[0]
    if first.lower() in ("the", "a", "an", "this", "that", "these", "those"):
        return first
    return None


def _group_edits(query: str, group: Sequence[NounPhrase], chosen: NounPhrase) -> list[tuple[int, int, str]]:
    """Byte-span edits that keep ``chosen`` and remove the other members."""
    raw = query.encode("utf-8")
    spans = sorted({np_.span for np_ in group})
    for lo, hi in spans:
        if not 0 <= lo <= hi <= len(raw):
            raise SlotNotFoundError(f"collision span {lo}:{hi} outside query")
    if len(spans) == 1:
        # coordination under one head: "the chemical and physical properties"
        lo, hi = spans[0]
        parent_text = raw[lo:hi].decode("utf-8")
        chunk_words = {nlp.lemma(w) for w in re.findall(r"[a-z0-9-]+", parent_text.casefold())}
        if chosen.head not in chunk_words and chosen.text.casefold() not in parent_text.casefold():
            raise SlotNotFoundError(f"{chosen.text!r} not found at its recorded span")
        det = _leading_determiner(parent_text)
        replacement = chosen.text
        if det and _leading_determiner(chosen.text) is None:
            replacement = f"{det} {replacement}"
        return [(lo, hi, replacement)]
    for np_ in group:
        lo, hi = np_.span
        if raw[lo:hi].decode("utf-8") != np_.text:
            raise SlotNotFoundError(f"{np_.text!r} not found at its recorded span")
    gaps_are_coordination = all(
        _COORD_GAP_RE.match(raw[prev_hi:next_lo].decode("utf-8"))
        for (_, prev_hi), (next_lo, _) in zip(spans, spans[1:])
    )
    if gaps_are_coordination:
        return [(spans[0][0], spans[-1][1], chosen.text)]
    # scattered mentions: substitute each rival with the chosen text
    return [
        (np_.span[0], np_.span[1], chosen.text)
        for np_ in group
        if np_.span != chosen.span
    ]


def _apply_edits(query: str, edits: list[tuple[int, int, str]]) -> str:
    raw = query.encode("utf-8")
    edits = sorted(edits, key=lambda e: e[0])
    for (_, prev_hi, _), (next_lo, _, _) in zip(edits, edits[1:]):
        if next_lo < prev_hi:
            raise SlotNotFoundError("overlapping collision regions")
    out: list[bytes] = []
    cursor = 0
    for lo, hi, replacement in edits:
        out.append(raw[cursor:lo])
        out.append(replacement.encode("utf-8"))
        cursor = hi
    out.append(raw[cursor:])
    text = b"".join(out).decode("utf-8")
    return re.sub(r"[ \t]{2,}", " ", text).strip()


def rewrite_with_member(query: str, pair: CollisionPair, member: NounPhrase) -> str:
    """Rewrite ``query`` keeping ``member`` and dropping its collision rival.

    Raises :class:`SlotNotFoundError` when the pair's spans do not line up
    with the query text (caller falls back to the template form).
    """
    if normalize_np_text(member.text) not in (
        normalize_np_text(pair.left.text),
        normalize_np_text(pair.right.text),
    ):
        raise ValueError(f"{member.text!r} is not a member of the pair")
    return _apply_edits(query, _group_edits(query, [pair.left, pair.right], member))


def _template_query(members: Sequence[NounPhrase]) -> str:
    listed = " and ".join(m.text for m in members)
    return f"Tell me about {listed}."


def split_query(
    query: str,
    pairs: Sequence[CollisionPair] | None = None,
    provider: EmbeddingProvider | None = None,
    cap: int = MAX_ATOMIC_QUERIES,
) -> SplitResult:
    """Split ``query`` into one atomic query per collision-group combination.

    A collision-free query round-trips: the result holds the original text as
    its only atomic query. When the cartesian product would exceed ``cap``,
    combinations are enumerated with the strongest-similarity groups varying
    first and only the first ``cap`` kept, marking the result truncated.
    """
    if pairs is None:
        nps = [m for n in nlp.extract_noun_phrases(query) for m in nlp.expand_coordination(n)]
        pairs = detect_collisions(nps, provider=provider)
    splitting = [p for p in pairs if p.reason in SPLITTING_REASONS]
    groups = _collision_groups(splitting)
    if not groups:
        return SplitResult(query, tuple(pairs), (AtomicQuery(query, (), query, 0),))

    combos = product(*(g.members for g in groups))
    total = 1
    for g in groups:
        total *= len(g.members)
    if total > cap:
        ranked = sorted(groups, key=lambda g: -g.similarity)
        order = {id(g): i for i, g in enumerate(groups)}
        combos = (
            tuple(choice for _, choice in sorted(zip(ranked, ranked_combo), key=lambda t: order[id(t[0])]))
            for ranked_combo in product(*(g.members for g in ranked))
        )

    queries: list[AtomicQuery] = []
    truncated = False
    for combo in combos:
        if len(queries) >= cap:
            truncated = True
            break
        try:
            edits: list[tuple[int, int, str]] = []
            for group, chosen in zip(groups, combo):
                edits.extend(_group_edits(query, group.members, chosen))
            text = _apply_edits(query, edits)
            fallback = False
        except SlotNotFoundError:
            text = _template_query(combo)
            fallback = True
        queries.append(AtomicQuery(text, tuple(combo), query, len(queries), fallback))
    return SplitResult(query, tuple(pairs), tuple(queries), truncated)
