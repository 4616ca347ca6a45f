"""Placeholder masking for collision-prone spans.

IDs, citations, part numbers, and entity names that collide with common nouns
are replaced by opaque single-token placeholders before any text reaches the
LLM, then mapped back into the response afterward.  The placeholder alphabet
(``QQ`` + capital letters) never occurs in natural English, so a placeholder
surviving into a final response is always detectable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import nlp
from .collision import (
    DEFAULT_THRESHOLD,
    ENTITY_COMMON_NOUN,
    AliasTable,
    EmbeddingProvider,
    default_aliases,
    detect_collisions,
)

ENTITY_RENAME = "entity-rename"
REFERENCE = "reference"
ID = "id"
CITATION = "citation"
KINDS = (ENTITY_RENAME, REFERENCE, ID, CITATION)

#: Anything that looks like one of our placeholders, known or not.
PLACEHOLDER_RE = re.compile(r"QQ[A-Z]+")

_CITATION_RE = re.compile(r"\[\d{1,4}\]")
_PMID_RE = re.compile(r"(?:PMID|PubMed)[\s:#]{0,3}(\d{7,8})", re.IGNORECASE)
_DOI_RE = re.compile(r"\b10\.\d{4,9}/[^\s\"'<>,;]+")
#: Dashed letter-digit mixes ("XR-2000-B"); two digits minimum so ordinary
#: hyphenations ("GPT-4", "silver-grey") pass through untouched.
_PART_RE = re.compile(r"\b(?=\S*[A-Za-z])(?=(?:\S*\d){2})[A-Za-z0-9]+(?:-[A-Za-z0-9]+)+\b")


def _alphabetic(n: int) -> str:
    """Base-26 rendering of ``n`` with digits A..Z (1 -> "B", 26 -> "BA")."""
    digits = []
    while True:
        n, rem = divmod(n, 26)
        digits.append(chr(ord("A") + rem))
        if n == 0:
            break
    return "".join(reversed(digits))


@dataclass(frozen=True)
class PlaceholderEntry:
    placeholder: str
    original: str
    kind: str


@dataclass
class PlaceholderTable:
    """Ordered, bijective placeholder ledger for one pipeline run."""

    table_id: str = ""
    entries: list[PlaceholderEntry] = field(default_factory=list)
    _counter: int = 1

    def _by_original(self) -> dict[str, PlaceholderEntry]:
        return {e.original: e for e in self.entries}

    def _by_placeholder(self) -> dict[str, PlaceholderEntry]:
        return {e.placeholder: e for e in self.entries}

    def add(self, original: str, kind: str) -> str:
        """Register ``original`` and return its placeholder; an original seen
        before reuses its existing placeholder."""
        if kind not in KINDS:
            raise ValueError(f"unknown placeholder kind {kind!r}")
        existing = self._by_original().get(original)
        if existing is not None:
            return existing.placeholder
        placeholder = "QQ" + _alphabetic(self._counter)
        self._counter += 1
        self.entries.append(PlaceholderEntry(placeholder, original, kind))
        return placeholder

    def is_bijective(self) -> bool:
        placeholders = [e.placeholder for e in self.entries]
        originals = [e.original for e in self.entries]
        return len(set(placeholders)) == len(placeholders) and len(set(originals)) == len(originals)

    def to_json(self) -> dict:
        return {
            "id": self.table_id,
            "entries": [
                {"ph": e.placeholder, "orig": e.original, "kind": e.kind} for e in self.entries
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PlaceholderTable":
        table = cls(table_id=data.get("id", ""))
        for row in data.get("entries", []):
            table.entries.append(PlaceholderEntry(row["ph"], row["orig"], row["kind"]))
        table._counter = len(table.entries) + 1
        return table


@dataclass(frozen=True)
class ProtectedSpan:
    """A byte range slated for masking, with the rule that flagged it."""

    span: tuple[int, int]
    kind: str
    text: str


def _byte_span(text: str, lo: int, hi: int) -> tuple[int, int]:
    head = len(text[:lo].encode("utf-8"))
    return head, head + len(text[lo:hi].encode("utf-8"))


def detect_protected_spans(
    text: str,
    *,
    provider: EmbeddingProvider | None = None,
    aliases: AliasTable | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ProtectedSpan]:
    """Find collision-prone spans: citations, PubMed-style IDs, DOIs, part
    numbers, and entity names that overlap a common noun elsewhere in the
    text.  Returned spans are non-overlapping; on overlap the leftmost span
    wins, with the longer span breaking ties.
    """
    candidates: list[ProtectedSpan] = []
    for m in _CITATION_RE.finditer(text):
        candidates.append(ProtectedSpan(_byte_span(text, m.start(), m.end()), CITATION, m.group(0)))
    for m in _PMID_RE.finditer(text):
        candidates.append(ProtectedSpan(_byte_span(text, m.start(1), m.end(1)), ID, m.group(1)))
    for m in _DOI_RE.finditer(text):
        matched = m.group(0).rstrip(".,;:")
        candidates.append(
            ProtectedSpan(_byte_span(text, m.start(), m.start() + len(matched)), REFERENCE, matched)
        )
    for m in _PART_RE.finditer(text):
        candidates.append(ProtectedSpan(_byte_span(text, m.start(), m.end()), ID, m.group(0)))

    aliases = aliases or default_aliases()
    nps = nlp.extract_noun_phrases(text)
    pairs = detect_collisions(nps, provider=provider, threshold=threshold, aliases=aliases)
    renamed: set[str] = set()
    for pair in pairs:
        if pair.reason != ENTITY_COMMON_NOUN:
            continue
        proper = next(
            (np for np in (pair.left, pair.right) if any(pos == nlp.PROPN for _, pos in np.tags)),
            None,
        )
        if proper is None or proper.text in renamed:
            continue
        renamed.add(proper.text)
        # mask every occurrence of the entity's surface form, not just the
        # one the collision detector happened to report
        for m in re.finditer(re.escape(proper.text), text):
            candidates.append(
                ProtectedSpan(_byte_span(text, m.start(), m.end()), ENTITY_RENAME, m.group(0))
            )

    candidates.sort(key=lambda s: (s.span[0], -(s.span[1] - s.span[0])))
    chosen: list[ProtectedSpan] = []
    cursor = -1
    for span in candidates:
        if span.span[0] > cursor:
            chosen.append(span)
            cursor = span.span[1] - 1
    return chosen


def apply_placeholders(text: str, spans: list[ProtectedSpan], table: PlaceholderTable) -> str:
    """Replace ``spans`` with placeholders from ``table``, appending new
    entries as needed.  Replacement runs right-to-left so earlier offsets
    never shift."""
    data = text.encode("utf-8")
    for span in spans:
        if not (0 <= span.span[0] <= span.span[1] <= len(data)):
            raise ValueError(f"span {span.span} out of bounds for text of {len(data)} bytes")
    for span in sorted(spans, key=lambda s: s.span[0], reverse=True):
        original = data[span.span[0] : span.span[1]].decode("utf-8")
        placeholder = table.add(original, span.kind)
        data = data[: span.span[0]] + placeholder.encode("utf-8") + data[span.span[1] :]
    return data.decode("utf-8")


def mask_text(
    text: str,
    table: PlaceholderTable,
    *,
    provider: EmbeddingProvider | None = None,
    aliases: AliasTable | None = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> str:
    """Detect and mask in one step (what the pipeline applies to every piece
    of text the LLM will see)."""
    spans = detect_protected_spans(text, provider=provider, aliases=aliases, threshold=threshold)
    return apply_placeholders(text, spans, table)


@dataclass(frozen=True)
class RemapReport:
    substitutions: dict[str, int]
    unknown: tuple[str, ...]

    @property
    def degraded(self) -> bool:
        """An unknown placeholder-shaped token means the LLM invented or
        mutated a placeholder — a faithfulness failure to surface."""
        return bool(self.unknown)


def remap(response: str, table: PlaceholderTable) -> tuple[str, RemapReport]:
    """Replace every known placeholder with its original text."""
    by_placeholder = {e.placeholder: e.original for e in table.entries}
    counts: dict[str, int] = {}
    unknown: list[str] = []

    def substitute(match: re.Match) -> str:
        token = match.group(0)
        original = by_placeholder.get(token)
        if original is None:
            if token not in unknown:
                unknown.append(token)
            return token
        counts[token] = counts.get(token, 0) + 1
        return original

    restored = PLACEHOLDER_RE.sub(substitute, response)
    return restored, RemapReport(substitutions=counts, unknown=tuple(unknown))
