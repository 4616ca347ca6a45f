"""Noun-phrase collision detection.

A collision is a pair of noun phrases that are semantically similar (high
embedding cosine) yet referentially distinct — "calcium" vs "magnesium",
"chemical properties" vs "physical properties". Coreferent pairs ("car" vs
"automobile" via the alias table, "the chemical properties" vs "chemical
properties") are never collisions.
"""
from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from typing import Protocol, Sequence

import numpy as np
import requests

from . import nlp
from .nlp import NounPhrase

EMBEDDING_SIMILARITY = "embedding-similarity"
ID_LIKE_SPAN = "id-like-span"
ENTITY_COMMON_NOUN = "entity-common-noun-overlap"

#: Cosine threshold above which two non-coreferent NPs collide. Chosen so the
#: bundled offline provider cleanly separates positive pairs from unrelated
#: fixture NPs; real embedding services may want their own value via config.
DEFAULT_THRESHOLD = 0.75

EMBED_DIM = 64

_DETERMINERS = {"the", "a", "an", "this", "that", "these", "those"}
_STOP_OVERLAP = {"the", "and", "for", "with", "inc", "llc", "ltd", "corp", "co"}

_ID_LIKE_RE = re.compile(
    r"^(?:[A-Za-z]{2,8}[\s-])?"  # optional tag word: "PMID 28193456", "part A-1234"
    r"(?:[A-Za-z]{1,4}-?\d{4,}|\d{5,}|[A-Za-z]+\d+(?:-[A-Za-z0-9]+)+)$"
)
_WORD_RE = re.compile(r"[a-z0-9]+(?:-[a-z0-9]+)*")


@dataclass(frozen=True)
class CollisionPair:
    left: NounPhrase
    right: NounPhrase
    similarity: float
    reason: str  # one of the module-level reason constants

    def key(self) -> tuple[str, str]:
        return (normalize_np_text(self.left.text), normalize_np_text(self.right.text))


class EmbeddingProvider(Protocol):
    provider_id: str

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def normalize_np_text(text: str) -> str:
    """Casefold, drop leading determiners and possessive markers, squeeze spaces."""
    words = _WORD_RE.findall(text.casefold().replace("'s", " "))
    while words and words[0] in _DETERMINERS:
        words = words[1:]
    return " ".join(words)


# ---------------------------------------------------------------------------
# Embedding providers
# ---------------------------------------------------------------------------

# Character n-grams are weighted toward the end of the word: derivational
# suffixes ("-ium", "-ical") carry most of the category signal this detector
# needs quantity, and shared full words dominate automatically because every
# gram of the word matches.
_NGRAM_SIZES = (2, 3, 4)
_SUFFIX_DECAY = 2.0


def _word_features(word: str) -> dict[str, float]:
    padded = f"^{word}$"
    feats: dict[str, float] = {}
    for n in _NGRAM_SIZES:
        if len(padded) < n:
            continue
        for i in range(len(padded) - n + 1):
            gram = padded[i : i + n]
            dist_from_end = len(padded) - (i + n)
            weight = 1.0 / (1.0 + dist_from_end) ** _SUFFIX_DECAY
            feats[gram] = feats.get(gram, 0.0) + weight
    return feats


def _bucket(gram: str) -> tuple[int, float]:
    digest = hashlib.sha256(gram.encode("utf-8")).digest()
    index = int.from_bytes(digest[:4], "big") % EMBED_DIM
    sign = 1.0 if digest[4] & 1 else -1.0
    return index, sign


class OfflineHashEmbedding:
    """Deterministic offline provider: hashed character n-grams, 64 dims.

    Byte-identical across platforms (hashing via sha256, float64 arithmetic),
    so collision fixtures replay exactly.
    """

    provider_id = "offline-hash-v1"

    def __init__(self, dim: int = EMBED_DIM):
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            words = [w for w in _WORD_RE.findall(text.casefold()) if w not in _DETERMINERS]
            for word in words:
                for gram, weight in _word_features(word).items():
                    index, sign = _bucket(gram)
                    out[row, index] += sign * weight
            norm = np.linalg.norm(out[row])
            if norm > 1e-10:
                out[row] /= norm
        return out


class EmbeddingError(RuntimeError):
    """Raised when an embedding backend fails after retries."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class HTTPEmbeddingProvider:
    """Client for an embeddings endpoint speaking the common JSON shape.

    POST {base_url} with ``{"input": [...], "model": ...}``; expects
    ``{"data": [{"embedding": [...]}, ...]}`` in input order.
    """

    def __init__(
        self,
        base_url: str,
        model: str = "text-embedding-3-small",
        api_key: str | None = None,
        timeout: float = 30.0,
        retries: int = 2,
        session: requests.Session | None = None,
    ):
        import os

        self.base_url = base_url
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("ACURAI_EMBED_API_KEY")
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()
        self.provider_id = f"http:{base_url}:{model}"

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {"input": list(texts), "model": self.model}
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self.session.post(self.base_url, json=payload, headers=headers, timeout=self.timeout)
                if resp.status_code in (429,) or resp.status_code >= 500:
                    raise EmbeddingError(f"backend status {resp.status_code}", attempt + 1)
                resp.raise_for_status()
                data = resp.json()["data"]
                return np.asarray([item["embedding"] for item in data], dtype=np.float64)
            except (requests.RequestException, KeyError, ValueError, EmbeddingError) as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(0.25 * 2**attempt)
        raise EmbeddingError(f"embedding request failed: {last_error}", self.retries + 1)


# ---------------------------------------------------------------------------
# Alias table
# ---------------------------------------------------------------------------


class AliasTable:
    """Synonym/abbreviation groups; members of a group are coreferent."""

    def __init__(self, pairs: Sequence[tuple[str, str]] = ()):
        self._canonical: dict[str, str] = {}
        for a, b in pairs:
            self.add(a, b)

    def add(self, a: str, b: str) -> None:
        a, b = normalize_np_text(a), normalize_np_text(b)
        root_a, root_b = self._canonical.get(a, a), self._canonical.get(b, b)
        target = min(root_a, root_b)
        for key, value in list(self._canonical.items()):
            if value in (root_a, root_b):
                self._canonical[key] = target
        self._canonical[a] = target
        self._canonical[b] = target

    def canonical(self, text: str) -> str:
        norm = normalize_np_text(text)
        return self._canonical.get(norm, norm)

    def same_group(self, a: str, b: str) -> bool:
        return self.canonical(a) == self.canonical(b)

    @classmethod
    def default(cls) -> "AliasTable":
        data = resources.files("acurai.resources").joinpath("aliases.tsv").read_text("utf-8")
        pairs = []
        for line in data.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            for other in parts[1:]:
                pairs.append((parts[0], other))
        return cls(pairs)


_DEFAULT_ALIASES: AliasTable | None = None
_alias_lock = threading.Lock()


def default_aliases() -> AliasTable:
    global _DEFAULT_ALIASES
    with _alias_lock:
        if _DEFAULT_ALIASES is None:
            _DEFAULT_ALIASES = AliasTable.default()
        return _DEFAULT_ALIASES


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-10 or nb < 1e-10:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def _content_lemmas(np_: NounPhrase) -> set[str]:
    words = _WORD_RE.findall(normalize_np_text(np_.text))
    return {nlp.lemma(w) for w in words}


def are_coreferent(a: NounPhrase | str, b: NounPhrase | str, aliases: AliasTable | None = None) -> bool:
    """True when two NPs plausibly denote the same thing.

    Checks normalized-text equality, the alias table, and head-lemma equality
    with compatible (subset) modifier sets — so "the chemical properties" and
    "chemical properties" are coreferent while "chemical properties" and
    "physical properties" are not.
    """
    aliases = aliases or default_aliases()
    text_a = a.text if isinstance(a, NounPhrase) else a
    text_b = b.text if isinstance(b, NounPhrase) else b
    if normalize_np_text(text_a) == normalize_np_text(text_b):
        return True
    if aliases.same_group(text_a, text_b):
        return True
    np_a = a if isinstance(a, NounPhrase) else _as_np(text_a)
    np_b = b if isinstance(b, NounPhrase) else _as_np(text_b)
    if np_a.head == np_b.head:
        mods_a = {nlp.lemma(m) for m in np_a.modifiers}
        mods_b = {nlp.lemma(m) for m in np_b.modifiers}
        return mods_a <= mods_b or mods_b <= mods_a
    return False


def _as_np(text: str) -> NounPhrase:
    nps = nlp.extract_noun_phrases(text)
    if len(nps) == 1:
        return nps[0]
    words = text.split()
    return NounPhrase(text=text, head=nlp.lemma(words[-1]) if words else text, span=(0, 0), modifiers=tuple(words[:-1]))


class EmbeddingCache:
    """Thread-safe memo of embeddings keyed by (provider_id, text)."""

    def __init__(self) -> None:
        self._store: dict[tuple[str, str], np.ndarray] = {}
        self._lock = threading.Lock()

    def get(self, key: tuple[str, str]) -> np.ndarray | None:
        with self._lock:
            return self._store.get(key)

    def put(self, key: tuple[str, str], value: np.ndarray) -> None:
        with self._lock:
            self._store[key] = value

    def __len__(self) -> int:
        return len(self._store)


_shared_cache = EmbeddingCache()


def embed_batch(
    texts: Sequence[str],
    provider: EmbeddingProvider,
    cache: EmbeddingCache | None = None,
) -> list[np.ndarray]:
    """Embed texts, preserving order, memoizing per (provider, text)."""
    cache = cache if cache is not None else _shared_cache
    out: list[np.ndarray | None] = [None] * len(texts)
    missing: list[int] = []
    for i, text in enumerate(texts):
        hit = cache.get((provider.provider_id, text))
        if hit is not None:
            out[i] = hit
        else:
            missing.append(i)
    if missing:
        fresh = provider.embed([texts[i] for i in missing])
        for j, i in enumerate(missing):
            vec = np.asarray(fresh[j], dtype=np.float64)
            cache.put((provider.provider_id, texts[i]), vec)
            out[i] = vec
    return out  # type: ignore[return-value]


def is_id_like(text: str) -> bool:
    return bool(_ID_LIKE_RE.match(text.strip()))


def _shares_entity_word(a: NounPhrase, b: NounPhrase) -> bool:
    a_proper = any(pos == nlp.PROPN for _, pos in a.tags)
    b_proper = any(pos == nlp.PROPN for _, pos in b.tags)
    if a_proper == b_proper:
        return False
    words_a = {w for w in _WORD_RE.findall(a.text.casefold()) if len(w) >= 3 and w not in _STOP_OVERLAP}
    words_b = {w for w in _WORD_RE.findall(b.text.casefold()) if len(w) >= 3 and w not in _STOP_OVERLAP}
    return bool(words_a & words_b)


def detect_collisions(
    nps: Sequence[NounPhrase],
    provider: EmbeddingProvider | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    aliases: AliasTable | None = None,
    cache: EmbeddingCache | None = None,
) -> list[CollisionPair]:
    """Find collision pairs among coordination-expanded NPs.

    Pairs are ordered by descending similarity, ties broken by span order.
    The output is invariant to permutations of ``nps`` up to that ordering.
    """
    provider = provider or OfflineHashEmbedding()
    aliases = aliases or default_aliases()

    unique: dict[str, NounPhrase] = {}
    for np_ in sorted(nps, key=lambda n: (n.span, n.text)):
        unique.setdefault(normalize_np_text(np_.text), np_)
    items = [(k, v) for k, v in unique.items() if k]
    vectors = embed_batch([k for k, _ in items], provider, cache)
    by_key = {k: vec for (k, _), vec in zip(items, vectors)}

    pairs: list[CollisionPair] = []
    for (key_a, np_a), (key_b, np_b) in combinations(items, 2):
        if are_coreferent(np_a, np_b, aliases):
            continue
        sim = cosine_similarity(by_key[key_a], by_key[key_b])
        if is_id_like(np_a.text) and is_id_like(np_b.text):
            pairs.append(CollisionPair(np_a, np_b, sim, ID_LIKE_SPAN))
        elif sim >= threshold:
            pairs.append(CollisionPair(np_a, np_b, sim, EMBEDDING_SIMILARITY))
        elif _shares_entity_word(np_a, np_b):
            pairs.append(CollisionPair(np_a, np_b, sim, ENTITY_COMMON_NOUN))
    pairs.sort(key=lambda p: (-p.similarity, p.left.span, p.right.span))
    return pairs
