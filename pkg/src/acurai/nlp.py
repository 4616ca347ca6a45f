"""Deterministic tokenization, sentence splitting, tagging, and noun-phrase chunking.

Everything in this module is rule-based and offline. Spans are byte offsets
into the UTF-8 encoding of the source string so that fixtures hash identically
across platforms; tokens never split a code point.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

# Token kinds.
WORD = "word"
NUMBER = "number"
PUNCT = "punctuation"
SYMBOL = "symbol"
UNIT = "whitespace-delimited-unit"

# POS tags.
NOUN = "noun"
PROPN = "proper-noun"
ADJ = "adjective"
DET = "determiner"
VERB = "verb"
PRON = "pronoun"
PREP = "preposition"
CONJ = "conjunction"
OTHER = "other"

# Numbers first so "840" wins over punctuating the decimal point; "1700s" and
# "18th" stay single tokens. A degree sign glued to letters ("°C") is one
# symbol token. Words keep interior hyphens ("silver-grey").
_TOKEN_RE = re.compile(
    r"""
    \d+(?:\.\d+)?(?:st|nd|rd|th|s)?   # 840  7.25  1700s  18th
    | °[A-Za-z]+1?                    # °C  °F
    | [A-Za-z]+(?:-[A-Za-z0-9]+)*(?:'[A-Za-z]+)?  # words, hyphens, ids, clitics
    | …
    | -{2,}
    | [^\sA-Za-z0-9]                  # single punctuation / symbol char
    """,
    re.VERBOSE,
)

_PUNCT_CHARS = set(".,;:!?()[]{}\"'“”‘’--—–&…*")
_CLITIC_RE = re.compile(r"^([A-Za-z]+(?:-[A-Za-z]+)*)('[sS])$")

# Sentence boundaries: every ., ! or ? ends a sentence unless it sits inside a
# decimal number or follows a known abbreviation. This deliberately splits
# run-together passage text like "calcium.These" and "air.an".
_ABBREVIATIONS = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc",
    "e.g", "i.e", "fig", "no", "inc", "ltd", "co", "approx",
}

# Escaped-source cleanup: RAGTruth passages carry literal "\u00b0" escapes and
# backslashed carets ("m\^3").
_UESC_RE = re.compile(r"\\u([0-9a-fA-F]{4})")
_WESC_RE = re.compile(r"\\([\^%$#&_{}])")


@dataclass(frozen=True)
class Token:
    text: str
    kind: str
    span: tuple[int, int]  # byte offsets into the UTF-8 source


@dataclass(frozen=True)
class TaggedToken:
    token: Token
    pos: str

    @property
    def text(self) -> str:
        return self.token.text


@dataclass(frozen=True)
class NounPhrase:
    """A base noun phrase.

    ``text`` is the verbatim source substring for ``span`` when produced by
    :func:`extract_noun_phrases`; phrases synthesized by
    :func:`expand_coordination` keep the span of the coordinated source region
    they came from.
    """

    text: str
    head: str  # lemma of the head token
    span: tuple[int, int]
    modifiers: tuple[str, ...] = ()
    tags: tuple[tuple[str, str], ...] = ()  # (token text, pos) per token

    def content_words(self) -> tuple[str, ...]:
        return tuple(t for t, p in self.tags if p in (NOUN, PROPN, ADJ, VERB))


def normalize_escapes(text: str) -> str:
    """Decode literal ``\\uXXXX`` escapes and backslashed TeX-ish characters."""
    text = _UESC_RE.sub(lambda m: chr(int(m.group(1), 16)), text)
    return _WESC_RE.sub(r"\1", text)


def _byte_offsets(text: str) -> list[int]:
    # offsets[i] = byte offset of char i; offsets[len] = total byte length
    offsets = [0]
    total = 0
    for ch in text:
        total += len(ch.encode("utf-8"))
        offsets.append(total)
    return offsets


def _classify(tok: str) -> str:
    if tok[0].isdigit():
        return NUMBER
    if tok[0].isalpha() or (tok[0] == "'" and len(tok) > 1):
        return WORD
    if all(ch in _PUNCT_CHARS for ch in tok):
        return PUNCT
    if tok.isspace():  # pragma: no cover - regex never yields whitespace
        return UNIT
    return SYMBOL


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens with byte spans.

    Concatenating token texts with the original inter-token gaps reconstructs
    the source exactly (see :func:`reconstruct`).
    """
    offsets = _byte_offsets(text)
    out: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        start, end = m.start(), m.end()
        clitic = _CLITIC_RE.match(tok)
        if clitic:
            stem = clitic.group(1)
            out.append(Token(stem, _classify(stem), (offsets[start], offsets[start + len(stem)])))
            out.append(Token(clitic.group(2), PUNCT, (offsets[start + len(stem)], offsets[end])))
            continue
        out.append(Token(tok, _classify(tok), (offsets[start], offsets[end])))
    return out


def reconstruct(text: str, tokens: list[Token]) -> str:
    """Rebuild the source string from tokens plus the gaps between them."""
    raw = text.encode("utf-8")
    parts: list[str] = []
    cursor = 0
    for tok in tokens:
        start, end = tok.span
        parts.append(raw[cursor:start].decode("utf-8"))
        parts.append(tok.text)
        cursor = end
    parts.append(raw[cursor:].decode("utf-8"))
    return "".join(parts)


def _is_decimal_dot(text: str, i: int) -> bool:
    return (
        text[i] == "."
        and 0 < i < len(text) - 1
        and text[i - 1].isdigit()
        and text[i + 1].isdigit()
    )


def _preceding_word(text: str, i: int) -> str:
    j = i
    while j > 0 and (text[j - 1].isalpha() or text[j - 1] == "."):
        j -= 1
    return text[j:i].lower().rstrip(".")


def split_sentences(text: str) -> list[tuple[str, tuple[int, int]]]:
    """Split text into (sentence, byte span) pairs.

    Splits at every ``.``/``!``/``?`` that is not a decimal point or a known
    abbreviation, and at newlines. Tolerates run-together source text with no
    space after the period ("...for calcium.These are...").
    """
    offsets = _byte_offsets(text)
    sentences: list[tuple[str, tuple[int, int]]] = []
    start = 0

    def emit(lo: int, hi: int) -> None:
        chunk = text[lo:hi]
        stripped = chunk.strip()
        if not stripped:
            return
        lead = len(chunk) - len(chunk.lstrip())
        lo2 = lo + lead
        sentences.append((stripped, (offsets[lo2], offsets[lo2 + len(stripped)])))

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            emit(start, i)
            start = i + 1
        elif ch in ".!?":
            if ch == "." and (_is_decimal_dot(text, i) or _preceding_word(text, i) in _ABBREVIATIONS):
                i += 1
                continue
            j = i + 1
            while j < n and text[j] in ".!?\"')]":
                j += 1
            emit(start, j)
            start = j
            i = j
            continue
        i += 1
    emit(start, n)
    return sentences


@lru_cache(maxsize=1)
def _lexicon() -> dict[str, str]:
    data = resources.files("acurai.resources").joinpath("lexicon.tsv").read_text("utf-8")
    table: dict[str, str] = {}
    for line in data.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, _, pos = line.partition("\t")
        table[word] = pos
    return table


_ADJ_SUFFIXES = ("al", "ic", "ous", "ive", "able", "ible", "ful", "less", "ary", "ish")
_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ism", "ist", "ure", "ance", "ence", "ship", "hood")

_IRREGULAR_LEMMAS = {
    "men": "man", "women": "woman", "children": "child", "people": "person",
    "feet": "foot", "teeth": "tooth", "mice": "mouse", "geese": "goose",
    "is": "be", "are": "be", "am": "be", "was": "be", "were": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "does": "do", "did": "do", "done": "do",
    "went": "go", "gone": "go", "made": "make", "said": "say", "found": "find",
    "gave": "give", "given": "give", "took": "take", "taken": "take",
    "got": "get", "ran": "run", "came": "come", "saw": "see", "seen": "see",
    "knew": "know", "known": "know", "left": "leave", "felt": "feel",
    "kept": "keep", "shown": "show", "showed": "show", "paid": "pay",
    "set": "set", "put": "put", "led": "lead", "held": "hold", "grew": "grow",
    "grown": "grow", "wrote": "write", "written": "write", "brought": "bring",
    "thought": "think", "bought": "buy", "sold": "sell", "sent": "send",
    "built": "build", "met": "meet", "lost": "lose", "meant": "mean",
}


def lemma(word: str, pos: str = NOUN) -> str:
    """Reduce an inflected word to a lexicon base form (best effort)."""
    w = word.lower()
    if w in _IRREGULAR_LEMMAS:
        return _IRREGULAR_LEMMAS[w]
    lex = _lexicon()
    if w in lex and not w.endswith("ss"):
        # known base form, unless it is itself a candidate inflection
        if not (w.endswith("s") and w[:-1] in lex):
            return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    for suf in ("ches", "shes", "sses", "xes", "zes"):
        if w.endswith(suf):
            return w[:-2]
    if w.endswith("s") and not w.endswith("ss") and len(w) > 3:
        stem = w[:-1]
        if stem in lex or stem not in _IRREGULAR_LEMMAS:
            return stem
    if pos == VERB:
        for suf, repl in (("ying", "y"), ("ing", ""), ("ied", "y"), ("ed", "")):
            if w.endswith(suf) and len(w) > len(suf) + 2:
                stem = w[: -len(suf)] + repl
                if stem in lex:
                    return stem
                if stem + "e" in lex:
                    return stem + "e"
                return stem
    if w.endswith(("tion", "sion")) and len(w) > 6:
        # derivational nominalisations fold onto their verb when the lexicon
        # confirms it: reduction -> reduce, reaction -> react
        for stem in (w[:-4], w[:-4] + "e", w[:-4] + "de", w[:-5] + "ce", w[:-5] + "ct"):
            if lex.get(stem) == VERB:
                return stem
    return w


def _suffix_tag(word: str) -> str:
    w = word.lower()
    if "-" in w:
        return _suffix_tag(w.rsplit("-", 1)[-1])
    if w.endswith("ly"):
        return OTHER
    if (w.endswith("ing") or w.endswith("ed")) and len(w) > 4:
        return VERB
    for suf in _ADJ_SUFFIXES:
        if w.endswith(suf) and len(w) > len(suf) + 2:
            return ADJ
    for suf in _NOUN_SUFFIXES:
        if w.endswith(suf):
            return NOUN
    return NOUN


def _lookup(word: str) -> str | None:
    lex = _lexicon()
    w = word.lower()
    if w in lex:
        return lex[w]
    if w in _IRREGULAR_LEMMAS and _IRREGULAR_LEMMAS[w] in lex:
        return lex[_IRREGULAR_LEMMAS[w]]
    # inflected forms: plural nouns / 3sg verbs / participles
    if w.endswith("ies") and w[:-3] + "y" in lex:
        return lex[w[:-3] + "y"]
    if w.endswith("es") and w[:-2] in lex:
        return lex[w[:-2]]
    if w.endswith("s") and not w.endswith("ss") and w[:-1] in lex:
        return lex[w[:-1]]
    for suf, repl in (("ying", "y"), ("ing", ""), ("ing", "e"), ("ied", "y"), ("ed", ""), ("ed", "e")):
        if w.endswith(suf):
            stem = w[: -len(suf)] + repl
            if stem in lex and lex[stem] == VERB:
                return VERB
    return None


def pos_tag(tokens: list[Token]) -> list[TaggedToken]:
    """Tag tokens with a coarse part of speech.

    Lexicon lookup first, then suffix heuristics; unknown capitalized words in
    non-initial position become proper nouns, remaining unknowns default to
    noun (ties resolve noun-first by lexicon construction).
    """
    tagged: list[TaggedToken] = []
    sentence_initial = True
    for i, tok in enumerate(tokens):
        if tok.kind in (PUNCT, SYMBOL, UNIT):
            tagged.append(TaggedToken(tok, OTHER))
            if tok.text and tok.text[0] in ".!?":
                sentence_initial = True
            continue
        if tok.kind == NUMBER:
            tagged.append(TaggedToken(tok, OTHER))
            sentence_initial = False
            continue
        pos = _lookup(tok.text)
        if pos is None:
            if tok.text[:1].isupper() and not sentence_initial:
                pos = PROPN
            elif tok.text.isupper() and len(tok.text) > 1:
                pos = PROPN
            else:
                pos = _suffix_tag(tok.text)
        tagged.append(TaggedToken(tok, pos))
        sentence_initial = False

    # Contextual repair: a participle right before a noun/adjective is
    # attributive ("improved digestion", "hydrated Ca"), not a finite verb.
    for i, tt in enumerate(tagged):
        if tt.pos == VERB and (tt.text.endswith("ed") or tt.text.endswith("ing")):
            nxt = next((t for t in tagged[i + 1 :] if t.pos != OTHER or t.token.kind == NUMBER), None)
            if nxt is not None and nxt.pos in (NOUN, PROPN, ADJ):
                prev = tagged[i - 1] if i else None
                if prev is None or prev.pos not in (NOUN, PROPN, PRON):
                    tagged[i] = TaggedToken(tt.token, ADJ)
    return tagged


_CODE_BY_POS = {NOUN: "N", PROPN: "P", ADJ: "A", DET: "D", VERB: "V", PRON: "o", PREP: "p", CONJ: "C", OTHER: "o"}

# Base NP: optional determiner, optionally coordinated adjective modifiers,
# then adjective/noun/number modifiers, then a noun or proper-noun head.
_NP_RE = re.compile(r"D?(?:A(?:C+A)+)?[ANMP]*[NPM]")


def _code(tt: TaggedToken) -> str:
    if tt.token.kind == NUMBER:
        return "M"
    if tt.token.kind in (PUNCT, SYMBOL, UNIT):
        return "," if tt.text == "," else "o"
    return _CODE_BY_POS.get(tt.pos, "o")


def _np_from_tokens(source: str, tagged: list[TaggedToken]) -> NounPhrase:
    raw = source.encode("utf-8")
    span = (tagged[0].token.span[0], tagged[-1].token.span[1])
    text = raw[span[0] : span[1]].decode("utf-8")
    head_tt = tagged[-1]
    modifiers = tuple(
        tt.text for tt in tagged[:-1] if tt.pos in (ADJ, NOUN, PROPN) or tt.token.kind == NUMBER
    )
    return NounPhrase(
        text=text,
        head=lemma(head_tt.text),
        span=span,
        modifiers=modifiers,
        tags=tuple((tt.text, tt.pos) for tt in tagged),
    )


def extract_noun_phrases(text: str, tagged: list[TaggedToken] | None = None) -> list[NounPhrase]:
    """Extract base noun phrases, ordered by span start.

    The chunk grammar is determiner? + (coordinated) adjective/noun modifiers +
    noun head, so a prepositional attachment like "properties of calcium"
    yields the container NP ("properties") and the embedded NP ("calcium") as
    separate phrases.
    """
    if tagged is None:
        tagged = pos_tag(tokenize(text))
    codes = []
    for tt in tagged:
        c = _code(tt)
        # treat a comma between coordinated modifiers as a coordinator
        codes.append("C" if c == "," else c)
    code_str = "".join(codes)
    out: list[NounPhrase] = []
    for m in _NP_RE.finditer(code_str):
        chunk = tagged[m.start() : m.end()]
        out.append(_np_from_tokens(text, chunk))
    return out


def expand_coordination(np: NounPhrase) -> list[NounPhrase]:
    """Distribute coordinated modifiers over a shared head.

    "the chemical and physical properties" -> ["chemical properties",
    "physical properties"]; a non-coordinated phrase expands to itself.
    Every output phrase keeps the head (and span) of the input.
    """
    tags = list(np.tags)
    if not any(pos == CONJ or text == "," for text, pos in tags):
        return [np]

    # modifier groups separated by coordinators; the head (last token) is
    # shared, and any modifiers of the final group beyond the first group's
    # length are shared as well ("chemical and physical properties")
    head_text = tags[-1][0]
    groups: list[list[str]] = [[]]
    for text, pos in tags[:-1]:
        if pos == CONJ or text == ",":
            if groups[-1]:
                groups.append([])
        elif pos in (ADJ, NOUN, PROPN):
            groups[-1].append(text)
    groups = [g for g in groups if g]
    if len(groups) < 2:
        return [np]

    width = len(groups[0])
    final = groups[-1]
    conjuncts = groups[:-1] + [final[:width]]
    shared = final[width:]
    members: list[NounPhrase] = []
    for conjunct in conjuncts:
        words = conjunct + shared + [head_text]
        members.append(
            NounPhrase(
                text=" ".join(words),
                head=np.head,
                span=np.span,
                modifiers=tuple(words[:-1]),
                tags=tuple((w, ADJ) for w in words[:-1]) + ((words[-1], NOUN),),
            )
        )
    return members
