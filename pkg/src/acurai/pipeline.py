"""End-to-end orchestration of one query/passages run.

The flow is collide → split → facts → placeholder → LLM → remap →
verify → compose.  Every atomic query gets its answer synthesized from
its own fact packet, checked against the packet plus the original
passages, retried with the violations quoted back, and — if the model
keeps deviating — replaced by a verbatim bullet list of its facts, so a
run can never emit a response that fails its own faithfulness check.
The full audit trail is captured in a :class:`PipelineTrace` whose
content hash doubles as the trace id; nothing time- or host-dependent
goes into it, which is what makes replay runs byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import faithfulness, nlp
from .collision import (
    DEFAULT_THRESHOLD,
    AliasTable,
    CollisionPair,
    EmbeddingProvider,
    HTTPEmbeddingProvider,
    OfflineHashEmbedding,
    default_aliases,
    detect_collisions,
)
from .facts import FFFConfig, QueryPacket, build_fact_sets, load_prompts
from .faithfulness import FAITHFUL, FaithfulnessReport, check_response
from .llm import (
    DEFAULT_MODEL,
    ChatClient,
    ChatRequest,
    LLMError,
    ReplayClient,
    default_cassette_path,
    record_replay_key,
)
from .placeholder import PlaceholderTable, mask_text, remap
from .query_split import MAX_ATOMIC_QUERIES, AtomicQuery, split_query

FAITHFUL_VACUOUS = "faithful-vacuous"

# A quoted source sentence is "covered" by the prose answer when at least
# this fraction of its content anchors already appear there; anything less
# earns the sentence's atomization a verbatim "Detail N:" block.
_COVERAGE_FLOOR = 0.8


class PipelineError(RuntimeError):
    """Raised when a run cannot finish; carries whatever trace exists."""

    def __init__(self, message: str, trace: "PipelineTrace | None" = None):
        super().__init__(message)
        self.trace = trace


@dataclass
class PipelineConfig:
    """Knobs for one run.

    ``retry_budget`` is the number of re-asks after a failed verification
    before the verbatim fallback kicks in; ``include_specifics`` toggles
    the "Specifics"/"Detail N:" tail of the composed response.
    """

    model: str = DEFAULT_MODEL
    temperature: float = 0.0
    embedding_provider: str = OfflineHashEmbedding.provider_id
    collision_threshold: float = DEFAULT_THRESHOLD
    split_cap: int = MAX_ATOMIC_QUERIES
    retry_budget: int = 2
    include_specifics: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.collision_threshold <= 1.0:
            raise ValueError("collision_threshold must be in (0, 1]")
        if self.retry_budget < 0:
            raise ValueError("retry_budget must be >= 0")
        if self.split_cap < 1:
            raise ValueError("split_cap must be >= 1")

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "temperature": self.temperature,
            "embedding_provider": self.embedding_provider,
            "collision_threshold": self.collision_threshold,
            "split_cap": self.split_cap,
            "retry_budget": self.retry_budget,
            "include_specifics": self.include_specifics,
        }

    @classmethod
    def from_json(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class QueryTrace:
    """Everything one atomic query contributed to the run."""

    query: str
    fallback_query: bool
    fact_set: dict
    llm_calls: tuple[dict, ...]
    report: dict | None
    retries: int
    used_fallback: bool
    remap_unknown: tuple[str, ...]
    answer: str

    def to_json(self) -> dict:
        return {
            "query": self.query,
            "fallback_query": self.fallback_query,
            "fact_set": self.fact_set,
            "llm_calls": list(self.llm_calls),
            "faithfulness": self.report,
            "retries": self.retries,
            "used_fallback": self.used_fallback,
            "remap_unknown": list(self.remap_unknown),
            "answer": self.answer,
        }


@dataclass(frozen=True)
class PipelineTrace:
    """Audit log of a run; hash-addressed and wall-clock free."""

    query: str
    passages: tuple[str, ...]
    config: dict
    collisions: tuple[dict, ...]
    atomic_queries: tuple[str, ...]
    placeholder_table: dict
    query_traces: tuple[QueryTrace, ...]
    retries_used: int
    final_verdict: str
    final_response: str

    def to_json(self) -> dict:
        return {
            "query": self.query,
            "passages": list(self.passages),
            "config": self.config,
            "collisions": list(self.collisions),
            "atomic_queries": list(self.atomic_queries),
            "placeholder_table": self.placeholder_table,
            "queries": [qt.to_json() for qt in self.query_traces],
            "retries_used": self.retries_used,
            "final_verdict": self.final_verdict,
            "final_response": self.final_response,
        }

    @property
    def trace_id(self) -> str:
        canonical = json.dumps(
            self.to_json(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def write(self, directory: str | Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.trace_id}.json"
        payload = {"trace_id": self.trace_id, **self.to_json()}
        path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", "utf-8")
        return path


def provider_from_id(provider_id: str) -> EmbeddingProvider:
    if provider_id == OfflineHashEmbedding.provider_id:
        return OfflineHashEmbedding()
    if provider_id == "http":
        base_url = os.environ.get("ACURAI_EMBED_BASE_URL")
        if not base_url:
            raise ValueError(
                "embedding provider 'http' needs ACURAI_EMBED_BASE_URL to be set"
            )
        return HTTPEmbeddingProvider(base_url)
    raise ValueError(f"unknown embedding provider id: {provider_id!r}")


def _request_json(request: ChatRequest) -> dict:
    return {
        "model": request.model,
        "temperature": request.temperature,
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "key": record_replay_key(request),
    }


def _title_line(parent_query: str) -> str:
    text = parent_query.strip().rstrip("?.!")
    return text[:1].upper() + text[1:]


def _render_sections(
    packet: QueryPacket,
    table: PlaceholderTable,
    provider: EmbeddingProvider,
    aliases: AliasTable,
    threshold: float,
) -> str:
    parts = []
    for n, section in enumerate(packet.fact_set.sections, 1):
        lines = [f"Section {n}:"]
        for stmt in section.statements:
            masked = mask_text(
                stmt.text, table, provider=provider, aliases=aliases, threshold=threshold
            )
            lines.append(f"- {masked}")
        parts.append("\n".join(lines))
    return "\n\n".join(parts)


def _detail_runs(packet: QueryPacket, answer_text: str) -> list[tuple[str, ...]]:
    """Source-line runs the answer prose does not already cover.

    A section contributes at most one run: every atomized line from the
    first under-covered sentence through the last one, quoted in source
    order so the reader gets the surrounding context, not a fragment.
    """
    runs: list[tuple[str, ...]] = []
    for section in packet.fact_set.sections:
        groups = section.source_lines
        if not groups:
            continue
        flags = [
            any(faithfulness.coverage(line, answer_text) < _COVERAGE_FLOOR for line in group)
            for group in groups
        ]
        if not any(flags):
            continue
        first = flags.index(True)
        last = len(flags) - 1 - flags[::-1].index(True)
        runs.append(tuple(line for group in groups[first : last + 1] for line in group))
    return runs


def compose_response(
    answers: list[tuple[AtomicQuery, str]],
    details: list[tuple[str, ...]] | None = None,
    *,
    include_specifics: bool = True,
    title: str | None = None,
) -> str:
    """Assemble the final document: bold title, merged prose, specifics.

    Answers appear in atomic-query order separated by single blank
    lines; each detail run becomes one "Detail N:" paragraph under a
    bold "Specifics" heading.
    """
    if not answers:
        raise ValueError("compose_response requires at least one answer")
    parent = title if title is not None else answers[0][0].parent_query
    blocks = [f"**{_title_line(parent)}**"]
    for _query, text in answers:
        cleaned = text.strip()
        if cleaned:
            blocks.append(cleaned)
    if include_specifics and details:
        blocks.append("**Specifics**")
        for n, lines in enumerate(details, 1):
            blocks.append(f"Detail {n}: " + " ".join(lines))
    return "\n\n".join(blocks)


def run(
    query: str,
    passages: list[str],
    config: PipelineConfig | None = None,
    llm: ChatClient | None = None,
    embedder: EmbeddingProvider | None = None,
    *,
    aliases: AliasTable | None = None,
    timings: dict[str, float] | None = None,
) -> tuple[str, PipelineTrace]:
    """Execute the full flow for one query over its passages.

    Returns the composed response and its trace.  With ``llm=None`` the
    bundled demo cassette is replayed, so the fixture corpus runs with
    no network and no keys.  Pass a dict as ``timings`` to collect
    wall-clock milliseconds per stage; they are never part of the trace.
    """
    if not passages:
        raise ValueError("run requires at least one passage")
    config = config or PipelineConfig()
    provider = embedder or provider_from_id(config.embedding_provider)
    aliases = aliases or default_aliases()
    client = llm or ReplayClient(default_cassette_path())
    prompts = load_prompts()

    def lap(stage: str, since: float) -> float:
        now = time.perf_counter()
        if timings is not None:
            timings[stage] = round((now - since) * 1000.0, 3)
        return now

    tick = time.perf_counter()
    nps = [m for n in nlp.extract_noun_phrases(query) for m in nlp.expand_coordination(n)]
    pairs = detect_collisions(
        nps, provider=provider, threshold=config.collision_threshold, aliases=aliases
    )
    split = split_query(query, pairs=pairs, cap=config.split_cap)
    tick = lap("split", tick)

    fff_config = FFFConfig(
        model=config.model,
        temperature=config.temperature,
        collision_threshold=config.collision_threshold,
    )
    packets = build_fact_sets(
        list(passages),
        list(split.queries),
        llm=client,
        config=fff_config,
        provider=provider,
        aliases=aliases,
    )
    tick = lap("facts", tick)

    table = PlaceholderTable()
    collision_json = tuple(
        {
            "left": p.left.text,
            "right": p.right.text,
            "similarity": round(p.similarity, 6),
            "reason": p.reason,
        }
        for p in split.collisions
    )

    query_traces: list[QueryTrace] = []
    answers: list[tuple[AtomicQuery, str]] = []
    details: list[tuple[str, ...]] = []
    retries_total = 0

    def partial_trace(verdict: str = "error") -> PipelineTrace:
        return PipelineTrace(
            query=query,
            passages=tuple(passages),
            config=config.to_json(),
            collisions=collision_json,
            atomic_queries=tuple(q.text for q in split.queries),
            placeholder_table=table.to_json(),
            query_traces=tuple(query_traces),
            retries_used=retries_total,
            final_verdict=verdict,
            final_response="",
        )

    for atomic in split.queries:
        packet = packets[atomic]
        fact_json = packet.fact_set.to_json()
        if packet.empty:
            query_traces.append(
                QueryTrace(
                    query=atomic.text,
                    fallback_query=atomic.fallback,
                    fact_set=fact_json,
                    llm_calls=(),
                    report=None,
                    retries=0,
                    used_fallback=False,
                    remap_unknown=(),
                    answer="",
                )
            )
            continue

        masked_query = mask_text(
            atomic.text,
            table,
            provider=provider,
            aliases=aliases,
            threshold=config.collision_threshold,
        )
        sections = _render_sections(
            packet, table, provider, aliases, config.collision_threshold
        )
        verify_sources = packet.fact_set.statement_texts() + list(passages)

        calls: list[dict] = []
        unknown: tuple[str, ...] = ()
        retries = 0
        used_fallback = False
        request = ChatRequest.build(
            prompts["answer"]["system"],
            prompts["answer"]["user"].format(query=masked_query, sections=sections),
            model=config.model,
            temperature=config.temperature,
        )
        answer = ""
        report: FaithfulnessReport | None = None
        while True:
            try:
                response = client.chat(request)
            except LLMError as exc:
                raise PipelineError(
                    f"LLM call failed for {atomic.text!r}: {exc}", partial_trace()
                ) from exc
            restored, remap_report = remap(response.content, table)
            calls.append({"request": _request_json(request), "response": response.content})
            unknown = remap_report.unknown
            answer = restored
            report = check_response(restored, verify_sources)
            if report.verdict == FAITHFUL or retries >= config.retry_budget:
                break
            retries += 1
            retries_total += 1
            violations = "\n".join(f"- {r.statement}" for r in report.unsupported)
            request = ChatRequest.build(
                prompts["answer"]["system"],
                prompts["retry"]["user"].format(
                    query=masked_query, sections=sections, violations=violations
                ),
                model=config.model,
                temperature=config.temperature,
            )

        if report is not None and report.verdict != FAITHFUL:
            answer = "\n".join(f"- {text}" for text in packet.fact_set.statement_texts())
            report = check_response(answer, verify_sources)
            used_fallback = True

        answers.append((atomic, answer))
        if config.include_specifics:
            details.extend(_detail_runs(packet, answer))
        query_traces.append(
            QueryTrace(
                query=atomic.text,
                fallback_query=atomic.fallback,
                fact_set=fact_json,
                llm_calls=tuple(calls),
                report=report.to_json() if report is not None else None,
                retries=retries,
                used_fallback=used_fallback,
                remap_unknown=unknown,
                answer=answer,
            )
        )

    tick = lap("answer", tick)

    if not answers:
        final_response = f"No supporting facts found for: {query}"
        final_verdict = FAITHFUL_VACUOUS
    else:
        final_response = compose_response(
            answers, details, include_specifics=config.include_specifics
        )
        final_verdict = FAITHFUL

    trace = PipelineTrace(
        query=query,
        passages=tuple(passages),
        config=config.to_json(),
        collisions=collision_json,
        atomic_queries=tuple(q.text for q in split.queries),
        placeholder_table=table.to_json(),
        query_traces=tuple(query_traces),
        retries_used=retries_total,
        final_verdict=final_verdict,
        final_response=final_response,
    )
    lap("compose", tick)
    return final_response, trace
