"""Batch evaluation of the faithfulness pipeline over JSONL datasets.

A dataset row carries one retrieval record: a query, its passages, and the
model whose cassette should answer it.  ``evaluate`` replays every record
through the pipeline, re-checks each final response against the record's
own passages, and aggregates the outcomes into a Wilson score interval so
small samples report honest uncertainty instead of a bare point estimate.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import faithfulness, pipeline
from .llm import ChatClient, LLMError
from .pipeline import PipelineConfig, PipelineError

DATASETS = ("gpt35-subtle", "gpt35-evident", "gpt4-subtle", "gpt4-evident", "other")

DEFAULT_Z = 1.96


class DatasetError(ValueError):
    """The dataset file as a whole is unusable (unreadable, or no valid rows)."""


def wilson_interval(successes: int, n: int, z: float = DEFAULT_Z) -> tuple[float, float]:
    """Wilson score interval for ``successes`` out of ``n`` Bernoulli trials.

    Uses the standard form: the interval is centred on
    ``(p + z^2/2n) / (1 + z^2/n)`` with half-width
    ``(z / (1 + z^2/n)) * sqrt(p(1-p)/n + z^2/4n^2)``, then clamped to
    [0, 1].  Unlike the Wald interval it never collapses to a point at
    p = 0 or p = 1, which is exactly the regime small evaluation runs
    live in.
    """
    if not isinstance(successes, int) or not isinstance(n, int):
        raise ValueError("counts must be integers")
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError(f"successes must be within [0, {n}], got {successes}")
    if z <= 0:
        raise ValueError("z must be positive")
    p = successes / n
    zz = z * z
    denom = 1.0 + zz / n
    centre = (p + zz / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + zz / (4 * n * n))
    # at the boundaries the score equation has an exact root at 0 or 1;
    # pin those so rounding noise cannot pull the interval off the endpoint
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == n else min(1.0, centre + half)
    return (low, high)


def format_interval(low: float, high: float) -> str:
    """Render an interval the way result tables quote it: two decimals with
    trailing zeros dropped, e.g. ``(0.9059, 1.0)`` -> ``"[0.91, 1]"``."""

    def fmt(x: float) -> str:
        text = f"{x:.2f}".rstrip("0").rstrip(".")
        return text or "0"

    return f"[{fmt(low)}, {fmt(high)}]"


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation row: a query, its retrieval passages, and provenance."""

    response_id: str
    query: str
    passages: tuple[str, ...]
    model: str
    dataset: str = "other"
    original_response: str | None = None

    def __post_init__(self) -> None:
        if not self.response_id:
            raise ValueError("response_id must be non-empty")
        if not self.query.strip():
            raise ValueError("query must be non-empty")
        if not self.passages or any(not p.strip() for p in self.passages):
            raise ValueError("passages must be a non-empty list of non-empty strings")
        if self.dataset not in DATASETS:
            raise ValueError(f"dataset must be one of {DATASETS}, got {self.dataset!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "EvalRecord":
        if not isinstance(obj, dict):
            raise ValueError("record must be a JSON object")
        known = {"response_id", "query", "passages", "model", "dataset", "original_response"}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown fields: {sorted(unknown)}")
        for key in ("response_id", "query", "model"):
            if not isinstance(obj.get(key), str):
                raise ValueError(f"missing or non-string field {key!r}")
        passages = obj.get("passages")
        if not isinstance(passages, list) or not all(isinstance(p, str) for p in passages):
            raise ValueError("passages must be a list of strings")
        original = obj.get("original_response")
        if original is not None and not isinstance(original, str):
            raise ValueError("original_response must be a string when present")
        return cls(
            response_id=obj["response_id"],
            query=obj["query"],
            passages=tuple(passages),
            model=obj["model"],
            dataset=obj.get("dataset", "other"),
            original_response=original,
        )

    def to_json(self) -> dict:
        out = {
            "response_id": self.response_id,
            "query": self.query,
            "passages": list(self.passages),
            "model": self.model,
            "dataset": self.dataset,
        }
        if self.original_response is not None:
            out["original_response"] = self.original_response
        return out


@dataclass(frozen=True)
class Dataset:
    """Parse result for one JSONL file: valid rows in file order plus an
    error entry (line number, message) for every row that failed to parse."""

    records: tuple[EvalRecord, ...]
    errors: tuple[tuple[int, str], ...] = ()


def load_dataset(path) -> Dataset:
    """Read a JSONL dataset, keeping file order.

    Malformed lines do not abort the load and are not silently dropped
    either: each one lands in ``Dataset.errors`` with its 1-based line
    number.  A file that is unreadable, or that yields zero valid records,
    raises ``DatasetError``.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc}") from exc
    records: list[EvalRecord] = []
    errors: list[tuple[int, str]] = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(EvalRecord.from_json(json.loads(line)))
        except (json.JSONDecodeError, ValueError) as exc:
            errors.append((number, str(exc)))
    if not records:
        raise DatasetError(f"no valid records in {path}")
    return Dataset(records=tuple(records), errors=tuple(errors))


@dataclass(frozen=True)
class EvalResult:
    """Outcome for one record: the re-checked verdict of the pipeline's
    final response, or the error that prevented a response."""

    response_id: str
    dataset: str
    verdict: str
    success: bool
    reason: str | None = None
    trace_id: str | None = None

    def to_json(self) -> dict:
        return {
            "response_id": self.response_id,
            "dataset": self.dataset,
            "verdict": self.verdict,
            "success": self.success,
            "reason": self.reason,
            "trace_id": self.trace_id,
        }


@dataclass(frozen=True)
class EvalSummary:
    """Aggregate outcome of an evaluation run."""

    n: int
    successes: int
    accuracy: float
    wilson_low: float
    wilson_high: float
    results: tuple[EvalResult, ...] = field(default=())

    @property
    def all_faithful(self) -> bool:
        return self.successes == self.n

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "successes": self.successes,
            "accuracy": self.accuracy,
            "wilson_low": self.wilson_low,
            "wilson_high": self.wilson_high,
            "interval": format_interval(self.wilson_low, self.wilson_high),
            "all_faithful": self.all_faithful,
            "results": [r.to_json() for r in self.results],
        }


def _evaluate_one(record: EvalRecord, llm: ChatClient | None, base: PipelineConfig) -> EvalResult:
    config = replace(base, model=record.model)
    try:
        response, trace = pipeline.run(record.query, list(record.passages), config, llm)
    except (PipelineError, LLMError, ValueError) as exc:
        return EvalResult(
            response_id=record.response_id,
            dataset=record.dataset,
            verdict="error",
            success=False,
            reason=str(exc),
        )
    report = faithfulness.check_response(response, list(record.passages))
    return EvalResult(
        response_id=record.response_id,
        dataset=record.dataset,
        verdict=report.verdict,
        success=report.verdict == faithfulness.FAITHFUL,
        reason=None,
        trace_id=trace.trace_id,
    )


def evaluate(
    records,
    llm: ChatClient | None = None,
    config: PipelineConfig | None = None,
    *,
    workers: int = 1,
    z: float = DEFAULT_Z,
) -> EvalSummary:
    """Run every record through the pipeline and grade the final responses.

    Each response is re-checked against the record's original passages, so
    the number reported is end-to-end faithfulness, not the pipeline's own
    opinion of itself.  A record whose pipeline run raises is counted as a
    failure with the error message as the reason; the run continues.  With
    ``workers > 1`` records are processed concurrently; aggregate numbers
    do not depend on input order.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to evaluate")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    base = config or PipelineConfig()
    if workers == 1:
        results = [_evaluate_one(record, llm, base) for record in records]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda r: _evaluate_one(r, llm, base), records))
    successes = sum(1 for r in results if r.success)
    low, high = wilson_interval(successes, len(results), z)
    return EvalSummary(
        n=len(results),
        successes=successes,
        accuracy=successes / len(results),
        wilson_low=low,
        wilson_high=high,
        results=tuple(results),
    )


def write_csv(summary: EvalSummary, path) -> None:
    """Write per-record outcomes as CSV alongside the JSON summary."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["response_id", "dataset", "verdict", "success", "reason", "trace_id"])
        for r in summary.results:
            writer.writerow(
                [r.response_id, r.dataset, r.verdict, r.success, r.reason or "", r.trace_id or ""]
            )
