"""Faithfulness middleware for retrieval-augmented generation.

The package splits multi-subject questions on noun-phrase collisions,
rewrites passages into fully-formatted facts, shields collision-prone
spans behind placeholders while the LLM writes, and verifies every
sentence of the final answer against its sources before anything is
returned.  ``pipeline.run`` is the front door; ``harness.evaluate``
grades whole datasets; ``app`` wraps both in a CLI and an HTTP gateway.
"""

__version__ = "0.1.0"

from .collision import (
    DEFAULT_THRESHOLD,
    AliasTable,
    CollisionPair,
    OfflineHashEmbedding,
    detect_collisions,
)
from .facts import FactSet, FFFConfig, QueryPacket, Section, Statement, build_fact_sets
from .faithfulness import (
    FAITHFUL,
    HALLUCINATION,
    FaithfulnessReport,
    check_response,
    is_supported,
)
from .harness import (
    EvalRecord,
    EvalSummary,
    evaluate,
    format_interval,
    load_dataset,
    wilson_interval,
)
from .llm import (
    DEFAULT_MODEL,
    ChatClient,
    ChatRequest,
    ChatResponse,
    HTTPChatClient,
    LLMError,
    RecordingClient,
    ReplayClient,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    PipelineTrace,
    compose_response,
    run,
)
from .placeholder import PlaceholderTable, apply_placeholders, mask_text, remap
from .query_split import AtomicQuery, SplitResult, split_query

__all__ = [
    "__version__",
    "DEFAULT_THRESHOLD",
    "DEFAULT_MODEL",
    "FAITHFUL",
    "HALLUCINATION",
    "AliasTable",
    "AtomicQuery",
    "ChatClient",
    "ChatRequest",
    "ChatResponse",
    "CollisionPair",
    "EvalRecord",
    "EvalSummary",
    "FFFConfig",
    "FactSet",
    "FaithfulnessReport",
    "HTTPChatClient",
    "LLMError",
    "OfflineHashEmbedding",
    "PipelineConfig",
    "PipelineError",
    "PipelineTrace",
    "PlaceholderTable",
    "QueryPacket",
    "RecordingClient",
    "ReplayClient",
    "Section",
    "SplitResult",
    "Statement",
    "apply_placeholders",
    "build_fact_sets",
    "check_response",
    "compose_response",
    "detect_collisions",
    "evaluate",
    "format_interval",
    "is_supported",
    "load_dataset",
    "mask_text",
    "remap",
    "run",
    "split_query",
    "wilson_interval",
]
