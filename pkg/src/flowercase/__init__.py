"""flowercase: attack documentation and agile investigation case engine.

Models multi-host intrusions as an attack graph of target "flowers" (each
carrying the six action-leaf kinds), drives a question-led evidence and
hypothesis workflow, and keeps documentation structural: every mutation is
an event in a hash-linked journal, evidence lives in a content-addressed
vault under a signed custody chain, and reports replay deterministically.
"""

from .canonical import GENESIS_HASH, canonical_json, hash_canonical, sha256_hex
from .corpus import CorpusStats, corpus_stats, emit_stats, load_corpus
from .engine import CaseEngine, CaseStore, apply_event, replay_events
from .errors import DomainError
from .filters import FilterSpec, apply_filter
from .investigation import (
    CheckOutcome,
    ClosureReport,
    CollectionStep,
    DataSourceCategory,
    Hypothesis,
    HypothesisState,
    IterationRecord,
    Question,
    QuestionState,
    StepStatus,
    VerificationCheck,
    closure_status,
)
from .journal import JournalEvent, JournalFile, state_digest, verify_events
from .model import (
    ATTACKER,
    ActionLeaf,
    AttackerNode,
    Case,
    CaseState,
    EdgeEvent,
    EdgeKind,
    LeafKind,
    TargetNode,
    Violation,
    attack_chains,
    case_from_export,
    case_to_export,
    validate_graph,
)
from .report import (
    export_case_json,
    export_dot,
    generate_report,
    import_case_json,
    timeline,
    write_case_files,
)
from .vault import (
    BlobStore,
    ChainResult,
    CustodyAction,
    CustodyEntry,
    EvidenceItem,
    SigningKey,
    VerificationResult,
    verify_custody_chain,
)

__version__ = "0.1.0"

__all__ = [
    "ATTACKER",
    "ActionLeaf",
    "AttackerNode",
    "BlobStore",
    "Case",
    "CaseEngine",
    "CaseState",
    "CaseStore",
    "ChainResult",
    "CheckOutcome",
    "ClosureReport",
    "CollectionStep",
    "CorpusStats",
    "CustodyAction",
    "CustodyEntry",
    "DataSourceCategory",
    "DomainError",
    "EdgeEvent",
    "EdgeKind",
    "EvidenceItem",
    "FilterSpec",
    "GENESIS_HASH",
    "Hypothesis",
    "HypothesisState",
    "IterationRecord",
    "JournalEvent",
    "JournalFile",
    "LeafKind",
    "Question",
    "QuestionState",
    "SigningKey",
    "StepStatus",
    "TargetNode",
    "VerificationCheck",
    "VerificationResult",
    "Violation",
    "apply_event",
    "apply_filter",
    "attack_chains",
    "canonical_json",
    "case_from_export",
    "case_to_export",
    "closure_status",
    "corpus_stats",
    "emit_stats",
    "export_case_json",
    "export_dot",
    "generate_report",
    "hash_canonical",
    "import_case_json",
    "load_corpus",
    "replay_events",
    "sha256_hex",
    "state_digest",
    "timeline",
    "validate_graph",
    "verify_custody_chain",
    "verify_events",
    "write_case_files",
]
