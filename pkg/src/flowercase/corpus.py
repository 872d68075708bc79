"""Corpus statistics over encoded cases.

Loads a directory of ``*.case.json`` files and recounts the two properties
studied across published multi-host intrusion reports: how many targets an
attack involves and which of the six action kinds show up. Aggregation is
order-insensitive; emitted tables are byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import DomainError, IoError, UnsupportedFormat
from .model import Case, LeafKind, case_from_export, validate_graph

CSV_HEADER = (
    "case_id,targets,escalate_privileges,maintain_access,information_gathering,"
    "actions_on_objective,cover_tracks,move"
)

_KIND_ORDER = list(LeafKind)


@dataclass
class LoadResult:
    cases: list[Case] = field(default_factory=list)
    errors: list[dict[str, str]] = field(default_factory=list)


@dataclass
class CorpusStats:
    cases: int
    multi_target_cases: int
    case_ids: list[str]
    per_case_target_counts: list[int]
    leaf_presence: list[list[bool]]  # cases x 6, kind order as declared
    leaf_totals: dict[str, int]

    def to_dict(self) -> dict[str, Any]:
        return {
            "cases": self.cases,
            "multi_target_cases": self.multi_target_cases,
            "case_ids": list(self.case_ids),
            "per_case_target_counts": list(self.per_case_target_counts),
            "leaf_presence": [list(row) for row in self.leaf_presence],
            "leaf_totals": dict(self.leaf_totals),
        }


def load_corpus(directory: str | Path) -> LoadResult:
    """Import and graph-validate every ``*.case.json`` file in a directory."""
    directory = Path(directory)
    if not directory.is_dir():
        raise IoError(f"{directory} is not a readable directory")
    result = LoadResult()
    for path in sorted(directory.glob("*.case.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            case = case_from_export(data)
        except (OSError, json.JSONDecodeError) as exc:
            result.errors.append({"file": path.name, "error": str(exc)})
            continue
        except DomainError as exc:
            result.errors.append({"file": path.name, "error": exc.message})
            continue
        violations = validate_graph(case)
        if violations:
            worst = violations[0]
            result.errors.append(
                {
                    "file": path.name,
                    "error": f"{len(violations)} graph violations, first: "
                    f"{worst.rule} on {worst.entity}: {worst.message}",
                }
            )
            continue
        result.cases.append(case)
    return result


def corpus_stats(cases: list[Case]) -> CorpusStats:
    """Target and leaf-kind coverage counts; multi-target means >= 2 targets."""
    ordered = sorted(cases, key=lambda c: c.id)
    case_ids = [c.id for c in ordered]
    target_counts = [len(c.targets) for c in ordered]
    presence: list[list[bool]] = []
    totals = {kind.value: 0 for kind in _KIND_ORDER}
    for case in ordered:
        kinds_here: set[LeafKind] = set()
        for target in case.targets.values():
            for leaf in target.leaves:
                kinds_here.add(leaf.kind)
                totals[leaf.kind.value] += 1
        presence.append([kind in kinds_here for kind in _KIND_ORDER])
    return CorpusStats(
        cases=len(ordered),
        multi_target_cases=sum(1 for n in target_counts if n >= 2),
        case_ids=case_ids,
        per_case_target_counts=target_counts,
        leaf_presence=presence,
        leaf_totals=totals,
    )


def emit_stats(stats: CorpusStats, format: str = "csv") -> str:
    """Deterministic per-case table (presence as 1/0) in csv or md form."""
    rows = []
    for case_id, targets, presence in zip(
        stats.case_ids, stats.per_case_target_counts, stats.leaf_presence
    ):
        rows.append([case_id, str(targets)] + ["1" if p else "0" for p in presence])
    if format == "csv":
        lines = [CSV_HEADER]
        lines.extend(",".join(row) for row in rows)
        return "\n".join(lines) + "\n"
    if format == "md":
        header = CSV_HEADER.split(",")
        lines = ["| " + " | ".join(header) + " |"]
        lines.append("|" + "|".join(" --- " for _ in header) + "|")
        lines.extend("| " + " | ".join(row) + " |" for row in rows)
        return "\n".join(lines) + "\n"
    raise UnsupportedFormat(f"unknown stats format {format!r} (expected csv or md)")
