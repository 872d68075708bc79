"""Filter expressions over evidence metadata.

A filter is a predicate tree with the wire form documented in
docs/formats.md, e.g. ``{"and":[{"category":"host"},{"keyword":"ssh"}]}``.
Evaluation is a pure function of (vault metadata, filter), runs set-wise
(union/intersection/complement over the item-id universe) and never touches
blob content — content analysis is out of scope by design.

keyword matches case-insensitively against the free-text metadata fields of
an item: description and acquired_by. time_range bounds are inclusive on
acquired_at; either bound may be omitted for an open end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

from .errors import ValidationFailed
from .investigation import DataSourceCategory
from .timestamps import parse_ts

if TYPE_CHECKING:  # pragma: no cover
    from .model import Case
    from .vault import EvidenceItem


@dataclass
class FilterRun:
    """A recorded filter application (report section: filters applied)."""

    at: str
    actor: str
    expression: dict[str, Any]
    matched: list[str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "at": self.at,
            "actor": self.actor,
            "expression": self.expression,
            "matched": list(self.matched),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FilterRun":
        return cls(
            at=data["at"],
            actor=data["actor"],
            expression=data["expression"],
            matched=list(data.get("matched", [])),
        )


class FilterSpec:
    """A validated filter expression tree."""

    def __init__(self, node: str, args: Any):
        self.node = node
        self.args = args

    @classmethod
    def parse(cls, data: Any) -> "FilterSpec":
        """Validate the JSON wire form into a FilterSpec tree."""
        if not isinstance(data, dict) or len(data) != 1:
            raise ValidationFailed(
                "a filter node must be an object with exactly one predicate key"
            )
        (node, args), = data.items()
        if node in ("and", "or"):
            if not isinstance(args, list):
                raise ValidationFailed(f"{node!r} takes a list of filter nodes")
            return cls(node, [cls.parse(child) for child in args])
        if node == "not":
            return cls(node, cls.parse(args))
        if node == "category":
            try:
                return cls(node, DataSourceCategory(args))
            except ValueError:
                raise ValidationFailed(f"unknown category: {args!r}") from None
        if node == "target":
            if not isinstance(args, str) or not args:
                raise ValidationFailed("'target' takes a target id string")
            return cls(node, args)
        if node == "keyword":
            if not isinstance(args, str) or not args:
                raise ValidationFailed("'keyword' takes a non-empty string")
            return cls(node, args)
        if node == "time_range":
            if not isinstance(args, dict) or not set(args) <= {"from", "to"}:
                raise ValidationFailed(
                    "'time_range' takes an object with 'from' and/or 'to'"
                )
            bounds = {}
            for bound in ("from", "to"):
                if bound in args:
                    parse_ts(args[bound])
                    bounds[bound] = args[bound]
            return cls(node, bounds)
        raise ValidationFailed(f"unknown filter predicate: {node!r}")

    def to_dict(self) -> dict[str, Any]:
        if self.node in ("and", "or"):
            return {self.node: [child.to_dict() for child in self.args]}
        if self.node == "not":
            return {self.node: self.args.to_dict()}
        if self.node == "category":
            return {self.node: self.args.value}
        if self.node == "time_range":
            return {self.node: dict(self.args)}
        return {self.node: self.args}


def _matches(item: "EvidenceItem", spec: FilterSpec) -> bool:
    if spec.node == "category":
        return item.category == spec.args
    if spec.node == "target":
        return item.source_target == spec.args
    if spec.node == "keyword":
        needle = spec.args.lower()
        return needle in item.description.lower() or needle in item.acquired_by.lower()
    if spec.node == "time_range":
        low = spec.args.get("from")
        high = spec.args.get("to")
        # Fixed-width UTC timestamps: string order equals temporal order.
        if low is not None and item.acquired_at < low:
            return False
        if high is not None and item.acquired_at > high:
            return False
        return True
    raise AssertionError(f"not a leaf predicate: {spec.node}")


def _evaluate(case: "Case", spec: FilterSpec, universe: frozenset[str]) -> set[str]:
    if spec.node == "and":
        result = set(universe)
        for child in spec.args:
            result &= _evaluate(case, child, universe)
        return result
    if spec.node == "or":
        result: set[str] = set()
        for child in spec.args:
            result |= _evaluate(case, child, universe)
        return result
    if spec.node == "not":
        return set(universe) - _evaluate(case, spec.args, universe)
    return {eid for eid in universe if _matches(case.evidence[eid], spec)}


def apply_filter(case: "Case", spec: FilterSpec | dict[str, Any]) -> list[str]:
    """Ids of all vault items whose metadata satisfies the filter, in id order."""
    if not isinstance(spec, FilterSpec):
        spec = FilterSpec.parse(spec)
    universe = frozenset(case.evidence)
    return sorted(_evaluate(case, spec, universe))
