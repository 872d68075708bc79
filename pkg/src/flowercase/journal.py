"""Append-only, hash-linked case journal.

Documentation is not a parallel duty here but the substrate: every case
mutation is persisted as one canonical-JSON event line (JSON Lines, UTF-8,
LF) before it is applied, and case state is always a deterministic replay of
the file. Events are immutable once written; seq is 1-based and gapless;
each event's ``hash`` covers all of its fields minus the hash itself, and
``prev_hash`` links it to its predecessor (genesis links to 64 zeros).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional

from .canonical import GENESIS_HASH, canonical_json, hash_canonical
from .errors import JournalTampered, UnknownEventKind, ValidationFailed
from .model import Case
from .vault import ChainResult

JOURNAL_FILENAME = "journal.jsonl"
LOCK_FILENAME = "journal.lock"
DIGEST_FILENAME = "state.sha256"


@dataclass
class JournalEvent:
    seq: int
    at: str
    actor: str
    kind: str
    payload: dict[str, Any]
    prev_hash: str
    hash: str

    def core(self) -> dict[str, Any]:
        """The hashed portion: every field except the hash itself."""
        return {
            "seq": self.seq,
            "at": self.at,
            "actor": self.actor,
            "kind": self.kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
        }

    def to_dict(self) -> dict[str, Any]:
        data = self.core()
        data["hash"] = self.hash
        return data

    def to_line(self) -> str:
        return canonical_json(self.to_dict()) + "\n"

    @classmethod
    def build(
        cls, seq: int, at: str, actor: str, kind: str, payload: dict[str, Any], prev_hash: str
    ) -> "JournalEvent":
        core = {
            "seq": seq,
            "at": at,
            "actor": actor,
            "kind": kind,
            "payload": payload,
            "prev_hash": prev_hash,
        }
        return cls(**core, hash=hash_canonical(core))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "JournalEvent":
        try:
            return cls(
                seq=data["seq"],
                at=data["at"],
                actor=data["actor"],
                kind=data["kind"],
                payload=data["payload"],
                prev_hash=data["prev_hash"],
                hash=data["hash"],
            )
        except (KeyError, TypeError) as exc:
            raise ValidationFailed(f"malformed journal event: {exc}") from exc


def verify_events(events: Iterable[JournalEvent]) -> ChainResult:
    """Walk events in file order; report the earliest break."""
    prev_hash = GENESIS_HASH
    for position, event in enumerate(events, start=1):
        if event.seq != position:
            return ChainResult(False, position, "sequence")
        if event.prev_hash != prev_hash:
            return ChainResult(False, position, "hash_link")
        if hash_canonical(event.core()) != event.hash:
            return ChainResult(False, position, "entry_hash")
        prev_hash = event.hash
    return ChainResult(True)


class JournalFile:
    """One case's journal on disk. Callers serialize writes via the lock file."""

    def __init__(self, path: str | Path, known_kinds: frozenset[str] | None = None, durable: bool = True):
        self.path = Path(path)
        self.known_kinds = known_kinds
        self.durable = durable

    @property
    def lock_path(self) -> Path:
        return self.path.parent / LOCK_FILENAME

    def exists(self) -> bool:
        return self.path.exists()

    def read_events(self) -> list[JournalEvent]:
        if not self.path.exists():
            return []
        events: list[JournalEvent] = []
        with self.path.open("r", encoding="utf-8") as handle:
            for position, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    data = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise JournalTampered(
                        f"journal line {position} is not valid JSON",
                        {"seq": position, "reason": "format"},
                    ) from exc
                events.append(JournalEvent.from_dict(data))
        return events

    def read_since(self, seq: int) -> list[JournalEvent]:
        return [event for event in self.read_events() if event.seq > seq]

    def tail(self) -> tuple[int, str]:
        events = self.read_events()
        if not events:
            return 0, GENESIS_HASH
        last = events[-1]
        return last.seq, last.hash

    def append(self, kind: str, payload: dict[str, Any], actor: str, at: str) -> JournalEvent:
        """Persist one event; the mutation may only proceed once this returns."""
        if self.known_kinds is not None and kind not in self.known_kinds:
            raise UnknownEventKind(f"unknown event kind {kind!r}")
        seq, prev_hash = self.tail()
        event = JournalEvent.build(seq + 1, at, actor, kind, payload, prev_hash)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8", newline="\n") as handle:
            handle.write(event.to_line())
            handle.flush()
            if self.durable:
                os.fsync(handle.fileno())
        return event

    def verify(self) -> ChainResult:
        try:
            events = self.read_events()
        except JournalTampered as exc:
            return ChainResult(False, exc.detail.get("seq"), "format")
        except ValidationFailed:
            return ChainResult(False, None, "format")
        return verify_events(events)


def state_digest(case: Case) -> str:
    """SHA-256 over the canonical serialization of the materialized case."""
    return hash_canonical(case.to_dict())


def write_state_digest(case: Case, directory: str | Path) -> Path:
    path = Path(directory) / DIGEST_FILENAME
    path.write_text(state_digest(case) + "\n", encoding="utf-8")
    return path


def events_to_jsonl(events: Iterable[JournalEvent]) -> str:
    return "".join(event.to_line() for event in events)


def first_break(result: ChainResult) -> Optional[dict[str, Any]]:
    if result.ok:
        return None
    return {"seq": result.break_seq, "reason": result.reason}
