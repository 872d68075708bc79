"""Content-addressed evidence storage with a signed custody chain.

Evidence bytes are opaque: they are stored once per distinct SHA-256 under
``vault/<first two hex>/<hash>`` and never parsed. Every action on an item
(ingest, access, export, verify) appends a custody entry that is hash-linked
to its predecessor and Ed25519-signed, so any mutation of the record — or of
the stored bytes — is detectable after the fact.

Hashing and signing contracts (see docs/formats.md):
  entry_hash = SHA-256(canonical JSON of the entry minus entry_hash/signature)
  prev_hash of entry n = entry_hash of entry n-1; genesis prev_hash = 64 zeros
  signature = Ed25519 over the UTF-8 bytes of the entry_hash hex string
"""

from __future__ import annotations

import base64
import hashlib
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Optional

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .canonical import GENESIS_HASH, canonical_bytes, hash_canonical, sha256_hex
from .errors import (
    BlobMissing,
    ManifestTampered,
    SigningError,
    StorageError,
    UnsupportedSchema,
    ValidationFailed,
)
from .investigation import DataSourceCategory, _enum

if TYPE_CHECKING:  # pragma: no cover
    from .model import Case

MANIFEST_SCHEMA = "flowermanifest/1"


class CustodyAction(str, Enum):
    INGESTED = "ingested"
    ACCESSED = "accessed"
    EXPORTED = "exported"
    VERIFIED = "verified"


@dataclass
class EvidenceItem:
    """Metadata record for one ingested piece of evidence.

    Two ingests of identical bytes are distinct items sharing a content_hash
    (and, at the storage layer, one blob).
    """

    id: str
    content_hash: str
    size_bytes: int
    category: DataSourceCategory
    source_target: Optional[str]
    acquired_at: str
    acquired_by: str
    description: str
    storage_path: str

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "content_hash": self.content_hash,
            "size_bytes": self.size_bytes,
            "category": self.category.value,
            "source_target": self.source_target,
            "acquired_at": self.acquired_at,
            "acquired_by": self.acquired_by,
            "description": self.description,
            "storage_path": self.storage_path,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvidenceItem":
        return cls(
            id=data["id"],
            content_hash=data["content_hash"],
            size_bytes=data["size_bytes"],
            category=_enum(DataSourceCategory, data["category"], "category"),
            source_target=data.get("source_target"),
            acquired_at=data["acquired_at"],
            acquired_by=data["acquired_by"],
            description=data["description"],
            storage_path=data["storage_path"],
        )


@dataclass
class CustodyEntry:
    seq: int
    evidence: str
    action: CustodyAction
    actor: str
    at: str
    prev_hash: str
    entry_hash: str
    signature: str
    signer_key_id: str

    def core_fields(self) -> dict[str, Any]:
        """The signed portion: everything except entry_hash and signature."""
        return {
            "seq": self.seq,
            "evidence": self.evidence,
            "action": self.action.value,
            "actor": self.actor,
            "at": self.at,
            "prev_hash": self.prev_hash,
            "signer_key_id": self.signer_key_id,
        }

    def to_dict(self) -> dict[str, Any]:
        data = self.core_fields()
        data["entry_hash"] = self.entry_hash
        data["signature"] = self.signature
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CustodyEntry":
        return cls(
            seq=data["seq"],
            evidence=data["evidence"],
            action=_enum(CustodyAction, data["action"], "custody action"),
            actor=data["actor"],
            at=data["at"],
            prev_hash=data["prev_hash"],
            entry_hash=data["entry_hash"],
            signature=data["signature"],
            signer_key_id=data["signer_key_id"],
        )


@dataclass
class ChainResult:
    """Outcome of walking a hash chain; ``break_seq`` is the earliest failure."""

    ok: bool
    break_seq: Optional[int] = None
    reason: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "break_seq": self.break_seq, "reason": self.reason}


@dataclass
class VerificationResult:
    evidence: str
    status: str  # "ok" | "mismatch"
    expected: str
    actual: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "evidence": self.evidence,
            "status": self.status,
            "expected": self.expected,
            "actual": self.actual,
        }


class SigningKey:
    """An Ed25519 private key plus the key id it registers under.

    Private keys are supplied per invocation and never persisted by the
    vault; only the public half enters the journal.
    """

    def __init__(self, private_key: Ed25519PrivateKey, key_id: str | None = None):
        self._key = private_key
        raw = private_key.public_key().public_bytes(
            serialization.Encoding.Raw, serialization.PublicFormat.Raw
        )
        self.public_key_b64 = base64.b64encode(raw).decode("ascii")
        self.key_id = key_id or "k" + hashlib.sha256(raw).hexdigest()[:12]

    @classmethod
    def generate(cls, key_id: str | None = None, seed: bytes | None = None) -> "SigningKey":
        if seed is not None:
            if len(seed) != 32:
                raise SigningError("key seed must be exactly 32 bytes")
            key = Ed25519PrivateKey.from_private_bytes(seed)
        else:
            key = Ed25519PrivateKey.generate()
        return cls(key, key_id)

    @classmethod
    def load_pem(cls, path: str | Path, key_id: str | None = None) -> "SigningKey":
        try:
            data = Path(path).read_bytes()
            key = serialization.load_pem_private_key(data, password=None)
        except (OSError, ValueError) as exc:
            raise SigningError(f"cannot load signing key from {path}: {exc}") from exc
        if not isinstance(key, Ed25519PrivateKey):
            raise SigningError(f"{path} is not an Ed25519 private key")
        return cls(key, key_id)

    def save_pem(self, path: str | Path) -> None:
        pem = self._key.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )
        Path(path).write_bytes(pem)

    def sign_digest(self, hex_digest: str) -> str:
        try:
            sig = self._key.sign(hex_digest.encode("utf-8"))
        except Exception as exc:  # cryptography raises library-specific errors
            raise SigningError(f"signing failed: {exc}") from exc
        return base64.b64encode(sig).decode("ascii")


def entry_hash_of(core_fields: dict[str, Any]) -> str:
    return hash_canonical(core_fields)


def build_custody_entry(
    seq: int,
    evidence: str,
    action: CustodyAction,
    actor: str,
    at: str,
    prev_hash: str,
    key: SigningKey,
) -> CustodyEntry:
    core = {
        "seq": seq,
        "evidence": evidence,
        "action": action.value,
        "actor": actor,
        "at": at,
        "prev_hash": prev_hash,
        "signer_key_id": key.key_id,
    }
    digest = entry_hash_of(core)
    return CustodyEntry(
        seq=seq,
        evidence=evidence,
        action=action,
        actor=actor,
        at=at,
        prev_hash=prev_hash,
        entry_hash=digest,
        signature=key.sign_digest(digest),
        signer_key_id=key.key_id,
    )


def _signature_valid(entry: CustodyEntry, public_key_b64: str) -> bool:
    try:
        raw = base64.b64decode(public_key_b64.encode("ascii"), validate=True)
        public = Ed25519PublicKey.from_public_bytes(raw)
        public.verify(
            base64.b64decode(entry.signature.encode("ascii"), validate=True),
            entry.entry_hash.encode("utf-8"),
        )
        return True
    except (InvalidSignature, ValueError):
        return False


def verify_custody_chain(
    entries: list[CustodyEntry], signer_keys: dict[str, str]
) -> ChainResult:
    """Walk entries in order; report the earliest break.

    Per entry the checks run link, then recomputed hash, then signature, so
    the reported reason is the first thing wrong with the earliest bad entry.
    """
    prev_hash = GENESIS_HASH
    for position, entry in enumerate(entries, start=1):
        if entry.seq != position:
            return ChainResult(False, position, "sequence")
        if entry.prev_hash != prev_hash:
            return ChainResult(False, position, "hash_link")
        if entry_hash_of(entry.core_fields()) != entry.entry_hash:
            return ChainResult(False, position, "entry_hash")
        public = signer_keys.get(entry.signer_key_id)
        if public is None or not _signature_valid(entry, public):
            return ChainResult(False, position, "signature")
        prev_hash = entry.entry_hash
    return ChainResult(True)


class BlobStore:
    """Write-once content-addressed blob files under a vault directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def path_for(self, content_hash: str) -> Path:
        return self.root / content_hash[:2] / content_hash

    def put(self, data: bytes) -> tuple[str, str]:
        """Store bytes, deduplicating on hash. Returns (hash, relative path)."""
        content_hash = sha256_hex(data)
        rel = f"vault/{content_hash[:2]}/{content_hash}"
        path = self.path_for(content_hash)
        if not path.exists():
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                os.replace(tmp, path)
            except OSError as exc:
                raise StorageError(f"cannot store blob {content_hash}: {exc}") from exc
        return content_hash, rel

    def read(self, content_hash: str) -> bytes:
        path = self.path_for(content_hash)
        if not path.exists():
            raise BlobMissing(f"blob {content_hash} is missing from the vault")
        try:
            return path.read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read blob {content_hash}: {exc}") from exc

    def exists(self, content_hash: str) -> bool:
        return self.path_for(content_hash).exists()

    def count(self) -> int:
        if not self.root.exists():
            return 0
        return sum(1 for p in self.root.glob("*/*") if p.is_file() and not p.name.endswith(".tmp"))


def recheck_item(item: EvidenceItem, store: BlobStore) -> VerificationResult:
    """Recompute the stored blob's hash against the recorded content_hash."""
    actual = sha256_hex(store.read(item.content_hash))
    status = "ok" if actual == item.content_hash else "mismatch"
    return VerificationResult(item.id, status, item.content_hash, actual)


def build_manifest(case: "Case") -> dict[str, Any]:
    return {
        "schema": MANIFEST_SCHEMA,
        "case_id": case.id,
        "items": [
            case.evidence[eid].to_dict() for eid in sorted(case.evidence)
        ],
        "custody": [entry.to_dict() for entry in case.custody],
        "signer_keys": [
            {"key_id": key_id, "public_key": case.signer_keys[key_id]}
            for key_id in sorted(case.signer_keys)
        ],
    }


def write_manifest(case: "Case", directory: str | Path) -> Path:
    """Write manifest.json plus its .sha256 sidecar; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = canonical_bytes(build_manifest(case)) + b"\n"
    manifest_path = directory / "manifest.json"
    manifest_path.write_bytes(payload)
    sidecar = directory / "manifest.json.sha256"
    sidecar.write_text(sha256_hex(payload) + "\n", encoding="utf-8")
    return manifest_path


def read_manifest(manifest_path: str | Path) -> dict[str, Any]:
    """Load and validate a manifest against its sidecar hash."""
    manifest_path = Path(manifest_path)
    try:
        payload = manifest_path.read_bytes()
    except OSError as exc:
        raise ManifestTampered(f"cannot read manifest: {exc}") from exc
    sidecar = manifest_path.parent / (manifest_path.name + ".sha256")
    try:
        recorded = sidecar.read_text(encoding="utf-8").strip()
    except OSError as exc:
        raise ManifestTampered(f"cannot read manifest sidecar: {exc}") from exc
    if sha256_hex(payload) != recorded:
        raise ManifestTampered("manifest bytes do not match the sidecar hash")
    import json

    try:
        data = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ManifestTampered(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or data.get("schema") != MANIFEST_SCHEMA:
        raise UnsupportedSchema(
            f"expected manifest schema {MANIFEST_SCHEMA!r}, got {data.get('schema')!r}"
            if isinstance(data, dict)
            else "manifest root is not an object"
        )
    for field_name in ("case_id", "items", "custody", "signer_keys"):
        if field_name not in data:
            raise ValidationFailed(f"manifest is missing {field_name!r}")
    return data


def write_manifest_dict(data: dict[str, Any], directory: str | Path) -> Path:
    """Re-export an imported manifest; byte-identical to the original export."""
    if data.get("schema") != MANIFEST_SCHEMA:
        raise UnsupportedSchema(f"expected manifest schema {MANIFEST_SCHEMA!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    payload = canonical_bytes(data) + b"\n"
    manifest_path = directory / "manifest.json"
    manifest_path.write_bytes(payload)
    (directory / "manifest.json.sha256").write_text(
        sha256_hex(payload) + "\n", encoding="utf-8"
    )
    return manifest_path
