"""Proof-of-authority meta-data ledger.

A fixed consortium of authorities takes turns sealing blocks (round-robin
by height). Blocks carry only meta-data transactions: contribution digests,
alarms, trust updates. Payloads live in the content store; the chain gives
tamper evidence and a total order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum

from .encoding import (
    DIGEST_LEN,
    ZERO_DIGEST,
    Reader,
    encode_digest,
    encode_f64,
    encode_u64,
    sha256,
)
from .errors import MalformedBytes, NoAuthorities, WrongProposer


class TxKind(IntEnum):
    MODEL_CONTRIBUTION = 0
    SIGNATURE_CONTRIBUTION = 1
    ALARM = 2
    TRUST_UPDATE = 3


class ModelKind(IntEnum):
    SVM = 0


class AttackClass(IntEnum):
    DOS = 0
    SPOOF = 1
    RECON = 2
    REPLAY = 3
    ANOMALY = 4


class Outcome(IntEnum):
    POSITIVE = 0
    NEGATIVE = 1


class Reason(IntEnum):
    MODEL_ACCEPTED = 0
    MODEL_REJECTED = 1
    FILTER_ACCEPTED = 2
    FILTER_REJECTED = 3
    ALARM_CONFIRMED = 4
    ALARM_FALSE = 5


def _check_digest(digest: bytes, name: str) -> None:
    if not isinstance(digest, bytes) or len(digest) != DIGEST_LEN:
        raise ValueError(f"{name} must be exactly {DIGEST_LEN} bytes")


def _check_fraction(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_count(value: int, name: str) -> None:
    if value < 0:
        raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ModelContribution:
    model_digest: bytes
    model_kind: ModelKind
    holdout_claimed_accuracy: float

    def __post_init__(self):
        _check_digest(self.model_digest, "model_digest")
        _check_fraction(self.holdout_claimed_accuracy, "holdout_claimed_accuracy")


@dataclass(frozen=True)
class SignatureContribution:
    filter_digest: bytes
    n_items: int
    m_bits: int
    k_hashes: int

    def __post_init__(self):
        _check_digest(self.filter_digest, "filter_digest")
        for name in ("n_items", "m_bits", "k_hashes"):
            _check_count(getattr(self, name), name)


@dataclass(frozen=True)
class Alarm:
    attack_class: AttackClass
    evidence_digest: bytes
    sim_time: int

    def __post_init__(self):
        _check_digest(self.evidence_digest, "evidence_digest")
        _check_count(self.sim_time, "sim_time")


@dataclass(frozen=True)
class TrustUpdate:
    subject: int
    outcome: Outcome
    reason: Reason

    def __post_init__(self):
        _check_count(self.subject, "subject")


Payload = ModelContribution | SignatureContribution | Alarm | TrustUpdate

_PAYLOAD_KIND = {
    ModelContribution: TxKind.MODEL_CONTRIBUTION,
    SignatureContribution: TxKind.SIGNATURE_CONTRIBUTION,
    Alarm: TxKind.ALARM,
    TrustUpdate: TxKind.TRUST_UPDATE,
}


@dataclass(frozen=True)
class Transaction:
    kind: TxKind
    sender: int
    payload: Payload

    def __post_init__(self):
        _check_count(self.sender, "sender")
        expected = _PAYLOAD_KIND[type(self.payload)]
        if self.kind != expected:
            raise ValueError(f"kind {self.kind} does not match payload {type(self.payload)}")

    @classmethod
    def wrap(cls, sender: int, payload: Payload) -> Transaction:
        return cls(_PAYLOAD_KIND[type(payload)], sender, payload)


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    proposer: int
    sim_time: int
    txs: tuple[Transaction, ...]
    hash: bytes

    def __post_init__(self):
        _check_digest(self.prev_hash, "prev_hash")
        _check_digest(self.hash, "hash")
        _check_count(self.index, "index")
        _check_count(self.proposer, "proposer")
        _check_count(self.sim_time, "sim_time")


def encode_tx(tx: Transaction) -> bytes:
    out = bytes([tx.kind]) + encode_u64(tx.sender)
    p = tx.payload
    if isinstance(p, ModelContribution):
        out += (
            encode_digest(p.model_digest)
            + bytes([p.model_kind])
            + encode_f64(p.holdout_claimed_accuracy)
        )
    elif isinstance(p, SignatureContribution):
        out += (
            encode_digest(p.filter_digest)
            + encode_u64(p.n_items)
            + encode_u64(p.m_bits)
            + encode_u64(p.k_hashes)
        )
    elif isinstance(p, Alarm):
        out += bytes([p.attack_class]) + encode_digest(p.evidence_digest) + encode_u64(p.sim_time)
    else:
        out += encode_u64(p.subject) + bytes([p.outcome]) + bytes([p.reason])
    return out


def canonical_encode(block: Block) -> bytes:
    """Deterministic encoding of everything but the hash field."""
    out = (
        encode_u64(block.index)
        + encode_digest(block.prev_hash)
        + encode_u64(block.proposer)
        + encode_u64(block.sim_time)
        + encode_u64(len(block.txs))
    )
    for tx in block.txs:
        out += encode_tx(tx)
    return out


def _read_enum(r: Reader, enum_cls, name: str):
    tag = r.tag()
    try:
        return enum_cls(tag)
    except ValueError:
        raise MalformedBytes(f"invalid {name} tag {tag}") from None


def decode_tx(r: Reader) -> Transaction:
    kind = _read_enum(r, TxKind, "transaction kind")
    sender = r.u64()
    try:
        if kind == TxKind.MODEL_CONTRIBUTION:
            digest = r.digest()
            model_kind = _read_enum(r, ModelKind, "model kind")
            acc = r.f64()
            payload: Payload = ModelContribution(digest, model_kind, acc)
        elif kind == TxKind.SIGNATURE_CONTRIBUTION:
            payload = SignatureContribution(r.digest(), r.u64(), r.u64(), r.u64())
        elif kind == TxKind.ALARM:
            attack_class = _read_enum(r, AttackClass, "attack class")
            payload = Alarm(attack_class, r.digest(), r.u64())
        else:
            subject = r.u64()
            outcome = _read_enum(r, Outcome, "outcome")
            reason = _read_enum(r, Reason, "reason")
            payload = TrustUpdate(subject, outcome, reason)
    except ValueError as exc:
        raise MalformedBytes(str(exc)) from None
    return Transaction(kind, sender, payload)


def canonical_decode(data: bytes, block_hash: bytes) -> Block:
    """Inverse of canonical_encode; the hash field is supplied by the caller."""
    r = Reader(data)
    index = r.u64()
    prev_hash = r.digest()
    proposer = r.u64()
    sim_time = r.u64()
    n_txs = r.u64()
    if n_txs > len(data):  # cheap bound before allocating
        raise MalformedBytes(f"implausible tx count {n_txs}")
    txs = tuple(decode_tx(r) for _ in range(n_txs))
    r.expect_done()
    return Block(index, prev_hash, proposer, sim_time, txs, block_hash)


def block_hash(index: int, prev_hash: bytes, proposer: int, sim_time: int,
               txs: tuple[Transaction, ...]) -> bytes:
    probe = Block(index, prev_hash, proposer, sim_time, txs, ZERO_DIGEST)
    return sha256(canonical_encode(probe))


def make_genesis() -> Block:
    h = block_hash(0, ZERO_DIGEST, 0, 0, ())
    return Block(0, ZERO_DIGEST, 0, 0, (), h)


@dataclass
class Ledger:
    authorities: list[int]
    blocks: list[Block] = field(default_factory=list)
    pending: list[Transaction] = field(default_factory=list)

    def __post_init__(self):
        if not self.authorities:
            raise NoAuthorities("authority list must be non-empty")
        if len(set(self.authorities)) != len(self.authorities):
            raise ValueError("duplicate authorities")
        if not self.blocks:
            self.blocks = [make_genesis()]

    @property
    def height(self) -> int:
        return len(self.blocks)

    def submit(self, tx: Transaction) -> None:
        self.pending.append(tx)

    def select_proposer(self, height: int) -> int:
        return select_proposer(self, height)

    def seal_block(self, proposer: int, sim_time: int, txs: list[Transaction]) -> Block:
        scheduled = self.select_proposer(self.height)
        if proposer != scheduled:
            raise WrongProposer(
                f"node {proposer} sealed at height {self.height}, expected {scheduled}"
            )
        prev = self.blocks[-1]
        txs = list(txs)
        h = block_hash(self.height, prev.hash, proposer, sim_time, tuple(txs))
        block = Block(self.height, prev.hash, proposer, sim_time, tuple(txs), h)
        self.blocks.append(block)
        for tx in txs:
            for i, p in enumerate(self.pending):
                if p is tx:
                    del self.pending[i]
                    break
        return block

    def verify_chain(self) -> bool:
        return verify_chain(self)

    def scan(self, kind: TxKind, since_height: int = 0) -> list[tuple[int, Transaction]]:
        out = []
        for block in self.blocks[since_height:]:
            for tx in block.txs:
                if tx.kind == kind:
                    out.append((block.index, tx))
        return out

    def total_bytes(self) -> int:
        """Chain size: canonical encodings plus one stored hash per block."""
        return sum(len(canonical_encode(b)) + DIGEST_LEN for b in self.blocks)


def select_proposer(ledger: Ledger, height: int) -> int:
    if not ledger.authorities:
        raise NoAuthorities("authority list must be non-empty")
    return ledger.authorities[height % len(ledger.authorities)]


def first_invalid_height(ledger: Ledger) -> int | None:
    """Height of the first block violating an invariant, or None if clean."""
    if not ledger.blocks:
        return 0
    genesis = ledger.blocks[0]
    if genesis.index != 0 or genesis.prev_hash != ZERO_DIGEST or genesis.txs:
        return 0
    for i, block in enumerate(ledger.blocks):
        if block.index != i:
            return i
        if i > 0 and block.prev_hash != ledger.blocks[i - 1].hash:
            return i
        if sha256(canonical_encode(block)) != block.hash:
            return i
    return None


def verify_chain(ledger: Ledger) -> bool:
    return first_invalid_height(ledger) is None


# --- JSON-lines export / import -------------------------------------------

def _tx_to_json(tx: Transaction) -> dict:
    p = tx.payload
    if isinstance(p, ModelContribution):
        payload = {
            "model_digest": p.model_digest.hex(),
            "model_kind": p.model_kind.name.lower(),
            "holdout_claimed_accuracy": p.holdout_claimed_accuracy,
        }
    elif isinstance(p, SignatureContribution):
        payload = {
            "filter_digest": p.filter_digest.hex(),
            "n_items": p.n_items,
            "m_bits": p.m_bits,
            "k_hashes": p.k_hashes,
        }
    elif isinstance(p, Alarm):
        payload = {
            "attack_class": p.attack_class.name.lower(),
            "evidence_digest": p.evidence_digest.hex(),
            "sim_time": p.sim_time,
        }
    else:
        payload = {
            "subject": p.subject,
            "outcome": p.outcome.name.lower(),
            "reason": p.reason.name.lower(),
        }
    return {"kind": tx.kind.name.lower(), "sender": tx.sender, **payload}


def _tx_from_json(obj: dict) -> Transaction:
    try:
        kind = TxKind[obj["kind"].upper()]
        sender = int(obj["sender"])
        if kind == TxKind.MODEL_CONTRIBUTION:
            payload: Payload = ModelContribution(
                bytes.fromhex(obj["model_digest"]),
                ModelKind[obj["model_kind"].upper()],
                float(obj["holdout_claimed_accuracy"]),
            )
        elif kind == TxKind.SIGNATURE_CONTRIBUTION:
            payload = SignatureContribution(
                bytes.fromhex(obj["filter_digest"]),
                int(obj["n_items"]),
                int(obj["m_bits"]),
                int(obj["k_hashes"]),
            )
        elif kind == TxKind.ALARM:
            payload = Alarm(
                AttackClass[obj["attack_class"].upper()],
                bytes.fromhex(obj["evidence_digest"]),
                int(obj["sim_time"]),
            )
        else:
            payload = TrustUpdate(
                int(obj["subject"]),
                Outcome[obj["outcome"].upper()],
                Reason[obj["reason"].upper()],
            )
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedBytes(f"bad transaction record: {exc}") from None
    return Transaction(kind, sender, payload)


def export_jsonl(ledger: Ledger) -> str:
    """One JSON object per block; digests hex, lowercase."""
    lines = []
    for block in ledger.blocks:
        lines.append(
            json.dumps(
                {
                    "index": block.index,
                    "prev_hash": block.prev_hash.hex(),
                    "proposer": block.proposer,
                    "sim_time": block.sim_time,
                    "txs": [_tx_to_json(t) for t in block.txs],
                    "hash": block.hash.hex(),
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + "\n"


def import_jsonl(text: str, authorities: list[int] | None = None) -> Ledger:
    blocks = []
    for lineno, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            block = Block(
                int(obj["index"]),
                bytes.fromhex(obj["prev_hash"]),
                int(obj["proposer"]),
                int(obj["sim_time"]),
                tuple(_tx_from_json(t) for t in obj["txs"]),
                bytes.fromhex(obj["hash"]),
            )
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise MalformedBytes(f"line {lineno}: {exc}") from None
        blocks.append(block)
    if not blocks:
        raise MalformedBytes("no blocks in input")
    return Ledger(authorities=authorities or [0], blocks=blocks)
