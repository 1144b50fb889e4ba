"""Per-gateway detection engines.

Signature engine: canonical event keys matched against a bloom filter.
Anomaly engine: a linear SVM over 8 window features, trained by stochastic
subgradient descent on the hinge loss with step 1/(lambda*t). Models carry
their own standardization parameters and a digest of the training set, so a
contributed model is self-contained and attributable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntFlag

import numpy as np

from .bloom import BloomFilter
from .encoding import DIGEST_LEN, Reader, encode_digest, encode_f64, encode_u64, sha256
from .errors import BadHyperparameter, DegenerateDataset, MalformedBytes

N_FEATURES = 8

FEATURE_NAMES = [
    "packets_per_tick",
    "mean_payload_len",
    "distinct_dst_ports",
    "syn_ratio",
    "duplicate_payload_ratio",
    "identity_conflicts",
    "distinct_destinations",
    "inter_arrival_variance",
]


class Flags(IntFlag):
    NONE = 0
    SYN = 1
    ACK = 2
    ARP_REPLY = 4


@dataclass(frozen=True)
class EventRecord:
    sim_time: int
    src: int
    dst: int
    dst_port: int
    payload_digest: bytes
    payload_len: int
    flags: Flags
    claimed_src_identity: int

    def __post_init__(self):
        if len(self.payload_digest) != DIGEST_LEN:
            raise ValueError("payload_digest must be 32 bytes")
        if not 0 <= self.dst_port <= 65535:
            raise ValueError("dst_port out of range")
        if self.payload_len < 0:
            raise ValueError("payload_len must be >= 0")


def signature_key(event: EventRecord) -> bytes:
    """41-byte canonical key: port (8) + payload digest (32) + flags (1)."""
    return encode_u64(event.dst_port) + encode_digest(event.payload_digest) + bytes([event.flags])


def sig_match(signature_filter: BloomFilter, event: EventRecord) -> bool:
    return signature_filter.query(signature_key(event))


def extract_features(window: list[EventRecord], window_ticks: int) -> np.ndarray:
    """8 features over a window of time-ordered events; empty window is all zero."""
    if window_ticks < 1:
        raise ValueError("window_ticks must be >= 1")
    out = np.zeros(N_FEATURES)
    if not window:
        return out
    n = len(window)
    out[0] = n / window_ticks
    out[1] = sum(e.payload_len for e in window) / n
    out[2] = len({e.dst_port for e in window})
    out[3] = sum(1 for e in window if Flags.SYN in e.flags) / n
    out[4] = 1.0 - len({e.payload_digest for e in window}) / n
    out[5] = sum(1 for e in window if e.claimed_src_identity != e.src)
    out[6] = len({e.dst for e in window})
    if n >= 2:
        gaps = np.diff([e.sim_time for e in window])
        out[7] = float(np.var(gaps))
    return out


@dataclass
class LabeledDataset:
    """Feature rows with labels: +1 attack, -1 benign."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64).reshape(-1, N_FEATURES)
        self.y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        if len(self.X) != len(self.y):
            raise ValueError("feature/label length mismatch")
        if not np.all(np.isin(self.y, (-1, 1))):
            raise ValueError("labels must be +1 or -1")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def has_both_classes(self) -> bool:
        return len(self) > 0 and (self.y == 1).any() and (self.y == -1).any()

    @staticmethod
    def concat(parts: list[LabeledDataset]) -> LabeledDataset:
        return LabeledDataset(
            np.concatenate([p.X for p in parts]), np.concatenate([p.y for p in parts])
        )


def dataset_serialize(data: LabeledDataset) -> bytes:
    out = encode_u64(len(data))
    for row, label in zip(data.X, data.y):
        for v in row:
            out += encode_f64(float(v))
        out += encode_f64(float(label))
    return out


def dataset_to_jsonl(data: LabeledDataset) -> str:
    lines = [
        json.dumps({"features": [float(v) for v in row], "label": int(label)})
        for row, label in zip(data.X, data.y)
    ]
    return "\n".join(lines) + "\n"


def dataset_from_jsonl(text: str) -> LabeledDataset:
    rows, labels = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            features = [float(v) for v in obj["features"]]
            if len(features) != N_FEATURES:
                raise ValueError(f"expected {N_FEATURES} features")
            rows.append(features)
            labels.append(int(obj["label"]))
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise MalformedBytes(f"bad dataset row: {exc}") from None
    if not rows:
        raise MalformedBytes("empty dataset")
    return LabeledDataset(np.array(rows), np.array(labels))


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    training_digest: bytes

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(N_FEATURES)
        self.feature_means = np.asarray(self.feature_means, dtype=np.float64).reshape(N_FEATURES)
        self.feature_scales = np.asarray(self.feature_scales, dtype=np.float64).reshape(N_FEATURES)
        if not np.all(self.feature_scales > 0):
            raise ValueError("feature_scales must be strictly positive")
        values = np.concatenate([self.weights, [self.bias], self.feature_means,
                                 self.feature_scales])
        if not np.all(np.isfinite(values)):
            raise ValueError("model parameters must be finite")
        if len(self.training_digest) != DIGEST_LEN:
            raise ValueError("training_digest must be 32 bytes")

    def standardize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.feature_means) / self.feature_scales

    def negated(self) -> LinearModel:
        """Sign-flipped copy; the canonical label-flip poisoning construction."""
        return LinearModel(
            -self.weights, -self.bias, self.feature_means.copy(),
            self.feature_scales.copy(), self.training_digest,
        )


def hinge_subgradient(
    w: np.ndarray, b: float, x: np.ndarray, y: int, lam: float
) -> tuple[np.ndarray, float]:
    """Subgradient of (lam/2)|w|^2 + max(0, 1 - y(w.x + b)) at one sample."""
    w = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if y * (float(w @ x) + b) < 1.0:
        return lam * w - y * x, -float(y)
    return lam * w, 0.0


def primal_objective(w: np.ndarray, b: float, data: LabeledDataset, lam: float) -> float:
    margins = data.y * (data.X @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).mean()
    return 0.5 * lam * float(w @ w) + float(hinge)


def svm_train(data: LabeledDataset, lam: float, epochs: int, seed: int) -> LinearModel:
    """Seeded-shuffle stochastic subgradient descent, step 1/(lam*t).

    Returns the average of the iterates over the second half of the run
    (Polyak-Ruppert tail averaging); the early 1/(lam*t) steps are large and
    the last iterate alone is noisy, especially for the unregularized bias.
    """
    if lam <= 0:
        raise BadHyperparameter(f"lambda must be positive, got {lam}")
    if epochs < 1:
        raise BadHyperparameter(f"epochs must be >= 1, got {epochs}")
    if len(data) == 0 or not data.has_both_classes:
        raise DegenerateDataset("training data must contain both classes")

    means = data.X.mean(axis=0)
    scales = np.maximum(data.X.std(axis=0), 1e-8)
    Z = (data.X - means) / scales

    rng = np.random.default_rng(seed)
    w = np.zeros(N_FEATURES)
    b = 0.0
    t = 0
    total = epochs * len(data)
    w_sum = np.zeros(N_FEATURES)
    b_sum = 0.0
    n_avg = 0
    for _ in range(epochs):
        for i in rng.permutation(len(data)):
            t += 1
            eta = 1.0 / (lam * t)
            z, y = Z[i], data.y[i]
            if y * (float(w @ z) + b) < 1.0:
                w = (1.0 - eta * lam) * w + (eta * y) * z
                b += eta * y
            else:
                w = (1.0 - eta * lam) * w
            if t > total // 2:
                w_sum += w
                b_sum += b
                n_avg += 1

    return LinearModel(w_sum / n_avg, b_sum / n_avg, means, scales,
                       sha256(dataset_serialize(data)))


def svm_predict(model: LinearModel, x: np.ndarray) -> tuple[int, float]:
    """(label, margin); a margin of exactly 0 classifies as attack."""
    z = model.standardize(x)
    margin = float(model.weights @ z) + model.bias
    return (1 if margin >= 0 else -1), margin


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int


def evaluate(model: LinearModel, data: LabeledDataset) -> EvalMetrics:
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    Z = (data.X - model.feature_means) / model.feature_scales
    margins = Z @ model.weights + model.bias
    pred = np.where(margins >= 0, 1, -1)
    tp = int(np.sum((pred == 1) & (data.y == 1)))
    fp = int(np.sum((pred == 1) & (data.y == -1)))
    fn = int(np.sum((pred == -1) & (data.y == 1)))
    tn = int(np.sum((pred == -1) & (data.y == -1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalMetrics((tp + tn) / len(data), precision, recall, f1, tp, fp, fn, tn)


MODEL_BYTES = 25 * 8 + DIGEST_LEN  # 8 weights, bias, 8 means, 8 scales, digest


def model_serialize(model: LinearModel) -> bytes:
    out = b""
    for v in model.weights:
        out += encode_f64(float(v))
    out += encode_f64(model.bias)
    for v in model.feature_means:
        out += encode_f64(float(v))
    for v in model.feature_scales:
        out += encode_f64(float(v))
    out += encode_digest(model.training_digest)
    return out


def model_deserialize(data: bytes) -> LinearModel:
    if len(data) != MODEL_BYTES:
        raise MalformedBytes(f"model blob must be {MODEL_BYTES} bytes, got {len(data)}")
    r = Reader(data)
    weights = np.array([r.f64() for _ in range(N_FEATURES)])
    bias = r.f64()
    means = np.array([r.f64() for _ in range(N_FEATURES)])
    scales = np.array([r.f64() for _ in range(N_FEATURES)])
    digest = r.digest()
    try:
        return LinearModel(weights, bias, means, scales, digest)
    except ValueError as exc:
        raise MalformedBytes(str(exc)) from None
