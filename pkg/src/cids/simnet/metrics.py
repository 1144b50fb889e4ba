"""Run metrics: detection quality, exchange overhead, dissemination latency."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class ClassMetrics:
    injected_windows: int = 0
    detected_windows: int = 0
    mean_detection_latency_ticks: float | None = None

    @property
    def detection_rate(self) -> float:
        if self.injected_windows == 0:
            return 0.0
        return self.detected_windows / self.injected_windows


@dataclass
class MetricsReport:
    seed: int
    per_class: dict[str, ClassMetrics] = field(default_factory=dict)
    benign_windows: int = 0
    false_alarm_windows: int = 0
    bytes_filters_exchanged: int = 0
    bytes_raw_baseline: int = 0
    ledger_blocks: int = 0
    ledger_bytes: int = 0
    dissemination_mean: float | None = None
    dissemination_max: int | None = None
    rejected_model_contributions: int = 0
    rejected_filter_contributions: int = 0
    sync_faults: int = 0
    adopted_model_digests: list[str] = field(default_factory=list)

    @property
    def false_alarm_rate(self) -> float:
        if self.benign_windows == 0:
            return 0.0
        return self.false_alarm_windows / self.benign_windows

    @property
    def compression_ratio(self) -> float:
        if self.bytes_filters_exchanged == 0:
            return 0.0
        return self.bytes_raw_baseline / self.bytes_filters_exchanged

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "per_class": {
                name: {
                    "injected_windows": m.injected_windows,
                    "detected_windows": m.detected_windows,
                    "detection_rate": m.detection_rate,
                    "mean_detection_latency_ticks": m.mean_detection_latency_ticks,
                }
                for name, m in sorted(self.per_class.items())
            },
            "false_alarm_rate": self.false_alarm_rate,
            "benign_windows": self.benign_windows,
            "false_alarm_windows": self.false_alarm_windows,
            "bytes_filters_exchanged": self.bytes_filters_exchanged,
            "bytes_raw_baseline": self.bytes_raw_baseline,
            "compression_ratio": self.compression_ratio,
            "ledger_blocks": self.ledger_blocks,
            "ledger_bytes": self.ledger_bytes,
            "alarm_dissemination_latency": {
                "mean": self.dissemination_mean,
                "max": self.dissemination_max,
            },
            "rejected_contributions": {
                "model": self.rejected_model_contributions,
                "filter": self.rejected_filter_contributions,
            },
            "sync_faults": self.sync_faults,
            "adopted_model_digests": self.adopted_model_digests,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


def baseline_bytes(n_signatures: int) -> int:
    """Raw signature-list exchange cost: 64 bytes per signature."""
    if n_signatures < 0:
        raise ValueError("n_signatures must be >= 0")
    return 64 * n_signatures
