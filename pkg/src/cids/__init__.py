"""Desk-scale decentralized collaborative intrusion detection.

Simulated gateway IDS nodes detect IoT attacks with bloom-filter signature
matching and a linear SVM anomaly engine, exchange contributions through a
proof-of-authority meta-data ledger backed by a content-addressed store, and
accrue Beta-mean reputation through consensus-time validation of every
contribution.
"""

from . import bloom, content_store, detection, errors, ledger, node, simnet, trust

__version__ = "0.1.0"

__all__ = [
    "bloom",
    "content_store",
    "detection",
    "errors",
    "ledger",
    "node",
    "simnet",
    "trust",
    "__version__",
]
