#!/usr/bin/env python3
"""Model-poisoning defense walkthrough.

Trains an honest detector, builds the weight-negated ("label-flipped")
poisoned variant, and shows how validator holdouts plus the trust-weighted
quorum keep the poison off the chain while the contributor's reputation
sinks.
"""

import numpy as np

from cids.detection import LabeledDataset, svm_train
from cids.ledger import Outcome, TxKind
from cids.trust import (
    TrustRecord,
    apply_outcome,
    outcome_from_quorum,
    quorum,
    validate_model,
)

rng = np.random.default_rng(2024)
shift = 4.0 / np.sqrt(8)


def labeled_windows(n, seed):
    r = np.random.default_rng(seed)
    X = np.vstack([r.normal(0, 1, (n, 8)), r.normal(shift, 1, (n, 8))])
    return LabeledDataset(X, np.array([-1] * n + [1] * n))


print("=== honest model vs poisoned (weight-negated) model ===")
honest = svm_train(labeled_windows(150, seed=1), lam=0.03, epochs=20, seed=10)
poisoned = honest.negated()

THRESHOLD = 0.7
validators = {v: labeled_windows(40, seed=100 + v) for v in (0, 1, 2)}
trust = {v: TrustRecord(v) for v in validators}

for name, model in (("honest", honest), ("poisoned", poisoned)):
    verdicts = []
    for v, holdout in validators.items():
        verdict = validate_model(model, holdout, THRESHOLD)
        verdicts.append((v, verdict))
        print(f"  validator {v} on {name}: accuracy {verdict.measured:.3f} "
              f"-> {'accept' if verdict.accepted else 'reject (' + verdict.reason.value + ')'}")
    decision = quorum(verdicts, trust)
    print(f"  quorum on {name}: {'ACCEPTED' if decision else 'REJECTED'}\n")

print("=== reputation trajectory of a repeat offender ===")
offender = TrustRecord(5)
print(f"fresh score: {offender.score:.3f}")
for round_no in range(1, 6):
    tx = outcome_from_quorum(5, accepted=False, kind=TxKind.MODEL_CONTRIBUTION, sender=0)
    offender = apply_outcome(offender, tx.payload.outcome)
    print(f"after rejection {round_no}: score {offender.score:.3f}")

honest_node = TrustRecord(1)
for _ in range(5):
    honest_node = apply_outcome(honest_node, Outcome.POSITIVE)
print(f"\nhonest contributor after 5 accepted contributions: {honest_node.score:.3f}")
print(f"weighted quorum now discounts node 5 by {honest_node.score / offender.score:.1f}x")
