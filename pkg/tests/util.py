"""Shared builders for randomized test corpora."""

import random

from cids.ledger import (
    Alarm,
    AttackClass,
    Ledger,
    ModelContribution,
    ModelKind,
    Outcome,
    Reason,
    SignatureContribution,
    Transaction,
    TrustUpdate,
)


def random_digest(rng: random.Random) -> bytes:
    return rng.randbytes(32)


def random_tx(rng: random.Random) -> Transaction:
    sender = rng.randrange(16)
    choice = rng.randrange(4)
    if choice == 0:
        payload = ModelContribution(random_digest(rng), ModelKind.SVM, rng.random())
    elif choice == 1:
        payload = SignatureContribution(
            random_digest(rng), rng.randrange(5000), rng.randrange(8, 100000), rng.randrange(1, 17)
        )
    elif choice == 2:
        payload = Alarm(
            AttackClass(rng.randrange(len(AttackClass))), random_digest(rng), rng.randrange(10000)
        )
    else:
        payload = TrustUpdate(
            rng.randrange(16),
            Outcome(rng.randrange(2)),
            Reason(rng.randrange(len(Reason))),
        )
    return Transaction.wrap(sender, payload)


def build_chain(rng: random.Random, n_blocks: int, authorities=(0, 1, 2)) -> Ledger:
    """Honestly sealed chain with a random mixed-kind tx load."""
    ledger = Ledger(authorities=list(authorities))
    for i in range(n_blocks):
        txs = [random_tx(rng) for _ in range(rng.randrange(4))]
        for tx in txs:
            ledger.submit(tx)
        proposer = ledger.select_proposer(ledger.height)
        ledger.seal_block(proposer, sim_time=(i + 1) * 10, txs=txs)
    return ledger
