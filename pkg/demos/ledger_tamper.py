#!/usr/bin/env python3
"""Hash-chain tamper evidence walkthrough.

Builds a small proof-of-authority chain, shows the proposer rotation, then
tampers with a committed transaction and watches verification fail.
"""

import random

from cids.ledger import (
    Alarm,
    AttackClass,
    Block,
    Ledger,
    ModelContribution,
    ModelKind,
    Transaction,
    canonical_encode,
    export_jsonl,
    first_invalid_height,
    import_jsonl,
    verify_chain,
)

rng = random.Random(7)
ledger = Ledger(authorities=[0, 1, 2])

print("=== sealing 6 blocks, round-robin proposers ===")
for i in range(6):
    txs = [
        Transaction.wrap(
            rng.randrange(6),
            Alarm(AttackClass.DOS, rng.randbytes(32), (i + 1) * 10),
        )
    ]
    proposer = ledger.select_proposer(ledger.height)
    block = ledger.seal_block(proposer, (i + 1) * 10, txs)
    print(f"height {block.index}: proposer {block.proposer}, hash {block.hash.hex()[:16]}...")

print(f"\nverify_chain: {verify_chain(ledger)}")

print("\n=== tampering with block 3's transaction ===")
victim = ledger.blocks[3]
forged_payload = ModelContribution(b"\xee" * 32, ModelKind.SVM, 0.99)
ledger.blocks[3] = Block(
    victim.index, victim.prev_hash, victim.proposer, victim.sim_time,
    (Transaction.wrap(5, forged_payload),), victim.hash,
)
print(f"verify_chain after forgery: {verify_chain(ledger)}")
print(f"first invalid height: {first_invalid_height(ledger)}")

ledger.blocks[3] = victim
print(f"restored: verify_chain = {verify_chain(ledger)}")

print("\n=== export / re-import round trip ===")
text = export_jsonl(ledger)
print(f"export: {len(text.splitlines())} lines, {len(text)} bytes")
back = import_jsonl(text)
print(f"re-imported chain verifies: {verify_chain(back)}")

print("\n=== single-byte avalanche ===")
encoded = canonical_encode(ledger.blocks[1])
mutated = bytearray(encoded)
mutated[10] ^= 0x01
import hashlib

print(f"original hash: {hashlib.sha256(encoded).hexdigest()[:32]}...")
print(f"1-bit flipped: {hashlib.sha256(bytes(mutated)).hexdigest()[:32]}...")
