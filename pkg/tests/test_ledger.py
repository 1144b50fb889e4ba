import hashlib
import random

import pytest

from cids.encoding import ZERO_DIGEST
from cids.errors import MalformedBytes, NoAuthorities, WrongProposer
from cids.ledger import (
    Alarm,
    AttackClass,
    Block,
    Ledger,
    ModelContribution,
    ModelKind,
    Transaction,
    TxKind,
    canonical_decode,
    canonical_encode,
    export_jsonl,
    first_invalid_height,
    import_jsonl,
    make_genesis,
    select_proposer,
    verify_chain,
)
from util import build_chain, random_tx


def test_genesis_encoding_is_64_bytes():
    # index + prev_hash + proposer + sim_time + tx count = 8+32+8+8+8
    genesis = make_genesis()
    assert len(canonical_encode(genesis)) == 64


def test_encoding_deterministic():
    genesis = make_genesis()
    assert canonical_encode(genesis) == canonical_encode(genesis)


def test_proposer_changes_only_its_offset():
    a = Block(3, b"\x05" * 32, 1, 70, (), ZERO_DIGEST)
    b = Block(3, b"\x05" * 32, 2, 70, (), ZERO_DIGEST)
    ea, eb = canonical_encode(a), canonical_encode(b)
    assert len(ea) == len(eb)
    diff = [i for i in range(len(ea)) if ea[i] != eb[i]]
    assert diff == [47]  # last byte of the proposer u64 at offset 40..48


def test_seal_on_genesis():
    ledger = Ledger(authorities=[0, 1, 2])
    tx = random_tx(random.Random(1))
    ledger.submit(tx)
    block = ledger.seal_block(proposer=1, sim_time=10, txs=[tx])
    assert block.index == 1
    assert block.prev_hash == ledger.blocks[0].hash
    assert ledger.pending == []


def test_wrong_proposer_rejected():
    ledger = Ledger(authorities=[0, 1, 2])
    with pytest.raises(WrongProposer):
        ledger.seal_block(proposer=2, sim_time=10, txs=[])


def test_block_hash_matches_reference_sha256():
    ledger = build_chain(random.Random(2), 3)
    for block in ledger.blocks:
        assert hashlib.sha256(canonical_encode(block)).digest() == block.hash


def test_verify_genesis_only():
    assert verify_chain(Ledger(authorities=[4]))


def test_verify_10_block_honest_chain():
    ledger = build_chain(random.Random(3), 10)
    assert len(ledger.blocks) == 11
    assert verify_chain(ledger)


def test_flipped_tx_byte_detected():
    ledger = Ledger(authorities=[0])
    tx = Transaction.wrap(2, ModelContribution(b"\xaa" * 32, ModelKind.SVM, 0.9))
    ledger.submit(tx)
    ledger.seal_block(0, 10, [tx])
    tampered_payload = ModelContribution(b"\xab" + b"\xaa" * 31, ModelKind.SVM, 0.9)
    old = ledger.blocks[1]
    ledger.blocks[1] = Block(
        old.index, old.prev_hash, old.proposer, old.sim_time,
        (Transaction.wrap(2, tampered_payload),), old.hash,
    )
    assert not verify_chain(ledger)
    assert first_invalid_height(ledger) == 1


def test_select_proposer_rotation():
    ledger = Ledger(authorities=[3, 7, 9])
    assert select_proposer(ledger, 0) == 3
    assert select_proposer(ledger, 5) == 9
    assert select_proposer(Ledger(authorities=[4]), 3) == 4


def test_no_authorities():
    with pytest.raises(NoAuthorities):
        Ledger(authorities=[])


def test_proposer_fairness():
    ledger = build_chain(random.Random(4), 9, authorities=(0, 1, 2))
    counts = {a: 0 for a in (0, 1, 2)}
    for block in ledger.blocks[1:]:
        counts[block.proposer] += 1
    assert counts == {0: 3, 1: 3, 2: 3}


def test_scan_empty_chain():
    ledger = build_chain(random.Random(5), 4)
    # strip alarms by scanning a fresh alarm-free ledger
    clean = Ledger(authorities=[0])
    assert clean.scan(TxKind.ALARM) == []


def test_scan_since_height_bound():
    ledger = Ledger(authorities=[0])
    alarm = Transaction.wrap(1, Alarm(AttackClass.DOS, b"\x02" * 32, 15))
    ledger.seal_block(0, 10, [])
    ledger.seal_block(0, 20, [alarm])
    assert ledger.scan(TxKind.ALARM, since_height=3) == []
    assert ledger.scan(TxKind.ALARM, since_height=2) == [(2, alarm)]


def test_scan_filters_kind_in_chain_order():
    ledger = Ledger(authorities=[0])
    a1 = Transaction.wrap(1, Alarm(AttackClass.DOS, b"\x01" * 32, 5))
    m1 = Transaction.wrap(2, ModelContribution(b"\x03" * 32, ModelKind.SVM, 0.5))
    a2 = Transaction.wrap(3, Alarm(AttackClass.RECON, b"\x04" * 32, 18))
    ledger.seal_block(0, 10, [a1, m1])
    ledger.seal_block(0, 20, [a2])
    assert ledger.scan(TxKind.ALARM) == [(1, a1), (2, a2)]
    assert ledger.scan(TxKind.MODEL_CONTRIBUTION) == [(1, m1)]


def test_append_only_verify_after_every_seal():
    rng = random.Random(6)
    ledger = Ledger(authorities=[0, 1])
    for i in range(8):
        txs = [random_tx(rng) for _ in range(2)]
        ledger.seal_block(ledger.select_proposer(ledger.height), (i + 1) * 10, txs)
        assert verify_chain(ledger)


def test_encoding_injective_over_random_corpus():
    rng = random.Random(7)
    seen = {}
    for _ in range(300):
        block = Block(
            rng.randrange(100),
            rng.randbytes(32),
            rng.randrange(8),
            rng.randrange(1000),
            tuple(random_tx(rng) for _ in range(rng.randrange(3))),
            ZERO_DIGEST,
        )
        enc = canonical_encode(block)
        if enc in seen:
            assert seen[enc] == block
        seen[enc] = block
    # distinct blocks always produced distinct encodings
    assert len({hashlib.sha256(e).digest() for e in seen}) == len(seen)


def test_canonical_decode_round_trip():
    rng = random.Random(8)
    ledger = build_chain(rng, 6)
    for block in ledger.blocks:
        decoded = canonical_decode(canonical_encode(block), block.hash)
        assert decoded == block


def test_canonical_decode_rejects_truncation_and_trailing():
    block = build_chain(random.Random(9), 2).blocks[-1]
    enc = canonical_encode(block)
    with pytest.raises(MalformedBytes):
        canonical_decode(enc[:-1], block.hash)
    with pytest.raises(MalformedBytes):
        canonical_decode(enc + b"\x00", block.hash)


def test_canonical_decode_rejects_bad_enum_tag():
    ledger = Ledger(authorities=[0])
    tx = Transaction.wrap(1, Alarm(AttackClass.REPLAY, b"\x05" * 32, 3))
    block = ledger.seal_block(0, 10, [tx])
    enc = bytearray(canonical_encode(block))
    enc[64] = 200  # first tx kind tag
    with pytest.raises(MalformedBytes):
        canonical_decode(bytes(enc), block.hash)


def test_export_import_round_trip():
    ledger = build_chain(random.Random(10), 5)
    text = export_jsonl(ledger)
    back = import_jsonl(text)
    assert back.blocks == ledger.blocks
    assert verify_chain(back)


def test_import_detects_edited_hex_digit():
    ledger = build_chain(random.Random(11), 3)
    text = export_jsonl(ledger)
    pos = text.index('"hash": "') + len('"hash": "')
    flipped = "0" if text[pos] != "0" else "1"
    tampered = text[:pos] + flipped + text[pos + 1 :]
    back = import_jsonl(tampered)
    assert not verify_chain(back)
    assert first_invalid_height(back) is not None


def test_import_rejects_garbage():
    with pytest.raises(MalformedBytes):
        import_jsonl("")
    with pytest.raises(MalformedBytes):
        import_jsonl("not json\n")


def test_transaction_invariants():
    with pytest.raises(ValueError):
        ModelContribution(b"\x01" * 31, ModelKind.SVM, 0.5)
    with pytest.raises(ValueError):
        ModelContribution(b"\x01" * 32, ModelKind.SVM, 1.5)
    with pytest.raises(ValueError):
        Alarm(AttackClass.DOS, b"\x01" * 32, -1)
