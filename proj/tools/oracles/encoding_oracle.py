#!/usr/bin/env python3
"""Independent oracle for the canonical wire encodings.

Recomputes block hashes and collector indices from the documented byte
layouts using only hashlib, with no reference to the C++ implementation.
Run it to regenerate the frozen constants used by the C++ tests; those
tests cite this file.

Layouts (big-endian throughout):
  tx      := fee u64 | payload_len u32 | payload
  block   := height u64 | round u64 | prehash 32B | proposer u32
             | tx_count u32 | { tx_len u32 | tx }*
  cert    := height u64 | round u64 | block_hash 32B | ts_len u32 | ts
  collector(cert, v, n)          = int.from_bytes(sha256(cert | v u64)[:8]) mod n
  weighted(cert, v, stakes)      = r = hash mod sum(stakes); owner i with
                                   prefix(<i) <= r < prefix(<=i)
"""
import hashlib
import struct


def be64(x): return struct.pack(">Q", x)
def be32(x): return struct.pack(">I", x)


def encode_tx(fee, payload):
    return be64(fee) + be32(len(payload)) + payload


def encode_block(height, round_, prehash, proposer, txs):
    out = be64(height) + be64(round_) + prehash + be32(proposer) + be32(len(txs))
    for fee, payload in txs:
        t = encode_tx(fee, payload)
        out += be32(len(t)) + t
    return out


def block_hash(*args):
    return hashlib.sha256(encode_block(*args)).digest()


def encode_cert(height, round_, bh, ts):
    return be64(height) + be64(round_) + bh + be32(len(ts)) + ts


def collector(cert_bytes, v, n):
    h = hashlib.sha256(cert_bytes + be64(v)).digest()
    return int.from_bytes(h[:8], "big") % n


def collector_weighted(cert_bytes, v, stakes):
    h = hashlib.sha256(cert_bytes + be64(v)).digest()
    r = int.from_bytes(h[:8], "big") % sum(stakes)
    acc = 0
    for i, d in enumerate(stakes):
        if acc <= r < acc + d:
            return i
        acc += d
    raise AssertionError("unreachable")


def main():
    # Golden block: height 7, round 2, prehash = sha256(b"parent"),
    # proposer 3, two txs.
    prehash = hashlib.sha256(b"parent").digest()
    txs = [(5, b"alpha"), (11, b"bravo-payload")]
    blk = encode_block(7, 2, prehash, 3, txs)
    bh = hashlib.sha256(blk).digest()
    print("block_encoding_hex =", blk.hex())
    print("block_hash_hex     =", bh.hex())

    # Golden empty-tx block (genesis shape): height 0, round 0,
    # prehash = 32 zero bytes, proposer 0, no txs.
    gen = encode_block(0, 0, bytes(32), 0, [])
    print("genesis_encoding_hex =", gen.hex())
    print("genesis_hash_hex     =", hashlib.sha256(gen).digest().hex())

    # Golden cert: height 7, round 2, block hash above, ts = 32 x 0xAB.
    cert = encode_cert(7, 2, bh, b"\xab" * 32)
    print("cert_encoding_hex  =", cert.hex())
    for v in range(5):
        print(f"collector_n5_v{v}   =", collector(cert, v, 5))
    for v in range(3):
        print(f"collector_n9_v{v}   =", collector(cert, v, 9))

    # Weighted draws for stakes [1,3] (n=2, D=4) and [5,1,1,1] (D=8).
    for v in range(6):
        print(f"weighted_13_v{v}    =", collector_weighted(cert, v, [1, 3]))
    for v in range(6):
        print(f"weighted_5111_v{v}  =", collector_weighted(cert, v, [5, 1, 1, 1]))
    # Equal stakes must coincide with the unweighted draw for every v.
    for v in range(32):
        assert collector_weighted(cert, v, [1] * 5) == collector(cert, v, 5)
    print("equal_stakes_matches_unweighted = ok (v in 0..31)")


if __name__ == "__main__":
    main()
