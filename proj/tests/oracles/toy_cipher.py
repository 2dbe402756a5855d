# Copyright 2026 The HHE-FL Authors.
# SPDX-License-Identifier: Apache-2.0
"""Reference model of the toy stream cipher, used to freeze golden vectors.

Written against hashlib only; shares no code with the C++ implementation.
Run: python3 toy_cipher.py
"""
import hashlib
import struct

P = 65537
TK, B, R = 16, 8, 3
SEED = hashlib.sha256(b"hhefl toy cipher v1 public seed").digest()


def draws(nonce, j, r, count):
    data = SEED + nonce + struct.pack("<QQ", j, r)
    length = 4 * (2 * count + 16)
    while True:
        stream = hashlib.shake_128(data).digest(length)
        out = []
        for pos in range(0, len(stream) - 3, 4):
            v = struct.unpack_from("<I", stream, pos)[0] & 0x1FFFF
            if v < P:
                out.append(v)
            if len(out) == count:
                return out
        length *= 2


def constants(nonce, j, r):
    rows = B if r == R + 1 else TK
    d = draws(nonce, j, r, rows * TK + rows)
    a = [d[i * TK:(i + 1) * TK] for i in range(rows)]
    c = d[rows * TK:]
    return a, c


def keystream(key, nonce, j):
    s = list(key)
    for r in range(1, R + 1):
        a, c = constants(nonce, j, r)
        s = [(sum(x * y for x, y in zip(row, s)) + ci) % P for row, ci in zip(a, c)]
        s = [(x * x + x) % P for x in s]
    a, c = constants(nonce, j, R + 1)
    return [(sum(x * y for x, y in zip(row, s)) + ci) % P for row, ci in zip(a, c)]


if __name__ == "__main__":
    nonce = bytes(range(16))
    print("zero key, j=0:", keystream([0] * TK, nonce, 0))
    print("zero key, j=5:", keystream([0] * TK, nonce, 5))
    print("key 1..16, j=1:", keystream(list(range(1, 17)), nonce, 1))
    a, c = constants(nonce, 0, 1)
    print("A_{0,1} row 0:", a[0][:4], "c_{0,1}:", c[:4])
