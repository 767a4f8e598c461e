#!/usr/bin/env python3
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Independent reference for the golden values frozen in the unit tests.
# Uses python-xxhash and scipy; none of the C++ code is involved.
#
#   python3 tests/oracle/oracle.py

import struct
import xxhash
from scipy import stats

M64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def le64(v):
    return struct.pack("<Q", v & M64)


def xxh64(b, seed=0):
    return xxhash.xxh64_intdigest(b, seed)


def derive_seed(root, label):
    if isinstance(label, int):
        label = str(label)
    return xxh64(le64(root) + label.encode())


def hash_pair(a, b):
    return xxh64(le64(a) + le64(b))


def splitmix_final(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def gen_payload(seed, producer, index, size):
    state = xxh64(le64(seed) + le64(producer) + le64(index))
    out = bytearray()
    while len(out) < size:
        state = (state + GAMMA) & M64
        out += le64(splitmix_final(state))
    return bytes(out[:size])


def main():
    print("gen_payload(42,0,0,16) =", gen_payload(42, 0, 0, 16).hex())
    print("gen_payload(42,3,9,5)  =", gen_payload(42, 3, 9, 5).hex())

    # Per-byte frequency over 1e5 payloads of 64 bytes.
    counts = [0] * 256
    payloads = []
    for i in range(100_000):
        p = gen_payload(42, 0, i, 64)
        payloads.append(p)
        for b in p:
            counts[b] += 1
    total = sum(counts)
    exp = total / 256
    chi2 = sum((c - exp) ** 2 / exp for c in counts)
    print("byte chi2 =", chi2, "min", min(counts), "max", max(counts), "expected", exp)

    # Record-hash tally: fraction of payload hashes below 0.2 * 2^64.
    threshold = int(0.2 * 2 ** 64)
    hashes = [xxh64(p) for p in payloads]
    below = sum(1 for h in hashes if h < threshold)
    print("record_hash tally below 0.2*2^64 =", below)

    # Exhaustive matcher, n = 100, total 0.2, ruleset seed 5.
    n, total, rs = 100, 0.2, 5
    thr = int(total / n * 2 ** 64)
    seeds = [derive_seed(rs, i) for i in range(n)]
    matches = 0
    first = None
    for h in hashes:
        m = [i for i in range(n) if hash_pair(h, seeds[i]) < thr]
        if first is None and m:
            first = (hashes.index(h), m)
        matches += len(m)
    print("exhaustive n=100 total matches =", matches, "first nonempty", first)

    # Routing: hash_u64(key) % 9 over keys 0..1e6-1.
    shares = [0] * 9
    for k in range(1_000_000):
        shares[xxh64(le64(k)) % 9] += 1
    print("route shares over 9 instances =", shares)

    # Checksum: wrapping sum of the first 1000 payload hashes.
    print("checksum of 1000 payloads = 0x%016x" % (sum(hashes[:1000]) & M64))

    # Exhaustive matcher, n = 10, total 0.5, ruleset seed 5, first 1000 payloads.
    thr10 = int(0.05 * 2 ** 64)
    seeds10 = [derive_seed(5, i) for i in range(10)]
    m10 = sum(1 for h in hashes[:1000] for i in range(10) if hash_pair(h, seeds10[i]) < thr10)
    print("exhaustive n=10 total=0.5 over 1000 payloads =", m10)

    print("chi2 crit df=3   a=0.01:", stats.chi2.ppf(0.99, 3))
    print("chi2 crit df=999 a=0.01:", stats.chi2.ppf(0.99, 999))


if __name__ == "__main__":
    main()
