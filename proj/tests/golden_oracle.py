#!/usr/bin/env python3
"""Independent re-derivation of the hash family and a fresh-structure digest.

Prints the constants used by test_hashing.cpp / test_bskiplist.cpp. Shares no
code with the C++ library; only the written definitions.
"""
import hashlib
import math

M = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    z &= M
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def from_master(master):
    d = [mix64(master + GOLDEN * (i + 1)) for i in range(7)]
    return {"level": d[0], "h1": d[1], "h2": d[2:7]}


def level_of(x, seeds, gamma, beta):
    if x == 0:
        return beta
    thr = (1 << 32) // gamma
    base = mix64(x ^ seeds["level"])
    lvl = 1
    while lvl < beta and (mix64(base + GOLDEN * lvl) >> 32) < thr:
        lvl += 1
    return lvl


def label_bytes(elem, level):
    return elem.to_bytes(8, "big") + bytes([level])


def h1(elem, level, seeds, p):
    b = label_bytes(elem, level)
    word = int.from_bytes(b[:8], "big")
    h = mix64(word ^ seeds["h1"])
    h = mix64(h + GOLDEN * (b[8] + 1))
    return (h * p) >> 64


def h2(s, seeds, p):
    acc = 0
    for a in reversed(seeds["h2"]):
        acc = (acc * s + a % p) % p
    return acc


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def fresh_digest(capacity, gamma, master):
    beta = math.ceil(round(math.log(capacity, gamma), 12)) + 2
    need = math.ceil((2 * capacity * gamma / (gamma - 1) + 2 * beta) / 0.9)
    p = need
    while not is_prime(p):
        p += 1
    seeds = from_master(master)
    strings = sorted((h2(h1(0, k, seeds, p), seeds, p), label_bytes(0, k), k) for k in range(1, beta + 1))
    image = bytearray(10 * p)
    end = None
    for home, _, k in strings:  # few strings, no wrap: plain first-come-first-served
        start = home if end is None or home >= end else end
        assert start + 2 <= p
        image[10 * start] = 1
        image[10 * start + 9] = k
        image[10 * (start + 1)] = 2
        end = start + 2
    return beta, p, hashlib.sha256(bytes(image)).hexdigest()


if __name__ == "__main__":
    print("splitmix_first %#x" % mix64(GOLDEN))
    s = from_master(42)
    print("seeds42", hex(s["level"]), hex(s["h1"]), [hex(a) for a in s["h2"]])
    lv = [(x, level_of(x, s, 16, 7)) for x in range(1, 5000)]
    print("levels>=2", [t for t in lv if t[1] >= 2][:6])
    print("levels1", lv[:5])
    p = 1000003
    print("h1", h1(12345, 3, s, p), "h2(h1)", h2(h1(12345, 3, s, p), s, p), "h2(777)", h2(777, s, p))
    print("fresh", fresh_digest(1000, 16, 42))
