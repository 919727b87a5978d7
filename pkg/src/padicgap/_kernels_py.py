"""Pure-Python truncated-series kernels (reference and fallback).

Series are lists of residues modulo ``mod``; index i is the z**i coefficient.
"""


def mul_trunc(a, b, D, mod):
    out = [0] * (D + 1)
    nb = min(len(b), D + 1)
    for i in range(min(len(a), D + 1)):
        ai = a[i]
        if not ai:
            continue
        for j in range(min(nb, D + 1 - i)):
            out[i + j] += ai * b[j]
    return [c % mod for c in out]


def compose(f, g, D, mod):
    """f(g(z)) truncated at degree D by Horner's rule; g(0) must be 0 mod p
    for the truncation to be meaningful, which callers check."""
    n = min(len(f), D + 1)
    res = [0] * (D + 1)
    if n == 0:
        return res
    res[0] = f[n - 1] % mod
    for i in range(n - 2, -1, -1):
        res = mul_trunc(res, g, D, mod)
        res[0] = (res[0] + f[i]) % mod
    return res


def horner(coeffs, x, mod):
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % mod
    return acc
