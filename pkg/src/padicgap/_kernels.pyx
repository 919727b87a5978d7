# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled truncated-series kernels.

Moduli below 2**62 run on machine words with 128-bit products; larger
moduli defer to the Python implementation.
"""
from libc.stdlib cimport malloc, free

from . import _kernels_py

cdef extern from *:
    ctypedef long long i128 "__int128"

cdef long long WORD_LIMIT = 1LL << 62


cdef void _mul(long long* a, Py_ssize_t na, long long* b, Py_ssize_t nb,
               long long* out, Py_ssize_t D, long long mod) nogil:
    cdef Py_ssize_t i, j, jmax
    cdef i128 acc
    for i in range(D + 1):
        out[i] = 0
    # accumulate column-wise so each output is reduced once per term
    for i in range(D + 1):
        acc = 0
        jmax = i if i < na - 1 else na - 1
        for j in range(jmax + 1):
            if i - j < nb:
                acc += <i128>a[j] * b[i - j]
                if acc >= (<i128>1 << 124):
                    acc %= mod
        out[i] = <long long>(acc % mod)


cdef long long* _load(list xs, Py_ssize_t n, long long mod) except NULL:
    cdef long long* buf = <long long*>malloc((n if n > 0 else 1) * sizeof(long long))
    cdef Py_ssize_t i
    if buf == NULL:
        raise MemoryError()
    for i in range(n):
        buf[i] = <long long>(xs[i] % mod)
    return buf


def mul_trunc(list a, list b, Py_ssize_t D, mod):
    if mod >= WORD_LIMIT:
        return _kernels_py.mul_trunc(a, b, D, mod)
    cdef long long m = mod
    cdef Py_ssize_t na = min(len(a), D + 1), nb = min(len(b), D + 1)
    cdef long long* pa = _load(a, na, m)
    cdef long long* pb = _load(b, nb, m)
    cdef long long* out = <long long*>malloc((D + 1) * sizeof(long long))
    cdef Py_ssize_t i
    try:
        if na == 0 or nb == 0:
            return [0] * (D + 1)
        with nogil:
            _mul(pa, na, pb, nb, out, D, m)
        return [out[i] for i in range(D + 1)]
    finally:
        free(pa)
        free(pb)
        free(out)


def compose(list f, list g, Py_ssize_t D, mod):
    if mod >= WORD_LIMIT:
        return _kernels_py.compose(f, g, D, mod)
    cdef long long m = mod
    cdef Py_ssize_t n = min(len(f), D + 1), ng = min(len(g), D + 1), i, k
    if n == 0:
        return [0] * (D + 1)
    cdef long long* pf = _load(f, n, m)
    cdef long long* pg = _load(g, ng, m)
    cdef long long* res = <long long*>malloc((D + 1) * sizeof(long long))
    cdef long long* tmp = <long long*>malloc((D + 1) * sizeof(long long))
    try:
        with nogil:
            for k in range(D + 1):
                res[k] = 0
            res[0] = pf[n - 1]
            for i in range(n - 2, -1, -1):
                if ng > 0:
                    _mul(res, D + 1, pg, ng, tmp, D, m)
                else:
                    for k in range(D + 1):
                        tmp[k] = 0
                for k in range(D + 1):
                    res[k] = tmp[k]
                res[0] = (res[0] + pf[i]) % m
        return [res[k] for k in range(D + 1)]
    finally:
        free(pf)
        free(pg)
        free(res)
        free(tmp)


def horner(list coeffs, x, mod):
    if mod >= WORD_LIMIT:
        return _kernels_py.horner(coeffs, x, mod)
    cdef long long m = mod
    cdef long long xv = x % mod
    cdef i128 acc = 0
    cdef Py_ssize_t i
    for i in range(len(coeffs) - 1, -1, -1):
        acc = (acc * xv + <long long>(coeffs[i] % mod)) % m
    return <long long>acc
