# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel; world sets are uint64, so at most 64 worlds."""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

import numpy as np

NAME = "cython"
MAX_WORLDS = 64

cdef enum:
    ATOM = 0
    TOP = 1
    BOT = 2
    NOT = 3
    AND = 4
    OR = 5
    IMP = 6
    IFF = 7
    DGE = 8
    IDGE = 9


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int popcount(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline uint64_t full_mask(int n) nogil:
    if n >= 64:
        return <uint64_t>0xFFFFFFFFFFFFFFFF
    return (<uint64_t>1 << n) - 1


cdef void run(const int64_t[:] ops, const int64_t[:] a, const int64_t[:] b,
              const int64_t[:] g, int n, uint64_t* succ, uint64_t* pred,
              uint64_t* var_masks, uint64_t* vals) noexcept nogil:
    cdef Py_ssize_t k, L = ops.shape[0]
    cdef int i
    cdef int64_t op, need
    cdef uint64_t full = full_mask(n), m, sub
    cdef uint64_t* rel
    for k in range(L):
        op = ops[k]
        if op == ATOM:
            vals[k] = var_masks[a[k]]
        elif op == TOP:
            vals[k] = full
        elif op == BOT:
            vals[k] = 0
        elif op == NOT:
            vals[k] = full & ~vals[a[k]]
        elif op == AND:
            vals[k] = vals[a[k]] & vals[b[k]]
        elif op == OR:
            vals[k] = vals[a[k]] | vals[b[k]]
        elif op == IMP:
            vals[k] = (full & ~vals[a[k]]) | vals[b[k]]
        elif op == IFF:
            vals[k] = full & ~(vals[a[k]] ^ vals[b[k]])
        else:
            rel = succ if op == DGE else pred
            sub = vals[a[k]]
            need = g[k]
            if need == 0:
                vals[k] = full
            else:
                m = 0
                for i in range(n):
                    if popcount(rel[i] & sub) >= need:
                        m |= <uint64_t>1 << i
                vals[k] = m


cdef void make_pred(int n, uint64_t* succ, uint64_t* pred) noexcept nogil:
    cdef int i, j
    for j in range(n):
        pred[j] = 0
    for i in range(n):
        for j in range(n):
            if (succ[i] >> j) & 1:
                pred[j] |= <uint64_t>1 << i


cdef bint check_frame(int n, uint64_t* succ, int axiom_mask) noexcept nogil:
    cdef int i, j
    cdef uint64_t si
    if axiom_mask & 1:
        for i in range(n):
            if succ[i] == 0:
                return False
    if axiom_mask & 2:
        for i in range(n):
            if not ((succ[i] >> i) & 1):
                return False
    if axiom_mask & 4:
        for i in range(n):
            for j in range(n):
                if ((succ[i] >> j) & 1) != ((succ[j] >> i) & 1):
                    return False
    if axiom_mask & 24:
        for i in range(n):
            si = succ[i]
            for j in range(n):
                if (si >> j) & 1:
                    if (axiom_mask & 8) and (succ[j] & ~si):
                        return False
                    if (axiom_mask & 16) and (si & ~succ[j]):
                        return False
    return True


cdef void decode(int n, uint64_t code, uint64_t* succ) noexcept nogil:
    cdef int i
    cdef uint64_t full = full_mask(n)
    for i in range(n):
        succ[i] = (code >> (i * n)) & full


def predecessors(int n, succ):
    cdef uint64_t s[64]
    cdef uint64_t p[64]
    cdef int i
    for i in range(n):
        s[i] = succ[i]
    make_pred(n, s, p)
    return [p[i] for i in range(n)]


def eval_program(ops, a, b, g, int n, succ, pred, var_masks):
    if n > 64:
        raise ValueError("compiled kernel handles at most 64 worlds")
    cdef int64_t[:] o = np.ascontiguousarray(ops, dtype=np.int64)
    cdef int64_t[:] aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef int64_t[:] bb = np.ascontiguousarray(b, dtype=np.int64)
    cdef int64_t[:] gg = np.ascontiguousarray(g, dtype=np.int64)
    cdef Py_ssize_t L = o.shape[0], nv = len(var_masks), k
    cdef uint64_t s[64]
    cdef uint64_t p[64]
    cdef uint64_t* vm = <uint64_t*>malloc((nv + 1) * sizeof(uint64_t))
    cdef uint64_t* vals = <uint64_t*>malloc((L + 1) * sizeof(uint64_t))
    cdef int i
    try:
        for i in range(n):
            s[i] = succ[i]
            p[i] = pred[i]
        for k in range(nv):
            vm[k] = var_masks[k]
        run(o, aa, bb, gg, n, s, p, vm, vals)
        return [vals[k] for k in range(L)]
    finally:
        free(vm)
        free(vals)


def frame_ok(int n, succ, int axiom_mask):
    cdef uint64_t s[64]
    cdef int i
    for i in range(n):
        s[i] = succ[i]
    return check_frame(n, s, axiom_mask)


def frame_codes(int n, int axiom_mask):
    if n * n > 63:
        raise ValueError("relation codes beyond 63 bits")
    cdef uint64_t code, total = <uint64_t>1 << (n * n)
    cdef uint64_t s[64]
    code = 0
    while code < total:
        decode(n, code, s)
        if check_frame(n, s, axiom_mask):
            yield code
        code += 1


def find_model(ops, a, b, g, int n, int axiom_mask, int nvars, Py_ssize_t root_g, Py_ssize_t root_l):
    """Least ``(relation code, valuation code)`` whose structure makes
    ``root_g`` true everywhere and ``root_l`` true somewhere."""
    if n * n > 63 or n * nvars > 63:
        raise ValueError("search space beyond 63-bit codes")
    cdef int64_t[:] o = np.ascontiguousarray(ops, dtype=np.int64)
    cdef int64_t[:] aa = np.ascontiguousarray(a, dtype=np.int64)
    cdef int64_t[:] bb = np.ascontiguousarray(b, dtype=np.int64)
    cdef int64_t[:] gg = np.ascontiguousarray(g, dtype=np.int64)
    cdef Py_ssize_t L = o.shape[0]
    cdef uint64_t s[64]
    cdef uint64_t p[64]
    cdef uint64_t vm[64]
    cdef uint64_t* vals = <uint64_t*>malloc((L + 1) * sizeof(uint64_t))
    cdef uint64_t code, v, total_r = <uint64_t>1 << (n * n), total_v = <uint64_t>1 << (n * nvars)
    cdef uint64_t full = full_mask(n)
    cdef int k
    cdef bint found = False
    try:
        with nogil:
            code = 0
            while code < total_r and not found:
                decode(n, code, s)
                if check_frame(n, s, axiom_mask):
                    make_pred(n, s, p)
                    v = 0
                    while v < total_v:
                        for k in range(nvars):
                            vm[k] = (v >> (k * n)) & full
                        run(o, aa, bb, gg, n, s, p, vm, vals)
                        if vals[root_g] == full and vals[root_l] != 0:
                            found = True
                            break
                        v += 1
                if not found:
                    code += 1
        if found:
            return int(code), int(v)
        return None
    finally:
        free(vals)
