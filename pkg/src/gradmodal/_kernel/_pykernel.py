"""Pure-Python kernel; world sets are Python ints, so any size works."""

from __future__ import annotations

from .program import AND, ATOM, BOT, DGE, IFF, IMP, NOT, OR, TOP

NAME = "python"
MAX_WORLDS = None


def predecessors(n, succ):
    pred = [0] * n
    for i in range(n):
        s = succ[i]
        while s:
            low = s & -s
            pred[low.bit_length() - 1] |= 1 << i
            s ^= low
    return pred


def eval_program(ops, a, b, g, n, succ, pred, var_masks):
    """Truth set of every instruction."""
    full = (1 << n) - 1
    vals = [0] * len(ops)
    for k in range(len(ops)):
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
            m = 0
            if need == 0:
                m = full
            else:
                for i in range(n):
                    if (rel[i] & sub).bit_count() >= need:
                        m |= 1 << i
            vals[k] = m
    return vals


def frame_ok(n, succ, axiom_mask):
    if axiom_mask & 1:  # D
        for i in range(n):
            if not succ[i]:
                return False
    if axiom_mask & 2:  # T
        for i in range(n):
            if not succ[i] >> i & 1:
                return False
    if axiom_mask & 4:  # B
        for i in range(n):
            for j in range(n):
                if (succ[i] >> j & 1) != (succ[j] >> i & 1):
                    return False
    if axiom_mask & 24:
        for i in range(n):
            si = succ[i]
            for j in range(n):
                if si >> j & 1:
                    if axiom_mask & 8 and succ[j] & ~si:
                        return False
                    if axiom_mask & 16 and si & ~succ[j]:
                        return False
    return True


def _decode(n, code):
    full = (1 << n) - 1
    return [(code >> (i * n)) & full for i in range(n)]


def frame_codes(n, axiom_mask):
    for code in range(1 << (n * n)):
        if frame_ok(n, _decode(n, code), axiom_mask):
            yield code


def find_model(ops, a, b, g, n, axiom_mask, nvars, root_g, root_l):
    """Least ``(relation code, valuation code)`` whose structure makes
    ``root_g`` true everywhere and ``root_l`` true somewhere."""
    full = (1 << n) - 1
    nval = 1 << (n * nvars)
    for code in range(1 << (n * n)):
        succ = _decode(n, code)
        if not frame_ok(n, succ, axiom_mask):
            continue
        pred = predecessors(n, succ)
        for v in range(nval):
            masks = [(v >> (k * n)) & full for k in range(nvars)]
            vals = eval_program(ops, a, b, g, n, succ, pred, masks)
            if vals[root_g] == full and vals[root_l]:
                return code, v
    return None
