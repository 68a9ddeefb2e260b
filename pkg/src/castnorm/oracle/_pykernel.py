"""Pure-Python twin of ``_ckernel``: same programs, same enumeration order.

Uses unbounded integers, so it never reports overflow.
"""

from __future__ import annotations

from math import gcd

from .program import (
    OP_ADD,
    OP_CONST,
    OP_DVD_INT,
    OP_DVD_RAT,
    OP_EQ,
    OP_LE,
    OP_LT,
    OP_MUL,
    OP_NE,
    OP_NEG,
    OP_SUB,
    OP_TSUB,
    OP_VAR,
)


def _reduce(n: int, d: int) -> tuple[int, int]:
    if d == 1:
        return n, 1
    g = gcd(n, d)
    return n // g, d // g


def _run(code, start, length, vnum, vden):
    sn: list[int] = []
    sd: list[int] = []
    for pc in range(start, start + length):
        op = code[3 * pc]
        if op == OP_VAR:
            x = code[3 * pc + 1]
            sn.append(vnum[x])
            sd.append(vden[x])
            continue
        if op == OP_CONST:
            sn.append(code[3 * pc + 1])
            sd.append(1)
            continue
        if op == OP_NEG:
            sn[-1] = -sn[-1]
            continue
        c, d = sn.pop(), sd.pop()
        a, b = sn[-1], sd[-1]
        if op == OP_ADD:
            x, y = _reduce(a * d + c * b, b * d)
        elif op == OP_SUB:
            x, y = _reduce(a * d - c * b, b * d)
        elif op == OP_TSUB:
            x, y = max(a - c, 0), 1
        elif op == OP_MUL:
            x, y = _reduce(a * c, b * d)
        elif op == OP_LT:
            x, y = int(a * d < c * b), 1
        elif op == OP_LE:
            x, y = int(a * d <= c * b), 1
        elif op == OP_EQ:
            x, y = int(a == c and b == d), 1
        elif op == OP_NE:
            x, y = int(not (a == c and b == d)), 1
        elif op == OP_DVD_INT:
            x, y = int(c == 0 if a == 0 else c % a == 0), 1
        elif op == OP_DVD_RAT:
            x, y = int(a != 0 or c == 0), 1
        else:
            raise ValueError(f"bad opcode {op}")
        sn[-1], sd[-1] = x, y
    return sn[0], sd[0]


def find_counterexample(code, starts, lengths, n_ctx, dom_num, dom_den, dom_off, dom_len):
    nvars = len(dom_off)
    total = 1
    for n in dom_len:
        total *= n
    if total == 0:
        return 0, -1, 0
    ctr = [0] * nvars
    vnum = [dom_num[o] for o in dom_off]
    vden = [dom_den[o] for o in dom_off]
    checked = 0
    a_start, a_len = starts[n_ctx], lengths[n_ctx]
    b_start, b_len = starts[n_ctx + 1], lengths[n_ctx + 1]
    for idx in range(total):
        if all(_run(code, starts[k], lengths[k], vnum, vden)[0] for k in range(n_ctx)):
            checked += 1
            if _run(code, a_start, a_len, vnum, vden) != _run(code, b_start, b_len, vnum, vden):
                return 1, idx, checked
        i = nvars - 1
        while i >= 0:
            ctr[i] += 1
            if ctr[i] < dom_len[i]:
                vnum[i] = dom_num[dom_off[i] + ctr[i]]
                vden[i] = dom_den[dom_off[i] + ctr[i]]
                break
            ctr[i] = 0
            vnum[i] = dom_num[dom_off[i]]
            vden[i] = dom_den[dom_off[i]]
            i -= 1
    return 0, -1, checked
