# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernel for the exhaustive equivalence oracle.

Rationals are int64 pairs; any overflow aborts the search with status 2 so
the caller can redo it with exact Python integers.
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline int cn_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    static inline int cn_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    static inline int cn_sub(long long a, long long b, long long *r) { return __builtin_sub_overflow(a, b, r); }
    """
    int cn_mul(long long a, long long b, long long *r) nogil
    int cn_add(long long a, long long b, long long *r) nogil
    int cn_sub(long long a, long long b, long long *r) nogil

cdef enum:
    OP_VAR = 0
    OP_CONST = 1
    OP_ADD = 2
    OP_SUB = 3
    OP_TSUB = 4
    OP_MUL = 5
    OP_NEG = 6
    OP_LT = 7
    OP_LE = 8
    OP_EQ = 9
    OP_NE = 10
    OP_DVD_INT = 11
    OP_DVD_RAT = 12

cdef long long LLMIN = -9223372036854775807LL - 1


cdef inline long long _gcd(long long a, long long b) noexcept nogil:
    cdef long long t
    if a < 0:
        a = -a
    while b != 0:
        t = a % b
        a = b
        b = t
    return a


cdef inline int _reduce(long long *n, long long *d) noexcept nogil:
    cdef long long g
    if n[0] == LLMIN:
        return 1
    if d[0] == 1:
        return 0
    if n[0] == 0:
        d[0] = 1
        return 0
    g = _gcd(n[0], d[0])
    if g > 1:
        n[0] = n[0] // g
        d[0] = d[0] // g
    return 0


cdef int _run(const long long[::1] code, long long start, long long length,
              long long *vnum, long long *vden, long long *sn, long long *sd,
              long long *rn, long long *rd) noexcept nogil:
    """Evaluate one program; returns 1 on overflow."""
    cdef long long sp = 0
    cdef long long pc, op, a, b, c, d, x, y, g1, g2
    for pc in range(start, start + length):
        op = code[3 * pc]
        if op == OP_VAR:
            x = code[3 * pc + 1]
            sn[sp] = vnum[x]
            sd[sp] = vden[x]
            sp += 1
            continue
        if op == OP_CONST:
            sn[sp] = code[3 * pc + 1]
            sd[sp] = 1
            sp += 1
            continue
        if op == OP_NEG:
            if cn_sub(0, sn[sp - 1], &x):
                return 1
            sn[sp - 1] = x
            continue
        sp -= 1
        c = sn[sp]
        d = sd[sp]
        a = sn[sp - 1]
        b = sd[sp - 1]
        if op == OP_ADD or op == OP_SUB:
            if b == 1 and d == 1:
                if op == OP_ADD:
                    if cn_add(a, c, &x):
                        return 1
                elif cn_sub(a, c, &x):
                    return 1
                y = 1
            else:
                if cn_mul(a, d, &x) or cn_mul(c, b, &y):
                    return 1
                if op == OP_ADD:
                    if cn_add(x, y, &x):
                        return 1
                elif cn_sub(x, y, &x):
                    return 1
                if cn_mul(b, d, &y):
                    return 1
            if _reduce(&x, &y):
                return 1
        elif op == OP_TSUB:
            x = a - c
            if x < 0:
                x = 0
            y = 1
        elif op == OP_MUL:
            g1 = _gcd(a, d)
            g2 = _gcd(c, b)
            if g1 == 0:
                g1 = 1
            if g2 == 0:
                g2 = 1
            if cn_mul(a // g1, c // g2, &x) or cn_mul(b // g2, d // g1, &y) or x == LLMIN:
                return 1
            if x == 0:
                y = 1
        elif op == OP_LT or op == OP_LE:
            if cn_mul(a, d, &x) or cn_mul(c, b, &y):
                return 1
            x = (x < y) if op == OP_LT else (x <= y)
            y = 1
        elif op == OP_EQ:
            x = (a == c and b == d)
            y = 1
        elif op == OP_NE:
            x = not (a == c and b == d)
            y = 1
        elif op == OP_DVD_INT:
            if a == 0:
                x = (c == 0)
            elif a == 1 or a == -1:
                x = 1
            else:
                x = (c % a == 0)
            y = 1
        else:  # OP_DVD_RAT
            x = (a != 0 or c == 0)
            y = 1
        sn[sp - 1] = x
        sd[sp - 1] = y
    rn[0] = sn[0]
    rd[0] = sd[0]
    return 0


def find_counterexample(const long long[::1] code, const long long[::1] starts,
                        const long long[::1] lengths, long long n_ctx,
                        const long long[::1] dom_num, const long long[::1] dom_den,
                        const long long[::1] dom_off, const long long[::1] dom_len):
    """Enumerate all assignments (last variable fastest).

    Returns ``(status, index, checked)``: status 0 = the last two programs
    agree wherever the first ``n_ctx`` hold, 1 = they differ at assignment
    ``index``, 2 = int64 overflow at ``index``.
    """
    cdef Py_ssize_t nvars = dom_off.shape[0]
    cdef Py_ssize_t nprog = starts.shape[0]
    cdef long long maxlen = 1
    cdef Py_ssize_t i, k
    cdef long long idx = 0, checked = 0, total = 1
    cdef long long an, ad, bn, bd
    cdef int status = 0, holds, overflow = 0
    for i in range(nprog):
        if lengths[i] > maxlen:
            maxlen = lengths[i]
    for i in range(nvars):
        total *= dom_len[i]
    if total == 0:
        return 0, -1, 0
    cdef long long *vnum = <long long *> malloc((nvars + 1) * sizeof(long long))
    cdef long long *vden = <long long *> malloc((nvars + 1) * sizeof(long long))
    cdef long long *ctr = <long long *> malloc((nvars + 1) * sizeof(long long))
    cdef long long *sn = <long long *> malloc(maxlen * sizeof(long long))
    cdef long long *sd = <long long *> malloc(maxlen * sizeof(long long))
    try:
        with nogil:
            for i in range(nvars):
                ctr[i] = 0
                vnum[i] = dom_num[dom_off[i]]
                vden[i] = dom_den[dom_off[i]]
            while idx < total:
                holds = 1
                for k in range(n_ctx):
                    if _run(code, starts[k], lengths[k], vnum, vden, sn, sd, &an, &ad):
                        overflow = 1
                        break
                    if an == 0:
                        holds = 0
                        break
                if overflow:
                    status = 2
                    break
                if holds:
                    checked += 1
                    if (_run(code, starts[n_ctx], lengths[n_ctx], vnum, vden, sn, sd, &an, &ad)
                            or _run(code, starts[n_ctx + 1], lengths[n_ctx + 1], vnum, vden,
                                    sn, sd, &bn, &bd)):
                        status = 2
                        break
                    if an != bn or ad != bd:
                        status = 1
                        break
                idx += 1
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
    finally:
        free(vnum)
        free(vden)
        free(ctr)
        free(sn)
        free(sd)
    if status == 0:
        return 0, -1, checked
    return status, idx, checked
