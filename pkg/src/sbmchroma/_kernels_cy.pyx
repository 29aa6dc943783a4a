# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels: identical algorithms (and therefore identical
outputs) to _kernels_py, with C bitsets in place of Python integers.

Limits: exact_coloring handles up to MAX_VERTICES vertices and 64 colours;
best_weighted_independent_set handles up to 64 vertices.  The dispatcher in
kernels.py falls back to the pure-Python module beyond these.
"""

from libc.stdlib cimport calloc, free

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil

ctypedef unsigned long long u64

MAX_VERTICES = 512
DEF NWMAX = 8          # MAX_VERTICES / 64
DEF FULL = 0xFFFFFFFFFFFFFFFFULL

BUDGET_EXCEEDED = 1
OK = 0


cdef inline int _popcount_words(u64* bits, int nwords) nogil:
    cdef int w, total = 0
    for w in range(nwords):
        total += __builtin_popcountll(bits[w])
    return total


cdef void _adj_to_words(list adj, int n, int nwords, u64* out):
    cdef int v, w
    cdef object a
    for v in range(n):
        a = adj[v]
        for w in range(nwords):
            out[v * nwords + w] = <u64> (a & FULL)
            a = a >> 64


cdef list _greedy_clique(int n, u64* adj, int nwords):
    cdef int v, w, d, d2, pick, pick_deg, s, start
    cdef u64 m
    cdef u64 cand[NWMAX]
    degs = [0] * n
    for v in range(n):
        degs[v] = _popcount_words(adj + v * nwords, nwords)
    order = sorted(range(n), key=lambda x: (-degs[x], x))
    best = [order[0]]
    for s in range(min(n, 8)):
        start = order[s]
        clique = [start]
        for w in range(nwords):
            cand[w] = adj[start * nwords + w]
        while _popcount_words(cand, nwords) > 0:
            pick = -1
            pick_deg = -1
            for w in range(nwords):
                m = cand[w]
                while m:
                    v = 64 * w + __builtin_ctzll(m)
                    m &= m - 1
                    d = 0
                    for d2 in range(nwords):
                        d += __builtin_popcountll(adj[v * nwords + d2] & cand[d2])
                    if d > pick_deg:
                        pick = v
                        pick_deg = d
            clique.append(pick)
            for w in range(nwords):
                cand[w] &= adj[pick * nwords + w]
        if len(clique) > len(best):
            best = clique
    return best


cdef tuple _dsatur(int n, u64* adj, int nwords, int* degs):
    cdef int v, w, pick, used, c, u
    cdef int sat_pick, deg_pick, sat_v
    cdef u64 m, bit
    cdef int* colors = <int*> calloc(n, sizeof(int))
    cdef u64* forbid = <u64*> calloc(n, sizeof(u64))
    for v in range(n):
        colors[v] = -1
    used = 0
    cdef int step
    for step in range(n):
        pick = -1
        sat_pick = -1
        deg_pick = -1
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat_v = __builtin_popcountll(forbid[v])
            if (sat_v > sat_pick
                    or (sat_v == sat_pick and degs[v] > deg_pick)
                    or (sat_v == sat_pick and degs[v] == deg_pick
                        and (pick < 0 or v < pick))):
                pick = v
                sat_pick = sat_v
                deg_pick = degs[v]
        c = 0
        while (forbid[pick] >> c) & 1:
            c += 1
        colors[pick] = c
        if c + 1 > used:
            used = c + 1
        bit = (<u64> 1) << c
        for w in range(nwords):
            m = adj[pick * nwords + w]
            while m:
                u = 64 * w + __builtin_ctzll(m)
                m &= m - 1
                if colors[u] < 0:
                    forbid[u] |= bit
    out = [colors[v] for v in range(n)]
    free(colors)
    free(forbid)
    return used, out


cdef int _decide_rec(int n, int* nbr_ptr, int* nbr_idx, int* degs, int t,
                     int* colors, u64* forbid, int uncoloured, int max_used,
                     long long* budget, int* touched, int depth) nogil:
    """0 = colouring completed, 1 = impossible, 2 = budget exhausted."""
    cdef int v, pick, sat_pick, deg_pick, sat_v, c, top, u, i, ntouch, res
    cdef u64 avail, bit
    if uncoloured == 0:
        return 0
    budget[0] -= 1
    if budget[0] <= 0:
        return 2
    pick = -1
    sat_pick = -1
    deg_pick = -1
    for v in range(n):
        if colors[v] >= 0:
            continue
        sat_v = __builtin_popcountll(forbid[v])
        if (sat_v > sat_pick
                or (sat_v == sat_pick and degs[v] > deg_pick)
                or (sat_v == sat_pick and degs[v] == deg_pick
                    and (pick < 0 or v < pick))):
            pick = v
            sat_pick = sat_v
            deg_pick = degs[v]
    top = max_used + 1
    if t - 1 < top:
        top = t - 1
    if top >= 63:
        avail = ~forbid[pick]
    else:
        avail = ~forbid[pick] & (((<u64> 1) << (top + 1)) - 1)
    while avail:
        c = __builtin_ctzll(avail)
        avail &= avail - 1
        colors[pick] = c
        bit = (<u64> 1) << c
        ntouch = 0
        for i in range(nbr_ptr[pick], nbr_ptr[pick + 1]):
            u = nbr_idx[i]
            if colors[u] < 0 and not (forbid[u] >> c) & 1:
                forbid[u] |= bit
                touched[depth * n + ntouch] = u
                ntouch += 1
        res = _decide_rec(n, nbr_ptr, nbr_idx, degs, t, colors, forbid,
                          uncoloured - 1, max_used if max_used >= c else c,
                          budget, touched, depth + 1)
        if res == 0:
            return 0
        for i in range(ntouch):
            forbid[touched[depth * n + i]] &= ~bit
        colors[pick] = -1
        if res == 2:
            return 2
    return 1


def exact_coloring(int n, list adj, long long budget):
    """Mirror of _kernels_py.exact_coloring (see there for the contract)."""
    cdef int v, w, u, lb, ub, t, i, res
    cdef u64 m
    if n == 0:
        return (0, 0, 0, [])
    if n > MAX_VERTICES:
        raise ValueError("graph too large for the compiled kernel")
    cdef int nwords = (n + 63) // 64
    cdef u64* words = <u64*> calloc(n * nwords, sizeof(u64))
    _adj_to_words(adj, n, nwords, words)

    cdef bint empty = True
    for v in range(n * nwords):
        if words[v]:
            empty = False
            break
    if empty:
        free(words)
        return (0, 1, 1, [0] * n)

    clique = _greedy_clique(n, words, nwords)
    lb = len(clique)
    cdef int* degs = <int*> calloc(n, sizeof(int))
    for v in range(n):
        degs[v] = _popcount_words(words + v * nwords, nwords)
    ub, best = _dsatur(n, words, nwords, degs)
    if ub <= lb:
        free(words)
        free(degs)
        return (0, ub, ub, best)
    if ub > 64:
        free(words)
        free(degs)
        raise ValueError("more than 64 colours; use the pure-Python kernel")

    # CSR neighbour lists in ascending order
    cdef int* nbr_ptr = <int*> calloc(n + 1, sizeof(int))
    for v in range(n):
        nbr_ptr[v + 1] = nbr_ptr[v] + degs[v]
    cdef int* nbr_idx = <int*> calloc(max(nbr_ptr[n], 1), sizeof(int))
    cdef int* fill = <int*> calloc(n, sizeof(int))
    for v in range(n):
        for w in range(nwords):
            m = words[v * nwords + w]
            while m:
                u = 64 * w + __builtin_ctzll(m)
                m &= m - 1
                nbr_idx[nbr_ptr[v] + fill[v]] = u
                fill[v] += 1
    free(fill)

    cdef int* colors = <int*> calloc(n, sizeof(int))
    cdef u64* forbid = <u64*> calloc(n, sizeof(u64))
    cdef int* touched = <int*> calloc(n * (n + 1), sizeof(int))
    cdef long long counter = budget
    cdef int status = 0
    cdef u64 bit

    while ub > lb:
        t = ub - 1
        if lb > t:
            break
        for v in range(n):
            colors[v] = -1
            forbid[v] = 0
        for i in range(lb):
            v = clique[i]
            colors[v] = i
            bit = (<u64> 1) << i
            for w in range(nbr_ptr[v], nbr_ptr[v + 1]):
                forbid[nbr_idx[w]] |= bit
        res = _decide_rec(n, nbr_ptr, nbr_idx, degs, t, colors, forbid,
                          n - lb, lb - 1, &counter, touched, 0)
        if res == 2:
            status = 1
            break
        if res == 1:
            lb = ub
            break
        best = [colors[v] for v in range(n)]
        ub = max(best) + 1

    free(words)
    free(degs)
    free(nbr_ptr)
    free(nbr_idx)
    free(colors)
    free(forbid)
    free(touched)
    if status == 1:
        return (1, ub, lb, best)
    return (0, ub, ub, best)


cdef double _best_h
cdef u64 _best_mask


cdef int _wis_rec(int n, u64* adj, double* wts, double maxw, double fsum,
                  int size, u64 cand, u64 member_mask, int* members,
                  long long* nodes, long long limit) nogil:
    cdef int v, u, i, total
    cdef u64 m, vbit
    cdef double add, fv, h
    global _best_h, _best_mask
    nodes[0] += 1
    if nodes[0] > limit:
        return 0
    total = size + __builtin_popcountll(cand)
    if total >= 1 and (total - 1) * maxw / 2.0 <= _best_h:
        return 1
    m = cand
    while m:
        v = __builtin_ctzll(m)
        vbit = m & (~m + 1)
        m &= m - 1
        add = 0.0
        for i in range(size):
            add += wts[v * n + members[i]]
        fv = fsum + add
        h = fv / (size + 1)
        if h > _best_h:
            _best_h = h
            _best_mask = member_mask | vbit
        members[size] = v
        if not _wis_rec(n, adj, wts, maxw, fv, size + 1, m & ~adj[v],
                        member_mask | vbit, members, nodes, limit):
            return 0
    return 1


def best_weighted_independent_set(int n, list adj, weights, long long node_limit):
    """Mirror of _kernels_py.best_weighted_independent_set (n <= 64)."""
    cdef int v, u
    if n == 0:
        raise ValueError("empty graph has no nonempty independent set")
    if n > 64:
        raise ValueError("compiled independent-set kernel handles n <= 64")
    cdef u64* bits = <u64*> calloc(n, sizeof(u64))
    cdef double* wts = <double*> calloc(n * n, sizeof(double))
    cdef int* members = <int*> calloc(n, sizeof(int))
    cdef double maxw = 0.0
    for v in range(n):
        bits[v] = <u64> (adj[v] & FULL)
    for v in range(n * n):
        wts[v] = weights[v]
        if n > 1 and wts[v] > maxw:
            maxw = wts[v]
    global _best_h, _best_mask
    _best_h = 0.0
    _best_mask = 1
    cdef long long nodes = 0
    cdef u64 full = FULL if n == 64 else (((<u64> 1) << n) - 1)
    cdef int finished = _wis_rec(n, bits, wts, maxw, 0.0, 0, full, 0,
                                 members, &nodes, node_limit)
    free(bits)
    free(wts)
    free(members)
    return (0 if finished else 1, _best_h, int(_best_mask), int(nodes))
