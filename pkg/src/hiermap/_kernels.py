"""Compiled inner loops of the multilevel partitioner.

All kernels are nogil so portfolio attempts and scheduler threads can
overlap for real.  They operate on plain int64 CSR arrays; every tie is
broken by the lower vertex id, which keeps results bit-reproducible.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _heap_better(g1, v1, g2, v2):
    # max-heap on gain, lower vertex id wins ties
    return g1 > g2 or (g1 == g2 and v1 < v2)


@njit(cache=True, nogil=True)
def _heap_push(hg, hv, size, g, v):
    i = size
    hg[i] = g
    hv[i] = v
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_better(hg[i], hv[i], hg[parent], hv[parent]):
            hg[i], hg[parent] = hg[parent], hg[i]
            hv[i], hv[parent] = hv[parent], hv[i]
            i = parent
        else:
            break
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(hg, hv, size):
    g = hg[0]
    v = hv[0]
    size -= 1
    if size > 0:
        hg[0] = hg[size]
        hv[0] = hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            right = left + 1
            best = i
            if left < size and _heap_better(hg[left], hv[left], hg[best], hv[best]):
                best = left
            if right < size and _heap_better(hg[right], hv[right], hg[best], hv[best]):
                best = right
            if best == i:
                break
            hg[i], hg[best] = hg[best], hg[i]
            hv[i], hv[best] = hv[best], hv[i]
            i = best
    return g, v, size


@njit(cache=True, nogil=True)
def seeded_permutation(n, seed):
    """Fisher-Yates shuffle driven by a splitmix64 stream; self-contained so
    visit orders never depend on the numpy version."""
    perm = np.arange(n, dtype=np.int64)
    s = np.uint64(seed)
    for i in range(n - 1, 0, -1):
        s = s + np.uint64(0x9E3779B97F4A7C15)
        z = s
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        j = np.int64(z % np.uint64(i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@njit(cache=True, nogil=True)
def match_heavy_edge(offsets, targets, eweights, perm):
    """Greedy heavy-edge matching in the given visit order.

    Each unmatched vertex pairs with its unmatched neighbor of maximum edge
    weight (ties: lower neighbor id); vertices left over match themselves.
    """
    n = len(perm)
    match = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        v = perm[i]
        if match[v] != -1:
            continue
        best = -1
        best_w = -1
        for e in range(offsets[v], offsets[v + 1]):
            u = targets[e]
            if u == v or match[u] != -1:
                continue
            w = eweights[e]
            if w > best_w or (w == best_w and u < best):
                best = u
                best_w = w
        if best >= 0:
            match[v] = best
            match[best] = v
        else:
            match[v] = v
    return match


@njit(cache=True, nogil=True)
def coarse_ids_from_match(match):
    """Assign coarse vertex ids to matched pairs, scanning fine ids upward."""
    n = len(match)
    cmap = np.full(n, -1, dtype=np.int64)
    nc = 0
    for v in range(n):
        if cmap[v] == -1:
            cmap[v] = nc
            u = match[v]
            if u != v:
                cmap[u] = nc
            nc += 1
    return cmap, nc


@njit(cache=True, nogil=True)
def contract(offsets, targets, eweights, vweights, cmap, nc):
    """Contract along cmap, merging parallel edges by weight addition.

    Two passes: bucket the surviving directed entries by coarse source,
    then deduplicate each bucket with a stamp array.  O(n + m), no sort.
    """
    n = len(vweights)
    cvw = np.zeros(nc, dtype=np.int64)
    for v in range(n):
        cvw[cmap[v]] += vweights[v]

    start = np.zeros(nc + 1, dtype=np.int64)
    for v in range(n):
        start[cmap[v] + 1] += offsets[v + 1] - offsets[v]
    for i in range(nc):
        start[i + 1] += start[i]
    cap = start[nc]
    pos = start[:nc].copy()
    buf_t = np.empty(cap, dtype=np.int64)
    buf_w = np.empty(cap, dtype=np.int64)
    for v in range(n):
        cu = cmap[v]
        for e in range(offsets[v], offsets[v + 1]):
            cv = cmap[targets[e]]
            if cu != cv:
                buf_t[pos[cu]] = cv
                buf_w[pos[cu]] = eweights[e]
                pos[cu] += 1

    stamp = np.full(nc, -1, dtype=np.int64)
    slot = np.empty(nc, dtype=np.int64)
    coff = np.zeros(nc + 1, dtype=np.int64)
    ctgt = np.empty(cap, dtype=np.int64)
    cew = np.empty(cap, dtype=np.int64)
    out = 0
    for cu in range(nc):
        for i in range(start[cu], pos[cu]):
            cv = buf_t[i]
            if stamp[cv] != cu:
                stamp[cv] = cu
                slot[cv] = out
                ctgt[out] = cv
                cew[out] = buf_w[i]
                out += 1
            else:
                cew[slot[cv]] += buf_w[i]
        coff[cu + 1] = out
    return coff, ctgt[:out].copy(), cew[:out].copy(), cvw


@njit(cache=True, nogil=True)
def grow_block(offsets, targets, eweights, vweights, perm, target0, cap0):
    """Greedy graph growing of block 0.

    Absorbs the candidate with the highest internal-minus-external gain
    until block 0 reaches target0; candidates that would push the block
    past cap0 are skipped.  When the boundary runs dry (disconnected
    graphs) the next fitting unassigned vertex in perm order seeds a new
    region.
    """
    n = len(vweights)
    in0 = np.zeros(n, dtype=np.uint8)
    attract = np.zeros(n, dtype=np.int64)
    tot_w = np.zeros(n, dtype=np.int64)
    for v in range(n):
        s = 0
        for e in range(offsets[v], offsets[v + 1]):
            s += eweights[e]
        tot_w[v] = s

    cap = n + len(targets) + 4
    hg = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    w0 = 0
    pi = 0
    while w0 < target0:
        v = -1
        while size > 0:
            g, u, size = _heap_pop(hg, hv, size)
            if in0[u] == 1 or g != 2 * attract[u] - tot_w[u]:
                continue
            if w0 + vweights[u] > cap0:
                continue
            v = u
            break
        if v == -1:
            while pi < n:
                u = perm[pi]
                pi += 1
                if in0[u] == 0 and (w0 == 0 or w0 + vweights[u] <= cap0):
                    v = u
                    break
            if v == -1:
                break
        in0[v] = 1
        w0 += vweights[v]
        for e in range(offsets[v], offsets[v + 1]):
            u = targets[e]
            if in0[u] == 0:
                attract[u] += eweights[e]
                size = _heap_push(hg, hv, size, 2 * attract[u] - tot_w[u], u)

    blocks = np.empty(n, dtype=np.int64)
    for v in range(n):
        blocks[v] = 0 if in0[v] == 1 else 1
    return blocks


@njit(cache=True, nogil=True)
def two_way_cut(offsets, targets, eweights, blocks):
    cut = 0
    n = len(blocks)
    for v in range(n):
        for e in range(offsets[v], offsets[v + 1]):
            if blocks[v] != blocks[targets[e]]:
                cut += eweights[e]
    return cut // 2


@njit(cache=True, nogil=True)
def fm_refine_passes(offsets, targets, eweights, vweights, blocks, l0, l1, max_passes):
    """Boundary FM with prefix rollback; modifies blocks in place.

    Per pass: boundary vertices enter a gain heap (gain = external minus
    internal weight), get moved at most once each in descending gain order
    (ties: lower id) while the receiving side stays under its cap, and the
    pass rolls back to the prefix with the best (cut, balance) pair.  Stops
    when a pass brings no improvement.  Returns the final cut.
    """
    n = len(vweights)
    heap_cap = n + len(targets) + 4
    hg = np.empty(heap_cap, dtype=np.int64)
    hv = np.empty(heap_cap, dtype=np.int64)
    gain = np.empty(n, dtype=np.int64)
    ext = np.empty(n, dtype=np.int64)
    tot = np.empty(n, dtype=np.int64)
    locked = np.zeros(n, dtype=np.uint8)
    move_seq = np.empty(n, dtype=np.int64)

    w0 = 0
    w1 = 0
    for v in range(n):
        if blocks[v] == 0:
            w0 += vweights[v]
        else:
            w1 += vweights[v]
    cut = two_way_cut(offsets, targets, eweights, blocks)

    for _ in range(max_passes):
        for v in range(n):
            locked[v] = 0
        size = 0
        for v in range(n):
            e_w = 0
            t_w = 0
            for e in range(offsets[v], offsets[v + 1]):
                w = eweights[e]
                t_w += w
                if blocks[targets[e]] != blocks[v]:
                    e_w += w
            ext[v] = e_w
            tot[v] = t_w
            gain[v] = 2 * e_w - t_w
            if e_w > 0:
                size = _heap_push(hg, hv, size, gain[v], v)

        best_cut = cut
        best_bal = max(w0 - l0, w1 - l1)
        best_idx = -1
        moves = 0
        # long runs of moves without a new best prefix get rolled back
        # anyway; bail out instead of draining the whole boundary
        futile = 0
        futile_limit = 64 + n // 16
        while size > 0 and futile <= futile_limit:
            g, v, size = _heap_pop(hg, hv, size)
            if locked[v] == 1 or g != gain[v] or ext[v] <= 0:
                continue
            if blocks[v] == 0:
                if w1 + vweights[v] > l1:
                    locked[v] = 1
                    continue
            else:
                if w0 + vweights[v] > l0:
                    locked[v] = 1
                    continue
            locked[v] = 1
            if blocks[v] == 0:
                w0 -= vweights[v]
                w1 += vweights[v]
                blocks[v] = 1
            else:
                w1 -= vweights[v]
                w0 += vweights[v]
                blocks[v] = 0
            cut -= g
            move_seq[moves] = v
            moves += 1
            dest = blocks[v]
            for e in range(offsets[v], offsets[v + 1]):
                u = targets[e]
                w = eweights[e]
                if blocks[u] == dest:
                    ext[u] -= w
                else:
                    ext[u] += w
                if locked[u] == 0:
                    gain[u] = 2 * ext[u] - tot[u]
                    size = _heap_push(hg, hv, size, gain[u], u)
            bal = max(w0 - l0, w1 - l1)
            if cut < best_cut or (cut == best_cut and bal < best_bal):
                best_cut = cut
                best_bal = bal
                best_idx = moves - 1
                futile = 0
            else:
                futile += 1

        for i in range(moves - 1, best_idx, -1):
            v = move_seq[i]
            if blocks[v] == 0:
                blocks[v] = 1
                w0 -= vweights[v]
                w1 += vweights[v]
            else:
                blocks[v] = 0
                w1 -= vweights[v]
                w0 += vweights[v]
        cut = best_cut
        if best_idx == -1:
            break
    return cut


@njit(cache=True, nogil=True)
def rebalance_two_way(offsets, targets, eweights, vweights, blocks, l0, l1):
    """Shed weight from an over-cap side, cheapest cut loss first.

    Returns True once both sides respect their caps, False if no move can
    fix the violation (for instance a single vertex heavier than both caps).
    """
    n = len(vweights)
    w0 = 0
    w1 = 0
    for v in range(n):
        if blocks[v] == 0:
            w0 += vweights[v]
        else:
            w1 += vweights[v]
    gain = np.empty(n, dtype=np.int64)
    for v in range(n):
        g = 0
        for e in range(offsets[v], offsets[v + 1]):
            if blocks[targets[e]] != blocks[v]:
                g += eweights[e]
            else:
                g -= eweights[e]
        gain[v] = g

    while True:
        if w0 > l0:
            src = 0
            room = l1 - w1
        elif w1 > l1:
            src = 1
            room = l0 - w0
        else:
            return True
        best = -1
        best_g = 0
        for v in range(n):
            if blocks[v] == src and vweights[v] > 0 and vweights[v] <= room:
                if best == -1 or gain[v] > best_g or (gain[v] == best_g and v < best):
                    best = v
                    best_g = gain[v]
        if best == -1:
            return False
        v = best
        dest = 1 - src
        blocks[v] = dest
        if src == 0:
            w0 -= vweights[v]
            w1 += vweights[v]
        else:
            w1 -= vweights[v]
            w0 += vweights[v]
        gain[v] = -gain[v]
        for e in range(offsets[v], offsets[v + 1]):
            u = targets[e]
            if blocks[u] == dest:
                gain[u] -= 2 * eweights[e]
            else:
                gain[u] += 2 * eweights[e]
