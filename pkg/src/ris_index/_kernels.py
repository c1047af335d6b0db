"""Compiled inner loops.  Python-level contracts live in the public modules."""
import numpy as np
from numba import njit, prange

EPS = 1e-9
# Moves must beat this to count as improving; keeps local search idempotent.
IMPROVE_TOL = 1e-12


@njit(cache=True, nogil=True)
def _collect_candidates(cur, visited, order, bounds, type1, cand):
    K = visited.shape[0]
    c = 0
    if type1:
        lo = 0
        for layer in range(3):
            hi = bounds[layer]
            for t in range(lo, hi):
                m = order[cur, t]
                if not visited[m]:
                    cand[c] = m
                    c += 1
            if c > 0:
                return c
            lo = hi
    for m in range(K):
        if not visited[m]:
            cand[c] = m
            c += 1
    return c


@njit(cache=True, nogil=True)
def _build_route(d, order, bounds, type1, mu, delta, use_counts, f, tail_perms,
                 u, route):
    K = d.shape[0]
    visited = np.zeros(K, dtype=np.bool_)
    cand = np.empty(K, dtype=np.int64)
    prob = np.empty(K, dtype=np.float64)
    cur = min(int(u[0] * K), K - 1)
    route[0] = cur
    visited[cur] = True
    pos = 1
    while K - pos > f:
        c = _collect_candidates(cur, visited, order, bounds, type1, cand)
        dbar = 0.0
        for t in range(c):
            dbar += d[cur, cand[t]]
        dbar /= c
        for t in range(c):
            if dbar > 0.0:
                r = d[cur, cand[t]] / (mu * dbar)
                prob[t] = 1.0 / (1.0 + r * r)
            else:
                prob[t] = 1.0
        if use_counts:
            s = 0.0
            for t in range(c):
                s += delta[cur, cand[t]]
            if s > 0.0:
                for t in range(c):
                    prob[t] *= delta[cur, cand[t]] / (s + EPS)
        total = 0.0
        for t in range(c):
            total += prob[t]
        target = u[pos] * total
        pick = c - 1
        acc = 0.0
        for t in range(c):
            acc += prob[t]
            if target < acc:
                pick = t
                break
        cur = cand[pick]
        route[pos] = cur
        visited[cur] = True
        pos += 1
    # exhaustive tail over the remaining f codewords
    rem = np.empty(f, dtype=np.int64)
    r = 0
    for m in range(K):
        if not visited[m]:
            rem[r] = m
            r += 1
    best = np.inf
    best_p = 0
    for p in range(tail_perms.shape[0]):
        cost = d[cur, rem[tail_perms[p, 0]]]
        for t in range(f - 1):
            cost += d[rem[tail_perms[p, t]], rem[tail_perms[p, t + 1]]]
        if cost < best:
            best = cost
            best_p = p
    for t in range(f):
        route[pos + t] = rem[tail_perms[best_p, t]]


@njit(cache=True, nogil=True)
def route_cost(d, route):
    s = 0.0
    for k in range(route.shape[0] - 1):
        s += d[route[k], route[k + 1]]
    return s


@njit(cache=True, parallel=True)
def sample_routes(d, order, bounds, type1, mu, delta, use_counts, f, tail_perms,
                  uniforms):
    n, K = uniforms.shape[0], d.shape[0]
    routes = np.empty((n, K), dtype=np.int64)
    costs = np.empty(n, dtype=np.float64)
    for r in prange(n):
        _build_route(d, order, bounds, type1, mu, delta, use_counts, f, tail_perms,
                     uniforms[r], routes[r])
        costs[r] = route_cost(d, routes[r])
    return routes, costs


@njit(cache=True, nogil=True)
def _reverse(t, i, j):
    while i < j:
        t[i], t[j] = t[j], t[i]
        i += 1
        j -= 1


def _with_dummy(d):
    K = d.shape[0]
    D = np.zeros((K + 1, K + 1))
    D[:K, :K] = d
    return D


@njit(cache=True, nogil=True)
def _two_opt_cycle(D, t, max_passes):
    n = t.shape[0]
    passes = 0
    improved = True
    while improved and passes < max_passes:
        improved = False
        passes += 1
        for i in range(n - 2):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                a, b, c, e = t[i], t[i + 1], t[j], t[(j + 1) % n]
                delta = D[a, c] + D[b, e] - D[a, b] - D[c, e]
                if delta < -IMPROVE_TOL:
                    _reverse(t, i + 1, j)
                    improved = True
    return passes


@njit(cache=True, nogil=True)
def _three_opt_cycle(D, t, max_passes):
    n = t.shape[0]
    buf = np.empty(n, dtype=np.int64)
    passes = 0
    improved = True
    while improved and passes < max_passes:
        improved = False
        passes += 1
        for i in range(n - 2):
            for j in range(i + 1, n - 1):
                for k in range(j + 1, n):
                    if i == 0 and k == n - 1:
                        continue
                    a, b = t[i], t[i + 1]
                    c, dd = t[j], t[j + 1]
                    e, g = t[k], t[(k + 1) % n]
                    base = D[a, b] + D[c, dd] + D[e, g]
                    # segments B = t[i+1..j], C = t[j+1..k]
                    best_v = -1
                    for v in range(1, 8):
                        swap = (v & 4) != 0
                        rb = (v & 1) != 0
                        rc = (v & 2) != 0
                        b0, b1 = (c, b) if rb else (b, c)
                        c0, c1 = (e, dd) if rc else (dd, e)
                        if swap:
                            new = D[a, c0] + D[c1, b0] + D[b1, g]
                        else:
                            new = D[a, b0] + D[b1, c0] + D[c1, g]
                        if base - new > IMPROVE_TOL:
                            best_v = v
                            break
                    if best_v < 0:
                        continue
                    swap = (best_v & 4) != 0
                    lb = j - i
                    lc = k - j
                    for s in range(lb):
                        buf[s] = t[i + 1 + s] if (best_v & 1) == 0 else t[j - s]
                    for s in range(lc):
                        buf[lb + s] = t[j + 1 + s] if (best_v & 2) == 0 else t[k - s]
                    if swap:
                        for s in range(lc):
                            t[i + 1 + s] = buf[lb + s]
                        for s in range(lb):
                            t[i + 1 + lc + s] = buf[s]
                    else:
                        for s in range(lb + lc):
                            t[i + 1 + s] = buf[s]
                    improved = True
    return passes


def two_opt_path(d, pi, max_passes):
    K = d.shape[0]
    t = np.concatenate(([K], np.asarray(pi, dtype=np.int64)))
    _two_opt_cycle(_with_dummy(d), t, max_passes)
    return t[1:].copy()


def three_opt_path(d, pi, max_passes):
    K = d.shape[0]
    t = np.concatenate(([K], np.asarray(pi, dtype=np.int64)))
    _three_opt_cycle(_with_dummy(d), t, max_passes)
    return t[1:].copy()


@njit(cache=True, nogil=True)
def held_karp_path(d):
    """Minimum open Hamiltonian path with free endpoints."""
    K = d.shape[0]
    full = (1 << K) - 1
    dp = np.full((1 << K, K), np.inf)
    parent = np.full((1 << K, K), -1, dtype=np.int64)
    for j in range(K):
        dp[1 << j, j] = 0.0
    for mask in range(1, full + 1):
        for j in range(K):
            if not (mask >> j) & 1:
                continue
            cur = dp[mask, j]
            if cur == np.inf:
                continue
            for m in range(K):
                if (mask >> m) & 1:
                    continue
                nm = mask | (1 << m)
                val = cur + d[j, m]
                if val < dp[nm, m]:
                    dp[nm, m] = val
                    parent[nm, m] = j
    end = 0
    for j in range(1, K):
        if dp[full, j] < dp[full, end]:
            end = j
    path = np.empty(K, dtype=np.int64)
    mask = full
    j = end
    for pos in range(K - 1, -1, -1):
        path[pos] = j
        pj = parent[mask, j]
        mask ^= 1 << j
        j = pj
    return path, dp[full, end]
