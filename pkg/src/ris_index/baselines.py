"""Baseline orderings and the exact small-instance oracle."""
from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError
from .loss import LossMatrix, as_matrix, check_permutation, path_cost

#: Largest instance the Held-Karp oracle accepts.
EXACT_MAX_K = 13


def _sym(loss) -> np.ndarray:
    if isinstance(loss, LossMatrix):
        loss = loss.symmetric()
    return np.ascontiguousarray(as_matrix(loss))


def natural_order(K: int) -> np.ndarray:
    return np.arange(K, dtype=np.int64)


def random_order(K: int, seed) -> np.ndarray:
    """Uniform permutation (Fisher-Yates via numpy's shuffle)."""
    return np.random.default_rng(seed).permutation(K).astype(np.int64)


def greedy_order(loss, start: int | None = 0) -> np.ndarray:
    """Nearest-neighbour path; ``start=None`` tries every start and keeps the best."""
    d = _sym(loss)
    K = d.shape[0]
    if start is None:
        paths = [greedy_order(d, s) for s in range(K)]
        return min(paths, key=lambda p: path_cost(d, p))
    if not 0 <= start < K:
        raise InvalidArgumentError(f"start {start} out of range")
    visited = np.zeros(K, dtype=bool)
    pi = [start]
    visited[start] = True
    for _ in range(K - 1):
        row = np.where(visited, np.inf, d[pi[-1]])
        nxt = int(np.argmin(row))  # first minimum -> lowest index on ties
        pi.append(nxt)
        visited[nxt] = True
    return np.array(pi, dtype=np.int64)


def two_opt(loss, init, max_passes: int = 1000) -> np.ndarray:
    """First-improvement segment reversals on the open path.

    A zero-cost dummy node closes the path into a cycle, so moves that change
    either endpoint are covered.
    """
    d = _sym(loss)
    init = check_permutation(init, d.shape[0])
    if d.shape[0] < 3:
        return init.copy()
    return _kernels.two_opt_path(d, init, max_passes)


def three_opt(loss, init, max_passes: int = 1000) -> np.ndarray:
    """First-improvement 3-edge reconnections (all seven variants) on the open path."""
    d = _sym(loss)
    init = check_permutation(init, d.shape[0])
    if d.shape[0] < 3:
        return init.copy()
    return _kernels.three_opt_path(d, init, max_passes)


def exact_optimum(loss) -> tuple[np.ndarray, float]:
    """Minimum-cost open Hamiltonian path by Held-Karp (``K <= 13``)."""
    d = _sym(loss)
    K = d.shape[0]
    if K > EXACT_MAX_K:
        raise InvalidArgumentError(f"exact oracle refuses K={K} > {EXACT_MAX_K}")
    if K == 1:
        return np.zeros(1, dtype=np.int64), 0.0
    pi, _ = _kernels.held_karp_path(d)
    return pi, path_cost(d, pi)
