"""Three-phase open-path TSP heuristic: provision, shotgun, fuzzy concatenation.

Provision sorts each codeword's neighbours into three concentric layers and
classifies the edge-weight distribution.  Shotgun samples many routes with a
loss-biased random walk and keeps the best.  Fuzzy concatenation resamples with
the walk additionally biased toward pairs that were adjacent in kept routes,
perturbing those pair counts when progress stalls.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields, replace

import numba
import numpy as np

from . import _kernels
from .errors import InvalidArgumentError
from .loss import LossMatrix, as_matrix, path_cost

#: Rows of pre-drawn uniforms per sampling call; fixed so results never depend
#: on thread count.
CHUNK = 4096
DIP_ALPHA = 0.05

UPPER_LIMIT_FRACTION = 0.05
BAND = (0.4, 0.8)
BAND_OCCUPANCY = 0.3
BAND_SCALE = 0.3


class DistType(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"


class Mode(str, enum.Enum):
    NORMAL = "Normal"
    UPPER_LIMIT = "UpperLimit"
    INTERMEDIATE = "Intermediate"


MODE_CYCLE = (Mode.NORMAL, Mode.UPPER_LIMIT, Mode.INTERMEDIATE)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class SolverParams:
    l1: int
    l2: int
    l3: int
    f: int = 4
    n_shot: int = 0
    k_shot: int = 0
    n_cate: int = 0
    k_cate0: int = 0
    mu0: float = 0.5
    sigma: float = 0.01
    mu_min: float = 0.15
    z: int = 0
    k_min: int = 200
    T: int = 0
    seed: int = 0
    stagnation_rounds: int = 3

    @classmethod
    def defaults(cls, K: int, **overrides) -> SolverParams:
        """Size-dependent defaults for a ``K``-codeword instance.

        Layer sizes are forced strictly increasing for small ``K`` where
        ``K // 3`` would fall below ``round(2 sqrt K)``.
        """
        root = math.sqrt(K)
        l1 = max(1, _round_half_up(root))
        l2 = max(l1 + 1, _round_half_up(2 * root))
        l3 = max(l2 + 1, K // 3)
        base = dict(l1=l1, l2=l2, l3=l3, f=4, n_shot=3 * K * K, k_shot=3 * K,
                    n_cate=200 * K, k_cate0=4 * K, mu0=0.5, sigma=0.01,
                    mu_min=0.15, z=K // 20, k_min=200, T=math.ceil(root),
                    seed=0, stagnation_rounds=3)
        unknown = set(overrides) - set(base)
        if unknown:
            raise InvalidArgumentError(f"unknown solver parameters {sorted(unknown)}")
        base.update(overrides)
        return cls(**base)

    def validate(self) -> SolverParams:
        if not 1 <= self.l1 < self.l2 < self.l3:
            raise InvalidArgumentError("layer sizes must satisfy 1 <= l1 < l2 < l3")
        if not 0 < self.mu_min <= self.mu0 <= 1:
            raise InvalidArgumentError("need 0 < mu_min <= mu0 <= 1")
        if self.f < 2:
            raise InvalidArgumentError("tail search threshold f must be >= 2")
        if self.n_shot < 1 or self.k_shot < 1 or self.n_cate < 1 or self.k_cate0 < 1:
            raise InvalidArgumentError("sample and keep counts must be positive")
        if self.k_min < 1 or self.T < 0 or self.z < 0 or self.sigma < 0:
            raise InvalidArgumentError("k_min >= 1, T >= 0, z >= 0, sigma >= 0 required")
        if self.stagnation_rounds < 1:
            raise InvalidArgumentError("stagnation_rounds must be >= 1")
        return self

    def clamped(self) -> SolverParams:
        """Keep counts clamped so that keeps never exceed samples."""
        return replace(self, k_shot=min(self.k_shot, self.n_shot),
                       k_min=min(self.k_min, self.k_cate0))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str, K: int | None = None) -> SolverParams:
        data = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgumentError(f"unknown solver parameters {sorted(unknown)}")
        if K is not None:
            return cls.defaults(K, **data)
        return cls(**data)


@dataclass(frozen=True, eq=False)
class NeighborLayers:
    """Per-codeword neighbour order (``K x (K-1)``) cut into three layers."""

    order: np.ndarray
    bounds: np.ndarray  # cumulative ends of L1, L2, L3 within each row

    def layer(self, i: int, which: int) -> list[int]:
        lo = 0 if which == 1 else int(self.bounds[which - 2])
        return self.order[i, lo:int(self.bounds[which - 1])].tolist()

    def L1(self, i):
        return self.layer(i, 1)

    def L2(self, i):
        return self.layer(i, 2)

    def L3(self, i):
        return self.layer(i, 3)


@dataclass(frozen=True, eq=False)
class PairCounts:
    delta: np.ndarray
    mode: Mode = Mode.NORMAL


@dataclass
class SolverReport:
    best_pi: np.ndarray
    best_cost: float
    cost_trace: list[float]
    iterations_run: int = 0
    mode_switches: int = 0
    wall_time: float = 0.0
    dist_type: DistType | None = None
    params: SolverParams | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "best_pi": [int(v) for v in self.best_pi],
            "best_cost": float(self.best_cost),
            "cost_trace": [float(c) for c in self.cost_trace],
            "iterations_run": int(self.iterations_run),
            "mode_switches": int(self.mode_switches),
            "wall_time_ms": 1000.0 * float(self.wall_time),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SolverReport:
        return cls(best_pi=np.asarray(data["best_pi"], dtype=np.int64),
                   best_cost=float(data["best_cost"]),
                   cost_trace=[float(c) for c in data["cost_trace"]],
                   iterations_run=int(data["iterations_run"]),
                   mode_switches=int(data["mode_switches"]),
                   wall_time=float(data["wall_time_ms"]) / 1000.0)


# -- provision ---------------------------------------------------------------

def _pair_weights(d: np.ndarray) -> np.ndarray:
    if np.array_equal(d, d.T):
        return d[np.triu_indices(d.shape[0], 1)]
    return d[~np.eye(d.shape[0], dtype=bool)]


def dip_pvalue(weights) -> float:
    """Hartigan dip-test p-value (1.0 for constant samples)."""
    import diptest

    w = np.asarray(weights, dtype=float)
    if w.size < 4 or np.ptp(w) == 0:
        return 1.0
    return float(diptest.diptest(w)[1])


def trim_upper_outliers(weights) -> np.ndarray:
    """Drop weights above the Tukey fence ``Q3 + 1.5 IQR``."""
    w = np.asarray(weights, dtype=float)
    q1, q3 = np.percentile(w, [25, 75])
    return w[w <= q3 + 1.5 * (q3 - q1)]


def classify_distribution(loss) -> DistType:
    """Type I when the bulk of the pair losses is unimodal.

    Rare large losses are outliers, not a second mode: they are trimmed at the
    upper Tukey fence before Hartigan's dip test is run at the 5% level.
    """
    w = trim_upper_outliers(_pair_weights(as_matrix(loss)))
    return DistType.TYPE_I if dip_pvalue(w) >= DIP_ALPHA else DistType.TYPE_II


def build_layers(loss, params: SolverParams) -> NeighborLayers:
    d = as_matrix(loss).copy()
    K = d.shape[0]
    np.fill_diagonal(d, -1.0)
    order = np.argsort(d, axis=1, kind="stable")[:, 1:]
    bounds = np.minimum(np.cumsum([params.l1, params.l2, params.l3]), K - 1)
    return NeighborLayers(order=np.ascontiguousarray(order), bounds=bounds.astype(np.int64))


def candidate_set(current: int, visited, layers: NeighborLayers, dist_type) -> list[int]:
    visited = set(int(v) for v in visited)
    K = layers.order.shape[0]
    if DistType(dist_type) is DistType.TYPE_I:
        for which in (1, 2, 3):
            omega = [m for m in layers.layer(current, which) if m not in visited]
            if omega:
                return omega
    return [m for m in range(K) if m not in visited]


def selection_probs(current: int, omega, loss, mu: float) -> np.ndarray:
    """Heavy-tailed preference ``1 / (1 + (d / (mu * dbar))**2)``, normalized."""
    d = as_matrix(loss)[current, list(omega)]
    dbar = d.mean()
    if dbar == 0:
        return np.full(len(d), 1.0 / len(d))
    p = 1.0 / (1.0 + (d / (mu * dbar)) ** 2)
    return p / p.sum()


# -- sampling ----------------------------------------------------------------

def _tail_perms(f: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(f))), dtype=np.int64)


def _exact_small(d: np.ndarray) -> np.ndarray:
    K = d.shape[0]
    best, best_pi = np.inf, None
    for perm in itertools.permutations(range(K)):
        cost = sum(d[perm[k], perm[k + 1]] for k in range(K - 1))
        if cost < best:
            best, best_pi = cost, perm
    return np.array(best_pi, dtype=np.int64)


class _Sampler:
    """Bundles the fixed arrays the route kernel needs."""

    def __init__(self, d, layers, dist_type, f):
        self.d = np.ascontiguousarray(d, dtype=np.float64)
        self.K = d.shape[0]
        self.order = layers.order
        self.bounds = layers.bounds
        self.type1 = DistType(dist_type) is DistType.TYPE_I
        self.f = f
        self.perms = _tail_perms(f)
        self.no_counts = np.zeros((1, 1))

    def sample(self, n, mu, delta, rng):
        """Yield ``(routes, costs)`` chunks for ``n`` routes."""
        use_counts = delta is not None
        delta = self.no_counts if delta is None else np.ascontiguousarray(delta, dtype=np.float64)
        done = 0
        while done < n:
            m = min(CHUNK, n - done)
            u = rng.random((m, self.K))
            yield _kernels.sample_routes(self.d, self.order, self.bounds, self.type1,
                                         float(mu), delta, use_counts, self.f,
                                         self.perms, u)
            done += m

    def top(self, n, k, mu, delta, rng):
        """Best ``k`` of ``n`` sampled routes, ties resolved by sample order."""
        keep_r = np.empty((0, self.K), dtype=np.int64)
        keep_c = np.empty(0)
        for routes, costs in self.sample(n, mu, delta, rng):
            keep_r = np.concatenate((keep_r, routes))
            keep_c = np.concatenate((keep_c, costs))
            idx = np.argsort(keep_c, kind="stable")[:k]
            keep_r, keep_c = keep_r[idx], keep_c[idx]
        return keep_r, keep_c


def sample_route(loss, layers, dist_type, mu, counts=None, rng=None, f: int = 4) -> np.ndarray:
    """Draw one route; reweights by pair counts when ``counts`` is given."""
    d = as_matrix(loss)
    if d.shape[0] <= f:
        return _exact_small(d)
    rng = np.random.default_rng(rng)
    delta = None if counts is None else getattr(counts, "delta", counts)
    routes, _ = next(_Sampler(d, layers, dist_type, f).sample(1, mu, delta, rng))
    return routes[0]


def count_pairs(routes, K: int) -> np.ndarray:
    """Symmetric count of unordered adjacent pairs, once per route."""
    routes = np.asarray(routes)
    delta = np.zeros((K, K))
    if routes.size == 0:
        return delta
    u = routes[:, :-1].ravel()
    v = routes[:, 1:].ravel()
    np.add.at(delta, (u, v), 1.0)
    np.add.at(delta, (v, u), 1.0)
    return delta


def apply_mode(delta: np.ndarray, mode) -> np.ndarray:
    """Return the pair counts after the fuzziness transform for ``mode``."""
    mode = Mode(mode)
    out = delta.copy()
    if mode is Mode.UPPER_LIMIT:
        Q = np.triu(out, 1).sum()
        np.minimum(out, UPPER_LIMIT_FRACTION * Q, out=out)
    elif mode is Mode.INTERMEDIATE:
        dmax = out.max()
        nonzero = out > 0
        band = nonzero & (out >= BAND[0] * dmax) & (out <= BAND[1] * dmax)
        if nonzero.any() and band.sum() >= BAND_OCCUPANCY * nonzero.sum():
            out[band] *= BAND_SCALE
    return out


# -- phases ------------------------------------------------------------------

def shotgun_phase(loss, layers, dist_type, params: SolverParams, rng):
    """Sample ``n_shot`` routes, keep the ``k_shot`` shortest and count their pairs."""
    params = params.clamped()
    d = as_matrix(loss)
    sampler = _Sampler(d, layers, dist_type, params.f)
    routes, costs = sampler.top(params.n_shot, params.k_shot, params.mu0, None, rng)
    counts = PairCounts(count_pairs(routes, d.shape[0]))
    return routes, counts, costs


def fuzzy_phase(loss, layers, dist_type, params: SolverParams, init, rng) -> SolverReport:
    """Refine with count-biased sampling; ``init`` is the shotgun output."""
    params = params.clamped()
    routes, counts, costs = init
    d = as_matrix(loss)
    sampler = _Sampler(d, layers, dist_type, params.f)
    best_pi, best = routes[0].copy(), float(costs[0])
    trace = [best]
    delta = counts.delta.copy()
    mode_idx, stall, stale_modes, switches, t_run = 0, 0, 0, 0, 0
    k_cate = params.k_cate0
    for t in range(1, params.T + 1):
        t_run = t
        mu = max(params.mu0 - params.sigma * t, params.mu_min)
        k_cate = max(k_cate - params.z * t, params.k_min)
        r, c = sampler.top(params.n_cate, min(k_cate, params.n_cate), mu, delta, rng)
        delta = apply_mode(delta + count_pairs(r, d.shape[0]), MODE_CYCLE[mode_idx])
        if c[0] < best:
            best, best_pi = float(c[0]), r[0].copy()
            stall = stale_modes = 0
        else:
            stall += 1
        trace.append(best)
        if stall >= params.stagnation_rounds:
            stale_modes += 1
            if stale_modes == len(MODE_CYCLE):
                break
            mode_idx = (mode_idx + 1) % len(MODE_CYCLE)
            switches += 1
            stall = 0
    return SolverReport(best_pi=best_pi, best_cost=path_cost(d, best_pi), cost_trace=trace,
                        iterations_run=t_run, mode_switches=switches, dist_type=dist_type,
                        params=params)


@contextmanager
def numba_threads(threads: int | None):
    if threads is None:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def solve(loss, params: SolverParams | None = None, *, threads: int | None = None) -> SolverReport:
    """Run provision, shotgun and fuzzy concatenation on a loss matrix.

    Asymmetric matrices are mean-symmetrized first.  Instances with at most
    ``f + 1`` codewords are solved by enumeration.
    """
    start = time.perf_counter()
    if isinstance(loss, LossMatrix):
        loss = loss.symmetric()
    d = as_matrix(loss)
    K = d.shape[0]
    if K < 2:
        raise InvalidArgumentError("need at least two codewords")
    if not np.array_equal(d, d.T):
        d = 0.5 * (d + d.T)
    params = (params or SolverParams.defaults(K)).validate()
    if K <= params.f + 1:
        pi = _exact_small(d)
        cost = path_cost(d, pi)
        return SolverReport(best_pi=pi, best_cost=cost, cost_trace=[cost],
                            wall_time=time.perf_counter() - start, params=params)
    rng = np.random.default_rng(params.seed)
    with numba_threads(threads):
        dist_type = classify_distribution(d)
        layers = build_layers(d, params)
        init = shotgun_phase(d, layers, dist_type, params, rng)
        report = fuzzy_phase(d, layers, dist_type, params, init, rng)
    report.params = params
    report.wall_time = time.perf_counter() - start
    return report
