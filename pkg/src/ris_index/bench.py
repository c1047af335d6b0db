"""Monte Carlo campaigns: instance generation, solving and loss evaluation."""
from __future__ import annotations

import csv
import itertools
import json
import logging
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import baselines
from .assignment import Assignment, assign_from_path, natural_assignment, random_assignment
from .codebook import build_codebook, generate_channels
from .errors import DegenerateInstanceError, InvalidArgumentError
from .heuristic import SolverParams, numba_threads, solve
from .loss import DISTRIBUTIONS, LossMatrix, ber_from_snr_db, build_loss_matrix, expected_loss, \
    path_cost, synth_matrix

log = logging.getLogger(__name__)

SOLVERS = ("natural", "random", "greedy", "2opt", "3opt", "tsp", "exact")
CSV_COLUMNS = ("experiment", "K", "N", "M", "b", "bsc_snr_db", "q", "solver", "mean_loss",
               "std_loss", "mean_path_cost", "mean_time_ms")
MAX_REGENERATIONS = 10


@dataclass(frozen=True)
class CampaignConfig:
    experiment: str = "I"
    K: list = field(default_factory=lambda: [64])
    N: list = field(default_factory=lambda: [64])
    M: list = field(default_factory=lambda: [8])
    b: list = field(default_factory=lambda: [4])
    bsc_snr_db: list = field(default_factory=lambda: [0.0, 4.0, 8.0, 12.0])
    solvers: list = field(default_factory=lambda: ["natural", "random", "tsp"])
    runs: int = 30
    seed: int = 0
    out_dir: str = "results"
    # "ris" builds MISO-RIS instances; otherwise a synthetic distribution name.
    source: str = "ris"
    solver_params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("K", "N", "M", "b", "bsc_snr_db", "solvers"):
            if not list(getattr(self, name)):
                raise InvalidArgumentError(f"grid {name!r} must be nonempty")
        if self.runs < 1:
            raise InvalidArgumentError("runs must be >= 1")
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise InvalidArgumentError(f"unknown solver(s) {sorted(unknown)}; choose from {SOLVERS}")
        if self.source != "ris" and self.source not in DISTRIBUTIONS:
            raise InvalidArgumentError(f"unknown source {self.source!r}")

    @classmethod
    def from_dict(cls, data: dict) -> CampaignConfig:
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgumentError(f"unknown config fields {sorted(unknown)}")
        data = dict(data)
        for name in ("K", "N", "M", "b", "bsc_snr_db", "solvers"):
            if name in data and not isinstance(data[name], list):
                data[name] = [data[name]]
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> CampaignConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


PRESETS = {
    # desk scale keeps CI runs in minutes
    "desk": dict(K=[64], N=[64], M=[8], b=[4], runs=30),
    "full": dict(K=[256], N=[256], M=[16], b=[8], runs=100),
}
EXPERIMENTS = {
    "I": dict(bsc_snr_db=[0.0, 4.0, 8.0, 12.0], solvers=["natural", "random", "tsp"]),
    "II": dict(bsc_snr_db=[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0], solvers=["tsp"]),
    "III": dict(bsc_snr_db=[0.0, 1.0, 2.0, 3.0, 4.0], solvers=["greedy", "2opt", "3opt", "tsp"]),
    "IV": dict(bsc_snr_db=[0.0], solvers=["greedy", "2opt", "3opt", "tsp"], source="clustered"),
}


def preset(experiment: str = "I", scale: str = "desk", **overrides) -> CampaignConfig:
    if experiment not in EXPERIMENTS or scale not in PRESETS:
        raise InvalidArgumentError(f"no preset for experiment {experiment!r} at scale {scale!r}")
    base = dict(experiment=experiment, **PRESETS[scale], **EXPERIMENTS[experiment])
    if base.get("source", "ris") != "ris":
        base.update(N=[0], M=[0], b=[0])
    base.update(overrides)
    return CampaignConfig.from_dict(base)


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    K: int
    N: int
    M: int
    b: int
    bsc_snr_db: float
    q: float
    solver: str
    mean_loss: float
    std_loss: float
    mean_path_cost: float
    mean_time_ms: float

    def __post_init__(self):
        if self.mean_loss < 0 or self.mean_time_ms < 0:
            raise InvalidArgumentError("loss and time must be nonnegative")


def derive_seed(master: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master) & 0xFFFFFFFF, *[int(k) for k in key]])


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def make_instance(source, K, N, M, b, ss: np.random.SeedSequence) -> LossMatrix:
    """Raw (unsymmetrized for RIS) loss matrix for one run."""
    if source != "ris":
        return synth_matrix(source, K, _seed_int(ss))
    for attempt in range(MAX_REGENERATIONS):
        ch_ss, cb_ss = np.random.SeedSequence(ss.entropy, spawn_key=(*ss.spawn_key, attempt)).spawn(2)
        channels = generate_channels(K, N, M, _seed_int(ch_ss))
        codebook = build_codebook(channels, b, _seed_int(cb_ss))
        try:
            return build_loss_matrix(channels, codebook)
        except DegenerateInstanceError:
            log.warning("degenerate instance (K=%d N=%d M=%d b=%d); regenerating", K, N, M, b)
    raise DegenerateInstanceError("instance generation kept producing zero-SNR UEs")


def run_solver(name: str, loss: LossMatrix, seed: int, solver_params: dict | None = None,
               threads: int | None = None) -> tuple[np.ndarray, Assignment | None]:
    """Return ``(path, assignment)``; the assignment is ``None`` if ``K`` is not a power of two."""
    sym = loss.symmetric()
    K = loss.K
    pow2 = K & (K - 1) == 0
    if name == "natural":
        return baselines.natural_order(K), natural_assignment(K) if pow2 else None
    if name == "random":
        if not pow2:
            return baselines.random_order(K, seed), None
        a = random_assignment(K, seed)
        return a.codeword_of(), a
    if name == "greedy":
        pi = baselines.greedy_order(sym)
    elif name == "2opt":
        pi = baselines.two_opt(sym, baselines.random_order(K, seed))
    elif name == "3opt":
        pi = baselines.three_opt(sym, baselines.random_order(K, seed))
    elif name == "exact":
        pi, _ = baselines.exact_optimum(sym)
    elif name == "tsp":
        params = SolverParams.defaults(K, **{**(solver_params or {}), "seed": seed})
        pi = solve(sym, params, threads=threads).best_pi
    else:
        raise InvalidArgumentError(f"unknown solver {name!r}; choose from {SOLVERS}")
    return pi, assign_from_path(pi) if pow2 else None


def run_campaign(config: CampaignConfig, threads: int | None = None) -> list[ResultRow]:
    """Evaluate every grid point x solver x run and aggregate per BSC SNR.

    Seeds are derived from ``(seed, K, N, M, b, run)``, so results do not
    depend on evaluation order or thread count.
    """
    rows = []
    qs = [ber_from_snr_db(s) for s in config.bsc_snr_db]
    grid = itertools.product(config.K, config.N, config.M, config.b)
    with numba_threads(threads):
        for K, N, M, b in grid:
            losses = {s: [] for s in config.solvers}
            costs = {s: [] for s in config.solvers}
            times = {s: [] for s in config.solvers}
            for run in range(config.runs):
                ss = derive_seed(config.seed, K, N, M, b, run)
                inst_ss, solver_ss = ss.spawn(2)
                loss = make_instance(config.source, K, N, M, b, inst_ss)
                for idx, name in enumerate(config.solvers):
                    seed = _seed_int(np.random.SeedSequence(solver_ss.entropy,
                                                            spawn_key=(*solver_ss.spawn_key, idx)))
                    t0 = time.perf_counter()
                    pi, assignment = run_solver(name, loss, seed, config.solver_params)
                    times[name].append(1000.0 * (time.perf_counter() - t0))
                    costs[name].append(path_cost(loss, pi))
                    if assignment is None:
                        raise InvalidArgumentError(f"K={K} is not a power of two")
                    unit = expected_loss(loss, assignment, 1.0)
                    losses[name].append([unit * q for q in qs])
                log.info("K=%d N=%d M=%d b=%d run %d/%d done", K, N, M, b, run + 1, config.runs)
            for name in config.solvers:
                per_snr = np.asarray(losses[name])
                for col, (snr_db, q) in enumerate(zip(config.bsc_snr_db, qs)):
                    rows.append(ResultRow(
                        experiment=config.experiment, K=K, N=N, M=M, b=b,
                        bsc_snr_db=float(snr_db), q=q, solver=name,
                        mean_loss=float(per_snr[:, col].mean()),
                        std_loss=float(per_snr[:, col].std()),
                        mean_path_cost=float(np.mean(costs[name])),
                        mean_time_ms=float(np.mean(times[name]))))
    return rows


def write_csv(path, rows: list[ResultRow]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v
                             for v in (getattr(row, c) for c in CSV_COLUMNS)])


def read_csv(path) -> list[ResultRow]:
    types = {f.name: f.type for f in fields(ResultRow)}
    casts = {"int": int, "float": float, "str": str}
    with open(path, newline="") as fh:
        return [ResultRow(**{k: casts[types[k]](v) for k, v in rec.items()})
                for rec in csv.DictReader(fh)]
