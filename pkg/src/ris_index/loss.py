"""Mismatch losses, the BSC error model and the expected-loss objectives."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import _kernels
from .codebook import ChannelSet, Codebook, snr_table
from .errors import DegenerateInstanceError, InvalidArgumentError

DISTRIBUTIONS = ("uniform", "clustered", "exploded")


@dataclass(frozen=True, eq=False)
class LossMatrix:
    """``K x K`` nonnegative mismatch losses with a zero diagonal."""

    d: np.ndarray
    symmetrized: bool = False
    source: str = "ris"
    seed: int | None = None

    def __post_init__(self):
        d = np.array(self.d, dtype=np.float64, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidArgumentError(f"loss matrix must be square, got {d.shape}")
        if np.any(np.diag(d) != 0) or np.any(d < 0) or not np.all(np.isfinite(d)):
            raise InvalidArgumentError("loss matrix needs a zero diagonal and finite entries >= 0")
        if self.symmetrized and not np.array_equal(d, d.T):
            raise InvalidArgumentError("matrix flagged symmetrized is not symmetric")
        d.flags.writeable = False
        object.__setattr__(self, "d", d)

    @property
    def K(self) -> int:
        return self.d.shape[0]

    def symmetric(self) -> LossMatrix:
        """Mean-symmetrized copy (``self`` if already symmetrized)."""
        if self.symmetrized:
            return self
        return LossMatrix(0.5 * (self.d + self.d.T), symmetrized=True,
                          source=self.source, seed=self.seed)


def as_matrix(loss) -> np.ndarray:
    return loss.d if isinstance(loss, LossMatrix) else np.asarray(loss, dtype=np.float64)


def check_permutation(pi, K: int) -> np.ndarray:
    pi = np.asarray(pi)
    if pi.shape != (K,) or not np.array_equal(np.sort(pi), np.arange(K)):
        raise InvalidArgumentError(f"not a permutation of 0..{K - 1}: {pi.tolist()}")
    return pi.astype(np.int64)


def _ratio_loss(S: np.ndarray) -> np.ndarray:
    own = np.diag(S).copy()
    if np.any(own <= 0):
        bad = np.flatnonzero(own <= 0).tolist()
        raise DegenerateInstanceError(f"zero SNR under intended codeword for UE(s) {bad}")
    d = np.abs(1.0 - S / own[:, None])
    np.fill_diagonal(d, 0.0)
    return d


def mismatch_loss(channels: ChannelSet, codebook: Codebook, i: int, j: int) -> float:
    """Relative SNR loss ``|1 - SNR_j / SNR_i|`` on UE ``i``'s channel."""
    if i == j:
        return 0.0
    phases = codebook.phases
    h_i = channels.cascade(i) @ phases[i]
    h_j = channels.cascade(i) @ phases[j]
    own = np.vdot(h_i, h_i).real
    if own <= 0:
        raise DegenerateInstanceError(f"zero SNR under intended codeword for UE {i}")
    return float(abs(1.0 - np.vdot(h_j, h_j).real / own))


def build_loss_matrix(channels: ChannelSet, codebook: Codebook,
                      symmetrize: bool = False) -> LossMatrix:
    if codebook.K != channels.K:
        raise InvalidArgumentError("need exactly one codeword per UE")
    loss = LossMatrix(_ratio_loss(snr_table(channels, codebook)), source="ris",
                      seed=channels.seed)
    return loss.symmetric() if symmetrize else loss


def ber_from_snr_db(snr_db):
    """BPSK bit error rate over AWGN: ``0.5 * erfc(sqrt(10**(snr_db/10)))``."""
    out = 0.5 * erfc(np.sqrt(10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BscModel:
    snr_db: float
    q: float

    @classmethod
    def from_snr_db(cls, snr_db: float) -> BscModel:
        return cls(float(snr_db), ber_from_snr_db(snr_db))


def expected_loss(loss, assignment, q: float) -> float:
    """Average loss from single-bit label flips, each occurring with prob. ``q``.

    ``assignment`` is an :class:`~ris_index.assignment.Assignment` (or the
    ``label_of`` array).  Evaluated on the matrix as given; pass the raw,
    asymmetric matrix for the true objective.
    """
    d = as_matrix(loss)
    K = d.shape[0]
    labels = np.asarray(getattr(assignment, "labels", assignment), dtype=np.int64)
    if K & (K - 1) or K < 1:
        raise InvalidArgumentError(f"K={K} is not a power of two")
    if labels.shape != (K,) or not np.array_equal(np.sort(labels), np.arange(K)):
        raise InvalidArgumentError("assignment is not a bijection onto 0..K-1")
    owner = np.empty(K, dtype=np.int64)
    owner[labels] = np.arange(K)
    total = 0.0
    for bit in range(K.bit_length() - 1):
        total += d[np.arange(K), owner[labels ^ (1 << bit)]].sum()
    return float(q * total / K)


def path_cost(loss, pi) -> float:
    """Open-path length ``sum d[pi[k], pi[k+1]]`` on the symmetrized matrix."""
    if isinstance(loss, LossMatrix):
        loss = loss.symmetric()
    d = as_matrix(loss)
    pi = check_permutation(pi, d.shape[0])
    return float(_kernels.route_cost(np.ascontiguousarray(d), pi))


def synth_matrix(dist: str, K: int, seed) -> LossMatrix:
    """Symmetric synthetic edge weights: ``uniform``, ``clustered`` or ``exploded``.

    clustered: N(0.1, 0.02^2) w.p. 0.9, else N(0.9, 0.02^2), clipped at 0.
    exploded:  U[0, 0.2] w.p. 0.9, else U[0.8, 1.0].
    """
    if dist not in DISTRIBUTIONS:
        raise InvalidArgumentError(f"unknown distribution {dist!r}; choose from {DISTRIBUTIONS}")
    if K < 2:
        raise InvalidArgumentError("K must be >= 2")
    rng = np.random.default_rng(seed)
    n = K * (K - 1) // 2
    if dist == "uniform":
        w = rng.uniform(0.0, 1.0, n)
    else:
        minority = rng.uniform(size=n) >= 0.9
        if dist == "clustered":
            w = np.where(minority, rng.normal(0.9, 0.02, n), rng.normal(0.1, 0.02, n))
            w = np.maximum(w, 0.0)
        else:
            w = np.where(minority, rng.uniform(0.8, 1.0, n), rng.uniform(0.0, 0.2, n))
    d = np.zeros((K, K))
    iu = np.triu_indices(K, 1)
    d[iu] = w
    d.T[iu] = w
    return LossMatrix(d, symmetrized=True, source=dist, seed=seed)
