"""Synthetic MISO-RIS instances: channels, quantized-phase codebooks and SNR.

The direct BS-UE path is blocked, so UE ``k`` sees the cascaded channel
``h = G^T diag(phi) h_r[k]`` (an ``M``-vector).  With maximum-ratio
transmission at the BS the received SNR is ``P * ||h||^2 / sigma2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

#: Side of the square UE deployment area, metres.
AREA_SIDE = 50.0
#: Free-space reference distance, metres.
REFERENCE_DISTANCE = 1.0
#: -90 dBm expressed in watts.
DEFAULT_NOISE_POWER = 1e-12


@dataclass(frozen=True)
class PhaseSet:
    """The ``2**b`` unit-modulus phases ``exp(j m 2pi / 2**b)`` a PRU can apply."""

    b: int

    def __post_init__(self):
        if self.b < 1:
            raise InvalidArgumentError(f"bits per PRU must be >= 1, got {self.b}")

    @property
    def step(self) -> float:
        return 2.0 * np.pi / 2**self.b

    @property
    def values(self) -> np.ndarray:
        return np.exp(1j * self.step * np.arange(2**self.b))

    def quantize(self, angles) -> np.ndarray:
        """Nearest level index for each angle (radians)."""
        angles = np.mod(np.asarray(angles, dtype=float), 2.0 * np.pi)
        return np.rint(angles / self.step).astype(np.int64) % 2**self.b


@dataclass(frozen=True, eq=False)
class ChannelSet:
    G: np.ndarray  # N x M, BS -> RIS
    h_r: np.ndarray  # K x N, RIS -> UE k
    P: float = 1.0
    sigma2: float = DEFAULT_NOISE_POWER
    seed: int | None = None
    positions: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        G = np.asarray(self.G, dtype=np.complex128)
        h_r = np.asarray(self.h_r, dtype=np.complex128)
        if G.ndim != 2 or h_r.ndim != 2 or h_r.shape[1] != G.shape[0]:
            raise InvalidArgumentError(
                f"inconsistent channel shapes G{G.shape} h_r{h_r.shape}")
        if not self.P > 0 or not self.sigma2 > 0:
            raise InvalidArgumentError("P and sigma2 must be positive")
        G.flags.writeable = False
        h_r.flags.writeable = False
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h_r", h_r)

    @property
    def K(self) -> int:
        return self.h_r.shape[0]

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def M(self) -> int:
        return self.G.shape[1]

    def cascade(self, ue: int) -> np.ndarray:
        """``G^T diag(h_r[ue])`` as an ``M x N`` matrix."""
        return self.G.T * self.h_r[ue][None, :]


@dataclass(frozen=True, eq=False)
class Codebook:
    """``K`` codewords stored as integer phase levels (``K x N``)."""

    levels: np.ndarray
    b: int

    def __post_init__(self):
        levels = np.array(self.levels, dtype=np.int64, copy=True)
        if levels.ndim != 2:
            raise InvalidArgumentError("codebook levels must be a K x N array")
        if levels.size and (levels.min() < 0 or levels.max() >= 2**self.b):
            raise InvalidArgumentError(f"levels must lie in [0, {2**self.b})")
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)

    @property
    def K(self) -> int:
        return self.levels.shape[0]

    @property
    def N(self) -> int:
        return self.levels.shape[1]

    @property
    def phases(self) -> np.ndarray:
        """Complex ``K x N`` array of the applied reflection coefficients."""
        return PhaseSet(self.b).values[self.levels]

    def is_distinct(self) -> bool:
        return len(np.unique(self.levels, axis=0)) == self.K

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return self.b == other.b and np.array_equal(self.levels, other.levels)


def _check_dims(**dims):
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise InvalidArgumentError(f"{name} must be a positive integer, got {value!r}")


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_channels(K, N, M, seed, *, P=1.0, sigma2=DEFAULT_NOISE_POWER,
                      area=AREA_SIDE) -> ChannelSet:
    """Draw Rayleigh BS-RIS and RIS-UE channels for ``K`` uniformly placed UEs.

    The RIS sits at the centre of the ``area x area`` square; each ``h_r[k]``
    is scaled by the free-space amplitude factor ``d0 / max(d, d0)``.
    """
    _check_dims(K=K, N=N, M=M)
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, area, size=(K, 2))
    dist = np.linalg.norm(positions - area / 2.0, axis=1)
    gain = REFERENCE_DISTANCE / np.maximum(dist, REFERENCE_DISTANCE)
    G = _crandn(rng, N, M)
    h_r = _crandn(rng, K, N) * gain[:, None]
    return ChannelSet(G=G, h_r=h_r, P=P, sigma2=sigma2, seed=seed, positions=positions)


def beam_angles(channels: ChannelSet, ue: int) -> np.ndarray:
    """Continuous PRU phases aligning the cascade toward ``ue``.

    Uses the principal right singular vector of ``G^T diag(h_r)``; for ``M == 1``
    this is exact co-phasing. The singular vector's free global phase is fixed
    so the signal at the first BS antenna is real and positive.
    """
    u, _, vh = np.linalg.svd(channels.cascade(ue), full_matrices=False)
    return np.angle(vh[0].conj() * np.exp(-1j * np.angle(u[0, 0])))


def build_codebook(channels: ChannelSet, b: int, seed) -> Codebook:
    """One quantized beam-steering codeword per UE, made pairwise distinct."""
    phase_set = PhaseSet(b)
    K, N = channels.K, channels.N
    if K > 2 ** (N * b):
        raise InvalidArgumentError(
            f"cannot build {K} distinct codewords with N={N}, b={b}")
    rng = np.random.default_rng(seed)
    levels = np.stack([phase_set.quantize(beam_angles(channels, k)) for k in range(K)])
    seen = set()
    for k in range(K):
        while tuple(levels[k]) in seen:
            n = rng.integers(N)
            levels[k, n] = (levels[k, n] + rng.choice((-1, 1))) % 2**b
        seen.add(tuple(levels[k]))
    return Codebook(levels=levels, b=b)


def snr(channels: ChannelSet, phases, ue: int) -> float:
    """Received SNR (linear) of UE ``ue`` when the RIS applies ``phases``."""
    if not 0 <= ue < channels.K:
        raise IndexError(f"UE index {ue} out of range for K={channels.K}")
    h = channels.cascade(ue) @ np.asarray(phases, dtype=np.complex128)
    return float(channels.P * np.vdot(h, h).real / channels.sigma2)


def snr_table(channels: ChannelSet, codebook: Codebook) -> np.ndarray:
    """``S[i, j]``: SNR of UE ``i`` under codeword ``j``."""
    if codebook.N != channels.N:
        raise InvalidArgumentError("codebook and channels disagree on N")
    phases = codebook.phases  # K x N
    out = np.empty((channels.K, codebook.K))
    for i in range(channels.K):
        h = channels.cascade(i) @ phases.T  # M x K
        out[i] = np.sum(h.real**2 + h.imag**2, axis=0)
    return channels.P * out / channels.sigma2
