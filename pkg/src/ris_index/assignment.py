"""Gray-coded index assignment along a solved path."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codebook import Codebook
from .errors import InvalidArgumentError
from .loss import check_permutation


def _log2(K: int) -> int:
    if K < 1 or K & (K - 1):
        raise InvalidArgumentError(f"K={K} is not a power of two")
    return K.bit_length() - 1


def gray_code(k: int, m: int) -> int:
    """The ``k``-th ``m``-bit reflected binary Gray code."""
    if m < 0 or not 0 <= k < 2**m:
        raise InvalidArgumentError(f"position {k} out of range for {m} bits")
    return k ^ (k >> 1)


@dataclass(frozen=True, eq=False)
class Assignment:
    """``labels[i]`` is the binary feedback label given to codeword ``i``."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64, copy=True)
        _log2(len(labels))
        if labels.ndim != 1 or not np.array_equal(np.sort(labels), np.arange(len(labels))):
            raise InvalidArgumentError("labels must be a bijection onto 0..K-1")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def K(self) -> int:
        return len(self.labels)

    @property
    def bits(self) -> int:
        return _log2(self.K)

    def codeword_of(self) -> np.ndarray:
        """Inverse map: ``codeword_of()[label]`` is the codeword holding ``label``."""
        inv = np.empty(self.K, dtype=np.int64)
        inv[self.labels] = np.arange(self.K)
        return inv

    def as_binary(self) -> list[str]:
        return [format(int(v), f"0{self.bits}b") for v in self.labels]

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


def assign_from_path(pi) -> Assignment:
    """Label the codeword at path position ``k`` with the ``k``-th Gray code."""
    pi = np.asarray(pi)
    m = _log2(len(pi))
    pi = check_permutation(pi, len(pi))
    labels = np.empty(len(pi), dtype=np.int64)
    labels[pi] = [gray_code(k, m) for k in range(len(pi))]
    return Assignment(labels)


def natural_assignment(K: int) -> Assignment:
    return Assignment(np.arange(K))


def random_assignment(K: int, seed) -> Assignment:
    _log2(K)
    return Assignment(np.random.default_rng(seed).permutation(K))


def remap_codebook(codebook: Codebook, assignment: Assignment) -> Codebook:
    """Reindex so that slot ``label`` holds the codeword carrying that label."""
    if codebook.K != assignment.K:
        raise InvalidArgumentError(
            f"codebook has {codebook.K} codewords, assignment covers {assignment.K}")
    return Codebook(codebook.levels[assignment.codeword_of()], codebook.b)
