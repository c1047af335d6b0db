"""File formats: instance JSON, loss-matrix CSV + sidecar, solver/assignment JSON.

Floats go through ``repr``, the shortest decimal that round-trips exactly,
except the loss CSV which is written with 17 significant digits.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .assignment import Assignment
from .codebook import ChannelSet, Codebook
from .errors import InvalidArgumentError
from .heuristic import SolverParams, SolverReport
from .loss import LossMatrix


def _pairs(z: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in z]


def _complex(pairs) -> np.ndarray:
    a = np.asarray(pairs, dtype=np.float64)
    return a[..., 0] + 1j * a[..., 1]


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj) + "\n")


def _read_json(path):
    return json.loads(Path(path).read_text())


def instance_to_dict(channels: ChannelSet, codebook: Codebook | None = None) -> dict:
    meta = dict(K=channels.K, N=channels.N, M=channels.M,
                b=None if codebook is None else codebook.b,
                P=channels.P, sigma2=channels.sigma2, seed=channels.seed)
    return {
        "meta": meta,
        "G": _pairs(channels.G.ravel()),  # row-major N x M
        "h_r": [_pairs(row) for row in channels.h_r],
        "codewords": [] if codebook is None else codebook.levels.tolist(),
    }


def instance_from_dict(data: dict) -> tuple[ChannelSet, Codebook | None]:
    meta = data["meta"]
    G = _complex(data["G"]).reshape(meta["N"], meta["M"])
    h_r = _complex(data["h_r"]).reshape(meta["K"], meta["N"])
    channels = ChannelSet(G=G, h_r=h_r, P=meta["P"], sigma2=meta["sigma2"],
                          seed=meta.get("seed"))
    codebook = None
    if data.get("codewords"):
        codebook = Codebook(np.asarray(data["codewords"], dtype=np.int64), meta["b"])
    return channels, codebook


def save_instance(path, channels, codebook=None):
    _write_json(path, instance_to_dict(channels, codebook))


def load_instance(path):
    return instance_from_dict(_read_json(path))


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_loss(path, loss: LossMatrix):
    """CSV of ``K`` rows plus a ``{K, symmetrized, source, seed}`` JSON sidecar."""
    np.savetxt(path, loss.d, fmt="%.17g", delimiter=",")
    _write_json(sidecar_path(path), dict(K=loss.K, symmetrized=loss.symmetrized,
                                         source=loss.source, seed=loss.seed))


def load_loss(path) -> LossMatrix:
    d = np.loadtxt(path, delimiter=",", ndmin=2)
    side = sidecar_path(path)
    meta = _read_json(side) if side.exists() else {}
    return LossMatrix(d, symmetrized=bool(meta.get("symmetrized", False)),
                      source=meta.get("source", "csv"), seed=meta.get("seed"))


def save_params(path, params: SolverParams):
    Path(path).write_text(params.to_json() + "\n")


def load_params(path, K: int | None = None) -> SolverParams:
    return SolverParams.from_json(Path(path).read_text(), K=K)


def save_report(path, report: SolverReport):
    _write_json(path, report.to_dict())


def load_report(path) -> SolverReport:
    return SolverReport.from_dict(_read_json(path))


def save_permutation(path, pi):
    _write_json(path, [int(v) for v in pi])


def load_permutation(path) -> np.ndarray:
    return np.asarray(_read_json(path), dtype=np.int64)


def save_assignment(path, assignment: Assignment):
    _write_json(path, {"K": assignment.K, "labels": assignment.labels.tolist()})


def load_assignment(path) -> Assignment:
    data = _read_json(path)
    assignment = Assignment(np.asarray(data["labels"], dtype=np.int64))
    if assignment.K != data["K"]:
        raise InvalidArgumentError(f"assignment file says K={data['K']} but has {assignment.K} labels")
    return assignment
