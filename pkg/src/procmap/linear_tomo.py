"""Dual-frame linear process tomography, map application, and map diagnostics.

The process map Lambda is stored as an N^2 x N^2 Hermitian matrix with row
composite index (r*N + r') and column composite index (s*N + s'), matching
the layout of the displayed maps it is tested against; entry (rr', ss') is
sum_n Q(n)[r,s] * conj(dual(n)[r',s']).  Acting on a state contracts the
primed indices: out[r,s] = sum_{r's'} Lambda[rr',ss'] rho[r',s'].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .qstate import dagger, hermiticity_residual
from .records import TomographyRecord

LAYOUT_TAG = "rrp-ssp"


class NotAFrame(Exception):
    """The supplied input states do not form an invertible tomography frame."""


@dataclass(frozen=True)
class LinearProcessMap:
    """Linear process map in (r,r') x (s,s') storage."""

    dim: int
    mat: np.ndarray

    def __post_init__(self):
        n2 = self.dim * self.dim
        if self.mat.shape != (n2, n2):
            raise ValueError(f"map matrix has shape {self.mat.shape}, expected ({n2}, {n2})")

    def hermiticity_residual(self) -> float:
        return hermiticity_residual(self.mat)

    def to_json(self) -> dict:
        return {"dim": int(self.dim), "layout": LAYOUT_TAG, "lam": jsonio.matrix_to_json(self.mat)}

    @staticmethod
    def from_json(obj: dict) -> "LinearProcessMap":
        layout = obj.get("layout", LAYOUT_TAG)
        if layout != LAYOUT_TAG:
            raise ValueError(f"unsupported linear map layout {layout!r}")
        return LinearProcessMap(dim=int(obj["dim"]), mat=jsonio.matrix_from_json(obj["lam"]))


@dataclass(frozen=True)
class DualFrame:
    """Tomography inputs together with their Hilbert-Schmidt duals."""

    inputs: tuple[np.ndarray, ...]
    duals: tuple[np.ndarray, ...]

    def biorthogonality_residual(self) -> float:
        k = len(self.inputs)
        res = 0.0
        for m in range(k):
            for n in range(k):
                val = np.trace(dagger(self.duals[m]) @ self.inputs[n])
                res = max(res, abs(val - (1.0 if m == n else 0.0)))
        return float(res)


def compute_duals(inputs) -> DualFrame:
    """Duals of the input states under the Hilbert-Schmidt scalar product.

    Inverts the Gram matrix G[m,n] = Tr[P(m)' P(n)]; requires exactly N^2
    linearly independent inputs.
    """
    inputs = tuple(np.asarray(p, dtype=complex) for p in inputs)
    if not inputs:
        raise NotAFrame("no input states supplied")
    n = inputs[0].shape[0]
    if any(p.shape != (n, n) for p in inputs):
        raise NotAFrame("input states have inconsistent dimensions")
    k = len(inputs)
    if k != n * n:
        raise NotAFrame(f"need exactly {n * n} input states for dimension {n}, got {k}")
    gram = np.empty((k, k), dtype=complex)
    for m in range(k):
        for j in range(k):
            gram[m, j] = np.trace(dagger(inputs[m]) @ inputs[j])
    if np.linalg.cond(gram) > 1e12:
        raise NotAFrame("input states are not linearly independent (singular Gram matrix)")
    ginv = np.linalg.inv(gram)
    duals = tuple(
        sum(ginv[j, m] * inputs[j] for j in range(k))
        for m in range(k)
    )
    frame = DualFrame(inputs=inputs, duals=duals)
    res = frame.biorthogonality_residual()
    if res > 1e-10:
        raise NotAFrame(f"computed duals violate biorthogonality (residual {res:.3e})")
    return frame


def reconstruct_linear_map(records) -> LinearProcessMap:
    """Process map from exactly N^2 (input, output) record pairs.

    Overdetermined record sets are rejected; least-squares fitting is out of
    scope for this tool.
    """
    records = list(records)
    if not records:
        raise NotAFrame("no records supplied")
    n = records[0].input.shape[0]
    frame = compute_duals([rec.input for rec in records])
    lam4 = np.zeros((n, n, n, n), dtype=complex)
    for rec, dual in zip(records, frame.duals):
        lam4 += np.einsum("rs,pq->rpsq", np.asarray(rec.output, dtype=complex), np.conj(dual))
    return LinearProcessMap(dim=n, mat=lam4.reshape(n * n, n * n))


def apply_linear_map(lam: LinearProcessMap, rho: np.ndarray) -> np.ndarray:
    """Contract the map with a state: out[r,s] = sum Lambda[rr',ss'] rho[r',s']."""
    n = lam.dim
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (n, n):
        raise ValueError(f"state has shape {rho.shape}, expected ({n}, {n})")
    lam4 = lam.mat.reshape(n, n, n, n)
    return np.einsum("rpsq,pq->rs", lam4, rho)


@dataclass(frozen=True)
class MapDiagnostics:
    eigenvalues: np.ndarray
    trace: float
    hermiticity_residual: float
    min_eigenvalue: float

    def to_json(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "trace": float(self.trace),
            "hermiticity_residual": float(self.hermiticity_residual),
            "min_eigenvalue": float(self.min_eigenvalue),
        }


def map_diagnostics(lam: LinearProcessMap) -> MapDiagnostics:
    """Spectral diagnostics of the map matrix; negative eigenvalues flag a bad fit."""
    herm_res = lam.hermiticity_residual()
    sym = 0.5 * (lam.mat + dagger(lam.mat))
    w = np.linalg.eigvalsh(sym)
    return MapDiagnostics(
        eigenvalues=w,
        trace=float(np.sum(w)),
        hermiticity_residual=float(herm_res),
        min_eigenvalue=float(w[0]),
    )
