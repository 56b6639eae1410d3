"""State-preparation procedures for open-system experiments.

Covers the stochastic route (pin map to a fixed pure state followed by a
unitary rotation), preparation by von Neumann measurement (projection with
renormalization), and generalized measurements given as sets of positive
trace-reducing maps, including their realization as a dilation unitary plus
a von Neumann readout on an ancilla.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .qstate import (
    STATE_TOL,
    dagger,
    is_projector,
    partial_trace_sys,
    tensor,
    validate_unitary,
)

ZERO_PROBABILITY_TOL = 1e-12


class ZeroProbabilityOutcome(Exception):
    """The requested preparation outcome has (numerically) zero probability."""


class InvalidMeasurement(ValueError):
    """A generalized measurement violates the completeness condition."""


@dataclass(frozen=True)
class OutcomeMap:
    """One outcome of a generalized measurement: a positive trace-reducing map.

    Canonical form: rho -> sum_a weights[a] * kraus[a] @ rho @ kraus[a]'.
    """

    weights: tuple[float, ...]
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.kraus):
            raise ValueError("weights and kraus lists must have equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("outcome-map weights must be nonnegative")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(rho, dtype=complex))
        for w, c in zip(self.weights, self.kraus):
            out += w * (c @ rho @ dagger(c))
        return out


@dataclass(frozen=True)
class GeneralizedMeasurement:
    """A measurement given by a set of positive trace-reducing maps.

    Completeness: sum over outcomes and Kraus terms of w * C'C equals the
    identity, which makes the outcome probabilities sum to one.
    """

    outcomes: tuple[OutcomeMap, ...]

    @property
    def dim(self) -> int:
        return self.outcomes[0].kraus[0].shape[0]

    @property
    def num_outcomes(self) -> int:
        return len(self.outcomes)

    def completeness_residual(self) -> float:
        n = self.dim
        acc = np.zeros((n, n), dtype=complex)
        for outcome in self.outcomes:
            for w, c in zip(outcome.weights, outcome.kraus):
                acc += w * (dagger(c) @ c)
        return float(np.max(np.abs(acc - np.eye(n))))

    def validate(self, tol: float = STATE_TOL) -> None:
        res = self.completeness_residual()
        if res > tol:
            raise InvalidMeasurement(
                f"measurement maps do not sum to a trace-preserving map (residual {res:.3e})"
            )

    def to_json(self) -> dict:
        return {
            "outcomes": [
                {
                    "weights": [float(w) for w in outcome.weights],
                    "kraus": [jsonio.matrix_to_json(c) for c in outcome.kraus],
                }
                for outcome in self.outcomes
            ]
        }

    @staticmethod
    def from_json(obj: dict) -> "GeneralizedMeasurement":
        outcomes = []
        for entry in obj["outcomes"]:
            weights = tuple(float(w) for w in entry["weights"])
            kraus = tuple(jsonio.matrix_from_json(c) for c in entry["kraus"])
            outcomes.append(OutcomeMap(weights=weights, kraus=kraus))
        return GeneralizedMeasurement(outcomes=tuple(outcomes))


@dataclass(frozen=True)
class PreparedState:
    """A post-preparation joint state with its outcome probability."""

    joint: np.ndarray
    gamma: float
    label: str = ""


def _check_pure(target: np.ndarray, tol: float) -> None:
    w = np.linalg.eigvalsh(np.asarray(target, dtype=complex))
    if abs(w[-1] - 1.0) > tol or abs(np.sum(w) - 1.0) > tol:
        raise ValueError("pin target must be a pure state (largest eigenvalue 1)")


def apply_pin_map(
    gamma0: np.ndarray,
    dim_sys: int,
    dim_env: int,
    target: np.ndarray,
    env_state: np.ndarray | None = None,
) -> np.ndarray:
    """Pin the system to a fixed pure state, decoupling it from the environment.

    The resulting joint is target (x) tau.  By default tau is the environment
    marginal of gamma0; pass `env_state` to realize a pin map with a different
    fixed environment state.
    """
    gamma0 = np.asarray(gamma0, dtype=complex)
    d = dim_sys * dim_env
    if gamma0.shape != (d, d):
        raise ValueError(f"gamma0 has shape {gamma0.shape}, expected ({d}, {d})")
    target = np.asarray(target, dtype=complex)
    if target.shape != (dim_sys, dim_sys):
        raise ValueError("pin target dimension does not match the system")
    _check_pure(target, STATE_TOL)
    tau = partial_trace_sys(gamma0, dim_sys, dim_env) if env_state is None else env_state
    return tensor(target, tau)


def prepare_stochastic(joint_pinned: np.ndarray, v: np.ndarray, label: str = "") -> PreparedState:
    """Rotate a pinned joint state by a system unitary; outcome probability is 1."""
    validate_unitary(v)
    dim_sys = v.shape[0]
    d = np.asarray(joint_pinned).shape[0]
    if d % dim_sys:
        raise ValueError("joint dimension is not a multiple of the system dimension")
    dim_env = d // dim_sys
    big = tensor(v, np.eye(dim_env))
    return PreparedState(joint=big @ joint_pinned @ dagger(big), gamma=1.0, label=label)


def prepare_projective(
    gamma0: np.ndarray,
    dim_sys: int,
    dim_env: int,
    p: np.ndarray,
    label: str = "",
) -> PreparedState:
    """Prepare by a von Neumann measurement outcome: project and renormalize.

    gamma = Tr[(P x 1) gamma0], the probability of obtaining this input state.
    Raises ZeroProbabilityOutcome when the experiment never yields this input.
    """
    gamma0 = np.asarray(gamma0, dtype=complex)
    p = np.asarray(p, dtype=complex)
    if not is_projector(p):
        raise ValueError("projective preparation requires a rank-1 projector")
    big_p = tensor(p, np.eye(dim_env))
    projected = big_p @ gamma0 @ big_p
    gamma = float(np.trace(projected).real)
    if gamma < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityOutcome(f"preparation {label or 'outcome'} has probability {gamma:.3e}")
    joint = projected / gamma
    # The projected joint factorizes as P (x) tau; cross-check both forms.
    tau = partial_trace_sys(joint, dim_sys, dim_env)
    if np.max(np.abs(joint - tensor(p, tau))) > 1e-12:
        raise ValueError("projected joint state does not factorize as P (x) tau")
    return PreparedState(joint=joint, gamma=gamma, label=label)


def prepare_generalized(
    gamma0: np.ndarray,
    dim_sys: int,
    dim_env: int,
    meas: GeneralizedMeasurement,
    outcome: int,
    label: str = "",
) -> PreparedState:
    """Prepare by a generalized-measurement outcome acting on the system factor."""
    meas.validate()
    gamma0 = np.asarray(gamma0, dtype=complex)
    omap = meas.outcomes[outcome]
    acc = np.zeros_like(gamma0)
    eye_env = np.eye(dim_env)
    for w, c in zip(omap.weights, omap.kraus):
        big_c = tensor(c, eye_env)
        acc += w * (big_c @ gamma0 @ dagger(big_c))
    gamma = float(np.trace(acc).real)
    if gamma < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityOutcome(f"preparation {label or 'outcome'} has probability {gamma:.3e}")
    return PreparedState(joint=acc / gamma, gamma=gamma, label=label)


def perpendicular_ket(ket: np.ndarray) -> np.ndarray:
    """Deterministic orthogonal partner of a qubit state vector."""
    ket = np.asarray(ket, dtype=complex)
    if ket.shape != (2,):
        raise ValueError("perpendicular_ket is defined for qubit kets only")
    return np.array([-np.conj(ket[1]), np.conj(ket[0])])


def rotation_between(phi_ket: np.ndarray, psi_ket: np.ndarray) -> np.ndarray:
    """Qubit unitary V with V|phi> = |psi>, built as |psi><phi| + |psi_perp><phi_perp|."""
    phi = np.asarray(phi_ket, dtype=complex)
    psi = np.asarray(psi_ket, dtype=complex)
    v = np.outer(psi, np.conj(phi)) + np.outer(perpendicular_ket(psi), np.conj(perpendicular_ket(phi)))
    validate_unitary(v)
    return v


def measure_generalized_via_maps(
    rho: np.ndarray, meas: GeneralizedMeasurement, outcome: int
) -> tuple[float, np.ndarray]:
    """Outcome probability and collapsed state from the trace-reducing maps."""
    meas.validate()
    unnormalized = meas.outcomes[outcome].apply(np.asarray(rho, dtype=complex))
    prob = float(np.trace(unnormalized).real)
    if prob < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityOutcome(f"outcome {outcome} has probability {prob:.3e}")
    return prob, unnormalized / prob


def _dilation_dims(meas: GeneralizedMeasurement) -> tuple[int, int, int]:
    n = meas.dim
    mu = meas.num_outcomes
    return n, mu, n * n


def build_dilation(meas: GeneralizedMeasurement) -> tuple[np.ndarray, tuple[int, int]]:
    """Dilation unitary realizing `meas` with two ancillas of sizes (mu, N^2).

    Basis ordering |r, j, alpha> with composite index r*(mu*N^2) + j*N^2 + alpha.
    Columns for |r', 0, 0> are fixed by the measurement; the remaining columns
    are completed by Gram-Schmidt over standard basis vectors in index order,
    skipping vectors whose residual norm falls below 1e-10.
    """
    meas.validate()
    n, mu, n2 = _dilation_dims(meas)
    dim = n * mu * n2

    def idx(r: int, j: int, alpha: int) -> int:
        return r * (mu * n2) + j * n2 + alpha

    fixed_cols = np.zeros((dim, n), dtype=complex)
    for rp in range(n):
        col = np.zeros(dim, dtype=complex)
        for j, omap in enumerate(meas.outcomes):
            for alpha, (w, c) in enumerate(zip(omap.weights, omap.kraus)):
                if alpha >= n2:
                    raise InvalidMeasurement("an outcome map has more than N^2 Kraus terms")
                coeff = np.sqrt(w)
                for r in range(n):
                    col[idx(r, j, alpha)] += coeff * c[r, rp]
        fixed_cols[:, rp] = col

    basis = [fixed_cols[:, rp] for rp in range(n)]
    for k in range(dim):
        if len(basis) == dim:
            break
        vec = np.zeros(dim, dtype=complex)
        vec[k] = 1.0
        for _ in range(2):  # re-orthogonalize for unitarity well below 1e-12
            for b in basis:
                vec = vec - np.vdot(b, vec) * b
        norm = np.linalg.norm(vec)
        if norm < 1e-10:
            continue
        basis.append(vec / norm)
    if len(basis) != dim:
        raise InvalidMeasurement("failed to complete the dilation unitary")

    w_mat = np.zeros((dim, dim), dtype=complex)
    fixed_positions = {idx(rp, 0, 0) for rp in range(n)}
    for rp in range(n):
        w_mat[:, idx(rp, 0, 0)] = basis[rp]
    fill = (c for c in range(dim) if c not in fixed_positions)
    for vec, col in zip(basis[n:], fill):
        w_mat[:, col] = vec
    validate_unitary(w_mat, tol=1e-12)
    return w_mat, (mu, n2)


def measure_generalized_via_dilation(
    rho: np.ndarray, meas: GeneralizedMeasurement, outcome: int
) -> tuple[float, np.ndarray]:
    """Outcome probability and collapsed state via the dilation + von Neumann route.

    Must agree with `measure_generalized_via_maps` within 1e-10 on both the
    probability and the post-measurement state.
    """
    n, mu, n2 = _dilation_dims(meas)
    w_mat, _ = build_dilation(meas)
    ancilla = np.zeros((mu * n2, mu * n2), dtype=complex)
    ancilla[0, 0] = 1.0  # |0,0><0,0|
    chi = w_mat @ tensor(np.asarray(rho, dtype=complex), ancilla) @ dagger(w_mat)
    # Von Neumann readout of the first ancilla, then trace out both ancillas.
    blocks = chi.reshape(n, mu, n2, n, mu, n2)
    selected = blocks[:, outcome, :, :, outcome, :]
    unnormalized = np.einsum("rasa->rs", selected)
    prob = float(np.trace(unnormalized).real)
    if prob < ZERO_PROBABILITY_TOL:
        raise ZeroProbabilityOutcome(f"outcome {outcome} has probability {prob:.3e}")
    return prob, unnormalized / prob
