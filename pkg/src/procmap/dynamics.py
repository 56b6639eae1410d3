"""Joint unitary evolution of prepared states and extraction of system outputs.

The pipeline is: prepare the joint state, conjugate by the system+environment
unitary, trace out the environment.  Also provides the exchange-coupling
Hamiltonian used by the shipped scenarios and the fixed-environment dynamical
map rho -> Tr_env[U (rho x tau) U'].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linear_tomo import LinearProcessMap
from .prep import PreparedState
from .qstate import (
    PAULIS,
    dagger,
    eig_hermitian,
    hermiticity_residual,
    partial_trace_env,
    tensor,
    validate_density_matrix,
    validate_unitary,
)


@dataclass(frozen=True)
class ProcessSpec:
    """An unknown process: joint unitary u acting on system x environment with initial gamma0."""

    dim_sys: int
    dim_env: int
    u: np.ndarray
    gamma0: np.ndarray

    def validate(self) -> None:
        d = self.dim_sys * self.dim_env
        if self.u.shape != (d, d):
            raise ValueError(f"unitary has shape {self.u.shape}, expected ({d}, {d})")
        if self.gamma0.shape != (d, d):
            raise ValueError(f"gamma0 has shape {self.gamma0.shape}, expected ({d}, {d})")
        validate_unitary(self.u)
        validate_density_matrix(self.gamma0)


def heisenberg_hamiltonian() -> np.ndarray:
    """Two-qubit exchange coupling sum_j sigma_j (x) sigma_j."""
    h = np.zeros((4, 4), dtype=complex)
    for sigma in PAULIS:
        h += tensor(sigma, sigma)
    return h


def correlated_pair_state(bloch_a, c23: float) -> np.ndarray:
    """Two-qubit state (1/4)(1x1 + sum_j a_j sigma_j x 1 + c23 sigma_2 x sigma_3).

    Separable but classically correlated with the environment for c23 != 0.
    Raises if the chosen coefficients do not give a valid state.
    """
    bloch_a = np.asarray(bloch_a, dtype=float)
    eye = np.eye(2, dtype=complex)
    gamma = tensor(eye, eye).astype(complex)
    for a_j, sigma in zip(bloch_a, PAULIS):
        gamma += a_j * tensor(sigma, eye)
    gamma += c23 * tensor(PAULIS[1], PAULIS[2])
    gamma = 0.25 * gamma
    validate_density_matrix(gamma)
    return gamma


def unitary_from_hamiltonian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) computed through the Hermitian eigendecomposition of h."""
    w, v = eig_hermitian(h, tol=1e-10)
    u = (v * np.exp(-1j * w * t)) @ dagger(v)
    validate_unitary(u, tol=1e-12)
    return u


def run_process(spec: ProcessSpec, prepared: PreparedState) -> np.ndarray:
    """Output state: evolve the prepared joint under spec.u and trace out the environment."""
    d = spec.dim_sys * spec.dim_env
    joint = np.asarray(prepared.joint, dtype=complex)
    if joint.shape != (d, d):
        raise ValueError(f"prepared joint has shape {joint.shape}, expected ({d}, {d})")
    evolved = spec.u @ joint @ dagger(spec.u)
    out = partial_trace_env(evolved, spec.dim_sys, spec.dim_env)
    if hermiticity_residual(out) > 1e-12:
        raise ValueError("process output lost hermiticity")
    return 0.5 * (out + dagger(out))


def dynamical_map_fixed_env(u: np.ndarray, tau: np.ndarray) -> LinearProcessMap:
    """Linear map rho -> Tr_env[U (rho x tau) U'] in process-map storage.

    Materialized by feeding the matrix-unit basis through the dynamics.
    """
    u = np.asarray(u, dtype=complex)
    tau = np.asarray(tau, dtype=complex)
    dim_env = tau.shape[0]
    if u.shape[0] % dim_env:
        raise ValueError("unitary dimension is not a multiple of the environment dimension")
    dim_sys = u.shape[0] // dim_env
    lam4 = np.zeros((dim_sys, dim_sys, dim_sys, dim_sys), dtype=complex)
    for rp in range(dim_sys):
        for sp in range(dim_sys):
            unit = np.zeros((dim_sys, dim_sys), dtype=complex)
            unit[rp, sp] = 1.0
            evolved = u @ tensor(unit, tau) @ dagger(u)
            out = partial_trace_env(evolved, dim_sys, dim_env)
            lam4[:, rp, :, sp] = out
    mat = lam4.reshape(dim_sys * dim_sys, dim_sys * dim_sys)
    return LinearProcessMap(dim=dim_sys, mat=mat)
