"""Shared test oracles, independent of the library code paths they check."""

from __future__ import annotations

import math

import numpy as np

from procmap.bilinear_tomo import state_of_label
from procmap.dynamics import ProcessSpec, correlated_pair_state, heisenberg_hamiltonian, unitary_from_hamiltonian
from procmap.prep import prepare_projective, prepare_stochastic, apply_pin_map
from procmap.records import TomographyRecord

T_DEMO = math.pi / 8.0
A2_DEMO = 0.5
C23_DEMO = 0.3


def rand_unitary(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_density(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = a @ a.conj().T
    return m / np.trace(m)


def rand_unit_bloch(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def brute_force_env_trace(joint: np.ndarray, dim_sys: int, dim_env: int) -> np.ndarray:
    """Partial trace over the environment by explicit index loops."""
    out = np.zeros((dim_sys, dim_sys), dtype=complex)
    for r in range(dim_sys):
        for s in range(dim_sys):
            for a in range(dim_env):
                out[r, s] += joint[r * dim_env + a, s * dim_env + a]
    return out


def brute_force_output(u: np.ndarray, joint: np.ndarray, dim_sys: int, dim_env: int) -> np.ndarray:
    """Direct evaluation of the process pipeline: conjugate then env-trace."""
    return brute_force_env_trace(u @ joint @ u.conj().T, dim_sys, dim_env)


def closed_form_lambda_s(t: float) -> np.ndarray:
    """Stochastic-preparation process map for the exchange coupling at time t."""
    c2 = math.cos(2.0 * t) ** 2
    return 0.5 * np.array(
        [
            [1 + c2, 0, 0, 2 * c2],
            [0, 1 - c2, 0, 0],
            [0, 0, 1 - c2, 0],
            [2 * c2, 0, 0, 1 + c2],
        ],
        dtype=complex,
    )


def closed_form_lambda_m(t: float, a2: float, c23: float) -> np.ndarray:
    """Measurement-preparation linear fit for the correlated pair state."""
    c = math.cos(2.0 * t)
    s = math.sin(2.0 * t)
    cp = c23 / (1.0 + a2)
    return 0.5 * np.array(
        [
            [1 + c * c, 1j * cp * s * s, 0, 2 * c * c - 1j * cp * c * s],
            [-1j * cp * s * s, 1 - c * c, 1j * cp * c * s, 0],
            [0, -1j * cp * c * s, 1 - c * c, -1j * cp * s * s],
            [2 * c * c + 1j * cp * c * s, 0, 1j * cp * s * s, 1 + c * c],
        ],
        dtype=complex,
    )


def va_spec(t: float = T_DEMO, a2: float = A2_DEMO, c23: float = C23_DEMO) -> ProcessSpec:
    """The measurement-preparation example process: exchange coupling on a correlated pair."""
    gamma0 = correlated_pair_state([0.0, a2, 0.0], c23)
    u = unitary_from_hamiltonian(heisenberg_hamiltonian(), t)
    return ProcessSpec(dim_sys=2, dim_env=2, u=u, gamma0=gamma0)


def measured_records(spec: ProcessSpec, labels) -> list[TomographyRecord]:
    """Projective-preparation records for the given protocol labels."""
    out = []
    for label in labels:
        p = state_of_label(label)
        prepared = prepare_projective(spec.gamma0, spec.dim_sys, spec.dim_env, p, label=label)
        q = brute_force_output(spec.u, prepared.joint, spec.dim_sys, spec.dim_env)
        out.append(TomographyRecord(label=label, input=p, output=q, gamma=prepared.gamma))
    return out


def stochastic_records(spec: ProcessSpec, labels) -> list[TomographyRecord]:
    """Pin-then-rotate records; the pinned environment is the gamma0 marginal."""
    from procmap.prep import rotation_between
    from procmap.qstate import ket_from_projector

    pin = np.array([[1, 0], [0, 0]], dtype=complex)
    pinned = apply_pin_map(spec.gamma0, spec.dim_sys, spec.dim_env, pin)
    out = []
    for label in labels:
        p = state_of_label(label)
        v = rotation_between(ket_from_projector(pin), ket_from_projector(p))
        prepared = prepare_stochastic(pinned, v, label=label)
        q = brute_force_output(spec.u, prepared.joint, spec.dim_sys, spec.dim_env)
        out.append(TomographyRecord(label=label, input=p, output=q, gamma=prepared.gamma))
    return out
