"""Scenario configs, experiment simulation, and the shipped demo scenarios.

A scenario bundles the process (unitary + initial joint state), a preparation
method, and a protocol (which input labels to prepare).  Simulation walks the
protocol labels in order, prepares each input, runs the process, and collects
(input, output, gamma) records.  An optional finite-shot mode degrades the
exact probabilities and outputs to multinomial estimates from a seeded
generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .bilinear_tomo import NINE_STATE_LABELS, state_of_label
from .dynamics import (
    ProcessSpec,
    correlated_pair_state,
    heisenberg_hamiltonian,
    run_process,
    unitary_from_hamiltonian,
)
from .prep import (
    GeneralizedMeasurement,
    OutcomeMap,
    PreparedState,
    apply_pin_map,
    prepare_generalized,
    prepare_projective,
    prepare_stochastic,
    rotation_between,
)
from .qstate import SIGMA_1, SIGMA_3, bloch_vector, ket_from_projector, state_from_bloch, tensor
from .records import Dataset, TomographyRecord
from .verify import TWELVE_STATE_LABELS

LINEAR4_LABELS = ("1-", "1+", "2+", "3+")

PROTOCOL_LABELS = {
    "linear4": LINEAR4_LABELS,
    "bilinear9": NINE_STATE_LABELS,
    "verify12": TWELVE_STATE_LABELS,
}

PREPARATION_METHODS = ("stochastic", "measurement", "rotation_only", "generalized")

MIXED_LABEL = "mixed"


class ScenarioError(ValueError):
    """Malformed scenario configuration."""


@dataclass(frozen=True)
class Scenario:
    name: str
    dim_sys: int
    dim_env: int
    hamiltonian: np.ndarray
    t: float
    gamma0: np.ndarray
    protocol: str
    prep_method: str
    pin_target: np.ndarray | None = None
    env_tau: np.ndarray | None = None
    phi: np.ndarray | None = None
    measurement: GeneralizedMeasurement | None = None
    generalized_labels: tuple[str, ...] = ()
    mixed_bloch: np.ndarray | None = None
    shots: int | None = None
    seed: int | None = None
    raw: dict = field(default_factory=dict, compare=False)

    def spec(self) -> ProcessSpec:
        u = unitary_from_hamiltonian(self.hamiltonian, self.t)
        return ProcessSpec(dim_sys=self.dim_sys, dim_env=self.dim_env, u=u, gamma0=self.gamma0)


def parse_scenario(obj: dict, name: str = "scenario") -> Scenario:
    """Validate and expand a scenario JSON object; raises ScenarioError."""
    try:
        dim_sys = int(obj.get("dimA", 2))
        dim_env = int(obj.get("dimB", 2))
        if dim_sys <= 0 or dim_env <= 0:
            raise ScenarioError("dimA and dimB must be positive")

        ham_obj = obj["hamiltonian"]
        if ham_obj == "heisenberg":
            if (dim_sys, dim_env) != (2, 2):
                raise ScenarioError('the "heisenberg" keyword requires dimA = dimB = 2')
            hamiltonian = heisenberg_hamiltonian()
        else:
            hamiltonian = jsonio.matrix_from_json(ham_obj)
        t = float(obj.get("t", 0.0))

        g_obj = obj["gamma0"]
        if isinstance(g_obj, dict) and "bloch_a" in g_obj:
            gamma0 = correlated_pair_state(g_obj["bloch_a"], float(g_obj.get("c23", 0.0)))
        else:
            gamma0 = jsonio.matrix_from_json(g_obj)

        protocol = str(obj.get("protocol", "verify12"))
        if protocol not in PROTOCOL_LABELS:
            raise ScenarioError(f"unknown protocol {protocol!r}; expected one of {sorted(PROTOCOL_LABELS)}")

        prep_obj = obj.get("preparation", {"method": "stochastic"})
        method = str(prep_obj.get("method", "stochastic"))
        if method not in PREPARATION_METHODS:
            raise ScenarioError(f"unknown preparation method {method!r}")

        pin_target = None
        env_tau = None
        phi = None
        measurement = None
        generalized_labels: tuple[str, ...] = ()
        if method == "stochastic":
            if "pin_target" in prep_obj:
                pin_target = jsonio.matrix_from_json(prep_obj["pin_target"])
            if "env_tau" in prep_obj:
                env_tau = jsonio.matrix_from_json(prep_obj["env_tau"])
        elif method == "rotation_only":
            if "phi" in prep_obj:
                phi = jsonio.matrix_from_json(prep_obj["phi"])
        elif method == "generalized":
            measurement = GeneralizedMeasurement.from_json(prep_obj["measurement"])
            generalized_labels = tuple(str(x) for x in prep_obj["labels"])
            expected = PROTOCOL_LABELS[protocol]
            if sorted(generalized_labels) != sorted(expected):
                raise ScenarioError(
                    f"generalized preparation labels must cover the {protocol} labels"
                )
            if len(generalized_labels) != measurement.num_outcomes:
                raise ScenarioError("one label per measurement outcome is required")

        mixed_bloch = None
        if "mixed_bloch" in obj:
            mixed_bloch = np.asarray(obj["mixed_bloch"], dtype=float)
            if mixed_bloch.shape != (3,):
                raise ScenarioError("mixed_bloch must be a 3-vector")
            if float(np.dot(mixed_bloch, mixed_bloch)) >= 1.0:
                raise ScenarioError("mixed_bloch must have norm strictly below 1")
            if method != "measurement":
                raise ScenarioError("mixed_bloch requires the measurement preparation method")

        shots = obj.get("shots")
        shots = int(shots) if shots is not None else None
        if shots is not None and shots <= 0:
            raise ScenarioError("shots must be positive")
        seed = obj.get("seed")
        seed = int(seed) if seed is not None else None

        return Scenario(
            name=name,
            dim_sys=dim_sys,
            dim_env=dim_env,
            hamiltonian=hamiltonian,
            t=t,
            gamma0=gamma0,
            protocol=protocol,
            prep_method=method,
            pin_target=pin_target,
            env_tau=env_tau,
            phi=phi,
            measurement=measurement,
            generalized_labels=generalized_labels,
            mixed_bloch=mixed_bloch,
            shots=shots,
            seed=seed,
            raw=dict(obj),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc


def _mixed_preparation_measurement(target: np.ndarray) -> GeneralizedMeasurement:
    """Two-outcome generalized measurement whose first outcome pins to `target`.

    Kraus operators {X, sqrt(1 - X^2)} satisfy completeness; outcome 0 produces
    the joint (X x 1) gamma0 (X x 1) / gamma, exactly the bi-linear process
    equation evaluated at the mixed operator X.
    """
    x = np.asarray(target, dtype=complex)
    w, v = np.linalg.eigh(x)
    if w[0] < 0 or w[-1] > 1:
        raise ScenarioError("mixed preparation target must satisfy 0 <= X <= 1")
    rest = (v * np.sqrt(np.clip(1.0 - w**2, 0.0, None))) @ v.conj().T
    return GeneralizedMeasurement(
        outcomes=(
            OutcomeMap(weights=(1.0,), kraus=(x,)),
            OutcomeMap(weights=(1.0,), kraus=(rest,)),
        )
    )


def _prepare_for_label(sc: Scenario, label: str):
    target = state_of_label(label)
    if sc.prep_method == "stochastic":
        pin = sc.pin_target if sc.pin_target is not None else np.array([[1, 0], [0, 0]], dtype=complex)
        pinned = apply_pin_map(sc.gamma0, sc.dim_sys, sc.dim_env, pin, env_state=sc.env_tau)
        v = rotation_between(ket_from_projector(pin), ket_from_projector(target))
        return prepare_stochastic(pinned, v, label=label)
    if sc.prep_method == "measurement":
        return prepare_projective(sc.gamma0, sc.dim_sys, sc.dim_env, target, label=label)
    if sc.prep_method == "rotation_only":
        # Imperfect-pin preparation: the rotation is applied directly to
        # gamma0, so the true input is not the assumed projector.
        phi = sc.phi if sc.phi is not None else np.array([[1, 0], [0, 0]], dtype=complex)
        v = rotation_between(ket_from_projector(phi), ket_from_projector(target))
        big = tensor(v, np.eye(sc.dim_env))
        joint = big @ sc.gamma0 @ big.conj().T
        return PreparedState(joint=joint, gamma=1.0, label=label)
    if sc.prep_method == "generalized":
        outcome = sc.generalized_labels.index(label)
        return prepare_generalized(sc.gamma0, sc.dim_sys, sc.dim_env, sc.measurement, outcome, label=label)
    raise ScenarioError(f"unsupported preparation method {sc.prep_method!r}")


def _degrade_record(rng: np.random.Generator, rec: TomographyRecord, shots: int, gamma: float) -> TomographyRecord:
    """Replace the exact output with Pauli-axis multinomial estimates at `shots` shots."""
    b = bloch_vector(rec.output)
    est = np.zeros(3)
    for axis in range(3):
        p_up = min(max(0.5 * (1.0 + b[axis]), 0.0), 1.0)
        ups = rng.binomial(shots, p_up)
        est[axis] = 2.0 * ups / shots - 1.0
    return TomographyRecord(label=rec.label, input=rec.input, output=state_from_bloch(est), gamma=gamma)


def _degraded_gammas(rng: np.random.Generator, sc: Scenario, exact: dict[str, float], shots: int) -> dict[str, float]:
    """Multinomial estimates of the outcome probabilities, per measurement direction."""
    est = dict(exact)
    if sc.prep_method != "measurement":
        return est
    labels = set(exact)
    for d in "123456":
        plus, minus = f"{d}+", f"{d}-"
        if plus in labels and minus in labels:
            ups = rng.binomial(shots, min(max(exact[plus], 0.0), 1.0))
            est[plus] = ups / shots
            est[minus] = 1.0 - ups / shots
        elif plus in labels:
            ups = rng.binomial(shots, min(max(exact[plus], 0.0), 1.0))
            est[plus] = ups / shots
    return est


def simulate_scenario(sc: Scenario) -> Dataset:
    """Run the preparation + process pipeline for every protocol label."""
    spec = sc.spec()
    spec.validate()
    labels = list(PROTOCOL_LABELS[sc.protocol])
    prepared = [_prepare_for_label(sc, label) for label in labels]
    records = []
    for label, prep_state in zip(labels, prepared):
        q = run_process(spec, prep_state)
        records.append(
            TomographyRecord(label=label, input=state_of_label(label), output=q, gamma=prep_state.gamma)
        )

    if sc.mixed_bloch is not None:
        x = state_from_bloch(sc.mixed_bloch)
        meas = _mixed_preparation_measurement(x)
        prep_state = prepare_generalized(sc.gamma0, sc.dim_sys, sc.dim_env, meas, 0, label=MIXED_LABEL)
        q = run_process(spec, prep_state)
        records.append(TomographyRecord(label=MIXED_LABEL, input=x, output=q, gamma=prep_state.gamma))

    if sc.shots is not None:
        rng = np.random.default_rng(sc.seed if sc.seed is not None else 0)
        gammas = _degraded_gammas(rng, sc, {r.label: r.gamma for r in records}, sc.shots)
        records = [_degrade_record(rng, rec, sc.shots, gammas[rec.label]) for rec in records]

    metadata = {
        "scenario": sc.name,
        "protocol": sc.protocol,
        "preparation": sc.prep_method,
        "t": jsonio.format_float(sc.t),
        "shots": "exact" if sc.shots is None else str(sc.shots),
        "seed": "" if sc.seed is None else str(sc.seed),
        "scenario_json": jsonio.dumps(sc.raw, indent=0) if sc.raw else "",
    }
    return Dataset(records=tuple(records), metadata=metadata)


# ---------------------------------------------------------------------------
# Shipped demo scenarios
# ---------------------------------------------------------------------------

# Imperfect-pin demo constants.  The pin leaves a 70% population in the pure
# target; the remainder chi is a correlated (but separable) repository
# constant, and the coupling/time are chosen so the assumed-linear fit is
# clearly non-positive.
IMPERFECT_PIN_PURE_WEIGHT = 0.7
IMPERFECT_PIN_CHI_C23 = 0.9
IMPERFECT_PIN_T = 0.8


def _imperfect_pin_gamma0() -> np.ndarray:
    phi = np.array([[1, 0], [0, 0]], dtype=complex)
    tau = 0.5 * np.eye(2, dtype=complex)
    chi = correlated_pair_state([0.0, 0.0, 0.0], IMPERFECT_PIN_CHI_C23)
    return IMPERFECT_PIN_PURE_WEIGHT * tensor(phi, tau) + (1 - IMPERFECT_PIN_PURE_WEIGHT) * chi


def _imperfect_pin_hamiltonian() -> np.ndarray:
    return tensor(SIGMA_1, SIGMA_3)


DEMO_NAMES = ("stochastic-heisenberg", "measurement-correlated", "imperfect-pin")


def demo_scenario_config(name: str) -> dict:
    """Scenario JSON for a shipped demo; raises ScenarioError on unknown names."""
    t_demo = math.pi / 8.0
    if name == "stochastic-heisenberg":
        return {
            "dimA": 2,
            "dimB": 2,
            "hamiltonian": "heisenberg",
            "t": t_demo,
            "gamma0": {"bloch_a": [0.0, 0.5, 0.0], "c23": 0.3},
            "preparation": {"method": "stochastic"},
            "protocol": "verify12",
        }
    if name == "measurement-correlated":
        return {
            "dimA": 2,
            "dimB": 2,
            "hamiltonian": "heisenberg",
            "t": t_demo,
            "gamma0": {"bloch_a": [0.0, 0.5, 0.0], "c23": 0.3},
            "preparation": {"method": "measurement"},
            "protocol": "verify12",
            "mixed_bloch": [0.5, 0.0, 0.0],
        }
    if name == "imperfect-pin":
        return {
            "dimA": 2,
            "dimB": 2,
            "hamiltonian": jsonio.matrix_to_json(_imperfect_pin_hamiltonian()),
            "t": IMPERFECT_PIN_T,
            "gamma0": jsonio.matrix_to_json(_imperfect_pin_gamma0()),
            "preparation": {"method": "rotation_only"},
            "protocol": "verify12",
        }
    raise ScenarioError(f"unknown demo {name!r}; expected one of {', '.join(DEMO_NAMES)}")
