"""Linear vs bi-linear process verification from a 12-projection experiment.

Twelve inputs grouped into six orthonormal pairs over-determine both map
families: a linear process must satisfy eight sum rules among the outputs,
and a bi-linear process must satisfy three consistency equations among the
probability-weighted outputs.  The classifier tests linearity first, because
a linear process with unit outcome probabilities trivially satisfies the
bi-linear equations as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bilinear_tomo import SQRT2, state_of_label
from .records import MissingRecord, record_map

TWELVE_STATE_LABELS = (
    "1+", "1-", "2+", "2-", "3+", "3-",
    "4+", "4-", "5+", "5-", "6+", "6-",
)
PAIR_DIRECTIONS = ("1", "2", "3", "4", "5", "6")

LINEAR_RULE_NAMES = ("Q2-", "Q3-", "Q4+", "Q4-", "Q5+", "Q5-", "Q6+", "Q6-")
BILINEAR_RULE_NAMES = ("GQ4-", "GQ5-", "GQ6-")

DEFAULT_TOL_LINEAR = 1e-6
DEFAULT_TOL_BILINEAR = 1e-6
GAMMA_WARN_THRESHOLD = 0.02


def twelve_state_inputs() -> list[np.ndarray]:
    """The nine protocol projectors plus the three opposite diagonal projectors."""
    return [state_of_label(label) for label in TWELVE_STATE_LABELS]


def _require(records) -> dict[str, np.ndarray]:
    recs = record_map(records)
    missing = [label for label in TWELVE_STATE_LABELS if label not in recs]
    if missing:
        raise MissingRecord(f"verification needs all 12 labels; missing: {', '.join(missing)}")
    return recs


def linear_sum_rule_residuals(records) -> dict[str, float]:
    """Max-abs entry of (LHS - RHS) for each of the eight output sum rules."""
    recs = _require(records)
    q = {label: np.asarray(recs[label].output, dtype=complex) for label in TWELVE_STATE_LABELS}
    base = q["1+"] + q["1-"]
    combos = {
        "Q2-": (q["2-"], base - q["2+"]),
        "Q3-": (q["3-"], base - q["3+"]),
        "Q4+": (q["4+"], 0.5 * base + (q["2+"] - q["1-"]) / SQRT2),
        "Q4-": (q["4-"], 0.5 * base - (q["2+"] - q["1-"]) / SQRT2),
        "Q5+": (q["5+"], 0.5 * base + (q["3+"] - q["1-"]) / SQRT2),
        "Q5-": (q["5-"], 0.5 * base - (q["3+"] - q["1-"]) / SQRT2),
        "Q6+": (q["6+"], 0.5 * base + (q["2+"] + q["3+"] - base) / SQRT2),
        "Q6-": (q["6-"], 0.5 * base - (q["2+"] + q["3+"] - base) / SQRT2),
    }
    return {name: float(np.max(np.abs(lhs - rhs))) for name, (lhs, rhs) in combos.items()}


def bilinear_consistency_residuals(records) -> dict[str, float]:
    """Max-abs entry of (LHS - RHS) for the three bi-linear consistency equations.

    Each equation predicts the probability-weighted output of an opposite
    diagonal projector from the nine protocol records.
    """
    recs = _require(records)
    gq = {
        label: recs[label].gamma * np.asarray(recs[label].output, dtype=complex)
        for label in TWELVE_STATE_LABELS
    }
    residuals = {}
    for name, (j, k), minus_label, plus_label in (
        ("GQ4-", (1, 2), "4-", "4+"),
        ("GQ5-", (1, 3), "5-", "5+"),
        ("GQ6-", (2, 3), "6-", "6+"),
    ):
        rhs = (
            gq[f"{j}-"] - gq[f"{j}+"] + gq[f"{k}-"] - gq[f"{k}+"]
        ) / SQRT2 + gq[plus_label]
        residuals[name] = float(np.max(np.abs(gq[minus_label] - rhs)))
    return residuals


def gamma_completeness(records) -> dict[str, float]:
    """Deviation gamma(+) + gamma(-) - 1 for each of the six measurement directions."""
    recs = _require(records)
    return {
        d: float(recs[f"{d}+"].gamma + recs[f"{d}-"].gamma - 1.0) for d in PAIR_DIRECTIONS
    }


@dataclass(frozen=True)
class VerificationReport:
    linear_residuals: dict[str, float]
    bilinear_residuals: dict[str, float]
    gamma_completeness: dict[str, float]
    verdict: str
    tol_linear: float
    tol_bilinear: float
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "linear_residuals": {k: float(v) for k, v in self.linear_residuals.items()},
            "bilinear_residuals": {k: float(v) for k, v in self.bilinear_residuals.items()},
            "gamma_completeness": {k: float(v) for k, v in self.gamma_completeness.items()},
            "thresholds": {"linear": float(self.tol_linear), "bilinear": float(self.tol_bilinear)},
            "warnings": list(self.warnings),
        }


def classify(
    records,
    tol_linear: float = DEFAULT_TOL_LINEAR,
    tol_bilinear: float = DEFAULT_TOL_BILINEAR,
) -> VerificationReport:
    """Classify a 12-record experiment as Linear, Bilinear, or Neither.

    Gamma-completeness deviations are reported (and warned about above
    GAMMA_WARN_THRESHOLD) but gate only data quality, never the verdict.
    """
    linear = linear_sum_rule_residuals(records)
    bilinear = bilinear_consistency_residuals(records)
    gammas = gamma_completeness(records)

    if all(v <= tol_linear for v in linear.values()):
        verdict = "Linear"
    elif all(v <= tol_bilinear for v in bilinear.values()):
        verdict = "Bilinear"
    else:
        verdict = "Neither"

    warnings = tuple(
        f"gamma completeness violated in direction {d}: deviation {dev:+.4f}"
        for d, dev in gammas.items()
        if abs(dev) > GAMMA_WARN_THRESHOLD
    )
    return VerificationReport(
        linear_residuals=linear,
        bilinear_residuals=bilinear,
        gamma_completeness=gammas,
        verdict=verdict,
        tol_linear=tol_linear,
        tol_bilinear=tol_bilinear,
        warnings=warnings,
    )
