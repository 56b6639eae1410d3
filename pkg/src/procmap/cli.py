"""Command-line surface: simulate, tomo, verify, and demo.

stdout carries JSON only; human diagnostics go to stderr (ANSI-colored on a
terminal unless PROCMAP_NO_COLOR is set).  Exit codes: 0 success, 2 malformed
config, 3 zero-probability preparation, 4 missing record labels, 5 input
states that do not form a tomography frame.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import jsonio
from .bilinear_tomo import (
    NINE_STATE_LABELS,
    MElementTable,
    build_M_from_dynamics,
    element_table_from_map,
    solve_M_elements,
)
from .linear_tomo import NotAFrame, apply_linear_map, map_diagnostics, reconstruct_linear_map
from .prep import ZeroProbabilityOutcome
from .qstate import bloch_vector
from .records import Dataset, MissingRecord
from .scenarios import (
    DEMO_NAMES,
    LINEAR4_LABELS,
    MIXED_LABEL,
    ScenarioError,
    demo_scenario_config,
    parse_scenario,
    simulate_scenario,
)
from .verify import TWELVE_STATE_LABELS, classify

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_ZERO_PROBABILITY = 3
EXIT_MISSING_LABELS = 4
EXIT_NOT_A_FRAME = 5


def _use_color() -> bool:
    return sys.stderr.isatty() and not os.environ.get("PROCMAP_NO_COLOR")


def _diag(message: str) -> None:
    if _use_color():
        sys.stderr.write(f"\x1b[31merror:\x1b[0m {message}\n")
    else:
        sys.stderr.write(f"error: {message}\n")


def _write_output(payload: dict, out: str | None) -> None:
    text = jsonio.dumps(payload)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read JSON from {path}: {exc}") from exc


def _load_scenario(path: str):
    obj = _load_json(path)
    scenario = parse_scenario(obj, name=Path(path).stem)
    return scenario


def _load_dataset(path: str) -> Dataset:
    obj = _load_json(path)
    try:
        return Dataset.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"malformed dataset {path}: {exc}") from exc


def _embedded_scenario(dataset: Dataset):
    text = dataset.metadata.get("scenario_json", "")
    if not text.strip():
        return None
    try:
        return parse_scenario(json.loads(text), name=dataset.metadata.get("scenario", "embedded"))
    except (ScenarioError, json.JSONDecodeError):
        return None


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args.scenario)
    if args.shots is not None or args.seed is not None:
        raw = dict(scenario.raw)
        if args.shots is not None:
            raw["shots"] = args.shots
        if args.seed is not None:
            raw["seed"] = args.seed
        scenario = parse_scenario(raw, name=scenario.name)
    dataset = simulate_scenario(scenario)
    _write_output(dataset.to_json(), args.out)
    return EXIT_OK


def _tomo_linear(dataset: Dataset) -> dict:
    records = dataset.subset(LINEAR4_LABELS)
    lam = reconstruct_linear_map(records)
    diag = map_diagnostics(lam)
    return {"mode": "linear", "map": lam.to_json(), "diagnostics": diag.to_json()}


def _tomo_bilinear(dataset: Dataset) -> dict:
    records = dataset.subset(NINE_STATE_LABELS)
    mixed = None
    if MIXED_LABEL in dataset.labels():
        mixed = dataset.get(MIXED_LABEL)
    table = solve_M_elements(records, mixed_record=mixed)
    payload = {"mode": "bilinear", "elements": table.to_json()}
    scenario = _embedded_scenario(dataset)
    if scenario is not None:
        oracle = element_table_from_map(build_M_from_dynamics(scenario.spec()))
        deviation = 0.0
        for got, want in zip(table.diag_plus + table.linear, oracle.diag_plus + oracle.linear):
            deviation = max(deviation, float(np.max(np.abs(got - want))))
        for key in table.cross:
            deviation = max(deviation, float(np.max(np.abs(table.cross[key] - oracle.cross[key]))))
        if table.unit_unit is not None:
            deviation = max(deviation, float(np.max(np.abs(table.unit_unit - oracle.unit_unit))))
        payload["oracle_comparison"] = {"max_element_deviation": deviation}
    return payload


def cmd_tomo(args) -> int:
    dataset = _load_dataset(args.dataset)
    payload = _tomo_linear(dataset) if args.mode == "linear" else _tomo_bilinear(dataset)
    _write_output(payload, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    dataset = _load_dataset(args.dataset)
    report = classify(
        dataset.subset(TWELVE_STATE_LABELS),
        tol_linear=args.tol_linear,
        tol_bilinear=args.tol_bilinear,
    )
    _write_output(report.to_json(), args.out)
    return EXIT_OK


def _demo_counterexample(dataset: Dataset, lam) -> dict:
    """Linear prediction vs measured output for the held-out 2- input."""
    rec = dataset.get("2-")
    predicted = apply_linear_map(lam, rec.input)
    predicted_bloch = bloch_vector(predicted)
    actual_bloch = bloch_vector(rec.output)
    return {
        "label": "2-",
        "linear_prediction_bloch": [float(v) for v in predicted_bloch],
        "actual_bloch": [float(v) for v in actual_bloch],
        "max_bloch_deviation": float(np.max(np.abs(predicted_bloch - actual_bloch))),
    }


def cmd_demo(args) -> int:
    config = demo_scenario_config(args.name)
    out_dir = Path(args.out or args.name)
    out_dir.mkdir(parents=True, exist_ok=True)

    scenario = parse_scenario(config, name=args.name)
    dataset = simulate_scenario(scenario)
    (out_dir / "scenario.json").write_text(jsonio.dumps(config))
    (out_dir / "dataset.json").write_text(jsonio.dumps(dataset.to_json()))

    lam = reconstruct_linear_map(dataset.subset(LINEAR4_LABELS))
    diag = map_diagnostics(lam)
    (out_dir / "linear_map.json").write_text(
        jsonio.dumps({"map": lam.to_json(), "diagnostics": diag.to_json()})
    )

    mixed = dataset.get(MIXED_LABEL) if MIXED_LABEL in dataset.labels() else None
    table = solve_M_elements(dataset.subset(NINE_STATE_LABELS), mixed_record=mixed)
    (out_dir / "m_elements.json").write_text(jsonio.dumps(table.to_json()))

    report = classify(dataset.subset(TWELVE_STATE_LABELS))
    (out_dir / "report.json").write_text(jsonio.dumps(report.to_json()))

    analysis = {
        "demo": args.name,
        "verdict": report.verdict,
        "min_eigenvalue": diag.to_json()["min_eigenvalue"],
        "notes": _demo_notes(args.name),
    }
    if args.name == "measurement-correlated":
        analysis["counterexample"] = _demo_counterexample(dataset, lam)
    (out_dir / "analysis.json").write_text(jsonio.dumps(analysis))

    summary = {
        "demo": args.name,
        "out_dir": str(out_dir),
        "verdict": report.verdict,
        "min_eigenvalue": diag.to_json()["min_eigenvalue"],
        "files": [
            "scenario.json",
            "dataset.json",
            "linear_map.json",
            "m_elements.json",
            "report.json",
            "analysis.json",
        ],
    }
    sys.stdout.write(jsonio.dumps(summary))
    return EXIT_OK


def _demo_notes(name: str) -> str:
    if name == "stochastic-heisenberg":
        return (
            "Pin-then-rotate preparation with an exchange-coupled environment; "
            "the process is exactly linear."
        )
    if name == "measurement-correlated":
        return (
            "Preparation by von Neumann measurement on a correlated pair; the linear "
            "fit mispredicts held-out inputs while the bi-linear description is exact."
        )
    if name == "imperfect-pin":
        return (
            "Rotation-only preparation on a 70/30 mixture of a pinned product state "
            "and an entangled remainder; the assumed-linear fit has negative eigenvalues. "
            "All parameters other than the 70% population weight are repository constants."
        )
    return ""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="procmap",
        description="Simulate, reconstruct, and verify open-system process maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate a scenario into a tomography dataset")
    p_sim.add_argument("scenario", help="scenario JSON file")
    p_sim.add_argument("--out", help="write dataset JSON here instead of stdout")
    p_sim.add_argument("--shots", type=int, help="finite-shot mode: shots per measured quantity")
    p_sim.add_argument("--seed", type=int, help="seed for the finite-shot generator")
    p_sim.set_defaults(func=cmd_simulate)

    p_tomo = sub.add_parser("tomo", help="reconstruct a process map from a dataset")
    p_tomo.add_argument("dataset", help="dataset JSON file")
    p_tomo.add_argument("--mode", choices=("linear", "bilinear"), required=True)
    p_tomo.add_argument("--out", help="write result JSON here instead of stdout")
    p_tomo.set_defaults(func=cmd_tomo)

    p_ver = sub.add_parser("verify", help="run the 12-state linearity verification protocol")
    p_ver.add_argument("dataset", help="dataset JSON file")
    p_ver.add_argument("--tol-linear", type=float, default=1e-6, dest="tol_linear")
    p_ver.add_argument("--tol-bilinear", type=float, default=1e-6, dest="tol_bilinear")
    p_ver.add_argument("--out", help="write report JSON here instead of stdout")
    p_ver.set_defaults(func=cmd_verify)

    p_demo = sub.add_parser("demo", help="write a self-contained demo analysis bundle")
    p_demo.add_argument("name", help=f"one of: {', '.join(DEMO_NAMES)}")
    p_demo.add_argument("--out", help="bundle directory (default: ./<name>)")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        _diag(str(exc))
        return EXIT_BAD_CONFIG
    except ZeroProbabilityOutcome as exc:
        _diag(str(exc))
        return EXIT_ZERO_PROBABILITY
    except MissingRecord as exc:
        _diag(str(exc))
        return EXIT_MISSING_LABELS
    except NotAFrame as exc:
        _diag(str(exc))
        return EXIT_NOT_A_FRAME


if __name__ == "__main__":
    sys.exit(main())
