"""The work behind each CLI subcommand, callable as plain functions."""
from __future__ import annotations

import json
from pathlib import Path

from .aggregate import aggregate_constants, equilibrium, to_aggregate
from .errors import DegenerateSum, ValidationError
from .model import influence, is_leaderless, leaderless_residual
from .scenario import Scenario
from .simulation import (
    aggregate_consistency,
    lyapunov_monotonicity,
    simulate_aggregate,
    simulate_full,
)

CONSISTENCY_TOL = 1e-6
LYAPUNOV_TOL = 1e-9
SYNTH_LEADERLESS_TOL = 1e-10


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _lyap(traj, constants):
    try:
        rep = lyapunov_monotonicity(traj, constants, LYAPUNOV_TOL)
    except DegenerateSum:
        return None
    return {"max_increase": rep.max_increase, "violations": len(rep.violations), "ok": rep.ok}


def cmd_simulate(scenario: Scenario, out_dir=None) -> dict:
    """Integrate the full and reduced systems; write CSVs and ``summary.json``.

    Nothing is written when ``out_dir`` is None. The returned summary also
    carries the two trajectories under ``_trajectories``.
    """
    model = scenario.nondim_model()
    report = equilibrium(model)
    constants = aggregate_constants(model)
    init = scenario.initial_state(report)
    cfg = scenario.integrator
    full = simulate_full(model, init, cfg)
    agg = simulate_aggregate(constants, to_aggregate(init), cfg)
    final = full.final
    summary = {
        "scenario": scenario.name,
        "integrator": {k: v for k, v in full.metadata.items() if k not in ("columns", "kind")},
        "equilibrium": report.to_dict(),
        "final_state": {"t": float(full.times[-1]), "x": float(final[0]), "y": [float(v) for v in final[1:]]},
        "final_aggregate": {"z": float(agg.final[0]), "u": float(agg.final[1])},
        "aggregate_consistency": aggregate_consistency(full, agg),
        "lyapunov": {"aggregate": _lyap(agg, constants), "full": _lyap(full, constants)},
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        full.to_csv(out / "full.csv")
        agg.to_csv(out / "aggregate.csv")
        _write_json(out / "summary.json", summary)
    summary["_trajectories"] = (full, agg)
    return summary


def cmd_synthesize(scenario: Scenario, out_dir=None) -> dict:
    synth = scenario.synthesis()
    if synth is None:
        raise ValidationError([("synthesize", "scenario has no synthesize directive")])
    model = scenario.nondim_model()
    inf = influence(model)
    doc = {
        "scenario": scenario.name,
        "scale": scenario.synthesize_scale,
        "orientations": synth.orientations.tolist(),
        "products": synth.products.tolist(),
        "kernel_residual": synth.residual,
        "leaderless_residual": leaderless_residual(model),
        "leaderless": is_leaderless(model, SYNTH_LEADERLESS_TOL),
        "roles": list(inf.roles),
    }
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        _write_json(Path(out_dir) / "synthesis.json", doc)
    return doc


def cmd_analyze(scenario: Scenario, out_dir=None) -> dict:
    model = scenario.nondim_model()
    doc = {"scenario": scenario.name, **equilibrium(model).to_dict()}
    doc["net_influence"] = influence(model).net_influence.tolist()
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        _write_json(Path(out_dir) / "analysis.json", doc)
    return doc


def cmd_verify(scenario: Scenario, out_dir=None, consistency_tol: float = CONSISTENCY_TOL) -> dict:
    """Simulate, then check the aggregate reduction and Lyapunov decrease.

    Failed checks are reported in the result (``passed`` false), not raised.
    """
    summary = cmd_simulate(scenario, out_dir)
    summary.pop("_trajectories")
    cons = summary["aggregate_consistency"]
    lyap = summary["lyapunov"]
    eq = summary["equilibrium"]
    checks = {
        "assumptions": eq["assumptions_ok"],
        "aggregate_consistency": max(cons.values()) < consistency_tol,
        "lyapunov_aggregate": bool(lyap["aggregate"] and lyap["aggregate"]["ok"]),
        "lyapunov_full": bool(lyap["full"] and lyap["full"]["ok"]),
    }
    passed = all(checks.values())
    return {
        "scenario": scenario.name,
        "passed": passed,
        "expected": scenario.expect_verify,
        "checks": checks,
        "details": {
            "aggregate_consistency": cons,
            "lyapunov": lyap,
            "final_state": summary["final_state"],
            "x0": eq["x0"],
        },
    }


def strip_private(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if not k.startswith("_")}

