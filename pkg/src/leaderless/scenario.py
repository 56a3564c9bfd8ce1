"""Scenario documents: one JSON file describing a complete run.

Layout::

    {
      "name": "star-uniform",
      "description": "...",
      "resource": {"r": 1.0, "Rmax": 1.0},
      "agents": [{"alpha": 0.434, "R_threshold": 0.2262, "s": 0.5}, ...],
      "synthesize": {"scale": 0.89},
      "weights": [[0, 0.25, ...], ...],
      "initial": {"x": 0.1, "y": [0, 0, 0, 0, 0]},
      "integrator": {"method": "rk4", "step": 0.001, "t_end": 50},
      "output": {"dir": "out/star-uniform"},
      "expect_verify": true
    }

Either every agent carries ``s`` or the top-level ``synthesize`` directive
is present, never both. ``initial`` is given in the nondimensional frame,
or as the string ``"equilibrium"`` to start at the computed steady state.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .aggregate import EquilibriumReport
from .errors import ParseError, ValidationError
from .model import (
    AgentParams,
    DimensionalModel,
    NondimModel,
    ResourceParams,
    nondimensionalize,
    validate_weights,
)
from .simulation import METHODS, IntegratorConfig
from .synthesis import SynthesisResult, synthesize_orientations

_TOP_KEYS = {
    "name", "description", "resource", "agents", "synthesize", "weights",
    "initial", "integrator", "output", "expect_verify",
}
_INTEGRATOR_KEYS = {"method", "step", "t_end", "record_every", "abs_tol", "rel_tol"}


@dataclass(frozen=True)
class AgentSpec:
    alpha: float
    R_threshold: float
    s: float | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    resource: ResourceParams
    agents: tuple[AgentSpec, ...]
    weights: tuple[tuple[float, ...], ...]
    initial: tuple[float, tuple[float, ...]] | str
    integrator: IntegratorConfig = IntegratorConfig()
    synthesize_scale: float | None = None
    output_dir: str | None = None
    description: str = ""
    expect_verify: bool = True
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def n(self) -> int:
        return len(self.agents)

    def synthesis(self) -> SynthesisResult | None:
        if self.synthesize_scale is None:
            return None
        if "synthesis" not in self._cache:
            self._cache["synthesis"] = synthesize_orientations(
                self.weights,
                [a.alpha for a in self.agents],
                [a.R_threshold for a in self.agents],
                self.resource,
                self.synthesize_scale,
            )
        return self._cache["synthesis"]

    def dimensional_model(self) -> DimensionalModel:
        synth = self.synthesis()
        if synth is not None:
            return synth.model
        agents = tuple(AgentParams(a.alpha, a.s, a.R_threshold) for a in self.agents)
        return DimensionalModel(self.resource, agents, validate_weights(self.weights))

    def nondim_model(self) -> NondimModel:
        if "nondim" not in self._cache:
            self._cache["nondim"] = nondimensionalize(self.dimensional_model())
        return self._cache["nondim"]

    def initial_state(self, report: EquilibriumReport | None = None) -> np.ndarray:
        if self.initial == "equilibrium":
            if report is None or report.y_star is None:
                raise ValidationError(
                    [("initial", "equilibrium start needs a leaderless model satisfying the assumptions")]
                )
            return np.concatenate([[report.x0], report.y_star])
        x, y = self.initial
        return np.array([x, *y], dtype=float)

    def with_overrides(self, step=None, t_end=None, tol=None, output_dir=None) -> "Scenario":
        changes = {}
        if step is not None:
            changes["step"] = step
        if t_end is not None:
            changes["t_end"] = t_end
        if tol is not None:
            changes["abs_tol"] = tol
            changes["rel_tol"] = tol
        new = replace(self, _cache={})
        if changes:
            new = replace(new, integrator=replace(self.integrator, **changes))
        if output_dir is not None:
            new = replace(new, output_dir=str(output_dir))
        return new

    def to_dict(self) -> dict:
        agents = []
        for a in self.agents:
            d = {"alpha": a.alpha, "R_threshold": a.R_threshold}
            if a.s is not None:
                d["s"] = a.s
            agents.append(d)
        out = {
            "name": self.name,
            "description": self.description,
            "resource": {"r": self.resource.r, "Rmax": self.resource.Rmax},
            "agents": agents,
            "weights": [list(row) for row in self.weights],
            "initial": (
                self.initial if isinstance(self.initial, str)
                else {"x": self.initial[0], "y": list(self.initial[1])}
            ),
            "integrator": {
                "method": self.integrator.method,
                "step": self.integrator.step,
                "t_end": self.integrator.t_end,
                "record_every": self.integrator.record_every,
                "abs_tol": self.integrator.abs_tol,
                "rel_tol": self.integrator.rel_tol,
            },
            "expect_verify": self.expect_verify,
        }
        if self.synthesize_scale is not None:
            out["synthesize"] = {"scale": self.synthesize_scale}
        if self.output_dir is not None:
            out["output"] = {"dir": self.output_dir}
        return out

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _number(value, path, problems, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append((path, f"expected a number, got {value!r}"))
        return None
    value = float(value)
    if not np.isfinite(value):
        problems.append((path, "must be finite"))
        return None
    if positive and value <= 0:
        problems.append((path, f"must be > 0, got {value!r}"))
    return value


def scenario_from_dict(doc: dict) -> Scenario:
    """Validate a parsed document; every problem found is reported together."""
    if not isinstance(doc, dict):
        raise ValidationError([("", "scenario must be a JSON object")])
    problems: list[tuple[str, str]] = []
    for key in sorted(set(doc) - _TOP_KEYS):
        problems.append((key, "unknown field"))

    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        problems.append(("name", "must be a string"))

    res = doc.get("resource", {})
    r = Rmax = 1.0
    if not isinstance(res, dict):
        problems.append(("resource", "must be an object"))
    else:
        r = _number(res.get("r", 1.0), "resource.r", problems, positive=True)
        Rmax = _number(res.get("Rmax", 1.0), "resource.Rmax", problems, positive=True)

    synth = doc.get("synthesize")
    scale = None
    if synth is not None:
        if not isinstance(synth, dict):
            problems.append(("synthesize", "must be an object"))
        else:
            scale = _number(synth.get("scale", 1.0), "synthesize.scale", problems, positive=True)

    agents = []
    raw_agents = doc.get("agents")
    if not isinstance(raw_agents, list) or not raw_agents:
        problems.append(("agents", "must be a non-empty list"))
        raw_agents = []
    for i, a in enumerate(raw_agents):
        p = f"agents[{i}]"
        if not isinstance(a, dict):
            problems.append((p, "must be an object"))
            continue
        for key in sorted(set(a) - {"alpha", "R_threshold", "s"}):
            problems.append((f"{p}.{key}", "unknown field"))
        alpha = _number(a.get("alpha"), f"{p}.alpha", problems, positive=True)
        R = _number(a.get("R_threshold"), f"{p}.R_threshold", problems)
        s = None
        if "s" in a:
            if synth is not None:
                problems.append((f"{p}.s", "explicit s conflicts with the synthesize directive"))
            s = _number(a["s"], f"{p}.s", problems, positive=True)
        elif synth is None:
            problems.append((f"{p}.s", "missing (give s or a synthesize directive)"))
        agents.append(AgentSpec(alpha, R, s))

    weights = ()
    raw_w = doc.get("weights")
    if raw_w is None:
        problems.append(("weights", "missing"))
    else:
        try:
            weights = tuple(tuple(float(v) for v in row) for row in raw_w)
            validate_weights(weights)
        except ValidationError as exc:
            problems.extend(exc.problems)
        except (TypeError, ValueError):
            problems.append(("weights", "must be a dense row-major array of numbers"))
        else:
            if len(weights) != len(raw_agents):
                problems.append(("weights", f"{len(weights)} rows for {len(raw_agents)} agents"))

    raw_init = doc.get("initial", {"x": 0.1, "y": [0.0] * len(raw_agents)})
    initial = "equilibrium"
    if raw_init == "equilibrium":
        pass
    elif isinstance(raw_init, dict):
        x = _number(raw_init.get("x"), "initial.x", problems, positive=True)
        y = raw_init.get("y")
        if not isinstance(y, list) or len(y) != len(raw_agents):
            problems.append(("initial.y", f"must list {len(raw_agents)} efforts"))
            y = []
        ys = tuple(_number(v, f"initial.y[{i}]", problems) for i, v in enumerate(y))
        initial = (x, ys)
    else:
        problems.append(("initial", 'must be an object {"x", "y"} or "equilibrium"'))

    raw_int = doc.get("integrator", {})
    kwargs = {}
    if not isinstance(raw_int, dict):
        problems.append(("integrator", "must be an object"))
    else:
        for key in sorted(set(raw_int) - _INTEGRATOR_KEYS):
            problems.append((f"integrator.{key}", "unknown field"))
        if "method" in raw_int:
            if raw_int["method"] not in METHODS:
                problems.append(("integrator.method", f"must be one of {METHODS}"))
            kwargs["method"] = raw_int["method"]
        for key in ("step", "t_end", "abs_tol", "rel_tol"):
            if key in raw_int:
                kwargs[key] = _number(raw_int[key], f"integrator.{key}", problems, positive=True)
        if "record_every" in raw_int:
            v = raw_int["record_every"]
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                problems.append(("integrator.record_every", "must be a positive integer"))
            kwargs["record_every"] = v

    out = doc.get("output", {})
    out_dir = out.get("dir") if isinstance(out, dict) else None
    expect = doc.get("expect_verify", True)
    if not isinstance(expect, bool):
        problems.append(("expect_verify", "must be a boolean"))

    if problems:
        raise ValidationError(problems)
    return Scenario(
        name=name,
        resource=ResourceParams(r, Rmax),
        agents=tuple(agents),
        weights=weights,
        initial=initial,
        integrator=IntegratorConfig(**kwargs),
        synthesize_scale=scale,
        output_dir=out_dir,
        description=doc.get("description", ""),
        expect_verify=expect,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError([(str(path), "file not found")]) from None
    except json.JSONDecodeError as exc:
        raise ParseError([(str(path), f"invalid JSON: {exc}")]) from None
    return scenario_from_dict(doc)


def preset_names() -> list[str]:
    files = resources.files("leaderless") / "presets"
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> Scenario:
    f = resources.files("leaderless") / "presets" / f"{name}.json"
    if not f.is_file():
        raise ParseError([("preset", f"unknown preset {name!r}; available: {', '.join(preset_names())}")])
    try:
        doc = json.loads(f.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError([(name, f"invalid JSON: {exc}")]) from None
    return scenario_from_dict(doc)


def resolve(spec: str) -> Scenario:
    """Load ``spec`` as a file path, falling back to a bundled preset name."""
    if Path(spec).is_file():
        return load_scenario(spec)
    if spec in preset_names():
        return load_preset(spec)
    return load_scenario(spec)
