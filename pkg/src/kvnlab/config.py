"""JSON scenario configuration: parsing, defaults and validation."""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .action import ActionScenario, _eps_magnitudes
from .phase_space import PhaseSpaceGrid, check_packet, make_grid
from .potentials import KINDS, PotentialSpec
from .propagator import accuracy_guard

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Malformed or missing configuration (CLI exit code 2)."""

    def __init__(self, field_name, message):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class GuardError(ConfigError):
    """A numerical guard is violated (CLI exit code 3)."""


DEFAULTS = {
    "mass": 1.0,
    "potential": {"kind": "harmonic", "omega": 1.0},
    "grid": {"nx": 256, "nv": 256, "x_min": -8.0, "x_max": 8.0, "v_min": -8.0, "v_max": 8.0},
    "initial": {"x0": 1.0, "v0": 0.0, "sigma_x": 0.5, "sigma_v": 0.5,
                "lambda_x0": 0.0, "lambda_v0": 1.0},
    "dt": 0.005,
    "steps": 1257,
    "record_every": 1,
    "seed": 0,
    "action": {"T": 2.0, "h": 1e-3, "n_windows": 20, "eps": [1e-3, -1e-3, 1e-4, -1e-4],
               "betas": [0.01, 0.1], "lambda_perturbation": 0.01},
}

_POTENTIAL_KEYS = {
    "free": set(),
    "harmonic": {"omega"},
    "quartic": {"a4"},
    "polynomial": {"coeffs"},
    "tabulated": {"samples"},
}


@dataclass
class ScenarioConfig:
    mass: float
    potential: PotentialSpec
    grid: PhaseSpaceGrid
    x0: float
    v0: float
    sigma_x: float
    sigma_v: float
    lambda_x0: float
    lambda_v0: float
    dt: float
    steps: int
    record_every: int
    seed: int
    action: dict
    raw: dict = field(repr=False, default_factory=dict)

    def snapshot(self) -> dict:
        """The fully-defaulted config as plain JSON data."""
        return copy.deepcopy(self.raw)

    def hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def action_scenario(self):
        a = self.action
        return ActionScenario(
            potential=self.potential, m=self.mass, x0=self.x0, v0=self.v0,
            lambda_x0=self.lambda_x0, lambda_v0=self.lambda_v0, T=a["T"], h=a["h"],
            n_windows=a["n_windows"], seed=self.seed, eps=tuple(a["eps"]), betas=tuple(a["betas"]),
            lambda_perturbation=a["lambda_perturbation"],
        )


def _merge(defaults: dict, given: dict, prefix="") -> dict:
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        name = f"{prefix}{k}"
        if k not in defaults:
            raise ConfigError(name, f"unknown field (valid: {', '.join(sorted(defaults))})")
        if isinstance(defaults[k], dict) and k != "potential":
            if not isinstance(v, dict):
                raise ConfigError(name, "expected an object")
            out[k] = _merge(defaults[k], v, f"{name}.")
        else:
            out[k] = copy.deepcopy(v)
    return out


def _num(d, key, name, positive=False, integer=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(name, f"expected a number, got {v!r}")
    if integer:
        if int(v) != v:
            raise ConfigError(name, f"expected an integer, got {v!r}")
        v = int(v)
    else:
        v = float(v)
    if positive and not v > 0:
        raise ConfigError(name, f"must be > 0, got {v}")
    return v


def _potential(d: dict) -> PotentialSpec:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("potential", "expected an object with a 'kind' field")
    kind = d["kind"]
    if kind not in KINDS:
        raise ConfigError("potential.kind", f"unknown potential kind {kind!r}; valid kinds: {', '.join(KINDS)}")
    extra = set(d) - {"kind"} - _POTENTIAL_KEYS[kind]
    if extra:
        raise ConfigError(f"potential.{sorted(extra)[0]}", f"not a parameter of the {kind} potential")
    try:
        if kind == "harmonic":
            return PotentialSpec(kind, omega=float(d.get("omega", 1.0)))
        if kind == "quartic":
            return PotentialSpec(kind, a4=float(d.get("a4", 1.0)))
        if kind == "polynomial":
            return PotentialSpec(kind, coeffs=tuple(float(c) for c in d.get("coeffs", ())))
        if kind == "tabulated":
            return PotentialSpec(kind, samples=dict(d.get("samples", {})))
        return PotentialSpec(kind)
    except (TypeError, ValueError) as exc:
        raise ConfigError("potential", str(exc)) from exc


def _potential_defaults(d: dict) -> dict:
    kind = d.get("kind")
    out = dict(d)
    if kind == "harmonic":
        out.setdefault("omega", 1.0)
    elif kind == "quartic":
        out.setdefault("a4", 1.0)
    return out


def from_dict(given: dict) -> ScenarioConfig:
    if not isinstance(given, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    raw = _merge(DEFAULTS, given)
    raw["potential"] = _potential_defaults(raw["potential"])
    pot = _potential(raw["potential"])
    m = _num(raw, "mass", "mass", positive=True)
    g = raw["grid"]
    dims = [_num(g, k, f"grid.{k}", integer=k in ("nx", "nv"))
            for k in ("nx", "nv", "x_min", "x_max", "v_min", "v_max")]
    try:
        grid = make_grid(*dims)
    except ValueError as exc:
        raise ConfigError("grid", str(exc)) from exc
    ini = raw["initial"]
    vals = {k: _num(ini, k, f"initial.{k}") for k in ini}
    for k in ("sigma_x", "sigma_v"):
        if not vals[k] > 0:
            raise ConfigError(f"initial.{k}", "must be > 0")
    try:
        check_packet(grid, vals["x0"], vals["v0"], vals["sigma_x"], vals["sigma_v"])
    except ValueError as exc:
        msg = str(exc)
        name = next((k for k in ("sigma_x", "sigma_v", "x0", "v0") if msg.startswith(k)), "initial")
        raise GuardError(f"initial.{name}", msg) from exc
    dt = _num(raw, "dt", "dt", positive=True)
    steps = _num(raw, "steps", "steps", integer=True)
    if steps < 0:
        raise ConfigError("steps", "must be >= 0")
    record_every = _num(raw, "record_every", "record_every", positive=True, integer=True)
    seed = _num(raw, "seed", "seed", integer=True)
    a = raw["action"]
    for k in ("T", "h"):
        _num(a, k, f"action.{k}", positive=True)
    _num(a, "n_windows", "action.n_windows", positive=True, integer=True)
    if a["h"] * 5 > a["T"]:
        raise ConfigError("action.h", "need at least 5 samples on [0, T]")
    try:
        _eps_magnitudes(a["eps"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("action.eps", str(exc)) from exc

    limit = accuracy_guard(grid, pot, m)
    if dt > limit:
        log.warning("dt=%g is above the splitting accuracy guard %.3g (reduce dt or coarsen the grid); "
                    "spectral substeps stay exact and unitary", dt, limit)
    return ScenarioConfig(mass=m, potential=pot, grid=grid, dt=dt, steps=steps,
                          record_every=record_every, seed=seed, action=a, raw=raw, **vals)


def parse_config(path) -> ScenarioConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config", f"file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"malformed JSON in {p}: {exc}") from exc
    return from_dict(data)


def shipped_config(name: str) -> ScenarioConfig:
    """Load one of the bundled scenarios: harmonic, quartic or free."""
    text = resources.files("kvnlab").joinpath("configs", f"{name}.json").read_text()
    return from_dict(json.loads(text))
