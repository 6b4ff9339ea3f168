"""Hamiltonian and Schwinger actions on discretized paths, and their first variations.

Deformations shift a path by x -> x + eps*eta, v -> v + eps*deta/dt and leave
the multipliers (lambda_x, lambda_v) untouched.  Windows eta vanish together
with their first derivative at both ends.

Schwinger action on eigenvalue paths (full integrand):

    W_S = int lambda_x (dx/dt - v) + lambda_v (dv/dt - F(x)/m) dt

With fixed multipliers its first variation along eta is
int eta (lambda_v'' - (F'/m) lambda_v) dt, which vanishes when lambda_v solves
the Jacobi equation along the trajectory.  Varying lambda_v instead
("multiplier" mode) gives int eta (dv/dt - F/m) dt, which vanishes on Newtonian
paths.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from .characteristics import ClassicalPath, ExtendedPath, _rk4, classical_trajectory, extended_trajectory
from .potentials import PotentialSpec

Path = Union[ClassicalPath, ExtendedPath]

DEFAULT_EPS = (1e-3, -1e-3, 1e-4, -1e-4)


def time_derivative(y, h) -> np.ndarray:
    """Fourth-order finite-difference derivative of uniformly sampled y (>= 5 samples)."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5:
        raise ValueError("need at least 5 samples for the derivative stencil")
    d = np.empty(n)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / 12.0
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / 12.0
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / 12.0
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / 12.0
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / 12.0
    return d / h


def kinematic_error(path: Path) -> float:
    """max |dx/dt - v| with dx/dt from the sampled positions."""
    return float(np.max(np.abs(time_derivative(path.x, path.h) - path.v)))


def hamilton_action(path: Path, potential: PotentialSpec, m, kinematic_tol=1e-6) -> float:
    """Trapezoidal integral of m v^2 / 2 - phi(x).

    Rejects paths whose v is not the time derivative of x (``kinematic_tol``,
    scaled by 1 + max|v|; pass None to skip the check).
    """
    if kinematic_tol is not None:
        err = kinematic_error(path)
        if err > kinematic_tol * (1.0 + np.max(np.abs(path.v))):
            raise ValueError(f"kinematically inconsistent path: max|dx/dt - v| = {err:.3e}")
    lag = 0.5 * m * path.v**2 - potential.phi(path.x)
    return float(trapezoid(lag, path.t))


def euler_lagrange_residual(path: Path, potential: PotentialSpec, m) -> float:
    """max over interior nodes of |m dv/dt - F(x)|."""
    if path.t.size < 5:
        raise ValueError("euler_lagrange_residual needs at least 5 samples")
    res = m * time_derivative(path.v, path.h) - potential.force(path.x)
    return float(np.max(np.abs(res[1:-1])))


def schwinger_integrand(epath: ExtendedPath, potential: PotentialSpec, m, mode="full") -> np.ndarray:
    h = epath.h
    accel_defect = time_derivative(epath.v, h) - potential.force(epath.x) / m
    if mode == "reduced":
        return accel_defect * epath.lambda_v
    if mode != "full":
        raise ValueError(f"unknown schwinger mode {mode!r} (full or reduced)")
    return epath.lambda_x * (time_derivative(epath.x, h) - epath.v) + epath.lambda_v * accel_defect


def schwinger_action(epath: ExtendedPath, potential: PotentialSpec, m, mode="full") -> float:
    """Trapezoidal integral of the Schwinger integrand on an eigenvalue path.

    ``mode="reduced"`` drops the lambda_x (dx/dt - v) term, which is only
    equivalent on paths with dx/dt = v.
    """
    return float(trapezoid(schwinger_integrand(epath, potential, m, mode), epath.t))


# Variation windows

def _window(s):
    """sin^4(pi s) and its s-derivative: zero value and slope at s = 0, 1."""
    sn, cs = np.sin(np.pi * s), np.cos(np.pi * s)
    return sn**4, 4 * np.pi * sn**3 * cs


def _legendre(j, u):
    c = np.zeros(j + 1)
    c[j] = 1.0
    leg = np.polynomial.Legendre(c)
    return leg(u), leg.deriv()(u)


@dataclass(frozen=True)
class VariationSpec:
    """Sampled deformation windows eta (rows) and their time derivatives."""

    t: np.ndarray
    eta: np.ndarray
    eta_dot: np.ndarray
    eps: tuple = DEFAULT_EPS
    seed: int = 0

    def __post_init__(self):
        eta = np.atleast_2d(np.asarray(self.eta, float))
        eta_dot = np.atleast_2d(np.asarray(self.eta_dot, float))
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eta_dot", eta_dot)
        if eta.shape != eta_dot.shape or eta.shape[1] != len(self.t):
            raise ValueError("eta, eta_dot and t must agree in length")
        scale = max(1.0, float(np.max(np.abs(eta))), float(np.max(np.abs(eta_dot))))
        ends = np.abs(np.concatenate([eta[:, [0, -1]], eta_dot[:, [0, -1]]], axis=1))
        if np.max(ends) > 1e-12 * scale:
            raise ValueError("variation windows must vanish with their derivative at both endpoints")
        _eps_magnitudes(self.eps)

    def __len__(self):
        return self.eta.shape[0]


def _eps_magnitudes(eps) -> list:
    eps = [float(e) for e in eps]
    if not eps or any(e == 0.0 for e in eps):
        raise ValueError("eps list must be non-empty and exclude 0")
    pos = sorted(e for e in eps if e > 0)
    neg = sorted(-e for e in eps if e < 0)
    if pos != neg:
        raise ValueError(f"eps list must be symmetric about 0, got {eps}")
    return sorted(set(pos))


def variation_family(t, n_windows=20, seed=0, eps=DEFAULT_EPS, n_deterministic=4) -> VariationSpec:
    """Raised-cosine-squared windows times Legendre polynomials, then seeded random ones.

    The first ``n_deterministic`` windows are sin^4(pi s) P_j(2s - 1); the rest
    multiply sin^4(pi s) by random trigonometric polynomials of degree <= 5.
    Each window is scaled to max|eta| = 1.
    """
    t = np.asarray(t, float)
    T = t[-1] - t[0]
    s = (t - t[0]) / T
    w, dw = _window(s)
    rng = np.random.default_rng(seed)
    etas, dots = [], []
    for i in range(n_windows):
        if i < n_deterministic:
            p, dp = _legendre(i, 2 * s - 1)
            dp = 2 * dp
        else:
            j = np.arange(1, 6)[:, None]
            a = rng.normal(size=(5, 1))
            b = rng.normal(size=(5, 1))
            c0 = rng.normal()
            arg = j * np.pi * s[None, :]
            p = c0 + np.sum(a * np.cos(arg) + b * np.sin(arg), axis=0)
            dp = np.sum(j * np.pi * (-a * np.sin(arg) + b * np.cos(arg)), axis=0)
        eta = w * p
        eta_dot = (dw * p + w * dp) / T
        c = np.max(np.abs(eta))
        etas.append(eta / c)
        dots.append(eta_dot / c)
    eta = np.array(etas)
    eta_dot = np.array(dots)
    # sin^4 leaves ~1e-16 residue at s = 1
    eta[:, [0, -1]] = 0.0
    eta_dot[:, [0, -1]] = 0.0
    return VariationSpec(t, eta, eta_dot, tuple(eps), seed)


def vary_path(path: Path, spec: VariationSpec, eps, window=0) -> Path:
    """x -> x + eps*eta, v -> v + eps*eta_dot; multipliers are copied unchanged."""
    if spec.eta.shape[1] != path.t.size:
        raise ValueError("variation window length does not match the path")
    x = path.x + eps * spec.eta[window]
    v = path.v + eps * spec.eta_dot[window]
    if isinstance(path, ExtendedPath):
        return path.replace(x=x, v=v)
    return ClassicalPath(path.t, x, v)


def vary_multiplier(epath: ExtendedPath, spec: VariationSpec, eps, window=0) -> ExtendedPath:
    """lambda_v -> lambda_v + eps*eta with (x, v) fixed."""
    if spec.eta.shape[1] != epath.t.size:
        raise ValueError("variation window length does not match the path")
    return epath.replace(lambda_v=epath.lambda_v + eps * spec.eta[window])


@dataclass
class ActionReport:
    action: str
    mode: str
    W: float
    dW_deps: list
    classification: str
    tol_stationary: float
    eps: list
    scenario_hash: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def max_abs_dW(self) -> float:
        return float(np.max(np.abs(self.dW_deps)))

    @property
    def stationary(self) -> bool:
        return self.classification == "stationary"

    def to_dict(self) -> dict:
        d = {
            "action": self.action,
            "mode": self.mode,
            "W": self.W,
            "dW_deps": [float(x) for x in self.dW_deps],
            "max_abs_dW_deps": self.max_abs_dW,
            "classification": self.classification,
            "tolerances": {"tol_stationary": self.tol_stationary, "eps": list(self.eps)},
            "scenario_hash": self.scenario_hash,
        }
        if self.extra:
            d["extra"] = self.extra
        return d


def path_scale(path: Path) -> float:
    s = float(np.max(np.abs(path.x)) + np.max(np.abs(path.v)))
    if isinstance(path, ExtendedPath):
        s += float(np.max(np.abs(path.lambda_x)) + np.max(np.abs(path.lambda_v)))
    return s


def tol_stationary(W, path: Path) -> float:
    return 1e-6 * (1.0 + abs(W) + path_scale(path))


def _derivative(values_at, mags):
    """Central differences per |eps|, Richardson-combined over the two smallest."""
    ds = [(values_at(e) - values_at(-e)) / (2 * e) for e in mags]
    if len(ds) == 1:
        return ds[0]
    ea, eb = mags[1], mags[0]  # ea > eb
    da, db = ds[1], ds[0]
    return (ea**2 * db - eb**2 * da) / (ea**2 - eb**2)


def first_variation(action: str, path: Path, spec: VariationSpec, potential: PotentialSpec, m,
                    mode="path", scenario_hash="") -> ActionReport:
    """Numerical dW/deps for each window in ``spec``.

    ``action`` is ``"hamilton"`` or ``"schwinger"``; ``mode`` is ``"path"`` for
    the (x, v) deformation or ``"multiplier"`` for lambda_v -> lambda_v + eps*eta
    (Schwinger only).
    """
    mags = _eps_magnitudes(spec.eps)
    if action == "hamilton":
        if mode != "path":
            raise ValueError("the Hamiltonian action has no multipliers to vary")

        def W(p):
            return hamilton_action(p, potential, m, kinematic_tol=None)
    elif action == "schwinger":
        if not isinstance(path, ExtendedPath):
            raise ValueError("the Schwinger action needs an ExtendedPath")

        def W(p):
            return schwinger_action(p, potential, m)
    else:
        raise ValueError(f"unknown action {action!r} (hamilton or schwinger)")
    if mode == "path":
        deform = vary_path
    elif mode == "multiplier":
        deform = vary_multiplier
    else:
        raise ValueError(f"unknown variation mode {mode!r} (path or multiplier)")

    w0 = W(path)
    dws = [_derivative(lambda e: W(deform(path, spec, e, k)), mags) for k in range(len(spec))]
    tol = tol_stationary(w0, path)
    cls = "stationary" if np.max(np.abs(dws)) < tol else "non-stationary"
    return ActionReport(action, mode, w0, [float(d) for d in dws], cls, tol,
                        [float(e) for e in spec.eps], scenario_hash)


def hamilton_variation_oracle(path: Path, spec: VariationSpec, potential: PotentialSpec, m) -> np.ndarray:
    """Integration-by-parts form: dW_H/deps = -int eta (m dv/dt - F(x)) dt."""
    res = m * time_derivative(path.v, path.h) - potential.force(path.x)
    return np.array([-trapezoid(eta * res, path.t) for eta in spec.eta])


def schwinger_variation_oracle(epath: ExtendedPath, spec: VariationSpec, potential: PotentialSpec,
                               m) -> np.ndarray:
    """dW_S/deps = int eta (lambda_v'' - (F'(x)/m) lambda_v) dt for path deformations."""
    h = epath.h
    jac = time_derivative(time_derivative(epath.lambda_v, h), h) - potential.dforce(epath.x) / m * epath.lambda_v
    return np.array([trapezoid(eta * jac, epath.t) for eta in spec.eta])


def biased_trajectory(x0, v0, potential: PotentialSpec, m, h, n, beta) -> ClassicalPath:
    """RK4 solution of dx/dt = v, dv/dt = F(x)/m + beta (an off-shell path)."""
    f = potential.force

    def rhs(y):
        return np.array([y[1], f(y[0]) / m + beta])

    y = _rk4(rhs, np.array([x0, v0], float), h, n)
    return ClassicalPath(h * np.arange(n + 1), y[:, 0].copy(), y[:, 1].copy())


def straight_line(x_start, x_end, T, h) -> ClassicalPath:
    n = int(round(T / h))
    t = h * np.arange(n + 1)
    vel = (x_end - x_start) / (n * h)
    return ClassicalPath(t, x_start + vel * t, np.full(n + 1, vel))


# Composite certificate

@dataclass(frozen=True)
class ActionScenario:
    potential: PotentialSpec
    m: float = 1.0
    x0: float = 1.0
    v0: float = 0.0
    lambda_x0: float = 0.0
    lambda_v0: float = 1.0
    T: float = 2.0
    h: float = 1e-3
    n_windows: int = 20
    seed: int = 0
    eps: tuple = DEFAULT_EPS
    betas: Sequence[float] = (0.01, 0.1)
    lambda_perturbation: float = 0.01

    @property
    def n(self) -> int:
        return int(round(self.T / self.h))

    def to_dict(self) -> dict:
        return {
            "potential": self.potential.to_dict(), "m": self.m, "x0": self.x0, "v0": self.v0,
            "lambda_x0": self.lambda_x0, "lambda_v0": self.lambda_v0, "T": self.T, "h": self.h,
            "n_windows": self.n_windows, "seed": self.seed, "eps": list(self.eps),
            "betas": list(self.betas), "lambda_perturbation": self.lambda_perturbation,
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def perturb_multiplier(epath: ExtendedPath, rel) -> ExtendedPath:
    """lambda_v * (1 + rel * s), s = (t - t1)/T: a ramp that breaks the Jacobi equation.

    A constant rescaling would not do, since the Jacobi equation is linear.
    """
    s = (epath.t - epath.t[0]) / (epath.t[-1] - epath.t[0])
    return epath.replace(lambda_v=epath.lambda_v * (1.0 + rel * s))


def stationarity_certificate(sc: ActionScenario) -> dict:
    """On-shell stationarity of both actions and off-shell detection.

    Off-shell paths carry an acceleration bias beta with the on-shell
    multipliers attached.  Schwinger off-shell detection is reported per
    deformation mode; with a linear force the path-mode variation does not
    depend on (x, v) at all, so a constant bias is only visible to the
    multiplier mode there.
    """
    pot, m, h, n = sc.potential, sc.m, sc.h, sc.n
    key = sc.hash()
    on_h = classical_trajectory(sc.x0, sc.v0, pot, m, h, n)
    on_s = extended_trajectory(sc.x0, sc.v0, sc.lambda_x0, sc.lambda_v0, pot, m, h, n)
    spec = variation_family(on_s.t, sc.n_windows, sc.seed, sc.eps)
    degenerate = sc.lambda_x0 == 0.0 and sc.lambda_v0 == 0.0

    ham_on = first_variation("hamilton", on_h, spec, pot, m, scenario_hash=key)
    sch_on = first_variation("schwinger", on_s, spec, pot, m, "path", key)
    sch_on_mult = first_variation("schwinger", on_s, spec, pot, m, "multiplier", key)
    sch_pert = first_variation("schwinger", perturb_multiplier(on_s, sc.lambda_perturbation),
                               spec, pot, m, "path", key)

    off = []
    for beta in sc.betas:
        b = biased_trajectory(sc.x0, sc.v0, pot, m, h, n, beta)
        bext = on_s.replace(x=b.x, v=b.v)
        off.append({
            "beta": float(beta),
            "hamilton": first_variation("hamilton", b, spec, pot, m, scenario_hash=key).to_dict(),
            "schwinger_path": first_variation("schwinger", bext, spec, pot, m, "path", key).to_dict(),
            "schwinger_multiplier": first_variation("schwinger", bext, spec, pot, m, "multiplier",
                                                    key).to_dict(),
        })

    def grows(kind):
        vals = [o[kind]["max_abs_dW_deps"] for o in off]
        return all(b > a for a, b in zip(vals, vals[1:]))

    def off_nonstat(kind):
        return all(o[kind]["classification"] == "non-stationary" for o in off)

    sch_off_any = all(o["schwinger_path"]["classification"] == "non-stationary"
                      or o["schwinger_multiplier"]["classification"] == "non-stationary" for o in off)
    sch_grows = grows("schwinger_path") or grows("schwinger_multiplier")
    W_S_on = schwinger_action(on_s, pot, m)
    # W_S is linear in a directly imposed acceleration defect, with slope int lambda_v dt
    int_lv = float(trapezoid(on_s.lambda_v, on_s.t))
    accel = [{"beta": o["beta"], "W_S_over_beta": o["schwinger_path"]["W"] / o["beta"],
              "int_lambda_v_dt": int_lv} for o in off]
    checks = {
        "hamilton_on_shell_stationary": ham_on.stationary,
        "schwinger_on_shell_zero": abs(W_S_on) < 1e-8,
        "schwinger_on_shell_stationary": sch_on.stationary and sch_on_mult.stationary,
        "schwinger_perturbed_lambda_non_stationary": not sch_pert.stationary,
        "hamilton_off_shell_non_stationary": off_nonstat("hamilton") and grows("hamilton"),
        "schwinger_off_shell_non_stationary": sch_off_any and sch_grows,
    }
    return {
        "scenario": sc.to_dict(),
        "scenario_hash": key,
        "degenerate_multiplier": degenerate,
        "schwinger_on_shell_W": W_S_on,
        "euler_lagrange_residual_on_shell": euler_lagrange_residual(on_h, pot, m),
        "on_shell": {
            "hamilton": ham_on.to_dict(),
            "schwinger_path": sch_on.to_dict(),
            "schwinger_multiplier": sch_on_mult.to_dict(),
            "schwinger_path_perturbed_lambda": sch_pert.to_dict(),
        },
        "off_shell": off,
        "acceleration_sensitivity": accel,
        "checks": checks,
        "passed": (not degenerate) and all(checks.values()),
    }
