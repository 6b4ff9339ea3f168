"""C-number dynamics behind the operator equations, plus dense Heisenberg checks.

The extended system follows from the Liouvillian L = v lx + (F(x)/m) lv:

    dx/dt  =  dL/dlx = v            dlx/dt = -dL/dx = -(F'(x)/m) lv
    dv/dt  =  dL/dlv = F(x)/m       dlv/dt = -dL/dv = -lx

(x, v) is Newtonian and independent of the multipliers; (lx, lv) obeys the
adjoint of the tangent dynamics along the trajectory.
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .observables import format_float
from .operators import LambdaV, LambdaX, Liouvillian, V, X, to_dense
from .phase_space import PhaseSpaceGrid, WaveFunction, gaussian_amplitude
from .potentials import PotentialSpec, free


def _write_csv(path, cols: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([format_float(v) for v in row])


@dataclass(frozen=True)
class ClassicalPath:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.t.size < 2:
            raise ValueError("a path needs at least 2 samples")
        if not (self.t.shape == self.x.shape == self.v.shape):
            raise ValueError("path arrays must share one length")

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    def to_csv(self, path):
        _write_csv(path, {"t": self.t, "x": self.x, "v": self.v})


@dataclass(frozen=True)
class ExtendedPath:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    lambda_x: np.ndarray
    lambda_v: np.ndarray

    def __post_init__(self):
        if self.t.size < 2:
            raise ValueError("a path needs at least 2 samples")
        if len({a.shape for a in (self.t, self.x, self.v, self.lambda_x, self.lambda_v)}) != 1:
            raise ValueError("path arrays must share one length")

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    def classical(self) -> ClassicalPath:
        return ClassicalPath(self.t, self.x, self.v)

    def replace(self, **kw) -> "ExtendedPath":
        d = dict(t=self.t, x=self.x, v=self.v, lambda_x=self.lambda_x, lambda_v=self.lambda_v)
        d.update(kw)
        return ExtendedPath(**d)

    def to_csv(self, path):
        _write_csv(path, {"t": self.t, "x": self.x, "v": self.v,
                          "lambda_x": self.lambda_x, "lambda_v": self.lambda_v})


def _check_step(h, n, m):
    if not h > 0:
        raise ValueError(f"step h must be positive, got {h}")
    if n < 1:
        raise ValueError("need at least one step")
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")


def classical_trajectory(x0, v0, potential: PotentialSpec, m, h, n) -> ClassicalPath:
    """Velocity Verlet, n steps of size h."""
    _check_step(h, n, m)
    x = np.empty(n + 1)
    v = np.empty(n + 1)
    x[0], v[0] = x0, v0
    a = potential.force(x0) / m
    for i in range(n):
        vh = v[i] + 0.5 * h * a
        x[i + 1] = x[i] + h * vh
        a = potential.force(x[i + 1]) / m
        v[i + 1] = vh + 0.5 * h * a
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
        raise FloatingPointError("non-finite values in classical trajectory")
    return ClassicalPath(h * np.arange(n + 1), x, v)


def _rk4(rhs, y0, h, n):
    y = np.empty((n + 1, len(y0)))
    y[0] = y0
    for i in range(n):
        yi = y[i]
        k1 = rhs(yi)
        k2 = rhs(yi + 0.5 * h * k1)
        k3 = rhs(yi + 0.5 * h * k2)
        k4 = rhs(yi + h * k3)
        y[i + 1] = yi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("non-finite values in RK4 integration")
    return y


def extended_trajectory(x0, v0, lx0, lv0, potential: PotentialSpec, m, h, n) -> ExtendedPath:
    """Classical Runge-Kutta integration of the (x, v, lambda_x, lambda_v) system."""
    _check_step(h, n, m)
    if not potential.has_dforce:
        raise ValueError("extended dynamics need F'(x); the tabulated potential has no dforce samples")
    f, df = potential.force, potential.dforce

    def rhs(y):
        x, v, lx, lv = y
        return np.array([v, f(x) / m, -df(x) / m * lv, -lx])

    y = _rk4(rhs, np.array([x0, v0, lx0, lv0], dtype=float), h, n)
    return ExtendedPath(h * np.arange(n + 1), *y.T.copy())


def tangent_trajectory(x0, v0, dx0, dv0, potential: PotentialSpec, m, h, n):
    """RK4 for (x, v) with a tangent vector (dx, dv) on the variational equation.

    Returns arrays (t, x, v, dx, dv).
    """
    _check_step(h, n, m)
    f, df = potential.force, potential.dforce

    def rhs(y):
        x, v, dx, dv = y
        return np.array([v, f(x) / m, dv, df(x) / m * dx])

    y = _rk4(rhs, np.array([x0, v0, dx0, dv0], dtype=float), h, n)
    return (h * np.arange(n + 1), *y.T.copy())


def pairing(epath: ExtendedPath, dx, dv) -> np.ndarray:
    """lambda_x dx + lambda_v dv along a path; constant for tangent perturbations."""
    return epath.lambda_x * dx + epath.lambda_v * dv


# Several particles in d dimensions.  ``forces(r)`` returns the summed force on
# each particle, shape (P, d); ``force_jacobian(r)`` returns dF_i/dr_j with
# shape (P, d, P, d).

@dataclass(frozen=True)
class MultiExtendedPath:
    t: np.ndarray
    r: np.ndarray  # (T, P, d)
    v: np.ndarray
    lambda_r: np.ndarray
    lambda_v: np.ndarray
    masses: np.ndarray


def multi_extended_trajectory(r0, v0, lr0, lv0, masses, forces, force_jacobian, h, n) -> MultiExtendedPath:
    r0 = np.asarray(r0, float)
    shape = r0.shape
    masses = np.asarray(masses, float)
    if masses.shape != (shape[0],) or np.any(masses <= 0):
        raise ValueError("need one positive mass per particle")
    _check_step(h, n, 1.0)
    size = r0.size
    minv = (1.0 / masses)[:, None]

    def rhs(y):
        r, v, lr, lv = (y[i * size:(i + 1) * size].reshape(shape) for i in range(4))
        jac = force_jacobian(r)  # dF_i/dr_j
        # dlr_j/dt = -d/dr_j sum_i (F_i/m_i) . lv_i
        dlr = -np.einsum("iajb,ia->jb", jac, lv * minv)
        return np.concatenate([v.ravel(), (forces(r) * minv).ravel(), dlr.ravel(), (-lr).ravel()])

    y0 = np.concatenate([np.asarray(a, float).ravel() for a in (r0, v0, lr0, lv0)])
    y = _rk4(rhs, y0, h, n)
    parts = [y[:, i * size:(i + 1) * size].reshape((n + 1,) + shape) for i in range(4)]
    return MultiExtendedPath(h * np.arange(n + 1), *parts, masses)


# Dense Heisenberg-picture checks on tiny grids.

MAX_HEISENBERG = 16


def interior_test_states(grid: PhaseSpaceGrid, count=10):
    """Band-limited Gaussians near the grid centre, resolved by about 1.2 cells.

    On a 16-point axis these are the widest states whose tails and spectra
    both stay below ~1e-8; they deliberately bypass the packet guards.
    """
    xc = 0.5 * (grid.x_min + grid.x_max)
    vc = 0.5 * (grid.v_min + grid.v_max)
    widths = (1.15, 1.2, 1.25)
    offsets = (0.0, 0.25, -0.25, 0.5)
    out = []
    for i in range(count):
        ax = widths[i % 3]
        av = widths[(i + 1) % 3]
        ox = offsets[i % 4]
        ov = offsets[(i // 4) % 4]
        amp = gaussian_amplitude(grid, xc + ox * grid.dx, vc + ov * grid.dv, ax * grid.dx, av * grid.dv)
        out.append(WaveFunction(grid, amp).normalize())
    return out


def heisenberg_dense_check(grid: PhaseSpaceGrid, potential: PotentialSpec, m, t, n_steps=1,
                           delta=1e-3) -> dict:
    """Conjugate x, v, lambda_x, lambda_v by U(t) = expm(-i L t) and test them.

    U is built once per call from ``n_steps`` equal slices (scaling-and-squaring
    expm per slice).  Reports unitarity, the canonical commutators in
    expectation on interior states, all zero commutators as matrices, and the
    relative residual of d x(t)/dt = i[L, x(t)] from a fourth-order difference
    in t with spacing ``delta``.
    """
    if grid.nx > MAX_HEISENBERG or grid.nv > MAX_HEISENBERG:
        raise ValueError(f"grid too large for dense exponential: {grid.nx}x{grid.nv} > 16x16")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    L = to_dense(Liouvillian(potential, m), grid).matrix
    ops = {name: to_dense(op, grid).matrix for name, op in
           (("x", X), ("v", V), ("lambda_x", LambdaX), ("lambda_v", LambdaV))}
    step = scipy.linalg.expm(-1j * L * (t / n_steps))
    U = np.linalg.matrix_power(step, n_steps)
    Uh = U.conj().T
    eye = np.eye(grid.size)
    evolved = {k: Uh @ a @ U for k, a in ops.items()}

    states = interior_test_states(grid)
    cell = grid.dx * grid.dv

    def expect(a, phi):
        f = phi.data.ravel()
        return np.vdot(f, a @ f) * cell

    c_x = evolved["x"] @ evolved["lambda_x"] - evolved["lambda_x"] @ evolved["x"]
    c_v = evolved["v"] @ evolved["lambda_v"] - evolved["lambda_v"] @ evolved["v"]
    comm_err_x = max(abs(expect(c_x, p) - 1j) for p in states)
    comm_err_v = max(abs(expect(c_v, p) - 1j) for p in states)

    zero_pairs = [("x", "v"), ("x", "lambda_v"), ("v", "lambda_x"), ("lambda_x", "lambda_v")]
    zero_err = max(float(np.max(np.abs(evolved[a] @ evolved[b] - evolved[b] @ evolved[a])))
                   for a, b in zero_pairs)

    w1 = scipy.linalg.expm(-1j * L * delta)
    w2 = w1 @ w1

    def conj(w, a):
        return w.conj().T @ a @ w

    xt = evolved["x"]
    dxdt = (8 * (conj(w1, xt) - conj(w1.conj().T, xt))
            - (conj(w2, xt) - conj(w2.conj().T, xt))) / (12 * delta)
    rhs = 1j * (L @ xt - xt @ L)
    heis_res = float(np.max(np.abs(dxdt - rhs)) / np.max(np.abs(rhs))) if np.any(rhs) else float(
        np.max(np.abs(dxdt)))

    return {
        "grid": [grid.nx, grid.nv],
        "potential": potential.kind,
        "t": float(t),
        "unitarity_error": float(np.max(np.abs(Uh @ U - eye))),
        "commutator_x_lambda_x_error": float(comm_err_x),
        "commutator_v_lambda_v_error": float(comm_err_v),
        "zero_commutator_max": zero_err,
        "heisenberg_residual_rel": heis_res,
        "n_test_states": len(states),
        "_evolved": evolved,
    }


def free_heisenberg_closed_form(grid: PhaseSpaceGrid, t) -> dict:
    """Compare x(t) with x + t v for F = 0.

    Reports the largest matrix element of the difference between interior
    test states, and the raw matrix max-norm (dominated by the periodic wrap of
    the position coordinate, which the continuum identity does not see).
    """
    r = heisenberg_dense_check(grid, free(), 1.0, t)
    xt = r["_evolved"]["x"]
    target = to_dense(X, grid).matrix + t * to_dense(V, grid).matrix
    diff = xt - target
    states = interior_test_states(grid)
    basis = np.array([p.data.ravel() for p in states]).T * np.sqrt(grid.dx * grid.dv)
    proj = basis.conj().T @ diff @ basis
    return {
        "t": float(t),
        "max_interior_element": float(np.max(np.abs(proj))),
        "raw_matrix_max": float(np.max(np.abs(diff))),
    }


def strip_private(report: dict) -> dict:
    return {k: v for k, v in report.items() if not k.startswith("_")}


__all__ = [
    "ClassicalPath", "ExtendedPath", "MultiExtendedPath", "classical_trajectory",
    "extended_trajectory", "tangent_trajectory", "pairing", "multi_extended_trajectory",
    "heisenberg_dense_check", "free_heisenberg_closed_form", "interior_test_states",
    "strip_private",
]
