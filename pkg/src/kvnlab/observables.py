"""Densities, expectation values and the Newton-equation residual."""

import csv
from dataclasses import dataclass

import numpy as np

from .operators import apply
from .phase_space import Rep, WaveFunction, inner_product

IMAG_TOL = 1e-10
SERIES_COLUMNS = ("t", "norm", "mean_x", "mean_v", "mean_force_over_m", "newton_residual")


def density(psi: WaveFunction) -> np.ndarray:
    if psi.rep != Rep.XV:
        raise ValueError(f"density is defined in rep XV, got {psi.rep.value}")
    return psi.data.real**2 + psi.data.imag**2


def expectation(op, psi: WaveFunction) -> float:
    """Real part of <psi, op psi>; raises if the imaginary part exceeds 1e-10."""
    val = inner_product(psi, apply(op, psi))
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"expectation of {op} has imaginary part {val.imag:.3e}: "
                         "non-Hermitian operator or representation mismatch")
    return val.real


def moments(psi: WaveFunction, force_over_m: np.ndarray):
    """(norm, <x>, <v>, <F/m>) from the density, all normalized by the current norm."""
    g = psi.grid
    rho = density(psi)
    cell = g.dx * g.dv
    rx = rho.sum(axis=1)
    rv = rho.sum(axis=0)
    n2 = rx.sum()
    return (float(np.sqrt(n2 * cell)),
            float(rx @ g.x / n2),
            float(rv @ g.v / n2),
            float(rx @ force_over_m / n2))


def central_residual(t, mean_v, mean_force_over_m) -> np.ndarray:
    """Centred d<v>/dt minus <F/m>; NaN at the two end samples."""
    t = np.asarray(t, float)
    res = np.full(t.shape, np.nan)
    if t.size >= 3:
        dvdt = (mean_v[2:] - mean_v[:-2]) / (t[2:] - t[:-2])
        res[1:-1] = dvdt - mean_force_over_m[1:-1]
    return res


@dataclass(frozen=True)
class ObservableSeries:
    t: np.ndarray
    norm: np.ndarray
    mean_x: np.ndarray
    mean_v: np.ndarray
    mean_force_over_m: np.ndarray
    newton_residual: np.ndarray

    @classmethod
    def from_samples(cls, t, norm, mean_x, mean_v, mean_force_over_m):
        arrs = [np.asarray(a, dtype=float) for a in (t, norm, mean_x, mean_v, mean_force_over_m)]
        if len({a.shape for a in arrs}) != 1:
            raise ValueError("observable arrays must share one length")
        return cls(*arrs, central_residual(arrs[0], arrs[3], arrs[4]))

    def __len__(self):
        return self.t.size

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SERIES_COLUMNS)
            for row in zip(*(getattr(self, c) for c in SERIES_COLUMNS)):
                w.writerow([format_float(v) for v in row])

    @classmethod
    def from_csv(cls, path):
        a = np.genfromtxt(path, delimiter=",", names=True)
        return cls(*(np.atleast_1d(a[c]).astype(float) for c in SERIES_COLUMNS))


def format_float(v) -> str:
    """17 significant digits, round-trip exact."""
    return format(float(v), ".17g")


def newton_residual(series: ObservableSeries) -> float:
    """Max |centred d<v>/dt - <F/m>| over interior samples (uniform spacing required)."""
    if len(series) < 3:
        raise ValueError("newton_residual needs at least 3 samples")
    dt = np.diff(series.t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * max(1.0, abs(dt[0])):
        raise ValueError("newton_residual needs a uniform recording interval")
    return float(np.nanmax(np.abs(series.newton_residual)))
