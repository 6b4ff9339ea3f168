"""Velocity-independent potentials phi(x) with force F = -phi' and its slope F'."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly

KINDS = ("free", "harmonic", "quartic", "polynomial", "tabulated")


@dataclass(frozen=True)
class PotentialSpec:
    """A one-dimensional potential.

    ``kind`` selects the closed form:

    * ``free``: phi = 0
    * ``harmonic``: phi = omega**2 x**2 / 2, so F = -omega**2 x
    * ``quartic``: phi = a4 x**4 / 4
    * ``polynomial``: phi = sum(coeffs[k] x**k)
    * ``tabulated``: explicit samples of phi, F and F' on an increasing x grid,
      linearly interpolated
    """

    kind: str = "harmonic"
    omega: float = 1.0
    a4: float = 1.0
    coeffs: tuple = ()
    samples: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}; valid kinds: {', '.join(KINDS)}")
        if self.kind == "polynomial" and len(self.coeffs) == 0:
            raise ValueError("polynomial potential needs at least one coefficient")
        if self.kind == "tabulated":
            for key in ("x", "phi", "force"):
                if key not in self.samples:
                    raise ValueError(f"tabulated potential is missing samples[{key!r}]")
            xs = np.asarray(self.samples["x"], dtype=float)
            if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
                raise ValueError("tabulated samples['x'] must be strictly increasing with >= 2 points")
            for key in ("phi", "force", "dforce"):
                if key in self.samples and len(self.samples[key]) != xs.size:
                    raise ValueError(f"tabulated samples[{key!r}] length differs from samples['x']")

    @property
    def has_dforce(self) -> bool:
        return self.kind != "tabulated" or "dforce" in self.samples

    @cached_property
    def _coefs(self):
        """Power-series coefficients of (phi, F, F')."""
        if self.kind == "free":
            p = Polynomial([0.0])
        elif self.kind == "harmonic":
            p = Polynomial([0.0, 0.0, 0.5 * self.omega**2])
        elif self.kind == "quartic":
            p = Polynomial([0.0, 0.0, 0.0, 0.0, 0.25 * self.a4])
        else:
            p = Polynomial(np.asarray(self.coeffs, dtype=float))
        return p.coef, -p.deriv(1).coef, -p.deriv(2).coef

    def _table(self, key, x):
        s = self.samples
        return np.interp(x, np.asarray(s["x"], float), np.asarray(s[key], float))

    def phi(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            return self._table("phi", x)
        return npoly.polyval(x, self._coefs[0])

    def force(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            return self._table("force", x)
        return npoly.polyval(x, self._coefs[1])

    def dforce(self, x):
        """Slope F'(x) = -phi''(x)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "tabulated":
            if "dforce" not in self.samples:
                raise ValueError("tabulated potential has no dforce samples; F' is required here")
            return self._table("dforce", x)
        return npoly.polyval(x, self._coefs[2])

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "harmonic":
            d["omega"] = self.omega
        elif self.kind == "quartic":
            d["a4"] = self.a4
        elif self.kind == "polynomial":
            d["coeffs"] = list(self.coeffs)
        elif self.kind == "tabulated":
            d["samples"] = {k: list(map(float, v)) for k, v in self.samples.items()}
        return d


def free() -> PotentialSpec:
    return PotentialSpec("free")


def harmonic(omega=1.0) -> PotentialSpec:
    return PotentialSpec("harmonic", omega=omega)


def quartic(a4=1.0) -> PotentialSpec:
    return PotentialSpec("quartic", a4=a4)


def polynomial(coeffs) -> PotentialSpec:
    return PotentialSpec("polynomial", coeffs=tuple(float(c) for c in coeffs))


def tabulated(x, phi, force, dforce=None) -> PotentialSpec:
    samples = {"x": list(x), "phi": list(phi), "force": list(force)}
    if dforce is not None:
        samples["dforce"] = list(dforce)
    return PotentialSpec("tabulated", samples=samples)
