"""Periodic (x, v) phase-space grids, Koopman wavefunctions and their representations.

Data layout: ``data[ix, iv]`` (x-major).  In a transformed representation the
corresponding axis is indexed by the wavenumber axis ``grid.kx`` or
``grid.kv`` in discrete-transform (fftfreq) order.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.fft as sfft


class Rep(str, Enum):
    """Which pair of commuting operators is diagonal along (axis 0, axis 1)."""

    XV = "XV"
    XLv = "XLv"
    LxV = "LxV"
    LxLv = "LxLv"

    @property
    def x_is_lambda(self) -> bool:
        return self in (Rep.LxV, Rep.LxLv)

    @property
    def v_is_lambda(self) -> bool:
        return self in (Rep.XLv, Rep.LxLv)

    @classmethod
    def from_flags(cls, x_is_lambda: bool, v_is_lambda: bool) -> "Rep":
        return {
            (False, False): cls.XV,
            (False, True): cls.XLv,
            (True, False): cls.LxV,
            (True, True): cls.LxLv,
        }[(x_is_lambda, v_is_lambda)]


def _is_pow2(n) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 8 and (n & (n - 1)) == 0


def wavenumbers(n: int, d: float) -> np.ndarray:
    """Angular wavenumbers in fftfreq order with the Nyquist entry at +pi/d."""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=d)
    k[n // 2] = np.pi / d
    return k


@dataclass(frozen=True, eq=False)
class PhaseSpaceGrid:
    nx: int
    nv: int
    x_min: float
    x_max: float
    v_min: float
    v_max: float

    def __post_init__(self):
        for name in ("nx", "nv"):
            n = getattr(self, name)
            if not _is_pow2(n):
                raise ValueError(f"{name}={n}: size not power of two (>= 8 required)")
        if not self.x_max > self.x_min:
            raise ValueError(f"inverted bounds: x_max={self.x_max} <= x_min={self.x_min}")
        if not self.v_max > self.v_min:
            raise ValueError(f"inverted bounds: v_max={self.v_max} <= v_min={self.v_min}")
        dx = (self.x_max - self.x_min) / self.nx
        dv = (self.v_max - self.v_min) / self.nv
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dv", dv)
        object.__setattr__(self, "x", self.x_min + dx * np.arange(self.nx))
        object.__setattr__(self, "v", self.v_min + dv * np.arange(self.nv))
        object.__setattr__(self, "kx", wavenumbers(self.nx, dx))
        object.__setattr__(self, "kv", wavenumbers(self.nv, dv))
        for arr in (self.x, self.v, self.kx, self.kv):
            arr.flags.writeable = False

    @property
    def dkx(self) -> float:
        return 2.0 * np.pi / (self.nx * self.dx)

    @property
    def dkv(self) -> float:
        return 2.0 * np.pi / (self.nv * self.dv)

    @property
    def shape(self):
        return (self.nx, self.nv)

    @property
    def size(self) -> int:
        return self.nx * self.nv

    def cell(self, rep: Rep) -> float:
        """Quadrature weight of one grid cell in representation ``rep``."""
        rep = Rep(rep)
        return (self.dkx if rep.x_is_lambda else self.dx) * (self.dkv if rep.v_is_lambda else self.dv)

    def mesh(self):
        """Broadcastable (x, v) coordinate arrays of shape (nx, 1) and (1, nv)."""
        return self.x[:, None], self.v[None, :]

    def key(self):
        return (self.nx, self.nv, self.x_min, self.x_max, self.v_min, self.v_max)

    def __eq__(self, other):
        return isinstance(other, PhaseSpaceGrid) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return (f"PhaseSpaceGrid(nx={self.nx}, nv={self.nv}, x=[{self.x_min}, {self.x_max}), "
                f"v=[{self.v_min}, {self.v_max}))")


def make_grid(nx, nv, x_min, x_max, v_min, v_max) -> PhaseSpaceGrid:
    return PhaseSpaceGrid(nx, nv, float(x_min), float(x_max), float(v_min), float(v_max))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: PhaseSpaceGrid
    data: np.ndarray
    rep: Rep = Rep.XV

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape != self.grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rep", Rep(self.rep))

    def with_data(self, data) -> "WaveFunction":
        return WaveFunction(self.grid, data, self.rep)

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def normalize(self) -> "WaveFunction":
        n = self.norm()
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("cannot normalize a zero or non-finite wavefunction")
        return self.with_data(self.data / n)

    def __mul__(self, c):
        return self.with_data(self.data * c)

    __rmul__ = __mul__

    def __add__(self, other):
        _check_compatible(self, other)
        return self.with_data(self.data + other.data)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.with_data(self.data - other.data)


def _check_compatible(a: WaveFunction, b: WaveFunction):
    if a.grid != b.grid:
        raise ValueError("grid mismatch between wavefunctions")
    if a.rep != b.rep:
        raise ValueError(f"rep mismatch: {a.rep.value} vs {b.rep.value}")


def inner_product(a: WaveFunction, b: WaveFunction) -> complex:
    """Discrete phase-space integral of conj(a) * b."""
    _check_compatible(a, b)
    return complex(np.vdot(a.data, b.data) * a.grid.cell(a.rep))


def gaussian_amplitude(grid: PhaseSpaceGrid, x0, v0, sigma_x, sigma_v) -> np.ndarray:
    """Real Gaussian amplitude whose square has standard deviations (sigma_x, sigma_v).

    No guards and no normalization; used for test states on tiny grids.
    """
    x, v = grid.mesh()
    return np.exp(-((x - x0) ** 2) / (4.0 * sigma_x**2) - ((v - v0) ** 2) / (4.0 * sigma_v**2))


def check_packet(grid: PhaseSpaceGrid, x0, v0, sigma_x, sigma_v):
    """Raise ValueError if a packet is under-resolved or too close to the domain edge."""
    if sigma_x < 4.0 * grid.dx:
        raise ValueError(f"sigma_x={sigma_x} < 4*dx={4 * grid.dx}: packet too narrow for grid "
                         "(widen the packet or refine nx)")
    if sigma_v < 4.0 * grid.dv:
        raise ValueError(f"sigma_v={sigma_v} < 4*dv={4 * grid.dv}: packet too narrow for grid "
                         "(widen the packet or refine nv)")
    if not (grid.x_min + 4 * sigma_x <= x0 <= grid.x_max - 4 * sigma_x):
        raise ValueError(f"x0={x0} is closer than 4*sigma_x to the x boundary "
                         "(enlarge the domain or move the packet)")
    if not (grid.v_min + 4 * sigma_v <= v0 <= grid.v_max - 4 * sigma_v):
        raise ValueError(f"v0={v0} is closer than 4*sigma_v to the v boundary "
                         "(enlarge the domain or move the packet)")


def gaussian_packet(grid: PhaseSpaceGrid, x0, v0, sigma_x, sigma_v) -> WaveFunction:
    """Normalized real Gaussian in rep XV.

    The density |psi|^2 is the product Gaussian centred on (x0, v0) with
    standard deviations sigma_x and sigma_v.
    """
    check_packet(grid, x0, v0, sigma_x, sigma_v)
    return WaveFunction(grid, gaussian_amplitude(grid, x0, v0, sigma_x, sigma_v), Rep.XV).normalize()


def plane_wave(grid: PhaseSpaceGrid, kx=0.0, kv=0.0) -> WaveFunction:
    """exp(i (kx x + kv v)) in rep XV, normalized over the periodic cell."""
    x, v = grid.mesh()
    return WaveFunction(grid, np.exp(1j * (kx * x + kv * v)), Rep.XV).normalize()


# Axis transforms.  The kernel <v|lambda> = exp(+i v lambda) / sqrt(2 pi) gives
#   psi~(lambda_k) = dv / sqrt(2 pi) * sum_j exp(-i v_j lambda_k) psi(v_j),
# which is unitary between the dv and dk cell measures.

def _forward(data, axis, coords0, d, k):
    shape = [1, 1]
    shape[axis] = -1
    phase = np.exp(-1j * coords0 * k).reshape(shape)
    return sfft.fft(data, axis=axis) * (d / np.sqrt(2 * np.pi)) * phase


def _backward(data, axis, coords0, d, k):
    shape = [1, 1]
    shape[axis] = -1
    n = data.shape[axis]
    dk = 2 * np.pi / (n * d)
    phase = np.exp(1j * coords0 * k).reshape(shape)
    return sfft.ifft(data * phase, axis=axis) * (n * dk / np.sqrt(2 * np.pi))


def transform(psi: WaveFunction, target_rep) -> WaveFunction:
    """Unitary change of representation along whichever axes differ."""
    target = Rep(target_rep)
    g = psi.grid
    data = psi.data
    if psi.rep.x_is_lambda != target.x_is_lambda:
        f = _forward if target.x_is_lambda else _backward
        data = f(data, 0, g.x_min, g.dx, g.kx)
    if psi.rep.v_is_lambda != target.v_is_lambda:
        f = _forward if target.v_is_lambda else _backward
        data = f(data, 1, g.v_min, g.dv, g.kv)
    return WaveFunction(g, data, target)
