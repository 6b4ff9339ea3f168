"""Position, velocity and hidden-variable operators, the Liouvillian, and dense export.

All operators act on wavefunctions in rep XV.  The hidden variables are the
spectral derivatives lambda_x = -i d/dx and lambda_v = -i d/dv, diagonal in the
conjugate representation.  The Liouvillian in velocity variables is

    L = v lambda_x + (F(x)/m) lambda_v

and the evolution convention is d psi/dt = -i L psi.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .phase_space import PhaseSpaceGrid, Rep, WaveFunction
from .potentials import PotentialSpec

MAX_DENSE = 4096


@dataclass(frozen=True)
class OperatorId:
    kind: str
    potential: Optional[PotentialSpec] = None
    m: float = 1.0

    def __post_init__(self):
        if self.kind not in ("X", "V", "LambdaX", "LambdaV", "Liouvillian", "Force"):
            raise ValueError(f"unknown operator {self.kind!r}")
        if self.kind in ("Liouvillian", "Force"):
            if self.potential is None:
                raise ValueError(f"{self.kind} needs a potential")
            if not self.m > 0:
                raise ValueError(f"mass must be positive, got {self.m}")

    def __str__(self):
        if self.potential is None:
            return self.kind
        return f"{self.kind}({self.potential.kind}, m={self.m})"


X = OperatorId("X")
V = OperatorId("V")
LambdaX = OperatorId("LambdaX")
LambdaV = OperatorId("LambdaV")


def Liouvillian(potential: PotentialSpec, m: float = 1.0) -> OperatorId:
    return OperatorId("Liouvillian", potential, m)


def Force(potential: PotentialSpec, m: float = 1.0) -> OperatorId:
    """Multiplication by F(x)/m (plain F(x) for the default m = 1)."""
    return OperatorId("Force", potential, m)


def force_over_mass(grid: PhaseSpaceGrid, potential: PotentialSpec, m: float) -> np.ndarray:
    f = potential.force(grid.x) / m
    if not np.all(np.isfinite(f)):
        raise ValueError("potential produced non-finite force values on the grid")
    return f


def _deriv(data, axis, k):
    shape = [1, 1]
    shape[axis] = -1
    return sfft.ifft(sfft.fft(data, axis=axis) * k.reshape(shape), axis=axis)


def apply(op: OperatorId, psi: WaveFunction) -> WaveFunction:
    if psi.rep != Rep.XV:
        raise ValueError(f"operators act in rep XV; got {psi.rep.value} (transform first)")
    g = psi.grid
    x, v = g.mesh()
    d = psi.data
    if op.kind == "X":
        out = x * d
    elif op.kind == "V":
        out = v * d
    elif op.kind == "LambdaX":
        out = _deriv(d, 0, g.kx)
    elif op.kind == "LambdaV":
        out = _deriv(d, 1, g.kv)
    elif op.kind == "Force":
        out = force_over_mass(g, op.potential, op.m)[:, None] * d
    else:
        fm = force_over_mass(g, op.potential, op.m)[:, None]
        out = v * _deriv(d, 0, g.kx) + fm * _deriv(d, 1, g.kv)
    return psi.with_data(out)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Explicit matrix acting on fields flattened x-major (index ix * nv + iv)."""

    label: str
    matrix: np.ndarray
    grid: PhaseSpaceGrid

    def _check(self, other: "DenseOperator"):
        if self.grid != other.grid:
            raise ValueError("grid mismatch between dense operators")

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            self._check(other)
            return DenseOperator(f"({self.label})({other.label})", self.matrix @ other.matrix, self.grid)
        if isinstance(other, WaveFunction):
            return self.act(other)
        return NotImplemented

    def __add__(self, other):
        self._check(other)
        return DenseOperator(f"{self.label} + {other.label}", self.matrix + other.matrix, self.grid)

    def __sub__(self, other):
        self._check(other)
        return DenseOperator(f"{self.label} - {other.label}", self.matrix - other.matrix, self.grid)

    def __mul__(self, c):
        return DenseOperator(f"{c}*{self.label}", c * self.matrix, self.grid)

    __rmul__ = __mul__

    @property
    def H(self) -> "DenseOperator":
        return DenseOperator(f"({self.label})^H", self.matrix.conj().T, self.grid)

    def act(self, psi: WaveFunction) -> WaveFunction:
        if psi.grid != self.grid or psi.rep != Rep.XV:
            raise ValueError("dense operators act on rep XV fields of their own grid")
        return psi.with_data((self.matrix @ psi.data.ravel()).reshape(self.grid.shape))

    def expectation(self, psi: WaveFunction) -> complex:
        """<psi| M |psi> with the phase-space cell measure."""
        if psi.grid != self.grid or psi.rep != Rep.XV:
            raise ValueError("dense operators act on rep XV fields of their own grid")
        f = psi.data.ravel()
        return complex(np.vdot(f, self.matrix @ f) * self.grid.cell(Rep.XV))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def derivative_matrix(n: int, k: np.ndarray) -> np.ndarray:
    """-i d/ds on an n-point periodic axis: F^H diag(k) F with F the unitary DFT."""
    f = sfft.fft(np.eye(n), axis=0, norm="ortho")
    return f.conj().T @ (k[:, None] * f)


def _check_size(grid: PhaseSpaceGrid):
    if grid.size > MAX_DENSE:
        raise ValueError(f"grid too large for dense export: {grid.nx}x{grid.nv} = {grid.size} > {MAX_DENSE}")


def to_dense(op: OperatorId, grid: PhaseSpaceGrid) -> DenseOperator:
    _check_size(grid)
    ix = np.eye(grid.nx)
    iv = np.eye(grid.nv)
    if op.kind == "X":
        m = np.diag(np.repeat(grid.x, grid.nv)).astype(complex)
    elif op.kind == "V":
        m = np.diag(np.tile(grid.v, grid.nx)).astype(complex)
    elif op.kind == "LambdaX":
        m = np.kron(derivative_matrix(grid.nx, grid.kx), iv)
    elif op.kind == "LambdaV":
        m = np.kron(ix, derivative_matrix(grid.nv, grid.kv))
    elif op.kind == "Force":
        m = np.diag(np.repeat(force_over_mass(grid, op.potential, op.m), grid.nv)).astype(complex)
    else:
        fm = force_over_mass(grid, op.potential, op.m)
        m = (np.kron(derivative_matrix(grid.nx, grid.kx), np.diag(grid.v))
             + np.kron(np.diag(fm), derivative_matrix(grid.nv, grid.kv)))
    return DenseOperator(str(op), m, grid)


def commutator(a: DenseOperator, b: DenseOperator) -> DenseOperator:
    a._check(b)
    return DenseOperator(f"[{a.label}, {b.label}]", a.matrix @ b.matrix - b.matrix @ a.matrix, a.grid)


def acceleration_observable(grid: PhaseSpaceGrid, potential: PotentialSpec, m: float) -> DenseOperator:
    """i[L, v] as a dense matrix; equals F(x)/m on band-limited interior states."""
    c = commutator(to_dense(Liouvillian(potential, m), grid), to_dense(V, grid))
    return DenseOperator("i[L, V]", 1j * c.matrix, grid)
