"""Generalized Pauli operators and the two unbiased measurement bases.

The d-level shift and clock operators generate everything here: the
X eigenbasis (discrete Fourier vectors), the Y eigenbasis (quadratic
phase vectors, with separate exponent rules for odd and even d), and
the diagonal rotation that maps the all-X product form of the shared
state onto the X-then-Y form.  Measuring in the wrong one of the two
bases yields a uniformly random outcome, which is what the protocol's
test rounds lean on.

Half-integer phase exponents for even d are evaluated with the
principal root exp(i*pi/d); all bases are cached per (d, label) since
Monte Carlo runs request them constantly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Operator, PureState, omega_pow, require_dim
from .errors import ContractError

#: The two directions Bob and Charlie may announce.
DIRECTIONS = ("X", "Y")

#: Valid measurement-basis labels: the two announced directions, the
#: dealer's rotated X basis, and the computational (clock) basis.
BASIS_LABELS = ("X", "Y", "UXUdag", "Z")


@dataclass(frozen=True)
class MeasBasis:
    """Ordered orthonormal single-qudit basis; outcome k projects onto column k."""

    label: str
    d: int
    matrix: np.ndarray  # (d, d), column k = k-th basis vector

    def __post_init__(self):
        require_dim(self.d)
        if self.label not in BASIS_LABELS:
            raise ContractError(f"unknown basis label {self.label!r}")
        matrix = np.ascontiguousarray(self.matrix, dtype=np.complex128)
        if matrix.shape != (self.d, self.d):
            raise ContractError(f"basis matrix shape {matrix.shape}, expected {(self.d, self.d)}")
        gram = matrix.conj().T @ matrix
        defect = float(np.max(np.abs(gram - np.eye(self.d))))
        if defect >= 1e-9:
            raise ContractError(f"basis is not orthonormal: defect {defect:.3e}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def vector(self, k: int) -> PureState:
        if not 0 <= k < self.d:
            raise ContractError(f"basis index {k} out of range for d={self.d}")
        return PureState(self.matrix[:, k].copy(), (self.d,))

    def vectors(self) -> list[PureState]:
        return [self.vector(k) for k in range(self.d)]

    #: conjugate transpose, cached lazily for the measurement kernel
    @property
    def matrix_ct(self) -> np.ndarray:
        ct = getattr(self, "_matrix_ct", None)
        if ct is None:
            ct = np.ascontiguousarray(self.matrix.conj().T)
            ct.setflags(write=False)
            object.__setattr__(self, "_matrix_ct", ct)
        return ct


def pauli_x(d: int) -> Operator:
    """Cyclic shift: maps |j> to |j+1 mod d>."""
    require_dim(d)
    mat = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        mat[(j + 1) % d, j] = 1.0
    return Operator(mat, (d,)).require_unitary()


def pauli_z(d: int) -> Operator:
    """Clock phase: multiplies |j> by the j-th power of the d-th root of unity."""
    require_dim(d)
    return Operator(np.diag(omega_pow(d, np.arange(d))), (d,)).require_unitary()


def pauli_y(d: int) -> Operator:
    """Shift composed after clock: maps |j> to omega^j |j+1 mod d>."""
    require_dim(d)
    mat = np.zeros((d, d), dtype=np.complex128)
    phases = omega_pow(d, np.arange(d))
    for j in range(d):
        mat[(j + 1) % d, j] = phases[j]
    return Operator(mat, (d,)).require_unitary()


@lru_cache(maxsize=None)
def x_basis(d: int) -> MeasBasis:
    """Eigenbasis of the shift operator; vector k has eigenvalue omega^k.

    Column k is the inverse-Fourier vector with amplitudes omega^(-k*j)/sqrt(d).
    """
    require_dim(d)
    j = np.arange(d)
    mat = omega_pow(d, -np.outer(j, j)) / np.sqrt(d)
    return MeasBasis("X", d, mat)


@lru_cache(maxsize=None)
def y_basis(d: int) -> MeasBasis:
    """Eigenbasis of the shift-clock product.

    Vector k carries quadratic phases exp(i*pi*(j^2 - 2kj - e*j)/d) with
    e = 1 for odd d and e = 2 for even d; its eigenvalue is omega^k for
    odd d and omega^k * exp(i*pi/d) for even d.
    """
    require_dim(d)
    e = 1 if d % 2 else 2
    j = np.arange(d).reshape(-1, 1)
    k = np.arange(d).reshape(1, -1)
    expo = j * j - 2 * k * j - e * j
    mat = np.exp(1j * np.pi * expo / d) / np.sqrt(d)
    return MeasBasis("Y", d, mat)


def y_eigenvalue(d: int, k: int) -> complex:
    """Eigenvalue of y_basis vector k under the shift-clock product."""
    require_dim(d)
    base = omega_pow(d, k)
    if d % 2 == 0:
        base = base * np.exp(1j * np.pi / d)
    return complex(base)


@lru_cache(maxsize=None)
def unitary_u(d: int) -> Operator:
    """Diagonal rotation taking the all-X product state to the X-then-Y one.

    Entry j is omega^(j(j-1)) for odd d and omega^(j(j-2)) for even d.
    """
    require_dim(d)
    e = 1 if d % 2 else 2
    j = np.arange(d)
    return Operator(np.diag(omega_pow(d, j * (j - e))), (d,)).require_unitary()


@lru_cache(maxsize=None)
def uxu_basis(d: int) -> MeasBasis:
    """Rotated X basis: column k is the diagonal rotation applied to x vector k.

    Outcomes keep the X-basis index k, so the sum-to-alpha check stays
    plain residue arithmetic for every row of the direction table.
    """
    mat = unitary_u(d).mat @ x_basis(d).matrix
    return MeasBasis("UXUdag", d, mat)


@lru_cache(maxsize=None)
def z_basis(d: int) -> MeasBasis:
    """Computational basis, the clock operator's eigenbasis."""
    require_dim(d)
    return MeasBasis("Z", d, np.eye(d, dtype=np.complex128))


def basis_for_label(label: str, d: int) -> MeasBasis:
    if label == "X":
        return x_basis(d)
    if label == "Y":
        return y_basis(d)
    if label == "UXUdag":
        return uxu_basis(d)
    if label == "Z":
        return z_basis(d)
    raise ContractError(f"unknown basis label {label!r}")


def random_direction(rng: np.random.Generator) -> str:
    """Uniform draw from the two announced directions."""
    return DIRECTIONS[int(rng.integers(2))]


def check_mub(d: int) -> float:
    """Max deviation of |<k_x|k'_y>| from 1/sqrt(d) over all k, k'."""
    overlaps = np.abs(x_basis(d).matrix.conj().T @ y_basis(d).matrix)
    return float(np.max(np.abs(overlaps - 1.0 / np.sqrt(d))))
