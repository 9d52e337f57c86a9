"""Small dense complex linear algebra and the seeded randomness contract.

Everything downstream manipulates two value types: :class:`PureState`
(a normalized amplitude vector over one or more d-level subsystems) and
:class:`Operator` (a square matrix over the same tensor factors).  Both
are immutable after construction; operations return fresh values.

Subsystem ordering is big-endian throughout: the first tensor factor is
the most significant digit of the flat index, exactly as ``np.kron``
lays it out.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ResourceLimitError

#: Largest flat dimension ``tensor`` will produce by default.
MAX_TENSOR_DIM = 1_000_000

#: Default tolerance for equality of amplitudes / norms.
ATOL = 1e-9


def require_dim(d: int) -> int:
    """Validate a single-qudit dimension (must be an integer >= 2)."""
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool):
        raise ContractError(f"dimension must be an integer, got {d!r}")
    if d < 2:
        raise ContractError(f"dimension must be >= 2, got {d}")
    return int(d)


def omega(d: int) -> complex:
    """Primitive d-th root of unity exp(2*pi*i/d)."""
    require_dim(d)
    return complex(np.exp(2j * np.pi / d))


def omega_pow(d: int, exponent) -> np.ndarray | complex:
    """exp(2*pi*i*exponent/d), elementwise for array exponents.

    Exponents are taken as exact integers so powers stay on the unit
    circle; callers pass arbitrary (possibly negative) integers.
    """
    return np.exp(2j * np.pi * np.asarray(exponent) / d)


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitude vector over d-level subsystems.

    Parameters
    ----------
    amps : np.ndarray
        Flat complex amplitude vector of length ``prod(dims)``.
    dims : tuple of int
        Dimension of each subsystem, most significant first.
    """

    amps: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(require_dim(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        amps = np.ascontiguousarray(self.amps, dtype=np.complex128).reshape(-1)
        total = math.prod(dims)
        if amps.size != total:
            raise ContractError(
                f"amplitude vector has length {amps.size}, expected {total} for dims {dims}"
            )
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > ATOL:
            raise ContractError(f"state is not normalized: |psi| = {nrm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def as_tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem (read-only view)."""
        return self.amps.reshape(self.dims)


@dataclass(frozen=True)
class Operator:
    """Complex square matrix acting on a tensor product of qudits."""

    mat: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(require_dim(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        total = math.prod(dims)
        if mat.shape != (total, total):
            raise ContractError(
                f"operator has shape {mat.shape}, expected {(total, total)} for dims {dims}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def unitarity_defect(self) -> float:
        """max |U^dag U - I|, zero (to float precision) for a unitary."""
        gram = self.mat.conj().T @ self.mat
        return float(np.max(np.abs(gram - np.eye(self.dim))))

    def is_unitary(self, tol: float = ATOL) -> bool:
        return self.unitarity_defect() < tol

    def require_unitary(self, tol: float = ATOL) -> "Operator":
        defect = self.unitarity_defect()
        if defect >= tol:
            raise ContractError(f"operator is not unitary: defect {defect:.3e} >= {tol}")
        return self


def basis_state(dims, index: int) -> PureState:
    """Computational basis state |index> over the given subsystem dims."""
    dims = tuple(int(d) for d in dims)
    total = math.prod(dims)
    if not 0 <= index < total:
        raise ContractError(f"basis index {index} out of range for dims {dims}")
    amps = np.zeros(total, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(amps, dims)


def ket(d: int, j: int) -> PureState:
    """Single-qudit computational basis state |j>."""
    return basis_state((d,), j)


def identity(d: int) -> Operator:
    return Operator(np.eye(d, dtype=np.complex128), (d,))


def tensor(a, b, max_dim: int = MAX_TENSOR_DIM):
    """Kronecker product of two states or two operators.

    The first factor becomes the most significant digit of the combined
    index.  Mixing a state with an operator is rejected; a result larger
    than ``max_dim`` raises :class:`ResourceLimitError`.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        out_dim = a.dim * b.dim
        if out_dim > max_dim:
            raise ResourceLimitError(
                f"tensor product dimension {out_dim} exceeds limit {max_dim}"
            )
        return PureState(np.kron(a.amps, b.amps), a.dims + b.dims)
    if isinstance(a, Operator) and isinstance(b, Operator):
        out_dim = a.dim * b.dim
        if out_dim > max_dim:
            raise ResourceLimitError(
                f"tensor product dimension {out_dim} exceeds limit {max_dim}"
            )
        return Operator(np.kron(a.mat, b.mat), a.dims + b.dims)
    raise ContractError(
        f"tensor requires two states or two operators, got {type(a).__name__} and {type(b).__name__}"
    )


def inner(a: PureState, b: PureState) -> complex:
    """Inner product <a|b>, conjugate-linear in the first argument."""
    if a.dim != b.dim:
        raise ContractError(f"dimension mismatch: {a.dim} != {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def states_equal_up_to_phase(a: PureState, b: PureState, tol: float = ATOL) -> bool:
    """True iff a and b differ by at most a global phase, |<a|b>| > 1 - tol."""
    if a.dims != b.dims:
        raise ContractError(f"dimension mismatch: {a.dims} != {b.dims}")
    return abs(inner(a, b)) > 1.0 - tol


def apply_local(matrix: np.ndarray, state: PureState, slot: int) -> PureState:
    """Apply a single-qudit matrix to one subsystem of a state."""
    if not 0 <= slot < len(state.dims):
        raise ContractError(f"slot {slot} out of range for dims {state.dims}")
    d = state.dims[slot]
    if matrix.shape != (d, d):
        raise ContractError(f"matrix shape {matrix.shape} does not match slot dimension {d}")
    psi = state.as_tensor()
    moved = np.tensordot(matrix, psi, axes=([1], [slot]))
    out = np.moveaxis(moved, 0, slot)
    return PureState(out.reshape(-1), state.dims)


def _label_entropy(label: str) -> list[int]:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def rng_stream(seed: int, label: str) -> np.random.Generator:
    """Deterministic random stream keyed by (seed, label).

    Identical (seed, label) pairs reproduce identical sample sequences;
    distinct labels give statistically independent streams.  The label
    is folded in through SHA-256 so stream separation does not depend on
    Python's per-process string hashing.
    """
    entropy = [int(seed) % (1 << 64), *_label_entropy(label)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
