"""Three-qudit entangled states shared by the dealer and the two players.

Each state is indexed by a residue alpha and a form naming which party
holds the X-basis component while the other two hold Y-basis components
(or all three X).  The defining expression sums products of single-party
basis vectors over index triples with a fixed residue sum; for the XYY
and XXX forms this collapses to a closed diagonal expression over the
computational basis, which is what the simulator instantiates.

The three mixed forms are one and the same vector, and that vector is
the unique common eigenvector of the three commuting two-Y-one-X
operator products.  `common_eigenspace` certifies both the uniqueness
and the match numerically without materialising any d^3 x d^3 matrix:
the first operator's eigenspace has an analytic product basis, and the
other two projectors act on it by cyclic rolls plus phase grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import PureState, omega_pow, require_dim
from .errors import ContractError, ResourceLimitError
from .mub import x_basis, y_basis

#: Which slot carries the X-type component; "XXX" is the product form.
FORMS = ("XYY", "YXY", "YYX", "XXX")


@dataclass(frozen=True)
class GhzSpec:
    """Residue-labelled three-party state choice."""

    d: int
    alpha: int
    form: str = "XYY"

    def __post_init__(self):
        require_dim(self.d)
        if self.form not in FORMS:
            raise ContractError(f"unknown form {self.form!r}")
        if not 0 <= self.alpha < self.d:
            raise ContractError(f"alpha {self.alpha} out of range for d={self.d}")


def ghz_sum_form(spec: GhzSpec) -> PureState:
    """Defining sum over basis-vector triples with residue-alpha index sum.

    Amplitude tensor is (1/d) * sum over s+t+u = alpha (mod d) of the
    outer product of the three parties' basis vectors, slot bases
    following the form string.
    """
    d, alpha = spec.d, spec.alpha
    bases = {"X": x_basis(d).matrix, "Y": y_basis(d).matrix}
    b1, b2, b3 = (bases[c] for c in spec.form)
    # Fix t and u; s is then forced, so gather the forced columns of b1.
    t = np.arange(d).reshape(-1, 1)
    u = np.arange(d).reshape(1, -1)
    s = (alpha - t - u) % d
    b1_forced = b1[:, s]  # axes: (component, t, u)
    amps = np.einsum("atu,bt,cu->abc", b1_forced, b2, b3) / d
    return PureState(amps.reshape(-1), (d, d, d))


@lru_cache(maxsize=None)
def _closed_form_cached(d: int, alpha: int, form: str) -> PureState:
    j = np.arange(d)
    if form == "XXX":
        diag = omega_pow(d, -j * alpha) / np.sqrt(d)
    else:  # XYY
        e = 1 if d % 2 else 2
        diag = omega_pow(d, j * (j - e - alpha)) / np.sqrt(d)
    amps = np.zeros((d, d, d), dtype=np.complex128)
    amps[j, j, j] = diag
    return PureState(amps.reshape(-1), (d, d, d))


def ghz_closed_form(spec: GhzSpec) -> PureState:
    """Diagonal closed expression; defined for the XYY and XXX forms."""
    if spec.form not in ("XYY", "XXX"):
        raise ContractError(f"no closed form for {spec.form!r}")
    return _closed_form_cached(spec.d, spec.alpha, spec.form)


@lru_cache(maxsize=None)
def _realize_cached(d: int, alpha: int, form: str) -> PureState:
    spec = GhzSpec(d, alpha, form)
    if form in ("XYY", "XXX"):
        return ghz_closed_form(spec)
    return ghz_sum_form(spec)


def realize(spec: GhzSpec) -> PureState:
    """State vector for the spec, via the closed form when one exists."""
    return _realize_cached(spec.d, spec.alpha, spec.form)


def check_u_relation(d: int, alpha: int) -> float:
    """Max amplitude gap between rotating slot one of XXX and the XYY state."""
    from .mub import unitary_u

    xxx = realize(GhzSpec(d, alpha, "XXX")).as_tensor()
    rotated = np.einsum("ab,bcd->acd", unitary_u(d).mat, xxx)
    xyy = realize(GhzSpec(d, alpha, "XYY")).as_tensor()
    return float(np.max(np.abs(rotated - xyy)))


def form_equivalence(d: int, alpha: int) -> float:
    """Max amplitude gap across the three mixed forms (exact equality, not phase)."""
    ref = ghz_sum_form(GhzSpec(d, alpha, "XYY")).amps
    worst = 0.0
    for form in ("YXY", "YYX"):
        other = ghz_sum_form(GhzSpec(d, alpha, form)).amps
        worst = max(worst, float(np.max(np.abs(other - ref))))
    return worst


def _apply_operator_power(block4: np.ndarray, d: int, which: int, m: int) -> np.ndarray:
    """Apply the m-th power of one two-Y-one-X product to a (d,d,d,cols) block.

    Every power shifts all three slots up by m; the accumulated clock
    phases depend only on the target indices of the two Y slots.  With
    target indices (j, k, l) the phase exponent is m*(sum of the two
    Y-slot indices) - m^2 - m, where `which` names the X slot.
    """
    out = np.roll(block4, shift=m, axis=0)
    out = np.roll(out, shift=m, axis=1)
    out = np.roll(out, shift=m, axis=2)
    idx = np.arange(d)
    j = idx.reshape(-1, 1, 1, 1)
    k = idx.reshape(1, -1, 1, 1)
    l = idx.reshape(1, 1, -1, 1)
    if which == 1:
        expo = m * (k + l) - m * m - m
    elif which == 2:
        expo = m * (j + l) - m * m - m
    elif which == 3:
        expo = m * (j + k) - m * m - m
    else:
        raise ContractError(f"operator index {which} not in 1..3")
    return out * omega_pow(d, expo)


def _eigenvalue_exponent(d: int, alpha: int) -> int:
    """Integer a with common eigenvalue omega^a on the residue-alpha sector.

    For odd d the shared eigenvalue is omega^alpha; for even d the two
    half-integer Y phases combine into one extra full clock step.
    """
    return alpha if d % 2 else (alpha + 1) % d


def _projector_apply(block: np.ndarray, d: int, which: int, eig_expo: int) -> np.ndarray:
    """Project block columns onto the omega^eig_expo eigenspace of one operator.

    Group average (1/d) * sum_m conj(lambda)^m * M^m; valid because each
    operator's d-th power is the identity for both parities of d.
    """
    block4 = block.reshape(d, d, d, -1)
    acc = np.zeros_like(block4)
    for m in range(d):
        acc += omega_pow(d, -eig_expo * m) * _apply_operator_power(block4, d, which, m)
    return (acc / d).reshape(block.shape)


def common_eigenspace(d: int, alpha: int, svd_threshold: float = 1e-7, limit: int = 16):
    """Rank and orthonormal basis of the joint eigenspace of the three products.

    Returns (rank, basis) with basis of shape (d^3, rank), orthonormal
    columns.  The first operator's eigenspace is spanned analytically by
    {x_s (x) y_t (x) y_u : s+t+u = alpha mod d}; call that block Q and
    let V be Q with the other two projectors applied.  Since Q has
    orthonormal columns spanning exactly the first eigenspace, V equals
    the full projector product applied to Q, so V's nonzero singular
    values and column space are those of the product itself.
    """
    require_dim(d)
    if d > limit:
        raise ResourceLimitError(f"d={d} exceeds eigenspace search limit {limit}")
    if not 0 <= alpha < d:
        raise ContractError(f"alpha {alpha} out of range for d={d}")

    xm = x_basis(d).matrix
    ym = y_basis(d).matrix
    t = np.arange(d).reshape(-1, 1)
    u = np.arange(d).reshape(1, -1)
    s = (alpha - t - u) % d
    x_forced = xm[:, s]  # axes: (component, t, u)
    q = np.einsum("atu,bt,cu->abctu", x_forced, ym, ym).reshape(d**3, d * d)

    eig = _eigenvalue_exponent(d, alpha)
    v = _projector_apply(q, d, 2, eig)
    v = _projector_apply(v, d, 3, eig)

    left, sing, _ = np.linalg.svd(v, full_matrices=False)
    rank = int(np.sum(sing > svd_threshold))
    basis = left[:, :rank] if rank else np.zeros((d**3, 0), dtype=np.complex128)
    return rank, basis
