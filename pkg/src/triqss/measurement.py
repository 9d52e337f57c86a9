"""Projective measurements on one slot of a multi-qudit pure state.

Wraps the dual-backend Born kernel with basis bookkeeping: outcomes
carry their basis label and party so transcripts and correlation checks
need no side tables.  Also hosts the dealer's direction rule, which maps
the two players' announced directions to the basis the dealer must use
so that the three outcome indices sum to the round's residue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import PureState
from .errors import ContractError, DegenerateStateError
from .mub import MeasBasis

#: Dealer's basis as a function of (player-two direction, player-three direction).
ALICE_RULE = {
    ("Y", "Y"): "X",
    ("Y", "X"): "Y",
    ("X", "Y"): "Y",
    ("X", "X"): "UXUdag",
}


@dataclass(frozen=True)
class MeasOutcome:
    """Single-slot result: value is the basis column index that fired."""

    value: int
    basis_label: str
    party: str
    d: int

    def __post_init__(self):
        if not 0 <= self.value < self.d:
            raise ContractError(f"outcome {self.value} out of range for d={self.d}")


def alice_basis_for(dir_two: str, dir_three: str, d: int) -> MeasBasis:
    """Basis the dealer must measure in for the announced direction pair."""
    from .mub import basis_for_label

    try:
        label = ALICE_RULE[(dir_two, dir_three)]
    except KeyError:
        raise ContractError(f"no rule for directions {(dir_two, dir_three)!r}") from None
    return basis_for_label(label, d)


def measure_subsystem(
    state: PureState,
    slot: int,
    basis: MeasBasis,
    rng: np.random.Generator,
    party: str = "",
) -> tuple[MeasOutcome, PureState]:
    """Born-rule measurement of one slot; returns outcome and collapsed state.

    The slot keeps its position and dimension; only its amplitudes
    collapse onto the sampled basis vector.
    """
    dims = state.dims
    if not 0 <= slot < len(dims):
        raise ContractError(f"slot {slot} out of range for dims {dims}")
    d = dims[slot]
    if basis.d != d:
        raise ContractError(f"basis dimension {basis.d} does not match slot dimension {d}")

    left = int(math.prod(dims[:slot])) if slot else 1
    right = int(math.prod(dims[slot + 1 :])) if slot + 1 < len(dims) else 1
    u = float(rng.random())
    k, collapsed, probs = _kernels.measure_slot(state.amps, left, d, right, basis.matrix_ct, u)
    if k < 0:
        raise DegenerateStateError(f"no probability mass on slot {slot}")
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise ContractError(f"slot probabilities sum to {total!r}, state not normalised")
    outcome = MeasOutcome(int(k), basis.label, party, d)
    return outcome, PureState(collapsed, dims)


def outcome_probabilities(state: PureState, slot: int, basis: MeasBasis) -> np.ndarray:
    """Marginal Born probabilities of one slot in the given basis."""
    dims = state.dims
    if not 0 <= slot < len(dims):
        raise ContractError(f"slot {slot} out of range for dims {dims}")
    if basis.d != dims[slot]:
        raise ContractError("basis dimension does not match slot dimension")
    left = int(math.prod(dims[:slot])) if slot else 1
    right = int(math.prod(dims[slot + 1 :])) if slot + 1 < len(dims) else 1
    psi = state.amps.reshape(left, dims[slot], right)
    transformed = np.einsum("kb,abc->akc", basis.matrix_ct, psi)
    return np.einsum("akc,akc->k", transformed, transformed.conj()).real


def correlation_holds(s: MeasOutcome, t: MeasOutcome, u: MeasOutcome, alpha: int) -> bool:
    """Residue test: the three outcome indices must sum to alpha mod d."""
    if not (s.d == t.d == u.d):
        raise ContractError("outcomes from mismatched dimensions")
    return (s.value + t.value + u.value) % s.d == alpha % s.d


def joint_distribution(state, b1: MeasBasis, b2: MeasBasis, b3: MeasBasis) -> np.ndarray:
    """Exact (d,d,d) outcome distribution for measuring all three slots.

    Accepts either a three-slot PureState or a shared-state spec, which
    is realized first.
    """
    if not isinstance(state, PureState):
        from .ghz import realize

        state = realize(state)
    dims = state.dims
    if len(dims) != 3:
        raise ContractError(f"expected a three-slot state, got dims {dims}")
    if (b1.d, b2.d, b3.d) != dims:
        raise ContractError("basis dimensions do not match state dims")
    psi = state.as_tensor()
    amps = np.einsum(
        "ai,bj,ck,abc->ijk", b1.matrix.conj(), b2.matrix.conj(), b3.matrix.conj(), psi
    )
    return (amps * amps.conj()).real
