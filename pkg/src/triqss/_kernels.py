"""Born-rule measurement kernels: numba-jitted hot path, numpy fallback.

The kernel treats a state as a (left, d, right) block: ``left`` is the
combined dimension of the subsystems before the measured slot, ``right``
the combined dimension after it.  Given the conjugate-transposed basis
matrix and one uniform variate it transforms the slot into the
measurement basis, accumulates outcome probabilities, samples an
outcome, and returns the renormalized collapsed amplitudes.

Backend selection happens once at import.  Set ``TRIQSS_NUMBA=0`` (or
``off``/``false``/``numpy``) to force the pure-numpy path; anything else
uses numba when it is importable.  ``benchmarks/bench_kernels.py``
compares the two.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("TRIQSS_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no", "numpy")


def _measure_slot_np(amps, left, d, right, basis_ct, u):
    """Measure the middle block of a (left, d, right) state; numpy path.

    Returns (outcome, collapsed flat amplitudes, probability vector).
    An all-zero probability vector is signalled with outcome -1.
    """
    psi = amps.reshape(left, d, right)
    # transformed[a, k, c] = sum_b conj(basis[b, k]) psi[a, b, c]
    transformed = np.einsum("kb,abc->akc", basis_ct, psi)
    probs = np.einsum("akc,akc->k", transformed, transformed.conj()).real
    total = probs.sum()
    if total < 1e-12:
        return -1, amps.copy(), probs
    cum = 0.0
    k = d - 1
    threshold = u * total
    for i in range(d):
        cum += probs[i]
        if threshold < cum:
            k = i
            break
    collapsed = np.einsum(
        "b,ac->abc", basis_ct[k].conj(), transformed[:, k, :] / np.sqrt(probs[k])
    )
    return k, np.ascontiguousarray(collapsed.reshape(-1)), probs


def _make_numba_kernel():
    import numba

    @numba.njit(cache=True)
    def _measure_slot_nb(amps, left, d, right, basis_ct, u):  # pragma: no cover - jitted
        psi = amps.reshape(left, d, right)
        transformed = np.empty((left, d, right), np.complex128)
        probs = np.zeros(d, np.float64)
        for a in range(left):
            for k in range(d):
                for c in range(right):
                    acc = 0.0 + 0.0j
                    for b in range(d):
                        acc += basis_ct[k, b] * psi[a, b, c]
                    transformed[a, k, c] = acc
                    probs[k] += acc.real * acc.real + acc.imag * acc.imag
        total = 0.0
        for k in range(d):
            total += probs[k]
        if total < 1e-12:
            return -1, amps.copy(), probs
        threshold = u * total
        cum = 0.0
        k = d - 1
        for i in range(d):
            cum += probs[i]
            if threshold < cum:
                k = i
                break
        out = np.empty((left, d, right), np.complex128)
        inv = 1.0 / np.sqrt(probs[k])
        for a in range(left):
            for b in range(d):
                coef = np.conj(basis_ct[k, b]) * inv
                for c in range(right):
                    out[a, b, c] = coef * transformed[a, k, c]
        return k, out.reshape(left * d * right), probs

    return _measure_slot_nb


NUMBA_AVAILABLE = False
if _WANT_NUMBA:
    try:
        _measure_slot_nb = _make_numba_kernel()
        NUMBA_AVAILABLE = True
    except ImportError:
        _measure_slot_nb = None

BACKEND = "numba" if (_WANT_NUMBA and NUMBA_AVAILABLE) else "numpy"
measure_slot = _measure_slot_nb if BACKEND == "numba" else _measure_slot_np


def active_backend() -> str:
    """Name of the kernel backend selected at import ('numba' or 'numpy')."""
    return BACKEND
