"""Shared three-party states: closed forms, form equivalence, joint eigenspace.

The eigenspace tests carry their own dense oracle: the three operator
products are built as explicit d^3 x d^3 matrices from first principles,
their eigenprojectors taken by group averaging over matrix powers, and
the product projector's SVD compared against the factored implementation.
"""

import numpy as np
import pytest

from triqss import (
    ContractError,
    GhzSpec,
    ResourceLimitError,
    check_u_relation,
    common_eigenspace,
    form_equivalence,
    ghz_closed_form,
    ghz_sum_form,
    omega,
    realize,
)
from triqss.ghz import _apply_operator_power, _eigenvalue_exponent

SWEEP_DIMS = [2, 3, 4, 5, 6, 7, 8, 9, 12, 16]


def _dense_shift(d):
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        mat[(j + 1) % d, j] = 1.0
    return mat


def _dense_shift_clock(d):
    w = np.exp(2j * np.pi / d)
    mat = np.zeros((d, d), dtype=complex)
    for j in range(d):
        mat[(j + 1) % d, j] = w**j
    return mat


def _dense_products(d):
    """The three two-Y-one-X operator products as explicit matrices."""
    x = _dense_shift(d)
    y = _dense_shift_clock(d)
    m1 = np.kron(x, np.kron(y, y))
    m2 = np.kron(y, np.kron(x, y))
    m3 = np.kron(y, np.kron(y, x))
    return m1, m2, m3


def _dense_projector(m, d, eig_expo):
    w = np.exp(2j * np.pi / d)
    acc = np.zeros_like(m)
    power = np.eye(m.shape[0], dtype=complex)
    for step in range(d):
        acc += w ** (-eig_expo * step) * power
        power = power @ m
    return acc / d


class TestClosedForms:
    def test_qubit_alpha0(self):
        amps = realize(GhzSpec(2, 0, "XYY")).amps
        expected = np.zeros(8, dtype=complex)
        expected[0] = 1 / np.sqrt(2)
        expected[7] = -1 / np.sqrt(2)
        np.testing.assert_allclose(amps, expected, atol=1e-12)

    def test_qubit_alpha1(self):
        amps = realize(GhzSpec(2, 1, "XYY")).amps
        expected = np.zeros(8, dtype=complex)
        expected[0] = expected[7] = 1 / np.sqrt(2)
        np.testing.assert_allclose(amps, expected, atol=1e-12)

    def test_qubit_alpha1_equals_product_form_alpha0(self):
        a = realize(GhzSpec(2, 1, "XYY")).amps
        b = realize(GhzSpec(2, 0, "XXX")).amps
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_qutrit_alpha0(self):
        amps = realize(GhzSpec(3, 0, "XYY")).as_tensor()
        w = omega(3)
        expected_diag = np.array([1, 1, w**2]) / np.sqrt(3)
        for j in range(3):
            assert amps[j, j, j] == pytest.approx(expected_diag[j], abs=1e-12)
        assert np.count_nonzero(np.abs(amps) > 1e-12) == 3

    def test_qutrit_product_form_alpha1(self):
        amps = realize(GhzSpec(3, 1, "XXX")).as_tensor()
        w = omega(3)
        for j in range(3):
            assert amps[j, j, j] == pytest.approx(w**-j / np.sqrt(3), abs=1e-12)

    def test_mixed_forms_have_no_closed_form(self):
        with pytest.raises(ContractError):
            ghz_closed_form(GhzSpec(3, 0, "YXY"))


class TestSpecValidation:
    def test_alpha_range(self):
        with pytest.raises(ContractError):
            GhzSpec(3, 3)
        with pytest.raises(ContractError):
            GhzSpec(3, -1)

    def test_unknown_form(self):
        with pytest.raises(ContractError):
            GhzSpec(3, 0, "XYX")

    def test_bad_dimension(self):
        with pytest.raises(ContractError):
            GhzSpec(1, 0)


@pytest.mark.parametrize("d", SWEEP_DIMS)
def test_sum_form_equals_closed_form(d):
    for alpha in range(d):
        for form in ("XYY", "XXX"):
            spec = GhzSpec(d, alpha, form)
            gap = np.max(np.abs(ghz_sum_form(spec).amps - ghz_closed_form(spec).amps))
            assert gap <= 1e-9, f"d={d} alpha={alpha} form={form}: gap {gap:.3e}"


@pytest.mark.parametrize("d", SWEEP_DIMS)
def test_mixed_forms_identical(d):
    for alpha in range(d):
        assert form_equivalence(d, alpha) <= 1e-9


@pytest.mark.parametrize("d", SWEEP_DIMS)
def test_rotation_maps_product_form(d):
    for alpha in range(d):
        assert check_u_relation(d, alpha) <= 1e-9


@pytest.mark.parametrize("d", [2, 3, 4, 5, 8])
def test_state_is_joint_eigenvector(d):
    for alpha in range(d):
        psi = realize(GhzSpec(d, alpha, "XYY")).amps
        lam = omega(d) ** _eigenvalue_exponent(d, alpha)
        for m in _dense_products(d):
            assert np.max(np.abs(m @ psi - lam * psi)) < 1e-7


@pytest.mark.parametrize("d", [2, 3, 4])
def test_operator_products_commute(d):
    m1, m2, m3 = _dense_products(d)
    for a, b in [(m1, m2), (m1, m3), (m2, m3)]:
        assert np.max(np.abs(a @ b - b @ a)) < 1e-12


@pytest.mark.parametrize("d", [3, 4])
def test_factored_power_matches_dense(d):
    rng = np.random.default_rng(19 + d)
    block = rng.normal(size=(d**3, 3)) + 1j * rng.normal(size=(d**3, 3))
    products = _dense_products(d)
    for which in (1, 2, 3):
        dense = products[which - 1]
        for m in (0, 1, 2, d - 1):
            fast = _apply_operator_power(block.reshape(d, d, d, 3), d, which, m)
            expected = np.linalg.matrix_power(dense, m) @ block
            np.testing.assert_allclose(fast.reshape(d**3, 3), expected, atol=1e-10)


def test_factored_power_rejects_bad_index():
    block = np.zeros((2, 2, 2, 1), dtype=complex)
    with pytest.raises(ContractError):
        _apply_operator_power(block, 2, 4, 1)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_eigenspace_matches_dense_oracle(d):
    for alpha in range(d):
        eig = _eigenvalue_exponent(d, alpha)
        projectors = [_dense_projector(m, d, eig) for m in _dense_products(d)]
        product = projectors[2] @ projectors[1] @ projectors[0]
        sing_dense = np.linalg.svd(product, compute_uv=False)
        rank_dense = int(np.sum(sing_dense > 1e-7))

        rank_fast, basis_fast = common_eigenspace(d, alpha)
        assert rank_fast == rank_dense == 1

        left, _, _ = np.linalg.svd(product)
        overlap = abs(np.vdot(left[:, 0], basis_fast[:, 0]))
        assert overlap == pytest.approx(1.0, abs=1e-9)

        # The surviving singular value of a projector product onto a shared
        # rank-one space is exactly 1.
        assert sing_dense[0] == pytest.approx(1.0, abs=1e-9)
        assert sing_dense[1] < 1e-9


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_generator_matches_closed_form(d):
    for alpha in range(d):
        rank, basis = common_eigenspace(d, alpha)
        assert rank == 1
        psi = realize(GhzSpec(d, alpha, "XYY")).amps
        assert abs(np.vdot(basis[:, 0], psi)) == pytest.approx(1.0, abs=1e-9)


def test_eigenspace_basis_is_orthonormal():
    _, basis = common_eigenspace(4, 2)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(basis.shape[1]), atol=1e-12)


class TestEigenspaceLimits:
    def test_dimension_limit(self):
        with pytest.raises(ResourceLimitError):
            common_eigenspace(17, 0)

    def test_custom_limit(self):
        with pytest.raises(ResourceLimitError):
            common_eigenspace(4, 0, limit=3)

    def test_alpha_out_of_range(self):
        with pytest.raises(ContractError):
            common_eigenspace(3, 5)
