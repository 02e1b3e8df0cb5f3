"""
Tests for the Hermitian kernel.
"""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from src.backend.app.core.exceptions import NonFiniteSpectralValueError, NotHermitianError
from src.backend.app.core.rng import make_rng
from src.backend.app.services.spectra import HermitianOperator, eigh, matrix_fn

from .conftest import random_hermitian


def test_rejects_non_hermitian_with_worst_element():
    """The diagnostic names the worst element."""
    with pytest.raises(NotHermitianError) as info:
        HermitianOperator([[1.0, 2.0], [0.0, 1.0]])
    assert (info.value.row, info.value.col) in {(0, 1), (1, 0)}
    assert info.value.deviation == pytest.approx(2.0)


def test_eigh_identity_and_diagonal():
    assert_allclose(eigh(np.eye(3)).eigenvalues, [1.0, 1.0, 1.0])
    assert_allclose(eigh(np.diag([2.0, 0.0, 1.0])).eigenvalues, [0.0, 1.0, 2.0])


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32), dim=st.integers(1, 8))
def test_eigh_reconstructs(seed, dim):
    h = random_hermitian(make_rng(seed), dim)
    spectrum = eigh(h)
    vecs = spectrum.eigenvectors
    residual = np.linalg.norm(spectrum.reconstruct() - h.entries) / max(np.linalg.norm(h.entries), 1.0)
    assert residual < 1e-10
    assert_allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)
    assert np.all(np.diff(spectrum.eigenvalues) >= 0)


def test_matrix_fn_examples():
    assert_allclose(matrix_fn(np.eye(2), np.log).entries, np.zeros((2, 2)), atol=1e-15)
    result = matrix_fn(np.diag([np.e, np.e ** 2]), np.log)
    assert_allclose(result.entries, np.diag([1.0, 2.0]), atol=1e-12)


def test_matrix_fn_round_trip_and_commutation(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    p = HermitianOperator(a @ a.conj().T + 0.1 * np.eye(4))
    log_p = matrix_fn(p, np.log)
    assert_allclose(matrix_fn(log_p, np.exp).entries, p.entries, atol=1e-9)
    assert log_p.commutator_norm(p) < 1e-10


def test_matrix_fn_identity_and_products(rng):
    h = random_hermitian(rng, 5)
    assert_allclose(matrix_fn(h, lambda x: x).entries, h.entries, atol=1e-12)
    f = matrix_fn(h, np.sin).entries
    g = matrix_fn(h, np.cos).entries
    fg = matrix_fn(h, lambda x: np.sin(x) * np.cos(x)).entries
    assert_allclose(f @ g, fg, atol=1e-9)


def test_matrix_fn_rejects_non_finite_value():
    with pytest.raises(NonFiniteSpectralValueError) as info:
        matrix_fn(np.diag([0.0, 1.0]), np.log)
    assert info.value.eigenvalue == 0.0


def test_projectors_group_degenerate_levels():
    projectors = eigh(np.diag([1.0, 0.0, 1.0])).projectors()
    assert [value for value, _ in projectors] == [0.0, 1.0]
    assert_allclose(projectors[1][1], np.diag([1.0, 0.0, 1.0]), atol=1e-12)
