"""
Tests for the ensemble reference states.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.backend.app.core.exceptions import EnsembleError, NonCommutingChargesError
from src.backend.app.core.rng import make_rng
from src.backend.app.services.ensembles import (
    EnsembleKind,
    EnsembleSpec,
    canonical,
    entropy_identity_residual,
    general_exponential,
    grand_canonical,
    microcanonical,
)
from src.backend.app.services.spectra import HermitianOperator
from src.backend.app.services.states import (
    DensityMatrix,
    expectation,
    random_density_matrix,
    relative_entropy,
    von_neumann_entropy,
)

from .conftest import GIBBS_EXCITED, GIBBS_GROUND, random_hermitian


def canonical_spec(h, beta):
    return EnsembleSpec(kind=EnsembleKind.CANONICAL, hamiltonian=h, beta=beta)


def test_spec_validation(qubit_hamiltonian):
    with pytest.raises(EnsembleError):
        EnsembleSpec(kind=EnsembleKind.CANONICAL, hamiltonian=qubit_hamiltonian, beta=0.0)
    with pytest.raises(EnsembleError):
        EnsembleSpec(kind=EnsembleKind.MICROCANONICAL, hamiltonian=qubit_hamiltonian, shell=(5.0, 0.1))
    with pytest.raises(EnsembleError):
        EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=qubit_hamiltonian, beta=1.0)
    with pytest.raises(EnsembleError):
        EnsembleSpec(kind=EnsembleKind.GENERAL_EXPONENTIAL, generalized=())


def test_microcanonical_examples():
    spec = EnsembleSpec(kind=EnsembleKind.MICROCANONICAL, hamiltonian=HermitianOperator.diagonal([0, 1, 1, 2]), shell=(1.0, 0.1))
    state = microcanonical(spec)
    assert state.shell_dimension == 2
    assert_allclose(state.sigma.entries, np.diag([0.0, 0.5, 0.5, 0.0]), atol=1e-12)
    assert von_neumann_entropy(state.sigma) == pytest.approx(np.log(2), abs=1e-10)

    ground = microcanonical(EnsembleSpec(kind=EnsembleKind.MICROCANONICAL, hamiltonian=HermitianOperator.diagonal([0, 1]), shell=(0.0, 0.1)))
    assert ground.shell_dimension == 1
    assert_allclose(ground.sigma.entries, np.diag([1.0, 0.0]), atol=1e-12)

    full = microcanonical(EnsembleSpec(kind=EnsembleKind.MICROCANONICAL, hamiltonian=HermitianOperator.diagonal([0, 1, 2]), shell=(1.0, 5.0)))
    assert_allclose(full.sigma.entries, np.eye(3) / 3, atol=1e-12)


def test_canonical_examples(qubit_hamiltonian):
    state = canonical(canonical_spec(qubit_hamiltonian, 1.0))
    assert_allclose(np.diag(state.sigma.entries).real, [GIBBS_GROUND, GIBBS_EXCITED], atol=1e-12)
    assert_allclose(np.diag(state.sigma.entries).real, [0.7311, 0.2689], atol=1e-4)

    cold = canonical(canonical_spec(qubit_hamiltonian, 50.0))
    assert_allclose(cold.sigma.entries, np.diag([1.0, 0.0]), atol=1e-9)


def test_canonical_free_energy_identity(rng):
    h = random_hermitian(rng, 6)
    state = canonical(canonical_spec(h, 0.8))
    energy = expectation(state.sigma, h)
    assert state.free_energy == pytest.approx(energy - von_neumann_entropy(state.sigma) / 0.8, abs=1e-9)


def test_large_beta_does_not_overflow():
    state = canonical(canonical_spec(HermitianOperator.diagonal([0.0, 1.0, 2.0]), 5000.0))
    assert np.isfinite(state.log_partition)
    assert_allclose(state.sigma.entries, np.diag([1.0, 0.0, 0.0]), atol=1e-12)


def test_grand_canonical_single_mode():
    h = HermitianOperator.diagonal([0.0, 1.0])
    n = HermitianOperator.diagonal([0.0, 1.0])
    state = grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=1.0, mu=0.5))
    z = 1.0 + np.exp(-0.5)
    assert_allclose(np.diag(state.sigma.entries).real, [1.0 / z, np.exp(-0.5) / z], atol=1e-12)
    assert state.log_partition == pytest.approx(np.log(z), abs=1e-12)


def test_grand_canonical_reduces_to_canonical_at_zero_mu(rng):
    h = HermitianOperator.diagonal(rng.uniform(0, 2, 4))
    n = HermitianOperator.diagonal([0, 1, 1, 2])
    gc = grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=1.3, mu=0.0))
    c = canonical(canonical_spec(h, 1.3))
    assert_allclose(gc.sigma.entries, c.sigma.entries, atol=1e-15)


def test_grand_potential_identity(rng):
    eps = rng.uniform(0.2, 2.0, 2)
    h = HermitianOperator.diagonal([0.0, eps[1], eps[0], eps[0] + eps[1]])
    n = HermitianOperator.diagonal([0, 1, 1, 2])
    beta, mu = 0.9, 0.4
    state = grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=beta, mu=mu))
    expected = (
        expectation(state.sigma, h)
        - von_neumann_entropy(state.sigma) / beta
        - mu * expectation(state.sigma, n)
    )
    assert state.grand_potential == pytest.approx(expected, abs=1e-9)


def test_grand_canonical_rejects_non_commuting_charges():
    h = HermitianOperator([[0.0, 1.0], [1.0, 0.0]])
    n = HermitianOperator.diagonal([0.0, 1.0])
    with pytest.raises(NonCommutingChargesError):
        grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=1.0, mu=0.1))


def test_general_exponential_reductions(rng):
    h = random_hermitian(rng, 3)
    single = general_exponential(EnsembleSpec(kind=EnsembleKind.GENERAL_EXPONENTIAL, generalized=((0.7, h),)))
    assert_allclose(single.sigma.entries, canonical(canonical_spec(h, 0.7)).sigma.entries, atol=1e-12)

    hd = HermitianOperator.diagonal([0.0, 1.0, 1.5, 2.5])
    n = HermitianOperator.diagonal([0, 1, 1, 2])
    beta, mu = 1.1, 0.3
    pairs = general_exponential(
        EnsembleSpec(kind=EnsembleKind.GENERAL_EXPONENTIAL, generalized=((beta, hd), (-beta * mu, n)))
    )
    gc = grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=hd, number=n, beta=beta, mu=mu))
    assert_allclose(pairs.sigma.entries, gc.sigma.entries, atol=1e-12)


def test_general_exponential_entropy_identity(rng):
    observables = tuple((float(rng.normal()), HermitianOperator.diagonal(rng.normal(size=5))) for _ in range(3))
    spec = EnsembleSpec(kind=EnsembleKind.GENERAL_EXPONENTIAL, generalized=observables)
    assert entropy_identity_residual(general_exponential(spec), spec) < 1e-9


def test_relative_entropy_decompositions(rng):
    h = HermitianOperator.diagonal(rng.uniform(0, 2, 4))
    n = HermitianOperator.diagonal([0, 1, 1, 2])
    beta, mu = 0.6, 0.25
    rho = random_density_matrix(rng, 4)

    sigma_c = canonical(canonical_spec(h, beta)).sigma
    expected_c = (
        -von_neumann_entropy(rho)
        + von_neumann_entropy(sigma_c)
        + beta * (expectation(rho, h) - expectation(sigma_c, h))
    )
    assert relative_entropy(rho, sigma_c) == pytest.approx(expected_c, abs=1e-9)

    sigma_gc = grand_canonical(EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=beta, mu=mu)).sigma
    expected_gc = (
        -von_neumann_entropy(rho)
        + von_neumann_entropy(sigma_gc)
        + beta * (expectation(rho, h) - expectation(sigma_gc, h))
        - beta * mu * (expectation(rho, n) - expectation(sigma_gc, n))
    )
    assert relative_entropy(rho, sigma_gc) == pytest.approx(expected_gc, abs=1e-9)


def _traceless_orthogonal(rng, dim, constraints, support=None):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    x = 0.5 * (x + x.conj().T)
    unit = np.eye(dim) if support is None else support
    x = unit @ x @ unit
    basis = [unit] + [c.entries for c in constraints]
    # Gram-Schmidt so perturbations keep trace, support and constraint expectations
    ortho = []
    for b in basis:
        for o in ortho:
            b = b - np.vdot(o, b).real * o
        ortho.append(b / np.linalg.norm(b))
    for o in ortho:
        x = x - np.vdot(o, x).real * o
    return x


def _maximum_entropy_case(kind):
    """(sigma, conserved observables, support projector) per ensemble kind."""
    h = HermitianOperator.diagonal([0.0, 0.4, 1.1, 1.7])
    n = HermitianOperator.diagonal([0, 1, 1, 2])
    if kind == "microcanonical":
        state = microcanonical(
            EnsembleSpec(kind=EnsembleKind.MICROCANONICAL, hamiltonian=HermitianOperator.diagonal([0, 1, 1, 2]), shell=(1.0, 0.1))
        )
        return state.sigma, [], np.diag([0.0, 1.0, 1.0, 0.0])
    if kind == "canonical":
        return canonical(canonical_spec(h, 1.0)).sigma, [h], None
    if kind == "grand_canonical":
        spec = EnsembleSpec(kind=EnsembleKind.GRAND_CANONICAL, hamiltonian=h, number=n, beta=1.0, mu=0.3)
        return grand_canonical(spec).sigma, [h, n], None
    hopping = np.zeros((4, 4))
    hopping[1, 2] = hopping[2, 1] = 1.0
    mixer = HermitianOperator(hopping)
    spec = EnsembleSpec(kind=EnsembleKind.GENERAL_EXPONENTIAL, generalized=((0.8, h), (0.3, n), (0.5, mixer)))
    return general_exponential(spec).sigma, [h, n, mixer], None


@pytest.mark.parametrize("kind", ["microcanonical", "canonical", "grand_canonical", "general_exponential"])
def test_reference_state_maximizes_entropy(kind):
    rng = make_rng(7)
    sigma, constraints, support = _maximum_entropy_case(kind)
    for _ in range(20):
        x = _traceless_orthogonal(rng, 4, constraints, support)
        perturbed = DensityMatrix(sigma.entries + 0.01 * x / np.linalg.norm(x))
        for c in constraints:
            assert abs(expectation(perturbed, c) - expectation(sigma, c)) < 1e-6
        assert von_neumann_entropy(perturbed) <= von_neumann_entropy(sigma) + 1e-8
    if support is not None:
        assert von_neumann_entropy(sigma) == pytest.approx(np.log(2.0), abs=1e-12)
