"""
Tests for channel construction, application and verification.
"""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.backend.app.core.exceptions import (
    ChannelContractError,
    DimensionMismatchError,
    FactorizationError,
)
from src.backend.app.services import channels as ch
from src.backend.app.services.ensembles import gibbs_state
from src.backend.app.services.spectra import HermitianOperator
from src.backend.app.services.states import (
    DensityMatrix,
    partial_trace,
    random_density_matrix,
    random_unitary,
    relative_entropy,
    tensor_all,
    von_neumann_entropy,
)

from .conftest import GIBBS_EXCITED, GIBBS_GROUND, LN2, random_hermitian


def test_measurement_reset_lowers_entropy_and_is_not_unital():
    channel = ch.measurement_reset()
    mixed = DensityMatrix.maximally_mixed(2)
    out = channel(mixed)
    assert von_neumann_entropy(mixed) == pytest.approx(LN2, abs=1e-12)
    assert von_neumann_entropy(out) == pytest.approx(0.0, abs=1e-12)
    assert_allclose(out.entries, np.diag([1.0, 0.0]), atol=1e-12)

    report = channel.verify()
    assert report.trace_preserving_pass
    assert report.completely_positive_pass
    assert report.unital == pytest.approx(1.0, abs=1e-12)
    assert report.unital_pass is False


def test_depolarizing_full_strength_outputs_maximally_mixed(rng):
    channel = ch.depolarizing(1.0, 3)
    out = channel(random_density_matrix(rng, 3))
    assert_allclose(out.entries, np.eye(3) / 3, atol=1e-12)
    assert channel.verify().unital == pytest.approx(0.0, abs=1e-12)


def test_verify_unitary(rng):
    report = ch.unitary(random_unitary(rng, 4)).verify()
    assert report.trace_preserving < 1e-12
    assert report.completely_positive > -1e-12
    assert report.unital < 1e-12
    assert report.passed


def test_verify_partial_replacement_fixed_point(rng):
    sigma = random_density_matrix(rng, 3)
    channel = ch.partial_replacement(sigma, 0.4)
    report = channel.verify(fixed_point=sigma)
    assert report.fixed_point < 1e-10
    assert report.fixed_point_pass
    assert report.passed

    other = random_density_matrix(rng, 3)
    assert channel.verify(fixed_point=other).fixed_point_pass is False


def test_verify_flags_trace_deficit():
    channel = ch.from_kraus([np.eye(2) / np.sqrt(2)], check=False)
    report = channel.verify()
    assert report.trace_preserving == pytest.approx(0.5, abs=1e-12)
    assert not report.trace_preserving_pass
    assert not report.passed


def test_from_kraus_rejects_non_trace_preserving():
    with pytest.raises(ChannelContractError):
        ch.from_kraus([2.0 * np.eye(2)])


def test_thermal_qubit_fixes_and_attracts_gibbs_state():
    channel = ch.thermal_qubit(beta=1.0, gap=1.0, coupling=0.3)
    gibbs = np.diag([GIBBS_GROUND, GIBBS_EXCITED])
    assert_allclose(channel.apply_matrix(gibbs), gibbs, atol=1e-14)

    rho = DensityMatrix.basis(1, 2)
    for _ in range(200):
        rho = channel(rho)
    assert_allclose(rho.entries, gibbs, atol=1e-12)


def test_thermal_qubit_zero_coupling_is_identity(rng):
    channel = ch.thermal_qubit(beta=2.0, gap=0.5, coupling=0.0)
    assert channel.kraus_count() == 2
    rho = random_density_matrix(rng, 2)
    assert_allclose(channel(rho).entries, rho.entries, atol=1e-14)


def test_dephasing_is_idempotent_and_fixes_gibbs(rng):
    h = HermitianOperator.diagonal([0.0, 1.0, 1.0, 2.5])
    channel = ch.dephasing(h)
    rho = random_density_matrix(rng, 4)
    once = channel(rho)
    twice = channel(once)
    assert_allclose(twice.entries, once.entries, atol=1e-12)
    # degenerate block keeps its coherence
    assert abs(once.entries[1, 2]) == pytest.approx(abs(rho.entries[1, 2]), abs=1e-12)
    assert abs(once.entries[0, 1]) < 1e-12
    assert channel.verify(fixed_point=gibbs_state(h, 0.7)).fixed_point_pass


def test_evolution_fixes_gibbs_state(rng):
    h = random_hermitian(rng, 4)
    channel = ch.hamiltonian_evolution(h, 1.7)
    assert channel.is_unitary()
    assert channel.fixed_point_residual(gibbs_state(h, 0.9)) < 1e-10


def test_unital_channels_do_not_lower_entropy(rng):
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        channel = ch.random_unital_channel(rng, dim, n_unitaries=int(rng.integers(1, 4)))
        rho = random_density_matrix(rng, dim, rank=int(rng.integers(1, dim + 1)))
        assert von_neumann_entropy(channel(rho)) >= von_neumann_entropy(rho) - 1e-10


def test_compose_and_mix_stay_cptp(rng):
    first = ch.random_channel(rng, 3)
    second = ch.depolarizing(0.3, 3)
    composed = ch.compose([first, second])
    assert composed.verify().passed
    assert composed.kraus_count() == first.kraus_count() * second.kraus_count()

    rho = random_density_matrix(rng, 3)
    assert_allclose(composed(rho).entries, second(first(rho)).entries, atol=1e-12)
    dense = ch.KrausChannel(composed.kraus_operators())
    assert_allclose(dense.apply_matrix(rho.entries), composed.apply_matrix(rho.entries), atol=1e-12)

    mixed = ch.mix([0.25, 0.75], [first, second])
    assert mixed.verify().passed
    expected = 0.25 * first(rho).entries + 0.75 * second(rho).entries
    assert_allclose(mixed(rho).entries, expected, atol=1e-12)


def test_compose_and_mix_reject_bad_inputs():
    with pytest.raises(DimensionMismatchError):
        ch.compose([ch.identity(2), ch.identity(3)])
    with pytest.raises(ChannelContractError):
        ch.mix([0.5, 0.6], [ch.identity(2), ch.identity(2)])
    with pytest.raises(ChannelContractError):
        ch.mix([1.0], [ch.identity(2), ch.identity(2)])


def test_embedded_channel_matches_dense_kraus(rng):
    dims = (2, 2, 2)
    local = ch.thermal_qubit(beta=1.0, gap=1.0, coupling=0.6)
    embedded = ch.embed(local, 1, dims)
    rho = random_density_matrix(rng, 8, factor_dims=dims)
    dense = ch.KrausChannel(embedded.kraus_operators())
    assert_allclose(embedded.apply_matrix(rho.entries), dense.apply_matrix(rho.entries), atol=1e-12)
    assert embedded.sites == (1,)
    assert embedded(rho).factor_dims == dims

    expected = np.kron(np.kron(np.eye(2), local.kraus[0]), np.eye(2))
    assert_allclose(embedded.kraus_operators()[0], expected, atol=1e-15)


def test_embedded_two_site_gate_spans_factors(rng):
    dims = (2, 2, 2, 2)
    gate = ch.unitary(random_unitary(rng, 4))
    embedded = ch.embed(gate, 2, dims)
    assert embedded.sites == (2, 3)
    rho = random_density_matrix(rng, 16, factor_dims=dims)
    expected = np.kron(np.eye(4), gate.kraus[0])
    assert_allclose(embedded.apply_matrix(rho.entries), expected @ rho.entries @ expected.conj().T, atol=1e-12)
    assert_allclose(
        partial_trace(embedded(rho), [0, 1]).entries,
        partial_trace(rho, [0, 1]).entries,
        atol=1e-12,
    )


def test_embed_rejects_bad_factorization():
    with pytest.raises(FactorizationError):
        ch.embed(ch.identity(4), 2, (2, 2, 2))
    with pytest.raises(FactorizationError):
        ch.embed(ch.identity(3), 0, (2, 2))
    with pytest.raises(FactorizationError):
        ch.embed(ch.identity(2), 5, (2, 2))


def test_embed_distributes_over_compose_and_mix():
    local = ch.compose([ch.thermal_qubit(1.0, 1.0, 0.5), ch.dephasing(np.diag([0.0, 1.0]))])
    embedded = ch.embed(local, 0, (2, 2))
    assert isinstance(embedded, ch.ComposedChannel)
    assert all(isinstance(stage, ch.EmbeddedChannel) for stage in embedded.stages)

    mixed = ch.embed(ch.mix([0.5, 0.5], [ch.identity(2), ch.measurement_reset()]), 1, (2, 2))
    assert isinstance(mixed, ch.MixedChannel)
    assert mixed.verify().passed


def test_discard_matches_partial_trace(rng):
    dims = (2, 3, 2)
    rho = random_density_matrix(rng, 12, factor_dims=dims)
    for keep in ([0], [1], [0, 2], [1, 2]):
        channel = ch.discard(dims, keep)
        out = channel(rho)
        assert_allclose(out.entries, partial_trace(rho, keep).entries, atol=1e-12)
        assert out.factor_dims == tuple(dims[k] for k in keep)
        assert channel.verify().trace_preserving < 1e-12


def test_discard_rejects_invalid_keep():
    with pytest.raises(FactorizationError):
        ch.discard((2, 2), [])
    with pytest.raises(FactorizationError):
        ch.discard((2, 2), [3])


def test_random_channel_is_cptp(rng):
    for dim in (2, 3, 4):
        channel = ch.random_channel(rng, dim, ancilla_dim=3)
        report = channel.verify()
        assert report.passed
        assert channel.kraus_count() == 3


def test_choi_of_identity():
    choi = ch.identity(2).choi()
    vec = np.eye(2).reshape(-1)
    assert_allclose(choi, np.outer(vec, vec), atol=1e-15)


def test_apply_rejects_wrong_dimension():
    with pytest.raises(DimensionMismatchError):
        ch.identity(2)(DensityMatrix.maximally_mixed(3))


def test_verify_reports_fixed_point_of_wrong_shape():
    report = ch.identity(2).verify(DensityMatrix.maximally_mixed(3))
    assert report.fixed_point == np.inf
    assert report.fixed_point_pass is False
    assert report.trace_preserving_pass and report.completely_positive_pass
    assert not report.passed
    assert "Infinity" in report.model_dump_json()


@pytest.mark.parametrize(
    "build",
    [
        lambda: ch.depolarizing(1.5, 2),
        lambda: ch.partial_replacement(DensityMatrix.maximally_mixed(2), -0.1),
        lambda: ch.thermal_qubit(-1.0, 1.0, 0.5),
        lambda: ch.thermal_qubit(1.0, 1.0, 1.2),
        lambda: ch.unitary(np.array([[1.0, 1.0], [0.0, 1.0]])),
        lambda: ch.unitary(np.ones((2, 3))),
    ],
)
def test_constructor_parameter_errors(build):
    with pytest.raises(ChannelContractError):
        build()


def test_unital_channel_contracts_relative_entropy_to_mixed(rng):
    mixed = DensityMatrix.maximally_mixed(3)
    for _ in range(20):
        channel = ch.random_unital_channel(rng, 3)
        rho = random_density_matrix(rng, 3)
        assert relative_entropy(channel(rho), mixed) <= relative_entropy(rho, mixed) + 1e-10


def test_tensor_of_local_channels(rng):
    a, b = random_density_matrix(rng, 2), random_density_matrix(rng, 2)
    product = tensor_all([a, b])
    step = ch.compose([ch.embed(ch.measurement_reset(), 0, (2, 2)), ch.embed(ch.depolarizing(1.0, 2), 1, (2, 2))])
    out = step(product)
    assert_allclose(out.entries, np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2), atol=1e-12)
