from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from qig.algebra import HermitianElement, MatrixAlgebra, PositiveFunctional, operator_norm
from qig.channels import (
    Channel,
    adjointness_residual,
    depolarizing_channel,
    embedding_channel,
    f_monotonicity_residual,
    identity_channel,
    lp_contraction_residual,
    measurement_channel,
    partial_trace_channel,
    petz_double_dual_residual,
    petz_dual,
    recovery,
    recovery_channel,
    recovery_roundtrip_residual,
    restrict_to_support,
    sufficiency_report,
    transport_family,
)
from qig.errors import DomainError, QigValidationError, QigWarning
from qig.schema import ChannelPayload, load_state
from qig.testing.constructions import first_factor, product_state, sufficiency_case
from qig.testing.sampling import instance_rng, random_channel, random_hermitian, random_state

from tests.scenarios.states import QUBIT, qubit_element, qubit_state

INPUTS = Path(__file__).resolve().parents[1] / "inputs"


def test_channel_rejects_non_trace_preserving_kraus():
    with pytest.raises(QigValidationError) as excinfo:
        Channel(QUBIT, QUBIT, (np.eye(2) * 0.9,))
    assert excinfo.value.field == "kraus"


def test_channel_rejects_wrong_kraus_shape():
    with pytest.raises(QigValidationError):
        Channel(QUBIT, QUBIT, (np.eye(3),))


def test_adjoint_is_the_trace_dual():
    rng = instance_rng(50)
    source = MatrixAlgebra((2, 1))
    target = MatrixAlgebra((2,))
    channel = random_channel(rng, source, target)
    assert channel.trace_preservation_defect() < 1e-12
    for _ in range(5):
        h = random_state(rng, source)
        a = random_hermitian(rng, target)
        assert adjointness_residual(channel, h, a) < 1e-12
    assert channel.apply(random_state(rng, source)).trace == pytest.approx(1.0)


def test_partial_trace_of_product_state():
    rho1 = qubit_state()
    rho2 = PositiveFunctional(QUBIT, (np.diag([0.6, 0.4]),))
    rho = product_state(rho1, rho2)
    assert partial_trace_channel(2, 2).apply(rho).allclose(rho1, atol=1e-12)
    reference = product_state(qubit_state(0.7, 0.1), rho2)
    assert reference.allclose(load_state((INPUTS / "rho_product.json").read_text()), atol=1e-12)


def test_identity_channel_petz_dual_is_identity():
    rho = qubit_state()
    h = qubit_element()
    assert petz_dual(identity_channel(QUBIT), rho, h).allclose(h, atol=1e-12)


def test_partial_trace_petz_dual_on_product_perturbations():
    rho = product_state(qubit_state(), PositiveFunctional(QUBIT, (np.diag([0.6, 0.4]),)))
    h1 = qubit_element()
    dual = petz_dual(partial_trace_channel(2, 2), rho, first_factor(h1, 2))
    assert dual.allclose(h1, atol=1e-10)


def test_partial_trace_recovery_appends_the_reference_factor():
    rho2 = PositiveFunctional(QUBIT, (np.diag([0.6, 0.4]),))
    rho = product_state(qubit_state(), rho2)
    sigma = qubit_state(0.45, 0.1j)
    recovered = recovery(partial_trace_channel(2, 2), rho, sigma)
    assert recovered.allclose(product_state(sigma, rho2), atol=1e-10)


def test_channel_payload_file_matches_partial_trace():
    payload = ChannelPayload.model_validate_json((INPUTS / "partial_trace_2x2.json").read_text())
    channel = payload.to_channel()
    expected = partial_trace_channel(2, 2)
    for ours, theirs in zip(channel.kraus, expected.kraus):
        np.testing.assert_allclose(ours, theirs)


def test_recovery_channel_is_a_channel_back_to_the_source():
    rho = random_state(instance_rng(51), MatrixAlgebra.full(3))
    channel = random_channel(instance_rng(52), rho.algebra, MatrixAlgebra.full(2))
    back = recovery_channel(channel, rho)
    assert back.source == MatrixAlgebra.full(2)
    assert back.target == rho.algebra
    assert back.apply(channel.apply(rho)).allclose(rho, atol=1e-10)


def test_petz_double_dual_and_roundtrip_on_random_channels():
    rng = instance_rng(53)
    for _ in range(5):
        source = MatrixAlgebra.full(3)
        target = MatrixAlgebra((2, 1))
        channel = random_channel(rng, source, target)
        rho = random_state(rng, source)
        b = random_hermitian(rng, target)
        assert petz_double_dual_residual(channel, rho, b) < 1e-9
        assert recovery_roundtrip_residual(channel, rho, rho) < 1e-9


def test_data_processing_and_contraction():
    rng = instance_rng(54)
    source = MatrixAlgebra.full(3)
    for _ in range(5):
        channel = random_channel(rng, source, MatrixAlgebra.full(2))
        rho = random_state(rng, source)
        omega = random_state(rng, source)
        assert f_monotonicity_residual(channel, rho, omega) >= -1e-10
        for p in (1.0, 1.5, 2.0, 4.0, math.inf):
            assert lp_contraction_residual(channel, rho, omega, p) <= 1e-8


def test_singular_image_is_restricted_with_a_warning():
    channel = embedding_channel(QUBIT, 1)
    rho = qubit_state()
    with pytest.warns(QigWarning, match="restricted"):
        restricted = restrict_to_support(channel, rho)
    assert restricted.restricted
    assert restricted.channel.target == QUBIT
    image = channel.apply(rho)
    assert restricted.lift(restricted.compress(image)).allclose(image, atol=1e-12)


def test_petz_dual_on_singular_image_lives_on_the_support():
    channel = embedding_channel(QUBIT, 1)
    rho = qubit_state()
    with pytest.warns(QigWarning, match="restricted"):
        one = petz_dual(channel, rho, QUBIT.identity())
    assert one.algebra == QUBIT
    assert one.allclose(QUBIT.identity(), atol=1e-10)
    lifted = restrict_to_support(channel, rho, warn=False).lift(one)
    assert lifted.algebra == channel.target
    assert lifted.tr().real == pytest.approx(2.0)


def test_petz_dual_without_restriction_needs_faithful_image():
    with pytest.raises(DomainError):
        petz_dual(embedding_channel(QUBIT, 1), qubit_state(), qubit_element(), restrict=False)


def test_petz_dual_needs_faithful_rho():
    rho = PositiveFunctional(QUBIT, (np.diag([1.0, 0.0]),))
    with pytest.raises(DomainError):
        petz_dual(identity_channel(QUBIT), rho, qubit_element())


@pytest.mark.parametrize("name", ["identity", "partial_trace", "embedding"])
def test_sufficient_constructions_pass_every_certificate(name):
    case = sufficiency_case(name, instance_rng(60), 2)
    for h in case.family:
        report = sufficiency_report(case.channel, case.rho, h)
        assert report.sufficient, report.flags()
        assert report.consistent
        assert report.max_residual < 1e-8


def test_sufficiency_extends_to_the_span_of_the_family():
    case = sufficiency_case("partial_trace", instance_rng(64), 2, size=3)
    f0, f1, f2 = case.family
    report = sufficiency_report(case.channel, case.rho, f0 * 0.7 - f1 * 1.3 + f2 * 0.2)
    assert report.sufficient, report.flags()
    assert report.max_residual < 1e-8


@pytest.mark.parametrize("name", ["depolarizing", "measurement"])
def test_insufficient_constructions_fail_every_certificate(name):
    case = sufficiency_case(name, instance_rng(61), 2)
    for h in case.family:
        report = sufficiency_report(case.channel, case.rho, h)
        assert not any(report.flags().values()), report.flags()
        assert report.consistent


def test_unknown_construction_is_rejected():
    with pytest.raises(QigValidationError):
        sufficiency_case("amplitude_damping", instance_rng(0), 2)


def test_transport_family_on_partial_trace():
    case = sufficiency_case("partial_trace", instance_rng(62), 2, size=3)
    moved = transport_family(case.channel, case.rho, case.family, with_norms=False)
    assert len(moved) == 3
    for item in moved:
        assert item.sufficient
        assert math.isnan(item.norm_residual)
        assert item.transported.algebra == QUBIT


def test_transport_family_preserves_exp_norms_for_the_identity():
    rho = qubit_state()
    moved = transport_family(identity_channel(QUBIT), rho, [qubit_element()])
    assert moved[0].norm_residual < 1e-6


def test_depolarizing_erases_perturbations():
    channel = depolarizing_channel(2)
    rho = qubit_state()
    image = channel.apply(rho)
    assert image.allclose(PositiveFunctional(QUBIT, (np.eye(2) * 0.5,)), atol=1e-12)
    assert operator_norm(petz_dual(channel, rho, qubit_element())) < 1.0


def test_measurement_lands_on_the_diagonal_algebra():
    channel = measurement_channel(2)
    image = channel.apply(qubit_state())
    assert image.algebra.is_commutative
    assert [b[0, 0].real for b in image.blocks] == pytest.approx([0.7, 0.3])


def test_depolarizing_weight_is_validated():
    with pytest.raises(QigValidationError):
        depolarizing_channel(2, 1.5)


def test_petz_dual_is_unital_and_keeps_hermitian_kind():
    rng = instance_rng(63)
    rho = random_state(rng, MatrixAlgebra.full(3))
    channel = random_channel(rng, rho.algebra, MatrixAlgebra.full(2))
    one = petz_dual(channel, rho, rho.algebra.identity())
    assert isinstance(one, HermitianElement)
    assert one.allclose(MatrixAlgebra.full(2).identity(), atol=1e-10)
