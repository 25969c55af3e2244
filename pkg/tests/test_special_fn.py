import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions.base import ValidationFailure
from app.exceptions.special import GammaPoleError
from app.schemas.special import DeHaanModel, SlowlyVarying, SlowlyVaryingKind
from app.services.special_fn import (
    d_beta,
    de_haan_report,
    ell_tilde,
    gamma,
    k_max,
    normalization,
    return_sequence,
    slow_variation_report,
)


def test_gamma_half():
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", [0, -1, -7])
def test_gamma_poles(x):
    with pytest.raises(GammaPoleError):
        gamma(x)


def test_d_beta_values():
    assert d_beta(0.5) == pytest.approx(math.pi / 2, rel=1e-14)
    assert d_beta(0) == 1.0
    assert d_beta(1) == 1.0
    with pytest.raises(ValidationFailure):
        d_beta(1.5)


@pytest.mark.parametrize("beta, expected", [(0.5, 0), (0.6, 1), (0.75, 2), (0.8, 3)])
def test_k_max(beta, expected):
    assert k_max(beta) == expected


@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_k_max_domain(beta):
    with pytest.raises(ValidationFailure):
        k_max(beta)


def test_return_sequence_regular_case():
    constants = normalization(0.5)
    assert float(return_sequence(constants, 100)) == pytest.approx(20 / math.pi, rel=1e-14)


def test_return_sequence_beta_one_uses_harmonic_sum():
    constants = normalization(1.0)
    harmonic = sum(1 / j for j in range(1, 101))
    assert float(return_sequence(constants, 100)) == pytest.approx(100 / harmonic, rel=1e-12)
    assert ell_tilde(SlowlyVarying(), 100) == pytest.approx(harmonic, rel=1e-12)


def test_inverse_log_is_slowly_varying():
    report = slow_variation_report(SlowlyVarying(kind=SlowlyVaryingKind.INVERSE_LOG, c=0.3))
    assert report.passed
    assert report.last_decade_deviation < report.first_decade_deviation


def test_de_haan_constant_bounded_for_inverse_log():
    base = SlowlyVarying(kind=SlowlyVaryingKind.INVERSE_LOG, c=0.3)
    auxiliary = SlowlyVarying(kind=SlowlyVaryingKind.LOG_POWER, c=0.3, p=-2.0)
    report = de_haan_report(DeHaanModel(base=base, auxiliary=auxiliary))
    assert 0 < report.constant < 2


def test_tabulated_model_interpolates_in_log_log():
    ell = SlowlyVarying(kind=SlowlyVaryingKind.TABULATED, table_x=[10.0, 1000.0], table_y=[1.0, 100.0])
    assert float(ell(100.0)) == pytest.approx(10.0, rel=1e-12)
    np.testing.assert_allclose(ell([10.0, 1000.0]), [1.0, 100.0])


def test_tabulated_model_rejects_unsorted_nodes():
    with pytest.raises(ValidationError):
        SlowlyVarying(kind=SlowlyVaryingKind.TABULATED, table_x=[10.0, 5.0], table_y=[1.0, 2.0])


def test_gamma_reflection():
    for x in np.linspace(0.05, 0.95, 19):
        assert gamma(x) * gamma(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-13)


def test_k_max_is_non_decreasing():
    depths = [k_max(beta) for beta in np.linspace(0.05, 0.95, 91)]
    assert depths[0] == 0
    assert all(low <= high for low, high in zip(depths, depths[1:]))
