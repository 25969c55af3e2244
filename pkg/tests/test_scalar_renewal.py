import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import special

from app.exceptions.base import ValidationFailure
from app.exceptions.scalar import DivergenceError
from app.schemas.scalar import ReturnDistribution
from app.schemas.special import SlowlyVarying
from app.services.scalar_renewal import (
    compute_cH,
    expansion,
    higher_order_eval,
    karamata_first_order,
    karamata_ratio_report,
    log_remainder,
    log_tail_distribution,
    operator_distribution,
    power_tail_distribution,
    renewal_sequence,
    residual_diagnostics,
    tail_oscillation_report,
    two_point_closed_form,
)
from app.services.special_fn import k_max
from app.utils.fitting import log_spaced


@pytest.mark.parametrize("p", [0.2, 0.5, 0.9])
@pytest.mark.parametrize("method", ["direct", "fft"])
def test_two_point_distribution(p, method):
    dist = ReturnDistribution(f=np.array([p, 1 - p]))
    seq = renewal_sequence(dist, 500, method=method)
    np.testing.assert_allclose(seq.u, two_point_closed_form(p, 500), rtol=1e-12, atol=1e-14)


def test_fft_matches_direct():
    dist = power_tail_distribution(0.7, 3000, c=0.8)
    fast = renewal_sequence(dist, 3000)
    slow = renewal_sequence(dist, 3000, method="direct")
    np.testing.assert_allclose(fast.u, slow.u, rtol=1e-10)


def test_unknown_method_rejected():
    with pytest.raises(ValidationFailure):
        renewal_sequence(power_tail_distribution(0.5, 10), 10, method="naive")


def test_distribution_mass_checked():
    with pytest.raises(ValidationError):
        ReturnDistribution(f=np.array([0.5, 0.4]))
    dist = power_tail_distribution(0.5, 100)
    assert float(dist.tail(100)) == pytest.approx(0.1)
    assert float(dist.tail(0)) == pytest.approx(1.0)


def test_renewal_theorem_ratio():
    seq = renewal_sequence(power_tail_distribution(0.5, 10_000), 10_000)
    rows = karamata_ratio_report(seq, 0.5, SlowlyVarying(), [100, 10_000])
    assert abs(rows[-1].ratio - 1) < 0.01
    assert abs(rows[-1].ratio - 1) < abs(rows[0].ratio - 1)


@pytest.mark.parametrize("beta", [0.6, 0.75, 0.9])
def test_cH_zeta_oracle(beta):
    c_H, error = compute_cH(beta, 1.0)
    expected = -(1 + special.zeta(beta)) / special.gamma(1 - beta)
    assert c_H == pytest.approx(expected, abs=1e-8)
    assert error < 1e-8


def test_cH_domain():
    with pytest.raises(DivergenceError):
        compute_cH(0.5, 1.0)
    with pytest.raises(ValidationFailure):
        compute_cH(1.0, 1.0)


def test_cH_with_tail_correction():
    base, _ = compute_cH(0.75, 0.5)
    shifted, _ = compute_cH(0.75, 0.5, lambda n: np.where(n == 1, 0.25, 0.0), H_cutoff=10)
    assert shifted - base == pytest.approx(-0.25 / math.gamma(0.25), rel=1e-9)


def test_expansion_coefficients():
    exp = expansion(0.75, 1.0, c_H=0.5)
    assert exp.k == 2
    np.testing.assert_allclose(exp.exponents, [0.75, 0.5, 0.25])
    assert exp.d[0] == pytest.approx(1 / math.gamma(1.75))
    assert exp.C[1] == pytest.approx(0.5 / math.gamma(1.5) / math.gamma(0.25))


def test_expansion_evaluation():
    exp = expansion(0.75, 1.0, c_H=0.5)
    first = 8 / math.gamma(1.75)
    assert float(higher_order_eval(exp, 16.0, terms=1)) == pytest.approx(first)
    full = first + 0.5 / math.gamma(1.5) * 4 + 0.25 / math.gamma(1.25) * 2
    np.testing.assert_allclose(higher_order_eval(exp, [16.0, 16.0]), [full, full])


def test_karamata_first_order():
    assert float(karamata_first_order(0.5, SlowlyVarying(), 100)) == pytest.approx(20 / math.pi)


def test_higher_order_terms_improve_fit():
    beta = 0.75
    seq = renewal_sequence(power_tail_distribution(beta, 10_000), 10_000)
    exp = expansion(beta, 1.0, *compute_cH(beta, 1.0))
    full = residual_diagnostics(seq, exp, [10_000])
    first = residual_diagnostics(seq, exp, [10_000], terms=1)
    assert abs(full.rows[0].residual) < 2
    assert abs(full.rows[0].residual) < abs(first.rows[0].residual) / 5


def test_second_order_oscillation_limit():
    beta = 0.75
    seq = renewal_sequence(power_tail_distribution(beta, 10_000), 10_000)
    exp = expansion(beta, 1.0, *compute_cH(beta, 1.0))
    report = tail_oscillation_report(seq, exp, [1000, 10_000])
    assert abs(report.rows[-1].ratio - report.limit) < 0.05


def test_operator_distribution(lsv_operator, lsv_density):
    dist = operator_distribution(lsv_operator, lsv_density)
    assert dist.N == lsv_operator.N_trunc
    assert dist.f[0] == pytest.approx(lsv_density.values[32:].sum() / 128, rel=1e-10)
    assert dist.tail_mass > 0
    seq = renewal_sequence(dist, 200)
    assert np.all(seq.u > 0)



def test_renewal_counts_visits():
    n_max = 30
    dist = power_tail_distribution(0.5, n_max)
    f = np.concatenate(([0.0], dist.f))
    law = np.zeros(n_max + 1)
    law[0] = 1.0
    visits = law.copy()
    for _ in range(n_max):
        law = np.convolve(law, f)[: n_max + 1]
        visits += law
    np.testing.assert_allclose(renewal_sequence(dist, n_max).u, visits, rtol=1e-12, atol=1e-15)


def test_log_tail_distribution():
    dist = log_tail_distribution(1000, c=2.0)
    assert float(dist.tail(0)) == pytest.approx(1.0)
    assert float(dist.tail(1000)) == pytest.approx(2 / math.log(1000 + math.e**2))
    with pytest.raises(ValidationFailure):
        log_tail_distribution(1000, c=0.0)
    with pytest.raises(ValidationFailure):
        log_tail_distribution(0)


def test_log_tail_remainder_settles():
    seq = renewal_sequence(log_tail_distribution(10_000), 10_000)
    early = log_remainder(seq, 1.0, log_spaced(100, 1000))
    late = log_remainder(seq, 1.0, log_spaced(1000, 10_000))
    assert np.all(np.abs(early) < 2)
    assert np.all(np.abs(late) < 2)
    assert np.ptp(late) < np.ptp(early)


def test_expansion_depth():
    assert expansion(0.8, 1.0, c_H=0.5).k == k_max(0.8) == 3


@pytest.mark.slow
@pytest.mark.parametrize("beta", [0.4, 0.6])
def test_renewal_theorem_desk_scale(beta):
    seq = renewal_sequence(power_tail_distribution(beta, 1_000_000), 1_000_000)
    rows = karamata_ratio_report(seq, beta, SlowlyVarying(), [10_000, 100_000, 1_000_000])
    deviations = [abs(row.ratio - 1) for row in rows]
    assert deviations[-1] < 0.03
    assert deviations[0] > deviations[1] > deviations[2]


@pytest.mark.slow
def test_expansion_slopes_desk_scale():
    beta = 0.75
    seq = renewal_sequence(power_tail_distribution(beta, 1_000_000), 1_000_000)
    exp = expansion(beta, 1.0, *compute_cH(beta, 1.0))
    ns = log_spaced(1000, 1_000_000)
    full = residual_diagnostics(seq, exp, ns)
    without_second = exp.model_copy(update={"d": [exp.d[0], 0.0, *exp.d[2:]]})
    dropped = residual_diagnostics(seq, without_second, ns)
    assert abs(full.slope.slope) < 0.1
    assert dropped.slope.slope == pytest.approx(0.5, abs=0.05)
