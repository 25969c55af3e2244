import numpy as np
import pytest

from app.exceptions.maps import SupportError
from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.exceptions.operators import EscapeError, MassDeficitError, MonotonicityError
from app.schemas.maps import MapFamily, MapSpec
from app.schemas.operators import GridObservable, YGrid
from app.services.induced_operator import (
    R_of_z,
    assemble_Rn,
    branch,
    captured_mass,
    closed_operator,
    decomposition_residual,
    dual_ergodic_report,
    extend_density,
    first_order_law,
    full_map_L,
    invariant_density,
    ladder_mesh,
    ladder_observable,
    ladder_operator,
    measure_deficit,
    monotone_violation,
    renewal_identity_residual,
    renewal_Tn,
    resolvent_path,
    restricted_iterates,
    scalar_consistency,
    spectral_data,
    spread_push,
    spread_report,
    y_observable,
)
from app.services.maps import return_time_tail, tail_model
from app.services.scalar_renewal import operator_distribution


def test_captured_mass_matches_deficit(lsv_operator):
    assert captured_mass(lsv_operator) == pytest.approx(1 - lsv_operator.mass_deficit, abs=1e-10)
    assert lsv_operator.mass_deficit == lsv_operator.tails.x[-2]


def test_branches_sum_to_R_of_one(lsv_operator):
    total = sum(branch(lsv_operator, n) for n in range(1, lsv_operator.N_trunc + 1))
    np.testing.assert_allclose(total.toarray(), R_of_z(lsv_operator, 1.0).toarray(), atol=1e-12)
    assert branch(lsv_operator, lsv_operator.N_trunc + 1).nnz == 0


def test_large_truncation_loss_is_rejected(lsv_spec, grid):
    with pytest.raises(MassDeficitError):
        assemble_Rn(lsv_spec, grid, 1)


def test_doubling_density_is_uniform():
    op = assemble_Rn(MapSpec(family=MapFamily.DOUBLING), YGrid(M=32), 1)
    density = invariant_density(op)
    np.testing.assert_allclose(density.values, 2.0, rtol=1e-12)


def test_closed_operator_preserves_mass(lsv_operator):
    x = np.linspace(1.0, 3.0, lsv_operator.grid.M)
    image = closed_operator(lsv_operator).matvec(x)
    assert image.sum() == pytest.approx(x.sum(), rel=1e-10)


def test_invariant_density_normalized(lsv_operator, lsv_density):
    h = lsv_density.values
    assert np.all(h > 0)
    assert h.sum() * lsv_operator.grid.width == pytest.approx(1.0, rel=1e-12)
    assert h[0] > h[-1]
    image = closed_operator(lsv_operator).matvec(h)
    assert np.abs(image - h).sum() * lsv_operator.grid.width < 1e-9


def test_spectral_data_real_z(lsv_operator, lsv_density):
    data = spectral_data(lsv_operator, 0.9, lsv_density)
    assert 0 < data.lam.real < 1
    assert abs(data.lam.imag) < 1e-12
    assert data.eigengap >= 0.05
    assert data.residual < 1e-9


def test_first_order_eigenvalue_law(lsv_spec, lsv_operator, lsv_density):
    model = tail_model(lsv_spec, lsv_density, lsv_operator.tails)
    rows = first_order_law(lsv_operator, lsv_density, model, [0.01])
    assert 0.8 < rows[0].ratio < 1.2


def test_resolvent_approaches_projector(lsv_spec, lsv_operator, lsv_density):
    model = tail_model(lsv_spec, lsv_density, lsv_operator.tails)
    rows = resolvent_path(lsv_operator, lsv_density, model, [(0.1, 0.0), (0.01, 0.0), (0.01, 0.01)])
    assert rows[1].deviation < rows[0].deviation
    assert all(np.isfinite(row.deviation) for row in rows)


def test_mu_form_starts_at_observable(lsv_operator, lsv_density):
    acc = renewal_Tn(lsv_operator, y_observable(lsv_operator.grid), 5, lsv_density)
    np.testing.assert_allclose(acc.Tn[0], 1.0)
    assert acc.S.shape == (6, lsv_operator.grid.M)


def test_renewal_matches_restricted_full_map(lsv_spec, lsv_operator):
    K = 5
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, K, lsv_operator.tails)
    v = y_observable(lsv_operator.grid, lambda x: 1 + x)
    direct = restricted_iterates(lsv_spec, mesh, v, K + 1)
    acc = renewal_Tn(lsv_operator, v, K + 1)
    np.testing.assert_allclose(acc.W, direct, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("z", [0.5, 0.9, 0.9 * np.exp(1j * np.pi / 7)])
def test_renewal_identity(lsv_operator, z):
    acc = renewal_Tn(lsv_operator, y_observable(lsv_operator.grid), 400)
    check = renewal_identity_residual(lsv_operator, acc, z)
    assert check.residual <= check.bound


def test_decomposition_identity(lsv_operator, lsv_density):
    acc = renewal_Tn(lsv_operator, y_observable(lsv_operator.grid), 80)
    check = decomposition_residual(lsv_operator, acc, 0.5, lsv_density)
    assert check.residual <= check.bound + 1e-8


def test_dual_ergodic_first_order(lsv_spec, lsv_operator, lsv_density):
    report = dual_ergodic_report(lsv_spec, lsv_operator, y_observable(lsv_operator.grid), 300, lsv_density)
    assert report.integral == pytest.approx(1.0, rel=1e-12)
    first, last = report.rows[0], report.rows[-1]
    assert last.first_order_deviation < first.first_order_deviation
    assert all(np.isfinite(row.higher_order_residual) for row in report.rows)


def test_extended_density_agrees_on_Y(lsv_spec, lsv_operator, lsv_density):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 3, lsv_operator.tails)
    extended = extend_density(mesh, lsv_density)
    np.testing.assert_array_equal(extended.values[: lsv_operator.grid.M], lsv_density.values)
    assert np.all(extended.values >= 0)
    assert extended.support == (mesh.delta, 1.0)


def test_spread_push_conserves_mass(lsv_spec, lsv_operator):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 3, lsv_operator.tails)
    v = ladder_observable(mesh, lambda x: 1 + x, (mesh.delta, 1.0))
    terms = spread_push(lsv_spec, mesh, v)
    assert len(terms) == 4
    total = sum(term.values.sum() for term in terms) * lsv_operator.grid.width
    assert total == pytest.approx(float(v.values @ mesh.widths), rel=1e-12)
    assert len(spread_push(lsv_spec, mesh, v, K=1)) == 2


def test_spread_sums(lsv_spec, lsv_operator, lsv_density):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 3, lsv_operator.tails)
    v = ladder_observable(mesh, np.ones_like, (mesh.delta, 1.0))
    S, integral = spread_report(lsv_spec, lsv_operator, mesh, v, 50, lsv_density)
    assert S.shape == (51, lsv_operator.grid.M)
    assert np.all(np.isfinite(S))
    assert integral > 1.0
    assert np.all(np.diff(S, axis=0) >= 0)


def test_observable_below_ladder_floor(lsv_spec, lsv_operator):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 2, lsv_operator.tails)
    with pytest.raises(SupportError):
        ladder_observable(mesh, np.ones_like, (mesh.delta / 2, 1.0))
    with pytest.raises(SupportError):
        ladder_observable(mesh, np.ones_like, (0.0, 1.0))


def test_full_map_reports_escape(lsv_spec, lsv_operator):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 2, lsv_operator.tails)
    v = GridObservable(values=np.ones(mesh.n_cells))
    with pytest.raises(EscapeError):
        full_map_L(lsv_spec, mesh, v)


def test_doubling_renewal_keeps_constants():
    op = assemble_Rn(MapSpec(family=MapFamily.DOUBLING), YGrid(M=32), 1)
    acc = renewal_Tn(op, y_observable(op.grid), 20, invariant_density(op))
    np.testing.assert_allclose(acc.Tn, 1.0, rtol=1e-12)


def test_zero_observable_gives_zero_rows(lsv_spec, lsv_operator, lsv_density):
    v = y_observable(lsv_operator.grid, values=np.zeros(lsv_operator.grid.M))
    report = dual_ergodic_report(lsv_spec, lsv_operator, v, 100, lsv_density)
    assert report.integral == 0
    for row in report.rows:
        assert row.first_order_deviation == 0
        assert row.higher_order_residual == 0
        assert row.remainder == 0


def test_lsv_density_is_non_increasing(lsv_density):
    assert monotone_violation(lsv_density.values) <= settings.MONOTONE_TOL


def test_monotone_violation_values():
    assert monotone_violation(np.array([3.0, 2.0, 1.0])) == 0
    assert monotone_violation(np.array([1.0, 2.0, 1.5])) == 0.5


def test_rising_density_is_rejected(lsv_operator, monkeypatch):
    monkeypatch.setattr(settings, "MONOTONE_TOL", -1.0)
    with pytest.raises(MonotonicityError):
        invariant_density(lsv_operator)


def test_measure_deficit_is_truncated_tail(lsv_spec, lsv_operator, lsv_density):
    deficit = measure_deficit(lsv_operator, lsv_density)
    assert 0 < deficit < settings.MASS_DEFICIT_BOUND
    tail = return_time_tail(lsv_spec, lsv_density, [lsv_operator.N_trunc], lsv_operator.tails)
    assert deficit == pytest.approx(float(tail[0]), rel=1e-10)
    dist = operator_distribution(lsv_operator, lsv_density)
    assert dist.tail_mass == pytest.approx(deficit, rel=1e-8)


def test_lsv0_operator_keeps_mass_in_truncated_branches(lsv0_spec):
    op = assemble_Rn(lsv0_spec, YGrid(M=64), 4000)
    density = invariant_density(op)
    assert measure_deficit(op, density) == pytest.approx(1.0, abs=1e-8)
    tail = return_time_tail(lsv0_spec, density, [1, 100, 4000], op.tails)
    np.testing.assert_allclose(tail, 1.0, atol=1e-8)
    with pytest.raises(MassDeficitError):
        dual_ergodic_report(lsv0_spec, op, y_observable(op.grid), 100, density)
    with pytest.raises(MassDeficitError):
        operator_distribution(op, density)


def test_scalar_consistency_first_returns(lsv_operator, lsv_density):
    rows = scalar_consistency(lsv_operator, lsv_density, 300)
    assert rows[0].relative_gap < 1e-12
    assert rows[1].relative_gap < 1e-12
    gaps = [row.relative_gap for row in rows]
    assert max(gaps) < 0.1
    assert gaps[-1] < max(gaps)


def test_full_map_preserves_integral(lsv_spec, lsv_operator):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 4, lsv_operator.tails)
    v = ladder_observable(mesh, lambda x: 1 + x, (mesh.delta, 1.0))
    image = full_map_L(lsv_spec, mesh, v, returns=lsv_operator)
    assert float(image.values @ mesh.widths) == pytest.approx(float(v.values @ mesh.widths), rel=1e-12)


def test_extended_density_is_invariant(lsv_spec, lsv_operator, lsv_density):
    mesh = ladder_mesh(lsv_spec, lsv_operator.grid, 5, lsv_operator.tails)
    ladder = ladder_operator(mesh)
    extended = extend_density(mesh, lsv_density, ladder)
    image = full_map_L(lsv_spec, mesh, extended, ladder=ladder, returns=lsv_operator)
    np.testing.assert_allclose(image.values, extended.values, rtol=1e-7, atol=1e-7)


def test_full_map_rejects_foreign_returns(lsv_spec, lsv_operator):
    mesh = ladder_mesh(lsv_spec, YGrid(M=32), 2, lsv_operator.tails)
    v = ladder_observable(mesh, np.ones_like, (mesh.delta, 1.0))
    with pytest.raises(ValidationFailure):
        full_map_L(lsv_spec, mesh, v, returns=lsv_operator)


@pytest.mark.slow
def test_first_order_law_desk_scale(lsv_spec, desk_operator, desk_density):
    model = tail_model(lsv_spec, desk_density, desk_operator.tails)
    rows = first_order_law(desk_operator, desk_density, model, [0.01, 0.002])
    assert abs(rows[-1].ratio - 1) < 0.05


@pytest.mark.slow
def test_first_order_deviation_decreases_desk_scale(lsv_spec, desk_operator, desk_density):
    v = y_observable(desk_operator.grid)
    report = dual_ergodic_report(lsv_spec, desk_operator, v, 2000, desk_density, ns=[100, 1000, 2000])
    deviations = [row.first_order_deviation for row in report.rows]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[-1] < 0.03


@pytest.mark.slow
def test_scalar_consistency_desk_scale(steep_operator, steep_density):
    rows = scalar_consistency(steep_operator, steep_density, 1000, [1, 16, 100, 1000])
    assert rows[0].relative_gap < 1e-12
    assert rows[-1].relative_gap < 0.015
    assert rows[-1].relative_gap < rows[1].relative_gap / 2
