"""Сервисы подкоманд CLI: собирают вычисления модулей в таблицы и сохраняют их через репозиторий."""

import math
from pathlib import Path

import numpy as np
from loguru import logger

from app.abstractions.base_repository import AbstractRepository
from app.config.experiment import ExperimentConfig
from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.repositories.tables import CsvRepository, table_from_rows
from app.schemas.maps import MapFamily
from app.schemas.operators import YGrid
from app.schemas.reports import Table
from app.schemas.special import SlowlyVarying
from app.schemas.tauberian import KernelParams
from app.services import induced_operator as operators
from app.services.maps import return_time_tail, tail_asymptotics, tail_model, tail_sequence
from app.services.scalar_renewal import (
    compute_cH,
    expansion,
    karamata_ratio_report,
    operator_distribution,
    power_tail_distribution,
    renewal_sequence,
    residual_diagnostics,
)
from app.services.special_fn import normalization, return_sequence
from app.services.tauberian import (
    contour_B1,
    contour_B2,
    contour_B3,
    fixed_quadratics,
    freud_report,
    karamata_poly,
    kernel_extract,
    power_series,
    series_coefficients,
    sign_check,
)
from app.utils.fitting import log_spaced

_EPS = np.finfo(float).eps


class ExperimentService:
    name = None

    def __init__(self, config: ExperimentConfig, repository: AbstractRepository | None = None):
        self.config = config
        self.repository = repository or CsvRepository(config.OUT)

    def publish(self, suffix: str, table: Table, x: str, y: list[str], logscale: bool = True) -> Path:
        name = f"{self.name}_{suffix}" if suffix else self.name
        path = self.repository.write_table(name, table)
        self.repository.write_metadata(name, {"config": self.config.model_dump(mode="json"), **table.meta})
        self.repository.write_plot_script(name, x, y, logscale)
        return path

    def run(self) -> list[Path]:
        raise NotImplementedError

    def _operator(self):
        config = self.config
        op = operators.assemble_Rn(config.map_spec, YGrid(M=config.GRID), config.NTRUNC)
        return op, operators.invariant_density(op)


class TailsService(ExperimentService):
    name = "tails"

    def run(self) -> list[Path]:
        config = self.config
        spec = config.map_spec
        op, density = self._operator()
        tails = tail_sequence(spec, max(config.NMAX, config.NTRUNC + 1))
        model = tail_model(spec, density, tails)
        deficit = operators.measure_deficit(op, density)
        if deficit > settings.MASS_DEFICIT_BOUND:
            logger.warning(f"Invariant mass {deficit:.3e} beyond N_trunc, asymptote_ratio uses an unresolved density")
        ns = log_spaced(2, config.NMAX)
        probabilities = return_time_tail(spec, density, ns, tails)
        roughness = density.variation / config.GRID

        rows = []
        for n, probability in zip(ns, probabilities):
            y_n = float(tails.y_of(int(n)))
            asymptote = model.c / math.log(n) if spec.family is MapFamily.LSV0 else model.c * n ** (-spec.beta)
            probability = float(probability)
            x_n = float(tails.x_of(int(n)))
            rows.append([int(n), x_n, y_n, probability, probability / asymptote, (y_n - 0.5) * roughness])
        table = Table(
            columns=["n", "x_n", "y_n", "tail_prob", "asymptote_ratio", "error_bar"],
            rows=rows,
            meta={
                "c": model.c,
                "beta": spec.beta,
                "mass_deficit": op.mass_deficit,
                "measure_deficit": deficit,
            },
        )
        law = table_from_rows(tail_asymptotics(spec, tails, ns))
        return [
            self.publish("", table, "n", ["tail_prob", "asymptote_ratio"]),
            self.publish("law", law, "n", ["ratio"]),
        ]


class RenewalService(ExperimentService):
    name = "renewal"

    def run(self) -> list[Path]:
        config = self.config
        beta = config.BETA
        seq = renewal_sequence(power_tail_distribution(beta, config.NMAX), config.NMAX)
        karamata = karamata_ratio_report(seq, beta, SlowlyVarying(), log_spaced(10, config.NMAX))
        table = Table(
            columns=["n", "partial_sum", "first_order", "ratio", "error_bar"],
            rows=[[r.n, r.partial_sum, r.first_order, r.ratio, r.n * _EPS * r.ratio] for r in karamata],
        )
        paths = [self.publish("karamata", table, "n", ["ratio"])]
        if beta >= 1:
            return paths

        c_H, c_H_error = compute_cH(beta, 1.0) if beta > 0.5 else (0.0, 0.0)
        exp = expansion(beta, 1.0, c_H, c_H_error)
        report = residual_diagnostics(seq, exp)
        bars = [
            exp.c_H_error * row.n ** (2 * beta - 1) / exp.normalization + row.n * _EPS * row.partial_sum
            for row in report.rows
        ]
        residuals = Table(
            columns=["n", "partial_sum", "predicted", "residual", "error_bar"],
            rows=[[r.n, r.partial_sum, r.predicted, r.residual, bar] for r, bar in zip(report.rows, bars)],
            meta={
                "c_H": c_H,
                "c_H_error": c_H_error,
                "d": exp.d,
                "C_inferred": exp.C,
                "slope": report.slope,
            },
        )
        logger.info(f"Residual slope {report.slope.slope:.3f} over {report.slope.points} points")
        paths.append(self.publish("residuals", residuals, "n", ["residual"]))
        return paths


class DualErgodicService(ExperimentService):
    name = "dual_ergodic"

    def _observable(self, grid: YGrid):
        if self.config.SEQUENCE == "linear":
            return operators.y_observable(grid, lambda x: x)
        return operators.y_observable(grid)

    def run(self) -> list[Path]:
        config = self.config
        spec = config.map_spec
        op, density = self._operator()
        report = operators.dual_ergodic_report(spec, op, self._observable(op.grid), config.NMAX, density)
        table = table_from_rows(
            report.rows,
            meta={
                "integral": report.integral,
                "first_order_slope": report.first_order_slope,
                "residual_slope": report.residual_slope,
                "mass_deficit": op.mass_deficit,
                "measure_deficit": operators.measure_deficit(op, density),
            },
        )
        paths = [self.publish("", table, "n", ["first_order_deviation", "higher_order_residual", "remainder"])]
        if spec.family is MapFamily.LSV:
            rows = operators.scalar_consistency(op, density, config.NMAX, log_spaced(1, config.NMAX))
            paths.append(self.publish("consistency", table_from_rows(rows), "n", ["relative_gap"]))

        if spec.beta < 1:
            model = tail_model(spec, density, op.tails)
            us = np.geomspace(0.1, max(10 / op.N_trunc, 1e-3), 5)
            laws = table_from_rows(operators.first_order_law(op, density, model, us))
            paths.append(self.publish("lambda", laws, "u", ["ratio"]))
            path = [(float(u), theta) for u in us for theta in (0.0, float(u))]
            resolvent = table_from_rows(operators.resolvent_path(op, density, model, path))
            paths.append(self.publish("resolvent", resolvent, "u", ["deviation"]))

        if config.LADDER_DEPTH > 0:
            paths.append(self._spread(spec, op, density))
        return paths

    def _spread(self, spec, op, density) -> Path:
        config = self.config
        mesh = operators.ladder_mesh(spec, op.grid, config.LADDER_DEPTH, op.tails)
        v = operators.ladder_observable(mesh, np.ones_like, (mesh.delta, 1.0))
        S, integral = operators.spread_report(spec, op, mesh, v, config.NMAX, density)
        model = tail_model(spec, density, op.tails)
        constants = normalization(model.beta, model.ell)
        rows = []
        for n in log_spaced(10, config.NMAX):
            a_n = float(return_sequence(constants, n))
            deviation = float(np.max(np.abs(S[n] / a_n - integral)))
            rows.append([int(n), deviation, float(np.max(np.abs(S[n]))) / a_n * density.variation / config.GRID])
        table = Table(
            columns=["n", "first_order_deviation", "error_bar"],
            rows=rows,
            meta={"integral": integral, "delta": mesh.delta},
        )
        return self.publish("spread", table, "n", ["first_order_deviation"])


class KernelService(ExperimentService):
    name = "kernel"

    def _sequence(self, length: int) -> np.ndarray:
        kind = self.config.SEQUENCE
        if kind == "ones":
            return np.ones(length)
        if kind == "delta":
            u = np.zeros(length)
            u[0] = 1.0
            return u
        if kind == "binomial":
            return series_coefficients([1.0], [self.config.BETA], length)
        if kind == "lsv":
            op, density = self._operator()
            return renewal_sequence(operator_distribution(op, density), length - 1).u
        raise ValidationFailure(f"Unknown sequence {kind}", choices=["ones", "delta", "binomial", "lsv"])

    def run(self) -> list[Path]:
        config = self.config
        u = self._sequence(settings.KERNEL_SERIES_SPAN * max(config.N_VALUES))
        phi = power_series(u)
        rows = []
        for n in config.N_VALUES:
            params = KernelParams(n=n, p=config.P, gamma=config.GAMMA)
            direct = float(np.sum(u[: n - 2 * config.P + 1]))
            estimate = kernel_extract(phi, params, direct=direct, u=u)
            rows.append(
                [
                    n,
                    estimate.estimate,
                    direct,
                    abs(estimate.estimate - direct),
                    estimate.imaginary,
                    estimate.quad_error,
                    estimate.bound + estimate.quad_error,
                ]
            )
        table = Table(
            columns=["n", "estimate", "direct", "abs_error", "imaginary", "quad_error", "error_bar"],
            rows=rows,
            meta={"sequence": config.SEQUENCE, "p": config.P, "gamma": config.GAMMA},
        )
        return [self.publish("", table, "n", ["abs_error", "error_bar"])]


class ContourService(ExperimentService):
    name = "contour"

    def run(self) -> list[Path]:
        config = self.config
        checks = {
            "B1": lambda: contour_B1(config.BETA, config.U, config.THETA, config.R),
            "B2": lambda: contour_B2(config.BETA),
            "B3": lambda: contour_B3(config.RHO, config.GAMMA, config.NMAX),
        }
        selected = list(checks) if config.CHECK == "all" else [config.CHECK]
        if any(check not in checks for check in selected):
            raise ValidationFailure(f"Unknown contour check {config.CHECK}", choices=[*checks, "all"])
        rows = []
        for check in selected:
            result = checks[check]()
            rows.append([check, result.real, result.imag, result.reference, result.deviation, result.error_bar])
        table = Table(columns=["check", "real", "imag", "reference", "abs_error", "error_bar"], rows=rows)
        return [self.publish("", table, "reference", ["abs_error"], logscale=False)]


class PolysService(ExperimentService):
    name = "polys"

    def run(self) -> list[Path]:
        config = self.config
        lower, upper = fixed_quadratics()
        rows = [
            ["fixed_lower", lower.degree, lower.gap, sign_check(lower)],
            ["fixed_upper", upper.degree, upper.gap, sign_check(upper)],
        ]
        for epsilon in config.EPSILONS:
            poly = karamata_poly(epsilon)
            rows.append([repr(epsilon), poly.degree, poly.gap, sign_check(poly)])
        karamata = Table(columns=["epsilon", "degree", "gap", "sign_violation"], rows=rows)

        freud = table_from_rows(freud_report(config.DEGREES, config.BETA), meta={"beta": config.BETA})
        return [
            self.publish("karamata", karamata, "degree", ["gap"]),
            self.publish("freud", freud, "m", ["gap", "coefficient_sum"]),
        ]
