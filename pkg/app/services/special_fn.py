"""Гамма-функция, медленно меняющиеся функции и нормировочные константы."""

import math

import numpy as np
from loguru import logger
from scipy import special

from app.exceptions.base import ValidationFailure
from app.exceptions.special import GammaPoleError
from app.schemas.special import (
    DeHaanModel,
    DeHaanReport,
    NormalizationConstants,
    SlowlyVarying,
    SlowVariationReport,
    SlowVariationRow,
)

_DECADES = tuple(10.0**k for k in range(2, 8))


def gamma(x: float) -> float:
    if x <= 0 and float(x).is_integer():
        logger.error(f"Gamma pole at x={x}")
        raise GammaPoleError(x=x)
    return float(special.gamma(x))


def d_beta(beta: float) -> float:
    """D_beta = Г(1-beta)Г(1+beta), на концах отрезка равна 1."""
    if not 0 <= beta <= 1:
        raise ValidationFailure("beta outside [0, 1]", beta=beta)
    if beta in (0, 1):
        return 1.0
    return gamma(1 - beta) * gamma(1 + beta)


def ell_tilde(ell: SlowlyVarying, n: int) -> float:
    j = np.arange(1, n + 1, dtype=float)
    return float(np.sum(ell(j) / j))


def k_max(beta: float) -> int:
    if not 0 < beta < 1:
        raise ValidationFailure("k_max needs beta in (0, 1)", beta=beta)
    k = 0
    while (k + 2) * beta - (k + 1) > 1e-12:
        k += 1
    return k


def normalization(beta: float, ell: SlowlyVarying | None = None) -> NormalizationConstants:
    return NormalizationConstants(beta=beta, D_beta=d_beta(beta), ell=ell or SlowlyVarying())


def m_of_n(constants: NormalizationConstants, n):
    if constants.beta < 1:
        return constants.ell(n)
    values = [ell_tilde(constants.ell, int(k)) for k in np.atleast_1d(n)]
    return np.asarray(values).reshape(np.shape(n))


def return_sequence(constants: NormalizationConstants, n):
    """a_n = D_beta^{-1} n^beta m(n)^{-1}."""
    n = np.asarray(n, dtype=float)
    return n**constants.beta / (constants.D_beta * m_of_n(constants, n))


def slow_variation_report(ell: SlowlyVarying, lambdas=(0.5, 2.0, 4.0), xs=_DECADES) -> SlowVariationReport:
    rows = []
    deviations = []
    for x in xs:
        base = float(ell(x))
        worst = 0.0
        for lam in lambdas:
            ratio = float(ell(lam * x)) / base
            rows.append(SlowVariationRow(x=x, lam=lam, ratio=ratio))
            worst = max(worst, abs(ratio - 1))
        deviations.append(worst)
    passed = deviations[-1] <= deviations[0] + 1e-12 and all(math.isfinite(d) for d in deviations)
    return SlowVariationReport(
        rows=rows,
        first_decade_deviation=deviations[0],
        last_decade_deviation=deviations[-1],
        passed=passed,
    )


def de_haan_report(model: DeHaanModel, alphas=(0.5, 1.0, 2.0, 4.0), xs=_DECADES) -> DeHaanReport:
    constant, worst_x, worst_alpha = 0.0, xs[0], alphas[0]
    for x in xs:
        scale = float(model.auxiliary(x))
        for alpha in alphas:
            value = abs(float(model.base(alpha * x)) - float(model.base(x))) / scale
            if value > constant:
                constant, worst_x, worst_alpha = value, x, alpha
    return DeHaanReport(constant=constant, worst_x=worst_x, worst_alpha=worst_alpha)
