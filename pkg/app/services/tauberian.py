"""Тауберовы инструменты: односторонние многочлены Караматы и Фрейда, ядро Кореваара, контурные интегралы."""

import functools
import math

import numpy as np
from loguru import logger
from numpy.polynomial import Chebyshev, Polynomial, chebyshev, legendre, polynomial
from scipy import fft, integrate, optimize, special

from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.exceptions.tauberian import DegreeCapError, FitInfeasibleError, QuadratureError
from app.schemas.tauberian import (
    ConclusionRow,
    ContourResult,
    FreudRow,
    HypothesisRow,
    KernelEstimate,
    KernelParams,
    KernelWeightRow,
    OneSidedPoly,
    PolySide,
    TauberianReport,
)
from app.services.special_fn import gamma
from app.utils.fitting import log_spaced, loglog_slope

THRESHOLD = math.exp(-1.0)


def indicator(x):
    """g = 1_{[1/e, 1]}."""
    return (np.asarray(x, dtype=float) >= THRESHOLD).astype(float)


def _sign_grid(points: int) -> np.ndarray:
    return np.union1d(np.linspace(0.0, 1.0, points), [THRESHOLD * (1 - 1e-12), THRESHOLD])


def _monomial(factor) -> list[float] | None:
    if len(factor) > 64:
        return None
    return Chebyshev(factor, domain=[0, 1]).convert(kind=Polynomial).coef.tolist()


def karamata_gap(factor, side: PolySide) -> float:
    """int_0^1 |q - g| x^{-3/2} dx для q = x p, p = sum a_k T_k(2x - 1)."""
    k = np.arange(len(factor))
    moment = float(np.dot(factor, 2 / (1 - 4 * k**2)))
    target = 2 * (math.exp(0.5) - 1)
    return moment - target if side is PolySide.UPPER else target - moment


def fixed_quadratics() -> tuple[OneSidedPoly, OneSidedPoly]:
    """Нижний 2x^2 - x и верхний -7x^2 + 8x."""
    lower, upper = [0.0, 1.0], [4.5, -3.5]
    return (
        OneSidedPoly(
            side=PolySide.LOWER, factor=lower, gap=karamata_gap(lower, PolySide.LOWER), coefficients=[-1.0, 2.0]
        ),
        OneSidedPoly(
            side=PolySide.UPPER, factor=upper, gap=karamata_gap(upper, PolySide.UPPER), coefficients=[8.0, -7.0]
        ),
    )


def sign_check(poly: OneSidedPoly, grid=None) -> float:
    """Наибольшее нарушение односторонности на сетке (0, если условие выполнено)."""
    grid = _sign_grid(settings.POLY_GRID) if grid is None else np.asarray(grid, dtype=float)
    diff = poly(grid) - indicator(grid)
    worst = -diff.min() if poly.side is PolySide.UPPER else diff.max()
    return float(max(worst, 0.0))


def _chebyshev_interpolant(func, degree: int) -> np.ndarray:
    count = degree + 1
    t = np.cos(np.pi * (np.arange(count) + 0.5) / count)
    coefficients = fft.dct(func((t + 1) / 2), type=2) / count
    coefficients[0] /= 2
    return coefficients


def karamata_poly(epsilon: float) -> OneSidedPoly:
    """Верхний многочлен с int_0^1 (q - g) x^{-3/2} dx < epsilon.

    g сглаживается линейно на [1/e - delta, 1/e], затем x^{-1} h + delta приближается
    многочленом Чебышёва с точностью delta и умножается на x.
    """
    if epsilon <= 0:
        raise ValidationFailure("epsilon must be positive", epsilon=epsilon)
    delta = 0.99 * min(1 / (2 * math.e), epsilon / ((2 * math.e) ** 1.5 + 4))
    left = THRESHOLD - delta

    def target(x):
        x = np.asarray(x, dtype=float)
        ramp = np.clip((x - left) / delta, 0.0, 1.0)
        return np.divide(ramp, x, out=np.zeros_like(x), where=x > 0) + delta

    grid = np.union1d(_sign_grid(settings.POLY_GRID), [left])
    exact = target(grid)
    degree = 16
    while True:
        factor = _chebyshev_interpolant(target, degree)
        error = float(np.max(np.abs(chebyshev.chebval(2 * grid - 1, factor) - exact)))
        logger.debug(f"Karamata polynomial: degree {degree}, sup error {error:.3e}, delta {delta:.3e}")
        if error <= 0.9 * delta:
            break
        if 2 * degree > settings.POLY_DEGREE_CAP:
            achieved = karamata_gap(factor, PolySide.UPPER)
            logger.error(f"Degree cap {settings.POLY_DEGREE_CAP} reached at epsilon={epsilon}")
            raise DegreeCapError(epsilon=epsilon, achieved=achieved, degree=degree)
        degree *= 2

    poly = OneSidedPoly(
        side=PolySide.UPPER,
        factor=factor.tolist(),
        gap=karamata_gap(factor, PolySide.UPPER),
        coefficients=_monomial(factor),
    )
    logger.info(f"Karamata polynomial of degree {poly.degree}: gap {poly.gap:.4e} < {epsilon}")
    return poly


def _log_ratio(x: float) -> float:
    if x >= 1:
        return 1.0
    if x <= 0:
        return math.inf
    return -math.log1p(x - 1) / (1 - x)


@functools.lru_cache(maxsize=32)
def _freud_moments(m: int, beta: float) -> np.ndarray:
    """int_0^1 T_k(2x - 1) d(-log x)^beta, k < m (вес (1 - x)^{beta - 1} вынесен в квадратуру)."""
    moments = np.empty(m)
    for k in range(m):
        unit = np.zeros(k + 1)
        unit[k] = 1.0

        def integrand(x, unit=unit):
            return chebyshev.chebval(2 * x - 1, unit) * beta * _log_ratio(x) ** (beta - 1)

        moments[k], _ = integrate.quad(
            integrand,
            0.0,
            1.0,
            weight="alg",
            wvar=(0.0, beta - 1),
            epsabs=settings.QUAD_EPSABS,
            epsrel=settings.QUAD_EPSREL,
            limit=settings.QUAD_LIMIT,
        )
    return moments


def freud_gap(poly: OneSidedPoly, beta: float | None = None) -> float:
    """int_0^inf |q(e^{-t}) - g(e^{-t})| dt^beta."""
    beta = beta or settings.FREUD_BETA
    moment = float(np.dot(poly.factor, _freud_moments(poly.degree, beta)))
    return moment - 1 if poly.side is PolySide.UPPER else 1 - moment


def freud_one_sided(m: int, side: PolySide, beta: float | None = None) -> OneSidedPoly:
    """Односторонний многочлен степени m с минимальным зазором в мере dt^beta (линейная программа)."""
    if m < settings.FREUD_MIN_DEGREE:
        raise ValidationFailure(f"Degree below m_0 = {settings.FREUD_MIN_DEGREE}", m=m)
    beta = beta or settings.FREUD_BETA
    moments = _freud_moments(m, beta)
    grid = _sign_grid(settings.FREUD_FIT_GRID)
    basis = grid[:, None] * chebyshev.chebvander(2 * grid - 1, m - 1)
    g = indicator(grid)
    if side is PolySide.UPPER:
        result = optimize.linprog(moments, A_ub=-basis, b_ub=-g, bounds=(None, None), method="highs")
    else:
        result = optimize.linprog(-moments, A_ub=basis, b_ub=g, bounds=(None, None), method="highs")
    if result.status != 0:
        logger.error(f"One-sided fit failed: m={m}, side={side.value}: {result.message}")
        raise FitInfeasibleError(m=m, side=side.value, status=result.status)
    factor = result.x.copy()

    fine = _sign_grid(10 * settings.FREUD_FIT_GRID)[1:]
    q = fine * chebyshev.chebval(2 * fine - 1, factor)
    excess = (indicator(fine) - q if side is PolySide.UPPER else q - indicator(fine)) / fine
    nudge = float(max(excess.max(), 0.0))
    if nudge > 0:
        logger.debug(f"Freud fit m={m} {side.value}: nudged by {nudge:.2e}")
        factor[0] += nudge if side is PolySide.UPPER else -nudge

    moment = float(np.dot(factor, moments))
    gap = moment - 1 if side is PolySide.UPPER else 1 - moment
    return OneSidedPoly(side=side, factor=factor.tolist(), gap=gap, coefficients=_monomial(factor))


def freud_report(degrees, beta: float | None = None) -> list[FreudRow]:
    rows = []
    for m in degrees:
        for side in PolySide:
            poly = freud_one_sided(int(m), side, beta)
            total = math.nan if poly.coefficient_sum is None else poly.coefficient_sum
            rows.append(FreudRow(m=int(m), side=side, gap=poly.gap, coefficient_sum=total))
    return rows


def polynomial_laplace_sum(u, q: OneSidedPoly, s: float) -> float:
    """sum_j u_j q(e^{-s j})."""
    u = np.asarray(u, dtype=float)
    return float(np.dot(u, q(np.exp(-s * np.arange(len(u))))))


def karamata_sandwich(u, n: int, lower: OneSidedPoly, upper: OneSidedPoly) -> tuple[float, float, float]:
    """Оценки sum_j u_j q^1(e^{-j/n}) <= sum_{j<=n} u_j <= sum_j u_j q^2(e^{-j/n}) для u >= 0."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValidationFailure("Sandwich bounds need a non-negative sequence")
    return (
        polynomial_laplace_sum(u, lower, 1 / n),
        float(np.sum(u[: n + 1])),
        polynomial_laplace_sum(u, upper, 1 / n),
    )


def power_series(u):
    """phi(z) = sum_j u_j z^j; для векторных u_j (строки) возвращает shape (len(z), M)."""
    coefficients = np.asarray(u)

    def phi(z):
        values = polynomial.polyval(z, coefficients)
        return values if coefficients.ndim == 1 else np.moveaxis(values, -1, 0)

    return phi


def series_coefficients(A, gammas, length: int) -> np.ndarray:
    """Коэффициенты sum_r A_r (1 - z)^{-gamma_r}."""
    j = np.arange(length, dtype=float)
    u = np.zeros(length)
    for weight, g in zip(A, gammas):
        u += weight * np.exp(special.gammaln(j + g) - special.gammaln(g) - special.gammaln(j + 1))
    return u


def _panels(lo: float, hi: float, count: int, nodes: int):
    x, w = legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, count + 1)
    half = np.diff(edges)[:, None] / 2
    centre = (edges[:-1] + edges[1:])[:, None] / 2
    return (centre + half * x).ravel(), (half * w).ravel()


def _window(params: KernelParams, theta: np.ndarray) -> np.ndarray:
    e = np.exp(1j * theta)
    ea = np.exp(1j * params.alpha)
    return ((e - ea) * (e - ea.conjugate())) ** params.p * np.exp(-1j * params.n * theta)


def kernel_extract(phi, params: KernelParams, direct: float | None = None, u=None) -> KernelEstimate:
    """Оценка sum_{j <= n-2p} u_j по значениям phi на дуге {r e^{i theta}: |theta| <= alpha}."""
    nodes = params.nodes or settings.KERNEL_NODES
    r, alpha = params.r, params.alpha

    def window_integral(count):
        theta, weights = _panels(-alpha, alpha, count, nodes)
        z = r * np.exp(1j * theta)
        factor = weights * _window(params, theta) / (1 - z)
        return np.tensordot(factor, phi(z), axes=(0, 0))

    count = max(4, math.ceil(2 * alpha * params.n))
    previous = window_integral(count)
    for _ in range(settings.KERNEL_MAX_LEVEL):
        count *= 2
        current = window_integral(count)
        change = float(np.max(np.abs(current - previous)))
        if change <= settings.KERNEL_TOL * max(1.0, float(np.max(np.abs(current)))):
            break
        previous = current
    else:
        logger.error(f"Kernel quadrature at n={params.n} stalled, change {change:.3e}")
        raise QuadratureError(n=params.n, achieved=change / params.normalizer)

    estimate = current / params.normalizer
    real = np.real(estimate)
    return KernelEstimate(
        n=params.n,
        estimate=float(real) if np.ndim(real) == 0 else real.tolist(),
        imaginary=float(np.max(np.abs(np.imag(estimate)))),
        quad_error=change / params.normalizer,
        bound=kernel_bound(params, u) if u is not None else None,
        direct=direct,
    )


def kernel_bound(params: KernelParams, u) -> float:
    """Предсказанный остаток B: sum_j |u_j| r^j alpha^{2p} / (alpha^p |j - n|^p + 1), нормированный."""
    u = np.asarray(u, dtype=float)
    size = np.abs(u) if u.ndim == 1 else np.abs(u).max(axis=1)
    j = np.arange(len(size), dtype=float)
    alpha, p = params.alpha, params.p
    weights = params.r**j * alpha ** (2 * p) / (alpha**p * np.abs(j - params.n) ** p + 1)
    return float(2 * math.pi * np.dot(size, weights) / params.normalizer)


def kernel_weight(params: KernelParams, s_values) -> list[KernelWeightRow]:
    """|int_{-alpha}^{alpha} (r e^{i theta})^s K(theta) e^{-i n theta} d theta|

    против предсказания r^s alpha^{2p} / (alpha^p |s-n|^p + 1).
    """
    nodes = params.nodes or settings.KERNEL_NODES
    r, alpha, p = params.r, params.alpha, params.p
    rows = []
    for s in s_values:
        count = max(8, math.ceil(4 * alpha * max(params.n, abs(s))))
        theta, weights = _panels(-alpha, alpha, count, nodes)
        measured = abs(np.sum(weights * _window(params, theta) * np.exp(1j * s * theta))) * r**s
        predicted = r**s * alpha ** (2 * p) / (alpha**p * abs(s - params.n) ** p + 1)
        rows.append(KernelWeightRow(s=float(s), measured=float(measured), predicted=float(predicted)))
    return rows


def resolvent_scale_check(n: int, thetas=None) -> float:
    """sup |1 - e^{-1/n} e^{i theta}|^{-1} / min(n, 1/|theta|)."""
    thetas = np.linspace(-np.pi, np.pi, 20001) if thetas is None else np.asarray(thetas, dtype=float)
    value = 1 / np.abs(1 - math.exp(-1 / n) * np.exp(1j * thetas))
    scale = np.minimum(n, np.divide(1.0, np.abs(thetas), out=np.full(thetas.shape, np.inf), where=thetas != 0))
    return float(np.max(value / scale))


def window_factor_check(n: int, gamma_: float, samples: int = 2001) -> float:
    """sup_{|theta| <= n^{-gamma}} |A(theta, n)| / A(n), A(n) = 1 - 2 e^{-1/n} cos(n^{-gamma}) + e^{-2/n}."""
    alpha = n ** (-gamma_)
    r = math.exp(-1 / n)
    base = 1 - 2 * r * math.cos(alpha) + r * r
    theta = np.linspace(-alpha, alpha, samples)
    e = np.exp(1j * theta)
    return float(np.max(np.abs(e * e - 2 * math.cos(alpha) * e + 1)) / base)


def taub_theorem_check(u, A, gammas, ns=None, path=None) -> TauberianReport:
    """Гипотеза и заключение тауберовой теоремы с остатком.

    (a) Phi(e^{-s}) - sum A_r s^{-gamma_r} вдоль s = u - i theta;
    (b) sum_{j<n} u_j - sum A_r n^{gamma_r} / Г(1 + gamma_r).
    """
    u = np.asarray(u, dtype=float)
    if any(not 0 < g < 1 for g in gammas) or list(gammas) != sorted(gammas, reverse=True):
        raise ValidationFailure("Exponents must satisfy 1 > gamma_1 > ... > gamma_k > 0", gammas=list(gammas))
    phi = power_series(u)
    if path is None:
        floor = settings.KERNEL_SERIES_SPAN / len(u)
        path = [(s, theta) for s in np.geomspace(0.1, min(floor, 0.1), 6) for theta in (0.0, s)]

    hypothesis = []
    for real, theta in path:
        s = complex(real, -theta)
        main = sum(a * s ** (-g) for a, g in zip(A, gammas))
        residual = abs(complex(phi(np.exp(-s))) - main)
        hypothesis.append(HypothesisRow(u=real, theta=theta, residual=residual))

    ns = log_spaced(10, len(u)) if ns is None else np.asarray(ns)
    partial = np.concatenate(([0.0], np.cumsum(u)))
    conclusion = []
    for n in ns:
        predicted = sum(a * n**g / gamma(1 + g) for a, g in zip(A, gammas))
        conclusion.append(
            ConclusionRow(
                n=int(n),
                partial_sum=float(partial[n]),
                predicted=float(predicted),
                residual=float(partial[n] - predicted),
            )
        )
    return TauberianReport(
        hypothesis=hypothesis,
        conclusion=conclusion,
        slope=loglog_slope(ns, [row.residual for row in conclusion]),
    )


def _quad(func, a, b, **kwargs) -> tuple[float, float]:
    value, error = integrate.quad(
        func, a, b, epsabs=settings.QUAD_EPSABS, epsrel=settings.QUAD_EPSREL, limit=settings.QUAD_LIMIT, **kwargs
    )
    if error > settings.QUAD_ERROR_CAP * max(1.0, abs(value)):
        logger.error(f"Quadrature on [{a}, {b}] reached only {error:.3e}")
        raise QuadratureError(achieved=error, interval=(a, b))
    return value, error


def contour_B1(beta: float, u: float, theta: float, R: float) -> ContourResult:
    """int_0^R e^{-(u - i theta)x} ((u - i theta)x)^{-beta} (u - i theta) dx -> Г(1 - beta)."""
    if not 0 < beta < 1 or u <= 0 or theta == 0 or R <= 0:
        raise ValidationFailure("Need beta in (0, 1), u > 0, theta != 0, R > 0", beta=beta, u=u, theta=theta, R=R)
    s = complex(u, -theta)
    head = min(1.0, R)
    re, err_re = _quad(lambda x: math.exp(-u * x) * math.cos(theta * x), 0.0, head, weight="alg", wvar=(-beta, 0.0))
    im, err_im = _quad(lambda x: math.exp(-u * x) * math.sin(theta * x), 0.0, head, weight="alg", wvar=(-beta, 0.0))
    if R > head:

        def decay(x):
            return x ** (-beta) * math.exp(-u * x)

        tail_re, extra_re = _quad(decay, head, R, weight="cos", wvar=theta)
        tail_im, extra_im = _quad(decay, head, R, weight="sin", wvar=theta)
        re, im = re + tail_re, im + tail_im
        err_re, err_im = err_re + extra_re, err_im + extra_im
    value = s ** (1 - beta) * complex(re, im)
    truncation = 2 * R ** (-beta) * math.exp(-u * R) * abs(s) ** (-beta)
    return ContourResult(
        check="B1",
        real=value.real,
        imag=value.imag,
        reference=gamma(1 - beta),
        error_bar=abs(s) ** (1 - beta) * (err_re + err_im) + truncation,
    )


def _resolvent_power(beta: float):
    def g(sigma):
        return (1 - 1j * sigma) ** (-(beta + 1))

    return g


def contour_B2(beta: float) -> ContourResult:
    """int_R (1 - i sigma)^{-(beta+1)} e^{-i sigma} d sigma = (2 pi / e) / Г(1 + beta).

    Считается шестью полубесконечными квадратурами Фурье.
    """
    if not 0 < beta <= 1:
        raise ValidationFailure("beta outside (0, 1]", beta=beta)
    g = _resolvent_power(beta)
    parts = [
        _quad(lambda x: g(x).real, 0.0, np.inf, weight="cos", wvar=1.0),
        _quad(lambda x: g(x).imag, 0.0, np.inf, weight="sin", wvar=1.0),
        _quad(lambda x: g(x).imag, 0.0, np.inf, weight="cos", wvar=1.0),
        _quad(lambda x: g(x).real, 0.0, np.inf, weight="sin", wvar=1.0),
        _quad(lambda x: g(-x).imag, 0.0, np.inf, weight="cos", wvar=1.0),
        _quad(lambda x: g(-x).real, 0.0, np.inf, weight="sin", wvar=1.0),
    ]
    (rc, _), (is_, _), (ic, _), (rs, _), (mic, _), (mrs, _) = parts
    real = 2 * (rc + is_)
    imag = (ic - rs) + (mic + mrs)
    return ContourResult(
        check="B2",
        real=real,
        imag=imag,
        reference=2 * math.pi / math.e / gamma(1 + beta),
        error_bar=2 * sum(error for _, error in parts),
    )


def contour_B3(rho: float, gamma_: float, n: int) -> ContourResult:
    """int_{|theta| <= n^{-gamma}} e^{-i n theta} (1/n - i theta)^{-(rho+1)} d theta, подстановка sigma = n theta."""
    if rho <= 0 or not 0 < gamma_ < 1 or n < 10:
        raise ValidationFailure("Need rho > 0, gamma in (0, 1), n >= 10", rho=rho, gamma=gamma_, n=n)
    g = _resolvent_power(rho)
    S = n ** (1 - gamma_)
    rc, err_c = _quad(lambda x: g(x).real, 0.0, S, weight="cos", wvar=1.0)
    is_, err_s = _quad(lambda x: g(x).imag, 0.0, S, weight="sin", wvar=1.0)
    scale = n**rho
    return ContourResult(
        check="B3",
        real=scale * 2 * (rc + is_),
        imag=0.0,
        reference=2 * math.pi / math.e * scale / gamma(1 + rho),
        error_bar=scale * (2 * (err_c + err_s) + 4 * S ** (-(rho + 1))),
    )
