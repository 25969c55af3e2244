"""Скалярные последовательности восстановления, асимптотика Караматы и константа c_H."""

import math

import numpy as np
from loguru import logger
from scipy import signal

from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.exceptions.operators import MassDeficitError
from app.exceptions.scalar import DivergenceError
from app.schemas.operators import GridObservable, InducedOperator
from app.schemas.scalar import (
    AsymptoticExpansion,
    KaramataRow,
    OscillationReport,
    OscillationRow,
    ResidualReport,
    ResidualRow,
    ReturnDistribution,
    ScalarRenewal,
)
from app.schemas.special import SlowlyVarying
from app.services.special_fn import gamma, k_max, normalization, return_sequence
from app.utils.fitting import log_spaced, loglog_slope


def power_tail_distribution(beta: float, N: int, c: float = 1.0) -> ReturnDistribution:
    """Точные хвосты T(n) = c n^{-beta} при n >= 1."""
    if not 0 < c <= 1 or not 0 < beta <= 1:
        raise ValidationFailure("Power tail needs 0 < c <= 1 and 0 < beta <= 1", beta=beta, c=c)
    j = np.arange(2, N + 1, dtype=float)
    f = np.concatenate(([1 - c], c * ((j - 1) ** (-beta) - j ** (-beta))))
    return ReturnDistribution(f=f, tail_mass=c * N ** (-beta))


def log_tail_distribution(N: int, c: float = 1.0) -> ReturnDistribution:
    """T(n) = c / log(n + e^c), случай beta = 0 с медленно меняющимся хвостом."""
    if c <= 0 or N < 1:
        raise ValidationFailure("Log tail needs c > 0 and N >= 1", c=c, N=N)
    T = c / np.log(np.arange(N + 1, dtype=float) + math.exp(c))
    return ReturnDistribution(f=-np.diff(T), tail_mass=float(T[-1]))


def log_remainder(seq: ScalarRenewal, c: float, ns) -> np.ndarray:
    """c U_n - log n: ограничен, если T(n) = c / log n + O(1 / log^2 n)."""
    ns = np.asarray(ns)
    return c * seq.U[ns] - np.log(ns)


def operator_distribution(op: InducedOperator, density: GridObservable) -> ReturnDistribution:
    """f_j = mu(phi = j) по столбцам ульамовских матриц R_j."""
    column_mass = np.asarray(op.stacked.sum(axis=0)).ravel() / (2 * op.grid.M)
    f = np.bincount(op.lags, weights=column_mass * density.values[op.cells])[1:]
    tail = max(0.0, 1.0 - float(np.sum(f)))
    if tail > settings.MASS_DEFICIT_BOUND:
        logger.error(f"Return distribution misses mass {tail:.3e} beyond N_trunc={op.N_trunc}")
        raise MassDeficitError(measure_deficit=tail, N_trunc=op.N_trunc)
    return ReturnDistribution(f=f, tail_mass=tail)


def two_point_closed_form(p: float, n_max: int) -> np.ndarray:
    """u_n для f_1 = p, f_2 = 1 - p: u_n = (1 + (1-p)(p-1)^n) / (2 - p)."""
    n = np.arange(n_max + 1)
    return (1 + (1 - p) * (p - 1.0) ** n) / (2 - p)


def _padded(dist: ReturnDistribution, length: int) -> np.ndarray:
    f = np.zeros(length)
    f[1 : min(length, dist.N + 1)] = dist.f[: length - 1]
    return f


def _direct(f: np.ndarray, u: np.ndarray, acc: np.ndarray, lo: int, hi: int):
    for n in range(max(lo, 1), hi):
        u[n] = acc[n] + np.dot(f[1 : n - lo + 1], u[lo:n][::-1])


def _online(f: np.ndarray, u: np.ndarray, acc: np.ndarray, lo: int, hi: int):
    if hi - lo <= settings.SCALAR_DIRECT_CUTOFF:
        _direct(f, u, acc, lo, hi)
        return
    mid = (lo + hi) // 2
    _online(f, u, acc, lo, mid)
    acc[mid:hi] += signal.fftconvolve(u[lo:mid], f[: hi - lo])[mid - lo : hi - lo]
    _online(f, u, acc, mid, hi)


def renewal_sequence(dist: ReturnDistribution, n_max: int, method: str = "fft") -> ScalarRenewal:
    """u_0 = 1, u_n = sum_{j=1}^n f_j u_{n-j}.

    ``direct`` -- квадратичная рекурсия, ``fft`` -- онлайн-свёртка разделяй-и-властвуй.
    """
    if n_max < 0:
        raise ValidationFailure("n_max must be non-negative", n_max=n_max)
    f = _padded(dist, n_max + 1)
    u = np.zeros(n_max + 1)
    u[0] = 1.0
    acc = np.zeros(n_max + 1)
    if method == "direct":
        _direct(f, u, acc, 0, n_max + 1)
    elif method == "fft":
        _online(f, u, acc, 0, n_max + 1)
    else:
        raise ValidationFailure(f"Unknown convolution method {method}")
    logger.debug(f"Scalar renewal sequence ({method}): n_max={n_max}, u_n={u[-1]:.6e}")
    return ScalarRenewal(u=u)


def karamata_first_order(beta: float, ell: SlowlyVarying, n):
    """D_beta^{-1} n^beta / m(n)."""
    return return_sequence(normalization(beta, ell), n)


def compute_cH(
    beta: float, c: float, H=None, H_cutoff: int | None = None, H_bound: float = 0.0
) -> tuple[float, float]:
    """c_H = -Г(1-beta)^{-1} int_0^inf H_1(x) dx и оценка погрешности.

    На [0, 1) вклад равен 1/c - 1/(1-beta); на [n, n+1) интеграл от [x]^{-beta} - x^{-beta}
    берётся в замкнутой форме, хвост суммы за отсечкой -- по Эйлеру-Маклорену.
    Сумма H(n) идёт до H_cutoff, остаток оценивается как C X^{1-2beta} / (2beta - 1).
    """
    if beta >= 1:
        raise ValidationFailure("c_H is defined for beta < 1", beta=beta)
    if beta <= 0.5:
        logger.error(f"c_H requested for beta={beta}")
        raise DivergenceError(beta=beta)
    X = int(settings.CH_CUTOFF)
    n = np.arange(1, X + 1, dtype=float)
    cell_integral = n ** (1 - beta) * np.expm1((1 - beta) * np.log1p(1 / n)) / (1 - beta)
    pieces = math.fsum(n ** (-beta) - cell_integral)
    start = X + 1.0
    pieces += start ** (-beta) / 2 + beta * start ** (-beta - 1) / 12
    euler_error = beta * (beta + 1) * (beta + 2) * start ** (-beta - 3) / 720

    H_sum, H_error = 0.0, 0.0
    if H is not None:
        H_cutoff = int(H_cutoff or X)
        H_sum = math.fsum(np.asarray(H(np.arange(1, H_cutoff + 1)), dtype=float))
        H_error = H_bound * H_cutoff ** (1 - 2 * beta) / (2 * beta - 1)

    integral = 1 / c - 1 / (1 - beta) + pieces + H_sum
    scale = gamma(1 - beta)
    c_H = -integral / scale
    error = (euler_error + H_error) / scale
    logger.debug(f"c_H={c_H:.12g} +- {error:.2e} (beta={beta}, c={c})")
    return c_H, error


def expansion(beta: float, c: float, c_H: float = 0.0, c_H_error: float = 0.0) -> AsymptoticExpansion:
    k = k_max(beta)
    d = [c_H**j / gamma((j + 1) * beta - (j - 1)) for j in range(k + 1)]
    return AsymptoticExpansion(beta=beta, c=c, c_H=c_H, c_H_error=c_H_error, k=k, d=d)


def higher_order_eval(exp: AsymptoticExpansion, n, terms: int | None = None):
    """sum_j d_j n^{(j+1)beta - j} по первым terms слагаемым."""
    terms = exp.k + 1 if terms is None else terms
    n = np.asarray(n, dtype=float)
    exponents = exp.exponents[:terms]
    return np.sum([d * n**g for d, g in zip(exp.d[:terms], exponents)], axis=0)


def residual_diagnostics(
    seq: ScalarRenewal, exp: AsymptoticExpansion, ns=None, terms: int | None = None
) -> ResidualReport:
    """U_{n-1} - (c Г(1-beta))^{-1} sum_j d_j n^{(j+1)beta-j} по декадам и наклон в log-log."""
    terms = exp.k + 1 if terms is None else terms
    ns = log_spaced(10, seq.n_max + 1) if ns is None else np.asarray(ns)
    U = seq.U
    rows = []
    for n in ns:
        predicted = float(higher_order_eval(exp, n, terms)) / exp.normalization
        partial = float(U[n - 1])
        rows.append(ResidualRow(n=int(n), partial_sum=partial, predicted=predicted, residual=partial - predicted))
    return ResidualReport(rows=rows, slope=loglog_slope(ns, [row.residual for row in rows]), terms=terms)


def tail_oscillation_report(seq: ScalarRenewal, exp: AsymptoticExpansion, ns=None) -> OscillationReport:
    """(U_{n-1} - C_0 n^beta) / n^{2beta-1} -> C_1 (второй порядок при beta > 1/2)."""
    ns = log_spaced(10, seq.n_max + 1) if ns is None else np.asarray(ns)
    U = seq.U
    C = exp.C
    rows = [
        OscillationRow(n=int(n), ratio=float((U[n - 1] - C[0] * n**exp.beta) / n ** (2 * exp.beta - 1)))
        for n in ns
    ]
    last = [row.ratio for row in rows if row.n * 10 >= ns[-1]]
    return OscillationReport(
        rows=rows,
        limit=C[1] if len(C) > 1 else 0.0,
        last_decade_spread=float(max(last) - min(last)),
    )


def karamata_ratio_report(seq: ScalarRenewal, beta: float, ell: SlowlyVarying, ns=None) -> list[KaramataRow]:
    ns = log_spaced(10, seq.n_max) if ns is None else np.asarray(ns)
    U = seq.U
    rows = []
    for n in ns:
        first = float(karamata_first_order(beta, ell, n))
        rows.append(KaramataRow(n=int(n), partial_sum=float(U[n]), first_order=first, ratio=float(U[n]) / first))
    return rows
