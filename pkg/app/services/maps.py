"""Отображения LSV и LSV0, обратные ветви, последовательность x_n и хвосты времени возвращения."""

import numpy as np
from loguru import logger
from scipy import optimize

from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.exceptions.maps import BracketingError, MapDomainError
from app.schemas.maps import MapFamily, MapSpec, TailLawRow, TailModel, TailSequence, TailSplit
from app.schemas.operators import GridObservable, YGrid
from app.schemas.special import DeHaanModel, SlowlyVarying, SlowlyVaryingKind


def _require_interval_map(spec: MapSpec):
    if spec.family is MapFamily.DOUBLING:
        raise ValidationFailure("Doubling map is an induced-only test system without a left branch")


def left_branch(spec: MapSpec, x):
    _require_interval_map(spec)
    x = np.asarray(x, dtype=float)
    if spec.family is MapFamily.LSV:
        return x * (1 + (2 * x) ** spec.alpha)
    safe = np.where(x > 0, x, 1.0)
    return x * (1 + x * np.where(x > 0, np.exp(-1 / safe), 0.0))


def left_derivative(spec: MapSpec, x):
    _require_interval_map(spec)
    x = np.asarray(x, dtype=float)
    if spec.family is MapFamily.LSV:
        return 1 + (spec.alpha + 1) * (2 * x) ** spec.alpha
    safe = np.where(x > 0, x, 1.0)
    return 1 + (2 * x + 1) * np.where(x > 0, np.exp(-1 / safe), 0.0)


def apply_map(spec: MapSpec, x: float) -> float:
    if not 0 < x < 1 or x == 0.5:
        raise MapDomainError(x=x)
    if x > 0.5:
        return 2 * x - 1
    return float(left_branch(spec, x))


def map_derivative(spec: MapSpec, x: float) -> float:
    if not 0 < x < 1 or x == 0.5:
        raise MapDomainError(x=x)
    if x > 0.5:
        return 2.0
    return float(left_derivative(spec, x))


def left_inverse(spec: MapSpec, x: float) -> float:
    """Единственный y в (0, 1/2) с f(y) = x."""
    if not 0 < x < 1:
        raise MapDomainError(x=x)
    top = spec.top
    if x > top:
        logger.error(f"No left preimage: x={x} above branch image {top}")
        raise BracketingError("Point above the image of the left branch", x=x, top=top)
    if x == top:
        return 0.5
    try:
        return optimize.brentq(
            lambda y: float(left_branch(spec, y)) - x,
            0.0,
            0.5,
            xtol=settings.ROOT_XTOL,
            rtol=settings.ROOT_RTOL,
            maxiter=500,
        )
    except (ValueError, RuntimeError) as e:
        logger.error(f"Error: {str(e)}")
        raise BracketingError(str(e), x=x)


def left_inverse_array(spec: MapSpec, x: np.ndarray) -> np.ndarray:
    """Векторная обратная ветвь методом Ньютона (ветвь выпукла, старт справа от корня)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x.copy()
    if np.any(x <= 0) or np.any(x > spec.top):
        raise BracketingError("Points outside the image of the left branch", low=float(x.min()), high=float(x.max()))
    try:
        root = optimize.newton(
            lambda y: left_branch(spec, y) - x,
            np.minimum(x, 0.5),
            fprime=lambda y: left_derivative(spec, y),
            tol=settings.ROOT_XTOL,
            maxiter=settings.NEWTON_MAXITER,
        )
    except RuntimeError as e:
        logger.error(f"Error: {str(e)}")
        raise BracketingError(str(e))
    return np.minimum(np.asarray(root, dtype=float), 0.5)


def tail_sequence(spec: MapSpec, N: int) -> TailSequence:
    if N < 1:
        raise ValidationFailure("N must be positive", N=N)
    x = np.empty(N)
    x[0] = 0.5
    for n in range(1, N):
        x[n] = left_inverse(spec, x[n - 1])
    residual = np.max(np.abs(left_branch(spec, x[1:]) - x[:-1])) if N > 1 else 0.0
    if residual > settings.ROOT_TOL:
        logger.warning(f"Tail sequence residual {residual:.3e} above {settings.ROOT_TOL:.1e}")
    logger.debug(f"Tail sequence for {spec.family.value}: N={N}, x_N={x[-1]:.6e}")
    return TailSequence(x=x)


def x_level_sets(spec: MapSpec, K: int, tails: TailSequence | None = None) -> list[tuple[float, float]]:
    """X_0 = [1/2, 1], X_k = (x_{k+1}, x_k]."""
    if K < 0:
        raise ValidationFailure("K must be non-negative", K=K)
    tails = tails if tails is not None and tails.N >= K + 1 else tail_sequence(spec, K + 1)
    return [(0.5, 1.0)] + [(float(tails.x[k]), float(tails.x[k - 1])) for k in range(1, K + 1)]


def cumulative_integral(grid: YGrid, values: np.ndarray, t):
    """Интеграл ступенчатой функции от 1/2 до t."""
    t = np.clip(np.asarray(t, dtype=float), 0.5, 1.0)
    cumulative = np.concatenate(([0.0], np.cumsum(values) * grid.width))
    position = (t - 0.5) / grid.width
    index = np.minimum(np.floor(position).astype(int), grid.M - 1)
    return cumulative[index] + values[index] * (t - grid.edges[index])


def return_time_tail(spec: MapSpec, density: GridObservable, n, tails: TailSequence | None = None):
    """mu(phi > n) = int_{1/2}^{y_n} h dx."""
    n_max = int(np.max(n))
    tails = tails if tails is not None else tail_sequence(spec, max(n_max, 1))
    grid = YGrid(M=len(density.values))
    return cumulative_integral(grid, density.values, tails.y_of(n))


def density_at_half(density: GridObservable) -> float:
    """Линейная экстраполяция средних по первым двум ячейкам к точке 1/2."""
    return 1.5 * float(density.values[0]) - 0.5 * float(density.values[1])


def tail_constant(spec: MapSpec, density: GridObservable) -> float:
    h_half = density_at_half(density)
    if spec.family is MapFamily.LSV:
        return 0.25 * spec.beta**spec.beta * h_half
    if spec.family is MapFamily.LSV0:
        return 0.5 * h_half
    raise ValidationFailure("Tail constant is defined for LSV and LSV0 only")


def tail_model(spec: MapSpec, density: GridObservable, tails: TailSequence) -> TailModel:
    c = tail_constant(spec, density)
    if spec.family is MapFamily.LSV0:
        ell = SlowlyVarying(kind=SlowlyVaryingKind.INVERSE_LOG, c=c)
        auxiliary = SlowlyVarying(kind=SlowlyVaryingKind.LOG_POWER, c=c, p=-2.0)
        return TailModel(beta=0.0, c=c, ell=ell, de_haan=DeHaanModel(base=ell, auxiliary=auxiliary))
    n = np.arange(1, tails.N)
    H = return_time_tail(spec, density, n, tails) / c - n ** (-spec.beta)
    decade = n[n >= max(1, n[-1] // 10)]
    H_constant = float(np.max(np.abs(H[decade - 1]) * decade ** (2 * spec.beta)))
    return TailModel(beta=spec.beta, c=c, ell=SlowlyVarying(c=c), H=H, H_constant=H_constant)


def tail_split(model: TailModel) -> TailSplit:
    """Разбиение H = b + c: b -- невозрастающая мажоранта, c = H - b суммируема."""
    if model.H is None:
        return TailSplit(b_monotone=True, c_partial_sums=[0.0], c_last_decade_increment=0.0)
    b = np.maximum.accumulate(model.H[::-1])[::-1]
    c_part = model.H - b
    partial = np.cumsum(np.abs(c_part))
    checkpoints = [10**k for k in range(1, 10) if 10**k <= len(partial)] or [len(partial)]
    sums = [float(partial[k - 1]) for k in checkpoints]
    increment = sums[-1] - sums[-2] if len(sums) > 1 else sums[-1]
    return TailSplit(
        b_monotone=bool(np.all(np.diff(b) <= 0)),
        c_partial_sums=sums,
        c_last_decade_increment=float(increment),
    )


def tail_asymptotics(spec: MapSpec, tails: TailSequence, ns) -> list[TailLawRow]:
    """LSV: x_n / (beta^beta n^{-beta} / 2); LSV0: (e^{1/x_n} - n) / log n."""
    rows = []
    for n in ns:
        x_n = float(tails.x_of(int(n)))
        drift = n * settings.ROOT_TOL
        if spec.family is MapFamily.LSV:
            ratio = x_n / (0.5 * spec.beta**spec.beta * n ** (-spec.beta))
            bar = ratio * drift / x_n
        else:
            ratio = (np.exp(1 / x_n) - n) / np.log(n)
            bar = np.exp(1 / x_n) * drift / (x_n**2 * np.log(n))
        rows.append(TailLawRow(n=int(n), x_n=x_n, ratio=float(ratio), error_bar=float(bar)))
    return rows
