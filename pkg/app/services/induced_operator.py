"""Индуцированный оператор R на Y, операторные последовательности восстановления T_n и спектральные данные.

Все матрицы действуют на плотности относительно меры Лебега (ульамовские средние по ячейкам).
Наблюдаемые в mu-форме переводятся умножением на инвариантную плотность h.
"""

import itertools
import math

import numpy as np
from loguru import logger
from scipy import linalg, sparse

from app.config.main import settings
from app.exceptions.base import ValidationFailure
from app.exceptions.maps import SupportError
from app.exceptions.operators import ConvergenceError, EigengapError, EscapeError, MassDeficitError, MonotonicityError
from app.schemas.maps import MapFamily, MapSpec, TailModel, TailSequence
from app.schemas.operators import (
    ConsistencyRow,
    DualErgodicReport,
    DualErgodicRow,
    FirstOrderRow,
    GridObservable,
    IdentityCheck,
    InducedOperator,
    LadderMesh,
    RenewalAccumulator,
    ResolventRow,
    SpectralData,
    YGrid,
)
from app.services.maps import left_inverse_array, tail_model, tail_sequence
from app.services.scalar_renewal import (
    compute_cH,
    expansion,
    higher_order_eval,
    operator_distribution,
    renewal_sequence,
)
from app.services.special_fn import gamma, normalization, return_sequence
from app.utils.fitting import log_spaced, loglog_slope


def y_observable(grid: YGrid, func=None, values=None) -> GridObservable:
    if values is None:
        values = np.asarray(func(grid.midpoints), dtype=float) if func is not None else np.ones(grid.M)
    return GridObservable(values=np.asarray(values, dtype=float))


def pullback_levels(spec: MapSpec, grid: YGrid, tails: TailSequence, depth: int):
    """Рёбра уровней X_1..X_depth: образы рёбер сетки Y под g^k, концы берутся из x_n."""
    edges = grid.edges
    inner = edges[(edges > 0.5) & (edges < spec.top)]
    for k in range(1, depth + 1):
        inner = left_inverse_array(spec, inner)
        yield np.concatenate(([tails.x[k]], inner, [tails.x[k - 1]]))


def _branch_entries(Q: np.ndarray, grid: YGrid):
    """Куски пересечений ячеек Y с разбиением Q области ветви: (цель, источник, вес)."""
    edges = grid.edges
    breaks = np.union1d(Q, edges[(edges > Q[0]) & (edges < Q[-1])])
    widths = np.diff(breaks)
    keep = widths > 0
    mids = ((breaks[:-1] + breaks[1:]) / 2)[keep]
    source = np.minimum(((mids - 0.5) / grid.width).astype(np.int64), grid.M - 1)
    target = np.searchsorted(Q, mids) - 1
    return target, source, widths[keep] * 2 * grid.M


def _stack(grid: YGrid, branches):
    rows, cols, data, lags, cells = [], [], [], [], []
    column = 0
    for n, pieces in branches:
        target, source, weight = pieces
        local, index = np.unique(source, return_inverse=True)
        rows.append(target)
        cols.append(index + column)
        data.append(weight)
        lags.append(np.full(local.size, n, dtype=np.int64))
        cells.append(local)
        column += local.size
    stacked = sparse.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.M, column)
    )
    lags = np.concatenate(lags)
    counts = np.bincount(lags)[1:]
    return stacked, lags, np.concatenate(cells), np.concatenate(([0], np.cumsum(counts)))


def _doubling_operator(spec: MapSpec, grid: YGrid) -> InducedOperator:
    edges = grid.edges
    pieces = [_branch_entries((edges + shift) / 2, grid) for shift in (0.5, 1.0)]
    merged = tuple(np.concatenate(part) for part in zip(*pieces))
    stacked, lags, cells, lag_ptr = _stack(grid, [(1, merged)])
    return InducedOperator(
        spec=spec,
        grid=grid,
        N_trunc=1,
        tails=TailSequence(x=np.array([0.5])),
        stacked=stacked,
        lags=lags,
        cells=cells,
        lag_ptr=lag_ptr,
        tail_profile=np.full(grid.M, 2.0),
        tail_weights=np.zeros(grid.M),
        mass_deficit=0.0,
    )


def assemble_Rn(spec: MapSpec, grid: YGrid, N_trunc: int) -> InducedOperator:
    if spec.family is MapFamily.DOUBLING:
        return _doubling_operator(spec, grid)
    if N_trunc < 1:
        raise ValidationFailure("N_trunc must be positive", N_trunc=N_trunc)
    tails = tail_sequence(spec, N_trunc + 1)
    deficit = float(tails.x[N_trunc - 1])
    if deficit > settings.MASS_DEFICIT_BOUND:
        logger.error(f"Mass deficit {deficit:.3e} above {settings.MASS_DEFICIT_BOUND}")
        raise MassDeficitError(mass_deficit=deficit, N_trunc=N_trunc)

    def branches():
        levels = itertools.chain([grid.edges], pullback_levels(spec, grid, tails, N_trunc - 1))
        for n, level in enumerate(levels, start=1):
            if n % 1000 == 0:
                logger.debug(f"Assembled {n}/{N_trunc} branches")
            yield n, _branch_entries((level + 1) / 2, grid)

    stacked, lags, cells, lag_ptr = _stack(grid, branches())

    last = slice(int(lag_ptr[N_trunc - 1]), int(lag_ptr[N_trunc]))
    profile = np.asarray(stacked[:, last].sum(axis=1)).ravel()
    profile /= profile.sum() * grid.width
    y_N = float(tails.y_of(N_trunc))
    edges = grid.edges
    weights = np.clip(np.minimum(edges[1:], y_N) - edges[:-1], 0.0, None)

    logger.info(f"Induced operator {spec.family.value}: M={grid.M}, N_trunc={N_trunc}, nnz={stacked.nnz}")
    return InducedOperator(
        spec=spec,
        grid=grid,
        N_trunc=N_trunc,
        tails=tails,
        stacked=stacked,
        lags=lags,
        cells=cells,
        lag_ptr=lag_ptr,
        tail_profile=profile,
        tail_weights=weights,
        mass_deficit=deficit,
    )


def branch(op: InducedOperator, n: int) -> sparse.csr_matrix:
    """Матрица R_n."""
    if not 1 <= n <= op.N_trunc:
        return sparse.csr_matrix((op.grid.M, op.grid.M))
    cols = slice(int(op.lag_ptr[n - 1]), int(op.lag_ptr[n]))
    part = op.stacked[:, cols].tocoo()
    return sparse.csr_matrix((part.data, (part.row, op.cells[cols][part.col])), shape=(op.grid.M, op.grid.M))


def captured_mass(op: InducedOperator) -> float:
    """Нормированный интеграл sum_n R_n 1 по Y, равен 1 - mass_deficit."""
    return float(op.stacked.sum() / op.grid.M)


def R_of_z(op: InducedOperator, z) -> sparse.csr_matrix:
    """Усечённая сумма sum_{n <= N_trunc} R_n z^n."""
    z = complex(z)
    weights = z.real**op.lags if z.imag == 0 else z**op.lags
    selector = sparse.csr_matrix(
        (weights, (np.arange(op.lags.size), op.cells)), shape=(op.lags.size, op.grid.M)
    )
    return (op.stacked @ selector).tocsr()


class _ClosedOperator:
    """R(z) плюс ранг-один замыкание отброшенных ветвей с весом z^{N+1}."""

    def __init__(self, op: InducedOperator, z, closed: bool = True):
        self.matrix = R_of_z(op, z)
        z = complex(z)
        scale = z ** (op.N_trunc + 1) if closed else 0j
        self.scale = scale.real if z.imag == 0 else scale
        self.profile = op.tail_profile
        self.weights = op.tail_weights

    def matvec(self, x):
        return self.matrix @ x + self.scale * self.profile * (self.weights @ x)

    def tmatvec(self, y):
        return self.matrix.T @ y + self.scale * self.weights * (self.profile @ y)

    def dense(self):
        return self.matrix.toarray() + self.scale * np.outer(self.profile, self.weights)


def closed_operator(op: InducedOperator, z=1.0) -> _ClosedOperator:
    return _ClosedOperator(op, z)


def invariant_density(op: InducedOperator) -> GridObservable:
    action = closed_operator(op)
    width = op.grid.width
    h = np.full(op.grid.M, 2.0)
    for iteration in range(1, settings.POWER_ITER_MAX + 1):
        image = action.matvec(h)
        image /= image.sum() * width
        residual = float(np.abs(image - h).sum() * width)
        h = image
        if residual <= settings.DENSITY_TOL:
            break
    else:
        logger.error(f"Invariant density: residual {residual:.3e} after {settings.POWER_ITER_MAX} iterations")
        raise ConvergenceError(residual=residual, iterations=settings.POWER_ITER_MAX)
    logger.debug(f"Invariant density converged in {iteration} iterations, residual {residual:.2e}")
    if op.spec.family is MapFamily.LSV:
        rise = monotone_violation(h)
        if rise > settings.MONOTONE_TOL:
            logger.error(f"Invariant density rises by {rise:.3e} of its maximum")
            raise MonotonicityError(rise=rise, M=op.grid.M, N_trunc=op.N_trunc)
    return GridObservable(values=h)


def monotone_violation(values: np.ndarray) -> float:
    """Наибольший подъём между соседними ячейками в долях максимума."""
    values = np.asarray(values, dtype=float)
    return float(np.diff(values).max(initial=0.0) / np.abs(values).max())


def measure_deficit(op: InducedOperator, density: GridObservable) -> float:
    """mu(phi > N_trunc) = int_{1/2}^{y_N} h dx, масса, которую несёт замыкание."""
    return float(density.values @ op.tail_weights)


def _require_captured(op: InducedOperator, density: GridObservable):
    deficit = measure_deficit(op, density)
    if deficit > settings.MASS_DEFICIT_BOUND:
        logger.error(f"Invariant mass {deficit:.3e} sits in truncated branches (N_trunc={op.N_trunc})")
        raise MassDeficitError(measure_deficit=deficit, N_trunc=op.N_trunc)


def _power_iterate(apply, start, width):
    vector = start.astype(complex)
    change = math.inf
    for _ in range(settings.POWER_ITER_MAX):
        image = apply(vector)
        image /= image.sum() * width
        change = float(np.abs(image - vector).sum() * width)
        vector = image
        if change <= settings.POWER_ITER_TOL:
            return vector
    logger.error(f"Power iteration stalled at change {change:.3e}")
    raise ConvergenceError(change=change)


def spectral_data(
    op: InducedOperator, z, density: GridObservable | None = None, closed: bool = True
) -> SpectralData:
    h = (density if density is not None else invariant_density(op)).values
    width = op.grid.width
    action = _ClosedOperator(op, z, closed)

    right = _power_iterate(action.matvec, h, width)
    image = action.matvec(right)
    lam = complex(image.sum() / right.sum())
    residual = float(np.abs(image - lam * right).sum() * width)
    left = _power_iterate(action.tmatvec, np.ones(op.grid.M), width)

    def deflated(x):
        return action.matvec(x) - lam * right * (left @ x) / (left @ right)

    trial = np.linspace(-1.0, 1.0, op.grid.M).astype(complex)
    ratios = []
    for _ in range(settings.DEFLATION_STEPS):
        image = deflated(trial)
        size = np.abs(image).sum()
        if size == 0:
            ratios.append(0.0)
            break
        ratios.append(size / np.abs(trial).sum())
        trial = image / size
    tail = np.asarray(ratios[-10:])
    second = float(np.exp(np.mean(np.log(np.maximum(tail, 1e-300)))))
    eigengap = 1 - second / abs(lam)
    if eigengap < settings.EIGENGAP_MIN:
        logger.error(f"Eigengap {eigengap:.3f} at z={z}")
        raise EigengapError(z=complex(z), eigengap=eigengap, lam=lam)
    return SpectralData(
        z=complex(z), lam=lam, v=right / h, left=left, density=h, eigengap=eigengap, residual=residual
    )


def _lag_blocks(op: InducedOperator, top_lag: int):
    blocks = []
    for first in range(1, top_lag + 1, settings.RENEWAL_BLOCK):
        last = min(first + settings.RENEWAL_BLOCK - 1, top_lag)
        cols = slice(int(op.lag_ptr[first - 1]), int(op.lag_ptr[last]))
        blocks.append((first, op.stacked[:, cols], op.lags[cols], op.cells[cols]))
    return blocks


def renewal_Tn(
    op: InducedOperator,
    v: GridObservable,
    n_max: int,
    density: GridObservable | None = None,
    sources: dict[int, np.ndarray] | None = None,
) -> RenewalAccumulator:
    """w_n = sum_{j=1}^n R_j w_{n-j} (+ источник в момент n), w_0 = v (или h v в mu-форме)."""
    if n_max < 0 or n_max > settings.RENEWAL_NMAX_LIMIT:
        raise ValidationFailure("n_max outside admissible range", n_max=n_max)
    if n_max > op.N_trunc:
        logger.warning(f"n_max={n_max} exceeds N_trunc={op.N_trunc}, truncated branches are missing")
    sources = sources or {}
    M = op.grid.M
    W = np.zeros((n_max + 1, M))
    W[0] = v.values * density.values if density is not None else v.values
    if 0 in sources:
        W[0] += sources[0]
    blocks = _lag_blocks(op, min(n_max, op.N_trunc))
    for n in range(1, n_max + 1):
        w = np.array(sources[n], dtype=float) if n in sources else np.zeros(M)
        for first, matrix, lags, cells in blocks:
            if first > n:
                break
            back = n - lags
            gathered = W[np.maximum(back, 0), cells]
            if back[-1] < 0:
                gathered[back < 0] = 0.0
            w += matrix @ gathered
        W[n] = w
    return RenewalAccumulator(W=W, density=density.values if density is not None else None)


def ladder_mesh(spec: MapSpec, grid: YGrid, K: int, tails: TailSequence | None = None) -> LadderMesh:
    if tails is None or tails.N < K + 1:
        tails = tail_sequence(spec, K + 1)
    levels = [grid.edges, *pullback_levels(spec, grid, tails, K)]
    return LadderMesh(spec=spec, grid=grid, tails=tails, levels=levels)


def ladder_operator(mesh: LadderMesh):
    """Ульамовская матрица полного L на лестничной сетке и массы, уходящие ниже delta."""
    grid, offsets, widths = mesh.grid, mesh.offsets, mesh.widths
    left_edges = [mesh.levels[k][:-1] for k in range(mesh.depth, -1, -1)]
    ids = [np.arange(offsets[k], offsets[k + 1]) for k in range(mesh.depth, -1, -1)]
    g_edges = np.concatenate(left_edges + [np.array([1.0])])
    g_ids = np.concatenate(ids)

    breaks = np.union1d(2 * grid.edges - 1, g_edges[(g_edges > 0) & (g_edges < 1)])
    pieces = np.diff(breaks)
    keep = pieces > 0
    mids = ((breaks[:-1] + breaks[1:]) / 2)[keep]
    mass = pieces[keep] / 2
    source = np.minimum((((mids + 1) / 2 - 0.5) / grid.width).astype(np.int64), grid.M - 1)
    below = mids < mesh.delta
    escape = np.zeros(mesh.n_cells)
    np.add.at(escape, source[below], mass[below])
    target = g_ids[np.searchsorted(g_edges, mids[~below], side="right") - 1]
    rows = [target]
    cols = [source[~below]]
    data = [mass[~below] / widths[target]]

    for k in range(1, mesh.depth + 1):
        src = np.arange(offsets[k], offsets[k + 1])
        dst = np.arange(src.size) if k == 1 else np.arange(offsets[k - 1], offsets[k - 1] + src.size)
        rows.append(dst)
        cols.append(src)
        data.append(widths[src] / widths[dst])

    matrix = sparse.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(mesh.n_cells, mesh.n_cells)
    )
    return matrix, escape


def ladder_observable(mesh: LadderMesh, func, support: tuple[float, float]) -> GridObservable:
    if support[0] <= 0:
        raise SupportError("Support is not a compact subset of (0, 1]", support=support)
    if support[0] < mesh.delta:
        raise SupportError("Support reaches below the ladder floor, increase K", support=support, delta=mesh.delta)
    edges = np.concatenate([(level[:-1] + level[1:]) / 2 for level in mesh.levels])
    inside = (edges >= support[0]) & (edges <= support[1])
    values = np.where(inside, np.asarray(func(edges), dtype=float), 0.0)
    return GridObservable(values=values, support=support)


def deep_returns(op: InducedOperator, first_lag: int, w: np.ndarray) -> np.ndarray:
    """sum_{n >= first_lag} R_n w вместе с замыканием отброшенных ветвей (плотностная форма)."""
    start = int(op.lag_ptr[min(max(first_lag, 1), op.N_trunc + 1) - 1])
    cols = slice(start, int(op.lag_ptr[-1]))
    return op.stacked[:, cols] @ w[op.cells[cols]] + op.tail_profile * (op.tail_weights @ w)


def full_map_L(
    spec: MapSpec,
    mesh: LadderMesh,
    v: GridObservable,
    ladder=None,
    max_escape: float | None = None,
    returns: InducedOperator | None = None,
) -> GridObservable:
    """(Lv)(x) = sum_{f(y) = x} v(y) / |f'(y)|, ульамовские средние на лестничной сетке.

    С ``returns`` масса, уходящая с Y ниже delta, возвращается на Y через ветви R_n, n >= K + 2.
    """
    if spec != mesh.spec:
        raise ValidationFailure("Mesh was built for another map")
    matrix, escape = ladder or ladder_operator(mesh)
    image = matrix @ v.values
    if returns is not None:
        if returns.spec != spec or returns.grid != mesh.grid:
            raise ValidationFailure("Return operator was built for another map or grid")
        image[: mesh.grid.M] += deep_returns(returns, mesh.depth + 2, v.values[: mesh.grid.M])
        return GridObservable(values=image, regularity=v.regularity, support=(mesh.delta, 1.0))
    max_escape = settings.MAX_ESCAPE_MASS if max_escape is None else max_escape
    escaped = float(escape @ v.values)
    total = float(np.abs(v.values) @ mesh.widths)
    if abs(escaped) > max_escape * max(total, 1e-300):
        logger.error(f"Escaped mass {escaped:.3e} of {total:.3e}")
        raise EscapeError(escaped=escaped, total=total, delta=mesh.delta)
    return GridObservable(values=image, regularity=v.regularity, support=(mesh.delta, 1.0))


def restricted_iterates(spec: MapSpec, mesh: LadderMesh, v: GridObservable, n: int) -> np.ndarray:
    """1_Y L^j 1_Y v, j = 0..n, прямой итерацией полного оператора."""
    ladder = ladder_operator(mesh)
    state = np.zeros(mesh.n_cells)
    state[: mesh.grid.M] = v.values
    current = GridObservable(values=state)
    out = [v.values.copy()]
    for _ in range(n):
        current = full_map_L(spec, mesh, current, ladder=ladder, max_escape=math.inf)
        out.append(current.values[: mesh.grid.M].copy())
    return np.asarray(out)


def extend_density(mesh: LadderMesh, density: GridObservable, ladder=None) -> GridObservable:
    """Продолжение плотности с Y на лестницу: масса уровня k = сумма отправлений на уровни m >= k."""
    matrix, _ = ladder or ladder_operator(mesh)
    M = mesh.grid.M
    departures = (matrix[:, :M] @ density.values) * mesh.widths
    values = np.zeros(mesh.n_cells)
    values[:M] = density.values
    carried = np.zeros(mesh.sizes[-1]) if mesh.depth else None
    for k in range(mesh.depth, 0, -1):
        part = mesh.level_slice(k)
        carried = carried + departures[part]
        values[part] = carried / mesh.widths[part]
    return GridObservable(values=values, support=(mesh.delta, 1.0))


def spread_push(spec: MapSpec, mesh: LadderMesh, v: GridObservable, K: int | None = None) -> list[GridObservable]:
    """L^l(1_{X_l} v), l = 0..K, каждое слагаемое на Y (плотностная форма)."""
    K = mesh.depth if K is None else K
    if v.support[0] <= 0:
        raise SupportError("Support is not a compact subset of (0, 1]", support=v.support)
    if K > mesh.depth or v.support[0] < mesh.delta:
        raise SupportError("Ladder too shallow for the support", support=v.support, delta=mesh.delta)
    M = mesh.grid.M
    terms = [GridObservable(values=v.values[:M].copy())]
    for level in range(1, K + 1):
        part = mesh.level_slice(level)
        mass = v.values[part] * mesh.widths[part]
        pushed = np.zeros(M)
        pushed[: mass.size] = mass / mesh.grid.width
        terms.append(GridObservable(values=pushed))
    return terms


def _model_for(spec: MapSpec, op: InducedOperator, density: GridObservable) -> TailModel:
    return tail_model(spec, density, op.tails)


def operator_expansion(spec: MapSpec, model: TailModel):
    beta = spec.beta
    if beta > 0.5:
        c_H, c_H_error = compute_cH(beta, model.c, model.H_of, H_cutoff=len(model.H), H_bound=model.H_constant)
    else:
        c_H, c_H_error = 0.0, 0.0
    return expansion(beta, model.c, c_H, c_H_error)


def dual_ergodic_report(
    spec: MapSpec,
    op: InducedOperator,
    v: GridObservable,
    n_max: int,
    density: GridObservable | None = None,
    ns=None,
) -> DualErgodicReport:
    """Отчёт по равномерной дуальной эргодичности.

    first_order_deviation -- sup |a_n^{-1} S_n - int v dmu|;
    higher_order_residual -- sup |S_{n-1} - (c Г(1-beta))^{-1} sum_j d_j n^{(j+1)beta-j} int v dmu| (0 < beta < 1);
    remainder -- c S_n - log n int v dmu (beta = 0) или (log n) sup |E_n| (0 < beta < 1).
    """
    density = density if density is not None else invariant_density(op)
    _require_captured(op, density)
    model = _model_for(spec, op, density)
    beta = spec.beta
    acc = renewal_Tn(op, v, n_max, density)
    S = acc.S
    integral = float(np.sum(v.values * density.values) * op.grid.width)
    constants = normalization(beta if beta < 1 else 1.0, model.ell)
    ns = log_spaced(10, n_max) if ns is None else np.asarray(ns)
    scale = density.variation / op.grid.M
    exp = operator_expansion(spec, model) if 0 < beta < 1 else None

    rows = []
    for n in ns:
        a_n = float(return_sequence(constants, n))
        first = float(np.max(np.abs(S[n] / a_n - integral)))
        residual = float("nan")
        if exp is not None:
            predicted = higher_order_eval(exp, n) / exp.normalization * integral
            residual = float(np.max(np.abs(S[n - 1] - predicted)))
        if beta > 0:
            remainder = first * math.log(n)
        else:
            deviation = model.c * S[n] - math.log(n) * integral
            remainder = float(deviation[np.argmax(np.abs(deviation))])
        error_bar = float(np.max(np.abs(S[n])) / a_n * (scale + (op.mass_deficit if n > op.N_trunc else 0.0)))
        rows.append(
            DualErgodicRow(
                n=int(n),
                first_order_deviation=first,
                higher_order_residual=residual,
                remainder=remainder,
                error_bar=error_bar,
            )
        )
    return DualErgodicReport(
        rows=rows,
        integral=integral,
        first_order_slope=loglog_slope(ns, [row.first_order_deviation for row in rows]),
        residual_slope=loglog_slope(ns, [row.higher_order_residual for row in rows]),
    )


def spread_report(
    spec: MapSpec,
    op: InducedOperator,
    mesh: LadderMesh,
    v: GridObservable,
    n_max: int,
    density: GridObservable | None = None,
):
    """Частичные суммы sum_{j <= n} 1_Y L^j v для наблюдаемой на X (mu-форма) через сдвинутые T_j."""
    density = density if density is not None else invariant_density(op)
    _require_captured(op, density)
    extended = extend_density(mesh, density)
    weighted = GridObservable(values=v.values * extended.values, support=v.support)
    pushed = spread_push(spec, mesh, weighted)
    sources = {level: term.values for level, term in enumerate(pushed) if level > 0}
    acc = renewal_Tn(op, GridObservable(values=pushed[0].values), n_max, sources=sources)
    integral = float(weighted.values @ mesh.widths)
    return np.cumsum(acc.W, axis=0) / density.values, integral


def scalar_consistency(op: InducedOperator, density: GridObservable, n_max: int, ns=None) -> list[ConsistencyRow]:
    """Скалярное U_n при f_j = mu(phi = j) против int_Y sum_{j <= n} T_j 1 dmu.

    Совпадают при n <= 1; дальше расходятся на вклад зависимости последовательных возвращений.
    """
    _require_captured(op, density)
    U = renewal_sequence(operator_distribution(op, density), n_max).U
    acc = renewal_Tn(op, y_observable(op.grid), n_max, density)
    operator = np.cumsum(acc.W.sum(axis=1) * op.grid.width)
    ns = np.arange(n_max + 1) if ns is None else np.asarray(ns)
    return [
        ConsistencyRow(
            n=int(n),
            scalar=float(U[n]),
            operator=float(operator[n]),
            relative_gap=float(abs(operator[n] - U[n]) / U[n]),
        )
        for n in ns
    ]


def first_order_law(op: InducedOperator, density: GridObservable, model: TailModel, us) -> list[FirstOrderRow]:
    """(1 - lambda(e^{-u})) / (Г(1-beta) l(1/u) u^beta) -> 1 при u -> 0."""
    beta = model.beta
    rows = []
    for u in us:
        data = spectral_data(op, math.exp(-u), density)
        scale = gamma(1 - beta) * float(model.ell(1 / u)) * u**beta
        rows.append(
            FirstOrderRow(
                u=u,
                lam=data.lam.real,
                ratio=(1 - data.lam.real) / scale,
                eigengap=data.eigengap,
                error_bar=(data.residual + settings.POWER_ITER_TOL) / scale,
            )
        )
    return rows


def resolvent_path(op: InducedOperator, density: GridObservable, model: TailModel, path) -> list[ResolventRow]:
    """sup-норма Г(1-beta) l(1/|s|) s^beta T(z) - P вдоль z = e^{-s}, s = u - i theta (mu-форма)."""
    h = density.values
    M = op.grid.M
    projector = np.outer(np.ones(M), h * op.grid.width)
    rows = []
    for u, theta in path:
        s = complex(u, -theta)
        z = np.exp(-s)
        resolvent = linalg.inv(np.eye(M) - _ClosedOperator(op, z).dense())
        mu_form = resolvent * h[None, :] / h[:, None]
        scale = gamma(1 - model.beta) * float(model.ell(1 / abs(s))) * s**model.beta
        size = np.abs(scale * mu_form).sum(axis=1).max()
        deviation = np.abs(scale * mu_form - projector).sum(axis=1).max()
        bar = M * np.finfo(float).eps * size * np.abs(resolvent).sum(axis=1).max()
        rows.append(ResolventRow(u=u, theta=theta, deviation=float(deviation), error_bar=float(bar)))
    return rows


def renewal_identity_residual(op: InducedOperator, acc: RenewalAccumulator, z) -> IdentityCheck:
    """(I - R(z)) sum_{n <= n_max} z^n T_n v - v и оценка хвоста (плотностная форма, усечённый R)."""
    z = complex(z)
    powers = z ** np.arange(acc.n_max + 1)
    series = powers @ acc.W
    residual = series - R_of_z(op, z) @ series - acc.W[0]
    norm_R = float(np.abs(R_of_z(op, 1.0)).sum(axis=1).max())
    tail = abs(z) ** (acc.n_max + 1) / (1 - abs(z)) * norm_R * float(np.abs(acc.W).max())
    weighted = float(np.abs(powers) @ np.abs(acc.W).max(axis=1))
    rounding = (acc.n_max + op.N_trunc + 1) * np.finfo(float).eps * (1 + norm_R) * weighted
    return IdentityCheck(z=z, residual=float(np.abs(residual).max()), bound=tail + rounding)


def decomposition_residual(op: InducedOperator, acc: RenewalAccumulator, z, density: GridObservable) -> IdentityCheck:
    """Ряд sum z^n T_n v против (1-lambda)^{-1} P(z) v + (I - R(z))^{-1} Q(z) v (плотностная форма)."""
    z = complex(z)
    data = spectral_data(op, z, density, closed=False)
    v = acc.W[0]
    right = data.v * data.density
    p_part = right * (data.left @ v) / (data.left @ right)
    q_part = v - p_part
    dense = np.eye(op.grid.M) - R_of_z(op, z).toarray()
    predicted = p_part / (1 - data.lam) + linalg.solve(dense, q_part)
    series = (z ** np.arange(acc.n_max + 1)) @ acc.W
    tail = renewal_identity_residual(op, acc, z)
    bound = tail.bound * float(np.abs(linalg.inv(dense)).sum(axis=1).max())
    return IdentityCheck(z=z, residual=float(np.abs(series - predicted).max()), bound=bound)
