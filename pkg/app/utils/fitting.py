import math

import numpy as np
from scipy import stats

from app.config.main import settings
from app.schemas.reports import SlopeFit


def log_spaced(n_lo: int, n_hi: int, per_decade: int | None = None) -> np.ndarray:
    """Целые точки, равномерно распределённые по декадам на [n_lo, n_hi]."""
    per_decade = per_decade or settings.SAMPLES_PER_DECADE
    decades = math.log10(n_hi / n_lo)
    count = max(2, int(round(decades * per_decade)) + 1)
    return np.unique(np.round(np.geomspace(n_lo, n_hi, count)).astype(np.int64))


def loglog_slope(n, values, confidence: float | None = None) -> SlopeFit:
    """Наклон log|values| по log n с доверительным интервалом (t-распределение)."""
    confidence = confidence or settings.SLOPE_CONFIDENCE
    n = np.asarray(n, dtype=float)
    magnitude = np.abs(np.asarray(values, dtype=float))
    keep = (magnitude > 0) & np.isfinite(magnitude) & (n > 0)
    if keep.sum() < 3:
        nan = float("nan")
        return SlopeFit(slope=nan, intercept=nan, stderr=nan, ci_low=nan, ci_high=nan, points=int(keep.sum()))
    fit = stats.linregress(np.log(n[keep]), np.log(magnitude[keep]))
    spread = stats.t.ppf(0.5 + confidence / 2, keep.sum() - 2) * fit.stderr
    return SlopeFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        stderr=float(fit.stderr),
        ci_low=float(fit.slope - spread),
        ci_high=float(fit.slope + spread),
        points=int(keep.sum()),
    )
