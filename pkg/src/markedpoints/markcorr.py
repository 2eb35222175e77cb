"""Mark correlation functionals: pairwise test functions smoothed over
interpoint distance and normalized by a mark-only constant.

The estimator is a Nadaraya-Watson ratio: kernel-weighted average of the
test function over point pairs at distance r, divided by the pairwise
sample average of the test function. Works verbatim on planar patterns
(Euclidean distance) and network patterns (shortest-path distance).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._dist import pair_distances
from .curves import SummaryCurve, r_grid
from .errors import NumericalError, ValidationError
from .intensity import kernel1d_pdf, kernel1d_support
from .pattern import MarkedPointPattern, mark_moments

__all__ = [
    "TestFunction",
    "STOYAN",
    "BEISBART_KERSCHER",
    "VARIOGRAM",
    "SHIMANTANI_I",
    "SmoothingSpec1D",
    "pair_weights",
    "normalization",
    "pair_average",
    "mark_corr",
    "mark_corr_suite",
    "MarkCorrSuite",
    "default_smoothing",
]


@dataclass(frozen=True)
class TestFunction:
    """Symmetric pairwise mark test function plus its normalization rule."""

    name: str
    fn: Callable[[float, float], float] | None = None

    def __post_init__(self):
        if self.name not in ("stoyan", "beisbart_kerscher", "variogram", "shimantani_i", "custom"):
            raise ValidationError(f"unknown test function {self.name!r}")
        if self.name == "custom" and self.fn is None:
            raise ValidationError("custom test function requires a callable")


STOYAN = TestFunction("stoyan")
BEISBART_KERSCHER = TestFunction("beisbart_kerscher")
VARIOGRAM = TestFunction("variogram")
SHIMANTANI_I = TestFunction("shimantani_i")

_SUITE = (STOYAN, VARIOGRAM, SHIMANTANI_I, BEISBART_KERSCHER)

_THEORETICAL = {"stoyan": 1.0, "beisbart_kerscher": 1.0, "variogram": 1.0, "shimantani_i": 0.0}


@dataclass(frozen=True)
class SmoothingSpec1D:
    """Kernel on the real line used to localize pair distances around r."""

    bandwidth: float
    kernel: str = "epanechnikov"

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValidationError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.kernel not in ("epanechnikov", "gaussian", "box"):
            raise ValidationError(f"unknown 1-D kernel {self.kernel!r}")


def default_smoothing(p: MarkedPointPattern) -> SmoothingSpec1D:
    """Heuristic bandwidth scaling with mean nearest-neighbor spacing."""
    if p.n == 0:
        raise ValidationError("cannot pick a bandwidth for an empty pattern")
    h = 0.15 / np.sqrt(p.n / p.domain_size)
    return SmoothingSpec1D(float(h))


def pair_weights(tf: TestFunction, marks, mu: float, var: float) -> np.ndarray:
    """Full matrix of tf(m_i, m_j); the diagonal is never used by callers."""
    m = np.asarray(marks, dtype=float)
    if tf.name == "stoyan":
        return np.outer(m, m)
    if tf.name == "beisbart_kerscher":
        return m[:, None] + m[None, :]
    if tf.name == "variogram":
        return 0.5 * (m[:, None] - m[None, :]) ** 2
    if tf.name == "shimantani_i":
        if var <= 0:
            raise NumericalError("shimantani_i requires positive mark variance")
        c = m - mu
        return np.outer(c, c)
    out = np.empty((len(m), len(m)))
    for i in range(len(m)):
        for j in range(len(m)):
            out[i, j] = tf.fn(m[i], m[j])
    return out


def normalization(tf: TestFunction, marks, stoyan_rule: str = "pairs") -> float:
    """Normalization constant c_tf.

    Built-ins use the sample average of tf over all ordered pairs, except
    shimantani_i which is scaled by the population mark variance (Moran
    convention). stoyan_rule="mean-squared" switches the Stoyan constant to
    the classical squared mean mark.
    """
    m = np.asarray(marks, dtype=float)
    n = len(m)
    if n < 2:
        raise ValidationError("normalization needs at least two marked points")
    s1, s2 = m.sum(), (m**2).sum()
    npairs = n * (n - 1)
    if tf.name == "stoyan":
        if stoyan_rule == "mean-squared":
            return float((s1 / n) ** 2)
        return float((s1 * s1 - s2) / npairs)
    if tf.name == "beisbart_kerscher":
        return float(2.0 * s1 / n)
    if tf.name == "variogram":
        return float((n * s2 - s1 * s1) / npairs)
    if tf.name == "shimantani_i":
        mu = s1 / n
        var = float(np.mean((m - mu) ** 2))
        if var <= 0:
            raise NumericalError("shimantani_i normalization: zero mark variance")
        return var
    mu = float(m.mean())
    var = float(np.mean((m - mu) ** 2))
    w = pair_weights(tf, m, mu, var)
    return float((w.sum() - np.trace(w)) / npairs)


def pair_average(tf: TestFunction, marks) -> float:
    """Sample average of tf over all ordered pairs i != j."""
    m = np.asarray(marks, dtype=float)
    if len(m) < 2:
        raise ValidationError("pair average needs at least two marked points")
    mu = float(m.mean())
    var = float(np.mean((m - mu) ** 2))
    w = pair_weights(tf, m, mu, var)
    n = len(m)
    return float((w.sum() - np.trace(w)) / (n * (n - 1)))


def _edge_weights(p: MarkedPointPattern, ec: str) -> np.ndarray | None:
    if ec == "none":
        return None
    if ec != "symmetricWeight":
        raise ValidationError(f"unknown edge correction {ec!r} for mark correlation")
    if p.is_network:
        raise ValidationError("symmetricWeight edge correction is planar-only")
    w = p.domain
    xy = p.coords()
    dx = np.abs(xy[:, 0][:, None] - xy[:, 0][None, :])
    dy = np.abs(xy[:, 1][:, None] - xy[:, 1][None, :])
    overlap = (w.width - dx) * (w.height - dy)
    if np.any(overlap <= 0):
        raise ValidationError("point pair separation exceeds the window size")
    return w.area / overlap


class _PairSmoother:
    """Shared machinery: pair distances sorted once, then kernel-windowed
    sums of any per-pair weight vector on each r of the grid."""

    def __init__(self, p: MarkedPointPattern, smoothing: SmoothingSpec1D, r: np.ndarray, ec: str):
        if p.n < 2:
            raise ValidationError("mark correlation needs at least 2 marked points")
        d = pair_distances(p)
        mask = ~np.eye(p.n, dtype=bool)
        ecw = _edge_weights(p, ec)
        flat_w = np.ones(mask.sum()) if ecw is None else ecw[mask]
        flat_d = d[mask]
        order = np.argsort(flat_d, kind="stable")
        self.d_sorted = flat_d[order]
        self.w_sorted = flat_w[order]
        self.order = order
        self.mask = mask
        self.r = r
        self.smoothing = smoothing
        supp = kernel1d_support(smoothing.kernel, smoothing.bandwidth)
        self.lo = np.searchsorted(self.d_sorted, r - supp, side="left")
        self.hi = np.searchsorted(self.d_sorted, r + supp, side="right")
        self._kslices = []
        for k in range(len(r)):
            sl = slice(self.lo[k], self.hi[k])
            kv = kernel1d_pdf(smoothing.kernel, smoothing.bandwidth, self.d_sorted[sl] - r[k])
            self._kslices.append(kv * self.w_sorted[sl])
        self.denominator = np.array([kv.sum() for kv in self._kslices])

    def sort_pairs(self, weight_matrix: np.ndarray) -> np.ndarray:
        return weight_matrix[self.mask][self.order]

    def smoothed_sum(self, sorted_pair_values: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.r))
        for k, kv in enumerate(self._kslices):
            out[k] = sorted_pair_values[self.lo[k] : self.hi[k]] @ kv
        return out


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.full_like(num, np.nan)
    ok = den >= 1e-12
    out[ok] = num[ok] / den[ok]
    return out


def mark_corr(
    p: MarkedPointPattern,
    tf: TestFunction,
    smoothing: SmoothingSpec1D | None = None,
    r: np.ndarray | None = None,
    ec: str = "none",
    stoyan_rule: str = "pairs",
    degenerate: str = "raise",
    return_numerator: bool = False,
):
    """Normalized mark correlation curve for one test function.

    The returned curve is NaN wherever the kernel mass in the denominator
    falls below 1e-12. With return_numerator=True also returns the
    unnormalized ratio (the conditional mean of tf at distance r), which
    for the variogram test function is the classical raw mark variogram.
    A zero normalization constant raises NumericalError unless
    degenerate="nan", in which case the normalized curve is all-NaN.
    """
    if r is None:
        r = _default_r(p)
    if len(r) == 0:
        raise ValidationError("empty r grid")
    if smoothing is None:
        smoothing = default_smoothing(p)
    stats = mark_moments(p)
    if stats.count != p.n:
        raise ValidationError("every point needs a mark for mark correlation")
    sm = _PairSmoother(p, smoothing, np.asarray(r, dtype=float), ec)
    marks = p.marks()
    w = pair_weights(tf, marks, stats.mean_mark, stats.var_mark)
    raw = _ratio(sm.smoothed_sum(sm.sort_pairs(w)), sm.denominator)
    try:
        c = normalization(tf, marks, stoyan_rule)
    except NumericalError:
        c = 0.0
    if c == 0.0:
        if degenerate == "raise":
            raise NumericalError(f"degenerate normalization for {tf.name}: c_tf = 0")
        curve_vals = np.full_like(raw, np.nan)
    else:
        curve_vals = raw / c
    meta = {"tf": tf.name, "bandwidth": smoothing.bandwidth, "kernel": smoothing.kernel, "ec": ec}
    theo = _THEORETICAL.get(tf.name)
    curve = SummaryCurve(
        sm.r,
        curve_vals,
        f"markcorr_{tf.name}",
        None if theo is None else np.full_like(raw, theo),
        meta,
    )
    if not return_numerator:
        return curve
    numer = SummaryCurve(sm.r, raw, f"markcorr_raw_{tf.name}", None, dict(meta))
    return curve, numer


@dataclass
class MarkCorrSuite:
    """The four built-in curves with shared smoothing, plus raw numerators."""

    curves: dict
    numerators: dict
    normalizations: dict


def mark_corr_suite(
    p: MarkedPointPattern,
    smoothing: SmoothingSpec1D | None = None,
    r: np.ndarray | None = None,
    ec: str = "none",
) -> MarkCorrSuite:
    """All four built-in mark correlation functions in one pair sweep.

    Degenerate normalizations (e.g. the variogram under constant marks)
    yield an all-NaN normalized curve; the raw numerator is still reported.
    """
    if r is None:
        r = _default_r(p)
    if smoothing is None:
        smoothing = default_smoothing(p)
    stats = mark_moments(p)
    if stats.count != p.n:
        raise ValidationError("every point needs a mark for mark correlation")
    sm = _PairSmoother(p, smoothing, np.asarray(r, dtype=float), ec)
    marks = p.marks()
    curves, numerators, cs = {}, {}, {}
    for tf in _SUITE:
        try:
            w = pair_weights(tf, marks, stats.mean_mark, stats.var_mark)
        except NumericalError:
            w = np.zeros((p.n, p.n))
        raw = _ratio(sm.smoothed_sum(sm.sort_pairs(w)), sm.denominator)
        try:
            c = normalization(tf, marks)
        except NumericalError:
            c = 0.0
        meta = {"tf": tf.name, "bandwidth": smoothing.bandwidth, "kernel": smoothing.kernel, "ec": ec}
        vals = raw / c if c != 0.0 else np.full_like(raw, np.nan)
        theo = _THEORETICAL[tf.name]
        curves[tf.name] = SummaryCurve(
            sm.r, vals, f"markcorr_{tf.name}", np.full_like(raw, theo), meta
        )
        numerators[tf.name] = SummaryCurve(sm.r, raw, f"markcorr_raw_{tf.name}", None, dict(meta))
        cs[tf.name] = c
    return MarkCorrSuite(curves, numerators, cs)


def _default_r(p: MarkedPointPattern) -> np.ndarray:
    if p.is_network:
        return r_grid(min(250.0, p.domain.total_length / 4.0))
    return r_grid(min(p.domain.width, p.domain.height) / 4.0)
