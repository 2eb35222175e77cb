"""Simulators: Poisson patterns on windows and networks, log-Gaussian Cox
processes on networks under the distance-anchored covariance condition,
linked/balanced bivariate Cox constructions, and the three mark-assignment
mechanisms used by the simulation-study runner.

All randomness flows through numpy Generators. Replicate streams derive
from a (master seed, replicate index) pair via a fixed SplitMix64 mix, so
any replicate can be regenerated independently and in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalError, ValidationError
from .geometry import (
    LinearNetwork,
    NetworkLocation,
    PlanarWindow,
    all_pairs_network_distances,
    border_distances,
    network_cross_distances,
    uniform_points_on_network,
)
from .pattern import MarkedPoint, MarkedPointPattern

__all__ = [
    "SeedSpec",
    "replicate_seed",
    "replicate_rng",
    "poisson_planar",
    "poisson_network",
    "GaussianFieldSpec",
    "lgcp_network",
    "irmps_check",
    "IrmpsReport",
    "linked_balanced_cox",
    "constant_field_sampler",
    "cosine_field_sampler",
    "model_marks",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus replicate index; identifies one random stream."""

    master_seed: int
    replicate_index: int = 0


def replicate_seed(master_seed: int, replicate_index: int) -> int:
    """SplitMix64 avalanche of the (seed, index) pair.

    The constants are the reference SplitMix64 multipliers; fixing them
    here makes replicate streams reproducible across platforms.
    """
    z = (master_seed + 0x9E3779B97F4A7C15 * (replicate_index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def replicate_rng(spec: SeedSpec) -> np.random.Generator:
    return np.random.default_rng(replicate_seed(spec.master_seed, spec.replicate_index))


def _eval_planar_field(f, xs, ys) -> np.ndarray:
    try:
        vals = np.asarray(f(xs, ys), dtype=float)
        if vals.shape == xs.shape:
            return vals
    except Exception:
        pass
    return np.array([float(f(x, y)) for x, y in zip(xs, ys)])


def poisson_planar(
    lam, w: PlanarWindow, rng: np.random.Generator, lam_max: float | None = None
) -> MarkedPointPattern:
    """Poisson pattern on a rectangle; callables are simulated by thinning
    a homogeneous proposal at rate lam_max."""
    if callable(lam):
        if lam_max is None:
            raise ValidationError("an intensity bound lam_max is required for callable intensities")
        n = rng.poisson(lam_max * w.area)
        xs = rng.uniform(w.xmin, w.xmax, size=n)
        ys = rng.uniform(w.ymin, w.ymax, size=n)
        if n:
            vals = _eval_planar_field(lam, xs, ys)
            if np.any(vals > lam_max * (1 + 1e-9)):
                raise ValidationError("intensity exceeds the declared bound lam_max")
            keep = rng.uniform(size=n) <= vals / lam_max
            xs, ys = xs[keep], ys[keep]
    else:
        if lam < 0:
            raise ValidationError(f"intensity must be nonnegative, got {lam}")
        n = rng.poisson(lam * w.area)
        xs = rng.uniform(w.xmin, w.xmax, size=n)
        ys = rng.uniform(w.ymin, w.ymax, size=n)
    return MarkedPointPattern(w, [MarkedPoint((float(x), float(y))) for x, y in zip(xs, ys)])


def poisson_network(
    lam, net: LinearNetwork, rng: np.random.Generator, lam_max: float | None = None
) -> MarkedPointPattern:
    """Poisson pattern on a network with per-unit-length rate lam."""
    if callable(lam):
        if lam_max is None:
            raise ValidationError("an intensity bound lam_max is required for callable intensities")
        n = rng.poisson(lam_max * net.total_length)
        locs = uniform_points_on_network(net, n, rng)
        if n:
            vals = np.array([float(lam(l)) for l in locs])
            if np.any(vals > lam_max * (1 + 1e-9)):
                raise ValidationError("intensity exceeds the declared bound lam_max")
            u = rng.uniform(size=n)
            locs = [l for l, v, ui in zip(locs, vals, u) if ui <= v / lam_max]
    else:
        if lam < 0:
            raise ValidationError(f"intensity must be nonnegative, got {lam}")
        n = rng.poisson(lam * net.total_length)
        locs = uniform_points_on_network(net, n, rng)
    return MarkedPointPattern(net, [MarkedPoint(l) for l in locs])


@dataclass(frozen=True)
class GaussianFieldSpec:
    """Gaussian field on a network, specified through distances to an anchor.

    The covariance between two locations is cov(d(u1, anchor), d(u2, anchor)).
    The process is well behaved for the intended model class only when that
    value does not depend on the anchor choice; irmps_check probes this.
    """

    mean: Callable[[NetworkLocation], float] | float
    cov: Callable[[float, float], float]
    anchor: NetworkLocation
    nugget: float = 1e-8

    def mean_at(self, locs) -> np.ndarray:
        if callable(self.mean):
            return np.array([float(self.mean(l)) for l in locs])
        return np.full(len(locs), float(self.mean))

    def cov_matrix(self, d_anchor: np.ndarray) -> np.ndarray:
        try:
            m = np.asarray(self.cov(d_anchor[:, None], d_anchor[None, :]), dtype=float)
            if m.shape == (len(d_anchor), len(d_anchor)):
                return m
        except Exception:
            pass
        n = len(d_anchor)
        m = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                m[i, j] = self.cov(d_anchor[i], d_anchor[j])
        return m


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix square root of a PSD covariance.

    Cholesky when positive definite; otherwise an eigen square root so that
    singular-but-PSD matrices (a constant or zero field) still factor.
    A genuinely indefinite matrix is reported, not silently repaired.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    w, v = np.linalg.eigh((cov + cov.T) / 2.0)
    tol = 1e-10 * max(1.0, float(np.abs(w).max()))
    if w.min() < -tol:
        raise NumericalError(
            f"covariance not positive semidefinite (min eigenvalue {w.min():.3e} after nugget)"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))


def _network_cells(net: LinearNetwork, step: float):
    """Arc-length discretization: per-cell (location of center, segment, t0, t1)."""
    cells = []
    for k in range(net.n_segments):
        ln = net.seg_lengths[k]
        m = max(1, int(np.ceil(ln / step)))
        for i in range(m):
            t0, t1 = i / m, (i + 1) / m
            cells.append((NetworkLocation(k, (t0 + t1) / 2.0), k, t0, t1))
    return cells


def lgcp_network(
    spec: GaussianFieldSpec,
    net: LinearNetwork,
    step: float | None = None,
    rng: np.random.Generator | None = None,
) -> MarkedPointPattern:
    """Log-Gaussian Cox pattern on a network.

    The field is sampled on a regular arc-length discretization via a
    Cholesky factor of the induced covariance (nugget added on the
    diagonal); each cell then receives an independent Poisson count with
    mean exp(Z) times the cell length.
    """
    if rng is None:
        rng = np.random.default_rng()
    if step is None:
        step = net.total_length / 500.0
    if step <= 0:
        raise ValidationError("discretization step must be positive")
    cells = _network_cells(net, step)
    locs = [c[0] for c in cells]
    d0 = network_cross_distances(net, locs, [spec.anchor])[:, 0]

    probe = rng.uniform(0.0, d0.max() if len(d0) else 1.0, size=(8, 2))
    for a, b in probe:
        if abs(spec.cov(a, b) - spec.cov(b, a)) > 1e-9 * max(1.0, abs(spec.cov(a, b))):
            raise ValidationError(f"covariance function is asymmetric at ({a}, {b})")

    cov = spec.cov_matrix(d0)
    if not np.allclose(cov, cov.T, rtol=1e-9, atol=1e-12):
        raise ValidationError("induced covariance matrix is asymmetric")
    jitter = spec.nugget * max(1.0, float(np.abs(np.diag(cov)).max()))
    factor = _psd_factor(cov + jitter * np.eye(len(cov)))
    z = spec.mean_at(locs) + factor @ rng.standard_normal(len(cells))
    lam = np.exp(z)

    pts = []
    for (loc, k, t0, t1), lam_c in zip(cells, lam):
        cell_len = (t1 - t0) * net.seg_lengths[k]
        cnt = rng.poisson(lam_c * cell_len)
        for t in rng.uniform(t0, t1, size=cnt):
            pts.append(MarkedPoint(NetworkLocation(k, float(t))))
    return MarkedPointPattern(net, pts)


@dataclass(frozen=True)
class IrmpsReport:
    """Anchor-dependence diagnostic for a distance-anchored covariance."""

    max_discrepancy: float
    n_triples: int
    anchor_free: bool


def irmps_check(
    spec: GaussianFieldSpec,
    net: LinearNetwork,
    n_triples: int = 64,
    rng: np.random.Generator | None = None,
    tol: float = 1e-9,
) -> IrmpsReport:
    """Probe whether the induced covariance is independent of the anchor.

    Draws random location pairs and two candidate anchors, evaluates the
    covariance through both, and reports the largest discrepancy.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(n_triples):
        u1, u2, a1, a2 = uniform_points_on_network(net, 4, rng)
        d = network_cross_distances(net, [u1, u2], [a1, a2])
        c1 = float(spec.cov(d[0, 0], d[1, 0]))
        c2 = float(spec.cov(d[0, 1], d[1, 1]))
        worst = max(worst, abs(c1 - c2))
    return IrmpsReport(worst, n_triples, worst <= tol)


def constant_field_sampler(value: float):
    """Base-field sampler producing a deterministic constant field."""
    if value < 0:
        raise ValidationError("field value must be nonnegative")

    def sample(rng):
        return (lambda x, y: np.full_like(np.asarray(x, dtype=float), value)), value

    return sample


def cosine_field_sampler(base: float, amplitude: float, scale: float, n_waves: int = 3):
    """Smooth random nonnegative field: base plus a few random plane cosines.

    Bounded by base + n_waves * amplitude, which the sampler reports so
    thinning stays exact. Requires amplitude * n_waves <= base.
    """
    if amplitude * n_waves > base:
        raise ValidationError("cosine field would go negative: amplitude too large")

    def sample(rng):
        angles = rng.uniform(0, 2 * np.pi, size=n_waves)
        phases = rng.uniform(0, 2 * np.pi, size=n_waves)
        freqs = rng.uniform(0.5, 1.5, size=n_waves) * (2 * np.pi / scale)

        def field(x, y):
            x = np.asarray(x, dtype=float)
            y = np.asarray(y, dtype=float)
            out = np.full_like(x, base)
            for a, ph, f in zip(angles, phases, freqs):
                out = out + amplitude * np.cos(f * (x * np.cos(a) + y * np.sin(a)) + ph)
            return out

        return field, base + n_waves * amplitude

    return sample


def linked_balanced_cox(
    kind: str,
    nu: float,
    base_sampler,
    w: PlanarWindow,
    rng: np.random.Generator,
    check_grid: int = 64,
) -> MarkedPointPattern:
    """Bivariate Cox pattern: component fields proportional (linked,
    Z1 = nu Z2) or complementary (balanced, Z1 = nu - Z2).

    base_sampler(rng) must return (field, upper_bound). Components are
    labeled "1" and "2"; given the field draw they are independent
    inhomogeneous Poisson processes.
    """
    if kind not in ("linked", "balanced"):
        raise ValidationError(f"kind must be 'linked' or 'balanced', got {kind!r}")
    if nu <= 0:
        raise ValidationError(f"nu must be positive, got {nu}")
    z2, bound2 = base_sampler(rng)
    xs = np.linspace(w.xmin, w.xmax, check_grid)
    ys = np.linspace(w.ymin, w.ymax, check_grid)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vals2 = _eval_planar_field(z2, gx.ravel(), gy.ravel())
    if np.any(vals2 < 0):
        raise ValidationError("base field is negative on the evaluation grid")
    if kind == "balanced":
        if np.any(vals2 > nu):
            raise ValidationError("balanced construction needs base field <= nu everywhere")
        z1 = lambda x, y: nu - _eval_planar_field(z2, np.asarray(x, float), np.asarray(y, float))
        bound1 = nu
    else:
        z1 = lambda x, y: nu * _eval_planar_field(z2, np.asarray(x, float), np.asarray(y, float))
        bound1 = nu * bound2
    p1 = poisson_planar(z1, w, rng, lam_max=max(bound1, 1e-300))
    p2 = poisson_planar(z2, w, rng, lam_max=max(bound2, 1e-300))
    pts = [MarkedPoint(pt.location, "1") for pt in p1.points] + [
        MarkedPoint(pt.location, "2") for pt in p2.points
    ]
    return MarkedPointPattern(w, pts)


def model_marks(
    kind: str,
    p: MarkedPointPattern,
    rng: np.random.Generator,
    a: float = 0.0,
    b: float = 1.0,
    tau: float | None = None,
    radius: float = 80.0,
) -> MarkedPointPattern:
    """Attach marks to a network pattern by one of three mechanisms.

    I   -- linear trend in the planar embedding: a + b (x + y) plus
           Gaussian noise with sd tau (default: a tenth of the trend range).
    II  -- shortest-path distance to the nearest degree-1 vertex.
    III -- number of other points within network distance `radius`.
    """
    if not p.is_network:
        raise ValidationError("mark models are defined for network patterns")
    if kind not in ("I", "II", "III"):
        raise ValidationError(f"unknown mark model {kind!r}")
    n = p.n
    if n == 0:
        return p
    if kind == "I":
        score = p.coords().sum(axis=1)
        rng_span = float(score.max() - score.min()) if n > 1 else 0.0
        if tau is None:
            tau = 0.1 * abs(b) * rng_span
        marks = a + b * score + (rng.normal(0.0, tau, size=n) if tau > 0 else 0.0)
    elif kind == "II":
        if len(p.domain.border_vertices()) == 0:
            raise ValidationError("model II needs at least one degree-1 vertex")
        marks = border_distances(p.domain, p.locations())
    else:
        if radius < 0:
            raise ValidationError(f"radius must be nonnegative, got {radius}")
        d = all_pairs_network_distances(p.domain, p.locations())
        np.fill_diagonal(d, np.inf)
        marks = (d <= radius).sum(axis=1).astype(float)
    return p.with_marks(marks)
