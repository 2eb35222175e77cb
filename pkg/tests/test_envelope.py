"""Rank-envelope assembly, NaN policy, determinism, and the study runner."""

import numpy as np
import pytest

from markedpoints import (
    EnvelopeBand,
    SummaryCurve,
    ValidationError,
    envelope_rank,
    envelopes,
    poisson_planar,
    synthetic_tree_network,
)
from markedpoints.envelope import _assemble_band, mark_correlation_study


def test_rank_rule():
    assert envelope_rank(199, 0.95) == 5
    assert envelope_rank(39, 0.95) == 1
    with pytest.raises(ValidationError, match="too small"):
        envelope_rank(19, 0.95)


def test_constant_statistic_band(unit_square):
    def gen(rng):
        return poisson_planar(10.0, unit_square, rng)

    def stat(p):
        return SummaryCurve(np.array([0.0, 1.0]), np.array([2.5, 2.5]), "const")

    band = envelopes(gen, stat, nsim=39, level=0.95, master_seed=1)
    assert np.all(band.lo == 2.5) and np.all(band.hi == 2.5) and np.all(band.mean == 2.5)
    assert np.all(band.n_effective == 39)


def test_band_single_replicate_k1():
    # the public rank rule cannot reach k=1 at nsim=1 for any level in (0,1);
    # the assembly itself must still collapse to the single curve when k=1
    r = np.array([0.0, 1.0, 2.0])
    matrix = np.array([[3.0, 1.0, 2.0]])
    band = _assemble_band(r, matrix, nsim=1, level=0.5, k=1)
    assert np.array_equal(band.lo, matrix[0])
    assert np.array_equal(band.hi, matrix[0])
    assert np.array_equal(band.mean, matrix[0])


def test_band_order_invariance():
    rng = np.random.default_rng(0)
    r = np.linspace(0, 1, 5)
    r[0] = 0.0
    matrix = rng.normal(size=(49, 5))
    a = _assemble_band(r, matrix, 49, 0.92)
    b = _assemble_band(r, matrix[rng.permutation(49)], 49, 0.92)
    assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
    assert np.allclose(a.mean, b.mean)


def test_band_nan_policy():
    r = np.array([0.0, 1.0])
    matrix = np.full((39, 2), 1.0)
    matrix[:, 1] = np.nan
    matrix[:3, 1] = [0.5, 1.0, 2.0]  # only 3 replicates defined at the second r
    band = _assemble_band(r, matrix, 39, 0.95)
    assert band.n_effective.tolist() == [39, 3]
    assert band.lo[1] == 0.5 and band.hi[1] == 2.0  # k=1 extremes of the defined values
    assert band.mean[1] == pytest.approx(np.mean([0.5, 1.0, 2.0]))
    matrix[:, 1] = np.nan
    band2 = _assemble_band(r, matrix, 39, 0.95)
    assert np.isnan(band2.lo[1]) and np.isnan(band2.hi[1]) and np.isnan(band2.mean[1])
    assert band2.n_effective[1] == 0


def test_band_envelope_ordering():
    rng = np.random.default_rng(7)
    r = np.linspace(0, 1, 9)
    r[0] = 0.0
    matrix = rng.normal(size=(199, 9))
    band = _assemble_band(r, matrix, 199, 0.95)
    assert np.all(band.lo <= band.mean) and np.all(band.mean <= band.hi)


def test_envelopes_deterministic_and_parallel_equal(unit_square):
    def gen(rng):
        return poisson_planar(40.0, unit_square, rng)

    def stat(p):
        r = np.array([0.0, 0.1, 0.2])
        if p.n < 2:
            return SummaryCurve(r, np.full(3, np.nan), "nnd")
        xy = p.coords()
        d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
        np.fill_diagonal(d, np.inf)
        nnd = d.min(axis=1)
        return SummaryCurve(r, np.array([nnd.mean()] * 3), "nnd")

    a = envelopes(gen, stat, nsim=39, level=0.95, master_seed=11, n_jobs=1)
    b = envelopes(gen, stat, nsim=39, level=0.95, master_seed=11, n_jobs=4)
    assert np.array_equal(a.lo, b.lo) and np.array_equal(a.hi, b.hi)
    assert np.array_equal(a.mean, b.mean)


def test_envelopes_observed_overlay(unit_square):
    def gen(rng):
        return poisson_planar(30.0, unit_square, rng)

    def stat(p):
        return SummaryCurve(np.array([0.0, 1.0]), np.array([float(p.n)] * 2, dtype=float), "count")

    obs = poisson_planar(30.0, unit_square, np.random.default_rng(5))
    band = envelopes(gen, stat, nsim=39, master_seed=2, observed=obs)
    assert band.observed is not None
    assert band.observed.values[0] == obs.n


def test_band_csv(tmp_path):
    r = np.array([0.0, 1.0])
    band = EnvelopeBand(
        r, np.array([0.0, 1.0]), np.array([2.0, 3.0]), np.array([1.0, 2.0]),
        nsim=39, level=0.95, k=1, n_effective=np.array([39, 39]), statistic="s",
    )
    path = tmp_path / "band.csv"
    band.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# statistic=s nsim=39")
    assert lines[1] == "r,lo,mean,hi,n_effective"


def test_reproduce_runner_small(tmp_path):
    net = synthetic_tree_network(core_depth=4)
    bands = mark_correlation_study(
        net, "III", tmp_path, nsim=39, master_seed=3, n_expected=40,
        r_max=200.0, bins=40, bandwidth=20.0,
    )
    assert set(bands) == {"stoyan", "variogram", "shimantani_i", "beisbart_kerscher"}
    for name in bands:
        assert (tmp_path / f"modelIII_{name}_band.csv").exists()
    assert (tmp_path / "modelIII_markcorr.svg").exists()
    svg = (tmp_path / "modelIII_markcorr.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg
