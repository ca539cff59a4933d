import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from dither_codec.dither import (
    DitherSpec,
    dither_cdf,
    dither_pdf,
    dither_variance,
    nominal_dither_variance,
    sample_dither,
    tpdf,
    tpdf_cdf,
)

N = 10**6


def test_half_width():
    for a in (0.0, 0.3, 1.0):
        assert DitherSpec(1, a, 2.0).half_width == 2.0
        assert DitherSpec(2, a, 2.0).half_width == pytest.approx(2.0 * a)


@pytest.mark.parametrize("kw", [dict(m=3), dict(alpha=-0.1), dict(alpha=1.1), dict(delta=0.0)])
def test_validation(kw):
    with pytest.raises(ValueError):
        DitherSpec(**kw)


def test_alpha_zero_is_silent():
    assert np.all(sample_dither(DitherSpec(1, 0.0, 1.0, seed=1), 10_000) == 0.0)


@pytest.mark.slow
def test_full_tpdf_ks():
    v = sample_dither(DitherSpec(1, 1.0, 1.0, seed=2), N)
    assert v.min() >= -1.0 and v.max() <= 1.0
    ks = stats.kstest(v, lambda t: tpdf_cdf(t, 1.0)).statistic
    assert ks < 0.002


@pytest.mark.slow
def test_family2_support_and_atom():
    v = sample_dither(DitherSpec(2, 0.5, 1.0, seed=3), N)
    nz = v[v != 0]
    assert np.abs(nz).max() <= 0.5
    assert abs(np.mean(v == 0) - 0.5) < 0.002


def test_pdf_values():
    d, atom = dither_pdf(DitherSpec(1, 1.0, 1.0), 0.0)
    assert d == pytest.approx(1.0) and atom == 0.0
    d, atom = dither_pdf(DitherSpec(1, 0.5, 1.0), 2.0)
    assert d == 0.0 and atom == 0.5
    # alpha * (1/a^2)(a - |v|) with a = 0.5
    d, _ = dither_pdf(DitherSpec(2, 0.5, 1.0), 0.25)
    assert d == pytest.approx(0.5)


def test_pdf_integrates_to_alpha():
    for m, a in [(1, 0.3), (2, 0.7), (2, 1.0)]:
        spec = DitherSpec(m, a, 1.0)
        w = spec.half_width
        mass, _ = integrate.quad(lambda v: float(dither_pdf(spec, v)[0]), -w, w, points=[0.0])
        assert mass + dither_pdf(spec, 0.0)[1] == pytest.approx(1.0, abs=1e-10)


def _second_moment_by_quadrature(spec):
    a = spec.half_width
    if spec.alpha == 0:
        return 0.0
    val, _ = integrate.quad(lambda v: v * v * tpdf(v, a), -a, a, points=[0.0])
    return spec.alpha * val


@pytest.mark.parametrize("m,alpha,expected", [(1, 0.0, 0.0), (2, 0.0, 0.0), (1, 1.0, 1 / 6), (2, 0.5, 1 / 48)])
def test_variance_matches_quadrature(m, alpha, expected):
    spec = DitherSpec(m, alpha, 1.0)
    assert dither_variance(spec) == pytest.approx(expected, abs=1e-15)
    assert dither_variance(spec) == pytest.approx(_second_moment_by_quadrature(spec), abs=1e-12)


def test_nominal_constant_differs_by_three_halves():
    spec = DitherSpec(1, 1.0, 1.0)
    assert nominal_dither_variance(spec) / dither_variance(spec) == pytest.approx(1.5)


@given(st.floats(0.01, 1.0), st.floats(0.01, 4.0))
def test_variance_ratio_between_families(alpha, delta):
    r = dither_variance(DitherSpec(2, alpha, delta)) / dither_variance(DitherSpec(1, alpha, delta))
    assert r == pytest.approx(alpha**2, rel=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_monte_carlo_moments(m, alpha):
    spec = DitherSpec(m, alpha, 1.0, seed=100 + m)
    v = sample_dither(spec, N)
    var = dither_variance(spec)
    if alpha == 0:
        assert np.all(v == 0)
        return
    assert abs(v.var() / var - 1) < 0.02
    assert abs(v.mean()) < 3 * np.sqrt(var / N)


@pytest.mark.slow
@pytest.mark.parametrize("m,alpha", [(1, 0.5), (2, 0.5), (2, 0.9)])
def test_histogram_chi_square(m, alpha):
    spec = DitherSpec(m, alpha, 1.0, seed=7)
    v = sample_dither(spec, N)
    zeros = int(np.sum(v == 0))
    a = spec.half_width
    edges = np.linspace(-a, a, 65)
    counts, _ = np.histogram(v[v != 0], edges)
    cdf = dither_cdf(spec, edges) - np.where(edges >= 0, spec.atom, 0.0)
    expected = np.concatenate(([N * spec.atom], N * np.diff(cdf)))
    observed = np.concatenate(([zeros], counts))
    chi2 = np.sum((observed - expected) ** 2 / expected)
    assert stats.chi2.sf(chi2, df=observed.size - 1) > 1e-3


def test_families_share_realization():
    a = sample_dither(DitherSpec(1, 1.0, 1.0, seed=5), 1000)
    b = sample_dither(DitherSpec(2, 1.0, 1.0, seed=5), 1000)
    np.testing.assert_array_equal(a, b)


@settings(max_examples=30)
@given(st.integers(0, 2**64 - 1))
def test_seed_determinism(seed):
    spec = DitherSpec(2, 0.6, 0.5, seed)
    np.testing.assert_array_equal(sample_dither(spec, 64), sample_dither(spec, 64))
