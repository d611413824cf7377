import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from distortion_premium import (
    XL,
    Bernoulli,
    CustomPayoff,
    DiscreteDistribution,
    EmpiricalDistribution,
    Exponential,
    Gamma,
    Proportional,
    Uniform,
    apply_transform,
    conjugate,
    make_rng,
    quantile,
    read_losses_csv,
    wasserstein,
    wasserstein_dp,
)
from distortion_premium.dist_core import CsvFormatError, ShiftedDistribution, check_equal_sizes
from distortion_premium.errors import ConfigurationError, DomainError

samples = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=30)
nonneg = st.lists(st.floats(0, 20, allow_nan=False), min_size=1, max_size=30)


# --- quantiles --------------------------------------------------------------


def test_quantile_examples(four_points):
    assert quantile(Uniform(0, 1), 0.3) == pytest.approx(0.3, abs=1e-15)
    assert quantile(four_points, 0.5) == 2.0
    assert quantile(Exponential(1.0), 1 - math.exp(-1)) == pytest.approx(1.0, abs=1e-12)


def test_empirical_quantile_convention(four_points):
    # x_[ceil(v n)], with v = 0 mapped to the smallest point
    assert four_points.quantile(0.0) == 1.0
    assert four_points.quantile(0.25) == 1.0
    assert four_points.quantile(0.2500001) == 2.0
    assert four_points.quantile(1.0) == 4.0
    # 0.3 * 10 rounds to 3.0000000000000004; the index must still be 3
    assert EmpiricalDistribution(range(1, 11)).quantile(0.3) == 3.0


def test_quantile_out_of_range(four_points):
    with pytest.raises(DomainError):
        four_points.quantile(1.5)
    with pytest.raises(DomainError):
        four_points.quantile(-0.1)
    with pytest.raises(DomainError):
        Exponential(1.0).quantile(1.0)


def test_parametric_quantiles_against_scipy():
    v = np.linspace(0.01, 0.99, 37)
    np.testing.assert_allclose(Gamma(2.5, 1.7).quantile(v), stats.gamma(2.5, scale=1.7).ppf(v), rtol=1e-10)
    np.testing.assert_allclose(Exponential(3.0).quantile(v), stats.expon(scale=1 / 3).ppf(v), rtol=1e-12)
    np.testing.assert_allclose(Uniform(-1, 2).quantile(v), -1 + 3 * v, atol=1e-15)


def test_bernoulli_quantile_and_discrete():
    B = Bernoulli(0.3)
    assert B.quantile(0.2) == 0.0
    assert B.quantile(0.5) == 1.0
    D = B.as_discrete()
    assert D.mean() == pytest.approx(0.7)


def test_sampling_reproducible():
    a = Gamma(2, 1).sample(100, seed=7, stream=3)
    b = Gamma(2, 1).sample(100, seed=7, stream=3)
    c = Gamma(2, 1).sample(100, seed=7, stream=4)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert make_rng(1, 2).random() == make_rng(3, 0).random()  # substream is seed + index


@pytest.mark.parametrize("model", [Gamma(2, 1.5), Exponential(0.5), Uniform(1, 3)])
def test_parametric_mean_and_tail(model):
    # mean and tail integral against quadrature of the quantile function
    from scipy import integrate

    m, _ = integrate.quad(lambda v: float(model.quantile(v)), 0, 1, limit=200)
    t, _ = integrate.quad(lambda v: float(model.quantile(v)), 0.7, 1, limit=200)
    assert model.mean() == pytest.approx(m, rel=1e-8)
    assert model.tail_integral(0.7) == pytest.approx(t, rel=1e-8)


def test_discrete_from_atoms():
    D = DiscreteDistribution.from_atoms([3.0, 1.0, 2.0], [0.5, 0.25, 0.25])
    assert list(D.values) == [1.0, 2.0, 3.0]
    assert D.quantile(0.3) == 2.0
    with pytest.raises(DomainError):
        DiscreteDistribution.from_atoms([1.0], [0.5])


# --- distances --------------------------------------------------------------


def test_wasserstein_examples():
    F, G = EmpiricalDistribution([0, 1]), EmpiricalDistribution([1, 2])
    assert wasserstein(F, F, 1) == 0.0
    assert wasserstein(F, G, 1) == 1.0
    assert wasserstein(EmpiricalDistribution([0]), EmpiricalDistribution([3]), 2) == 3.0
    with pytest.raises(DomainError):
        wasserstein(F, G, 0.5)


def test_wasserstein_dp_examples():
    F, G = EmpiricalDistribution([0, 1]), EmpiricalDistribution([1, 2])
    assert wasserstein_dp(F, F, 2) == 0.0
    assert wasserstein_dp(F, G, 2) == 2.0
    assert wasserstein_dp(EmpiricalDistribution([2]), EmpiricalDistribution([1]), 1) == 1.0
    with pytest.raises(DomainError):
        wasserstein_dp(EmpiricalDistribution([-1.0, 1.0]), G, 2)


@given(samples, samples)
def test_wasserstein_1_matches_scipy(x, y):
    # scipy integrates |F - G| over x; the implementation works in quantile space
    ref = stats.wasserstein_distance(x, y)
    got = wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), 1)
    assert got == pytest.approx(ref, rel=1e-9, abs=1e-9)


@given(st.integers(1, 20).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-10, 10), min_size=n, max_size=n),
    st.lists(st.floats(-10, 10), min_size=n, max_size=n))),
    st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_wasserstein_sorted_sample_oracle(xy, r):
    x, y = map(np.sort, map(np.asarray, xy))
    got = wasserstein(EmpiricalDistribution(x), EmpiricalDistribution(y), r)
    assert got**r == pytest.approx(np.mean(np.abs(x - y) ** r), rel=1e-12, abs=1e-12)


@given(samples, samples)
def test_wasserstein_order_monotone_and_symmetric(x, y):
    F, G = EmpiricalDistribution(x), EmpiricalDistribution(y)
    w = [wasserstein(F, G, r) for r in (1, 1.5, 2, 4)]
    assert all(a <= b + 1e-12 for a, b in zip(w, w[1:]))
    assert wasserstein(G, F, 2) == pytest.approx(w[2], abs=1e-12)


@given(samples, samples, samples)
def test_wasserstein_triangle(x, y, z):
    F, G, K = (EmpiricalDistribution(s) for s in (x, y, z))
    assert wasserstein(F, K, 2) <= wasserstein(F, G, 2) + wasserstein(G, K, 2) + 1e-9


@given(nonneg, nonneg, st.sampled_from([2.0, 3.0]))
def test_dp_sandwich(x, y, p):
    F, G = EmpiricalDistribution(x), EmpiricalDistribution(y)
    wp = wasserstein(F, G, p)
    dp = wasserstein_dp(F, G, p)
    assert wp**p <= dp + 1e-12 * max(1.0, dp)
    assert dp <= p * wp * (1 + F.norm(p) ** (p - 1) + G.norm(p) ** (p - 1)) + 1e-9


def test_wasserstein_parametric_midpoint_vs_adaptive():
    F, G = Exponential(1.0), Gamma(2.0, 1.0)
    a = wasserstein(F, G, 1)
    b = wasserstein(F, G, 1, method="adaptive")
    # both against the area between the CDFs on x
    from scipy import integrate

    c, _ = integrate.quad(lambda x: abs(float(stats.expon.cdf(x)) - float(stats.gamma(2).cdf(x))), 0, np.inf, limit=200)
    assert b == pytest.approx(c, rel=1e-7)
    assert a == pytest.approx(c, rel=1e-3)


def test_wasserstein_mixed_step_and_parametric():
    F = Uniform(0, 1)
    G = EmpiricalDistribution([0.5])
    # ∫|v - 1/2| dv = 1/4
    assert wasserstein(F, G, 1) == pytest.approx(0.25, abs=1e-8)


def test_shifted_distribution_distance():
    base = Exponential(1.0)
    S = ShiftedDistribution(base, lambda v: 0.3 * np.asarray(v) ** 2)
    # ||0.3 v^2||_2 = 0.3 / sqrt(5)
    assert S.shift_norm(2) == pytest.approx(0.3 / math.sqrt(5), rel=1e-10)
    assert wasserstein(base, S, 2) == pytest.approx(0.3 / math.sqrt(5), rel=1e-6)


# --- payoffs ----------------------------------------------------------------


def test_xl_example():
    out = apply_transform(XL(1, 3), EmpiricalDistribution([0.5, 2, 5]))
    assert list(out.values) == [0.0, 1.0, 2.0]
    with pytest.raises(DomainError):
        XL(0, math.inf)
    with pytest.raises(DomainError):
        XL(3, 1)


@given(samples)
def test_proportional_identity(x):
    F = EmpiricalDistribution(x)
    assert np.array_equal(apply_transform(Proportional(1.0), F).values, F.values)


@given(nonneg, nonneg, st.sampled_from([1.0, 2.0]))
def test_hoelder_image_bound(x, y, r):
    F, G = EmpiricalDistribution(x), EmpiricalDistribution(y)
    T = XL(1.0, 5.0)
    assert wasserstein(apply_transform(T, F), apply_transform(T, G), r) <= wasserstein(F, G, r) + 1e-12


def test_custom_payoff():
    T = CustomPayoff((0, 1, 2), (0, 2, 3))
    assert T.hoelder_constant == 2.0
    assert list(apply_transform(T, EmpiricalDistribution([0.5, 1.5, 9])).values) == [1.0, 2.5, 3.0]
    with pytest.raises(DomainError):
        CustomPayoff((0, 1), (1, 0))


def test_conjugate():
    assert conjugate(1) == math.inf
    assert conjugate(math.inf) == 1
    assert conjugate(2) == 2
    assert conjugate(1.5) == pytest.approx(3)


# --- CSV --------------------------------------------------------------------


def test_read_single_column(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("loss\n3\n1\n2\n")
    out = read_losses_csv(p)
    assert list(out) == ["1"]
    assert list(out["1"].values) == [1.0, 2.0, 3.0]


def test_read_multi_contract_sorted(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("contract_id,loss\n10,1\n2,5\n10,2\n2,6\n")
    out = read_losses_csv(p)
    assert list(out) == ["2", "10"]


@pytest.mark.parametrize("text,row", [("1\nabc\n", 2), ("1,2,3\n", 1), ("1\nnan\n", 2)])
def test_read_errors(tmp_path, text, row):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(CsvFormatError) as err:
        read_losses_csv(p)
    assert err.value.row == row


def test_empty_file(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(CsvFormatError):
        read_losses_csv(p)


def test_equal_sizes():
    with pytest.raises(ConfigurationError):
        check_equal_sizes([EmpiricalDistribution([1]), EmpiricalDistribution([1, 2])])
