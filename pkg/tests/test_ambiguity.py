import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import random_ball_element

from distortion_premium import (
    XL,
    AmbiguitySpec,
    AVaR,
    EmpiricalDistribution,
    Exponential,
    Gamma,
    Identity,
    KusuokaMixture,
    PiecewiseConstant,
    Power,
    Proportional,
    RobustResult,
    StepMix,
    Wang,
    apply_transform,
    approximating_family,
    ceq_premium,
    continuity_bound,
    diagnose_boundedness,
    distortion_premium,
    partial_coverage_bound,
    premium,
    robust_ceq_lower_bound,
    robust_premium,
    robust_premium_r1,
    robust_premium_rp,
    wasserstein,
)
from distortion_premium.ambiguity import ATTAINED, NOT_ATTAINED, UNBOUNDED
from distortion_premium.distortion import PowerDisutility
from distortion_premium.errors import DomainError, NoFiniteBoundError

PLATEAU_SPECS = [
    AVaR(0.5),
    AVaR(0.9),
    Identity(),
    PiecewiseConstant([0, 0.4, 0.7, 1], [0.2, 0.8, 2.0]),
    StepMix([0.0, 0.5, 1.0, 2.5]),
    KusuokaMixture([(0.1, 0.3), (0.6, 0.7)]),
]

nonneg_samples = st.lists(st.floats(0, 50, allow_nan=False), min_size=1, max_size=40)


def rand_empirical(rng, n=100):
    return EmpiricalDistribution(rng.gamma(rng.uniform(1, 4), rng.uniform(0.5, 2), n))


# --- order 1 ----------------------------------------------------------------


def test_r1_avar_example(four_points):
    res = robust_premium_r1(four_points, AVaR(0.5), 0.1)
    assert res.value == pytest.approx(3.7, abs=1e-12)
    assert res.status == ATTAINED
    np.testing.assert_allclose(res.worst_case.quantile([0.3, 0.6, 0.9]), [2.0, 3.2, 4.2])
    np.testing.assert_allclose(res.shift(np.array([0.25, 0.75])), [0.0, 0.2])


def test_r1_zero_radius(four_points):
    res = robust_premium_r1(four_points, Power(0.8), 0.0)
    assert res.status == ATTAINED
    assert res.worst_case is four_points
    assert res.value == premium(four_points, Power(0.8)).value


def test_r1_unbounded(four_points):
    for h in (Power(0.8), Wang(0.5), KusuokaMixture((), 1.0)):
        res = robust_premium_r1(four_points, h, 0.1)
        assert res.status == UNBOUNDED and res.value == math.inf


def test_r1_negative_radius(four_points):
    with pytest.raises(DomainError):
        robust_premium_r1(four_points, AVaR(0.5), -1.0)


@pytest.mark.parametrize("h", PLATEAU_SPECS, ids=repr)
def test_r1_attained_on_step_base(h, rng):
    F = rand_empirical(rng)
    eps = 0.37
    res = robust_premium_r1(F, h, eps)
    assert res.status == ATTAINED
    assert res.value == pytest.approx(premium(F, h).value + eps * h.sup_norm(), abs=1e-12)
    assert distortion_premium(res.worst_case, h).value == pytest.approx(res.value, abs=1e-8)
    assert wasserstein(F, res.worst_case, 1) == pytest.approx(eps, abs=1e-8)
    assert res.ambiguity_premium >= 0


def test_r1_attained_on_parametric_base():
    F = Gamma(2.0, 1.0)
    res = robust_premium_r1(F, AVaR(0.8), 0.2)
    assert premium(res.worst_case, AVaR(0.8)).value == pytest.approx(res.value, abs=1e-8)
    assert wasserstein(F, res.worst_case, 1, method="adaptive") == pytest.approx(0.2, abs=1e-8)


@pytest.mark.parametrize("h", [AVaR(0.7), Power(2), StepMix([0.2, 0.8, 2.0])], ids=repr)
def test_r1_dominance(h, rng):
    F = rand_empirical(rng, 40)
    eps = 0.5
    value = robust_premium_r1(F, h, eps).value
    for _ in range(300):
        G = random_ball_element(F, eps, 1, rng)
        assert wasserstein(F, G, 1) <= eps + 1e-9
        assert distortion_premium(G, h).value <= value + 1e-8


def test_r1_affine_in_radius(rng):
    F = rand_empirical(rng)
    h = AVaR(0.75)
    a, b = robust_premium_r1(F, h, 0.2).value, robust_premium_r1(F, h, 0.9).value
    assert (b - a) / 0.7 == pytest.approx(h.sup_norm(), rel=1e-12)


def test_r1_not_attained_family_converges(four_points):
    h = Power(3)
    eps = 0.25
    res = robust_premium_r1(four_points, h, eps)
    assert res.status == NOT_ATTAINED
    assert res.value == pytest.approx(premium(four_points, h).value + 3 * eps)
    vals = []
    for n in (2, 4, 8, 16, 32, 1024):
        G, formula = approximating_family(four_points, h, eps, n)
        priced = distortion_premium(G, h).value
        assert priced == pytest.approx(formula, abs=1e-12)
        assert wasserstein(four_points, G, 1) == pytest.approx(eps, abs=1e-12)
        vals.append(priced)
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < res.value
    assert res.value - vals[-1] < 1e-3
    G = res.approximating_family(8)
    assert distortion_premium(G, h).value == pytest.approx(vals[2])


def test_wang_family_increases_without_bound(four_points):
    h = Wang(0.8)
    vals = [approximating_family(four_points, h, 0.1, n)[1] for n in (2, 4, 8, 16, 32, 2**20)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] > vals[0] + 0.3


# --- order p ----------------------------------------------------------------


def test_rp_power_example(rng):
    F = rand_empirical(rng, 50)
    eps = 0.3
    res = robust_premium_rp(F, Power(2), eps, 2)
    assert res.ambiguity_premium == pytest.approx(eps * 2 / math.sqrt(3), rel=1e-14)
    assert premium(res.worst_case, Power(2)).value == pytest.approx(res.value, abs=1e-8)
    assert wasserstein(F, res.worst_case, 2, method="adaptive") == pytest.approx(eps, abs=1e-8)
    # ||2v||_2^2 = 4/3
    assert res.ambiguity_premium_qpower == pytest.approx(eps * 4 / 3)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 0.9])
def test_rp_avar(alpha, four_points):
    res = robust_premium_rp(four_points, AVaR(alpha), 0.2, 2)
    assert res.ambiguity_premium == pytest.approx(0.2 / math.sqrt(1 - alpha), rel=1e-12)
    assert premium(res.worst_case, AVaR(alpha)).value == pytest.approx(res.value, abs=1e-8)


def test_rp_zero_radius(four_points):
    res = robust_premium_rp(four_points, Power(2), 0.0, 2)
    assert res.value == premium(four_points, Power(2)).value


@pytest.mark.parametrize("h,p", [(Power(0.8), 2.0), (Wang(0.5), 1.5), (Power(3), 3.0), (AVaR(0.6), 1.2)], ids=repr)
def test_rp_attained_and_on_boundary(h, p):
    F = Exponential(1.0)
    eps = 0.15
    res = robust_premium_rp(F, h, eps, p)
    assert res.status == ATTAINED
    assert premium(res.worst_case, h).value == pytest.approx(res.value, abs=1e-7)
    assert res.worst_case.shift_norm(p) == pytest.approx(eps, rel=1e-7)


@pytest.mark.parametrize("h,p", [(Power(2), 2.0), (AVaR(0.5), 3.0), (Power(0.8), 2.0)], ids=repr)
def test_rp_dominance(h, p, rng):
    F = rand_empirical(rng, 40)
    eps = 0.4
    value = robust_premium_rp(F, h, eps, p).value
    for _ in range(300):
        G = random_ball_element(F, eps, p, rng)
        assert distortion_premium(G, h).value <= value + 1e-8


def test_rp_unbounded(four_points):
    res = robust_premium_rp(four_points, Power(0.5), 0.1, 1.5)
    assert res.status == UNBOUNDED


def test_rp_rejects_order_one(four_points):
    with pytest.raises(DomainError):
        robust_premium_rp(four_points, Power(2), 0.1, 1.0)


def test_rp_affine_in_radius(four_points):
    h = Wang(0.4)
    a, b = robust_premium_rp(four_points, h, 0.1, 2).value, robust_premium_rp(four_points, h, 0.6, 2).value
    assert (b - a) / 0.5 == pytest.approx(h.q_norm(2), rel=1e-12)


def test_dispatch(four_points):
    assert robust_premium(four_points, AVaR(0.5), AmbiguitySpec(0.1)).value == pytest.approx(3.7)
    assert robust_premium(four_points, Power(2), AmbiguitySpec(0.1, r=2)).status == ATTAINED
    with pytest.raises(DomainError):
        robust_premium(four_points, Power(2), AmbiguitySpec(0.1, r=2, metric="dp", p=2))
    with pytest.raises(DomainError):
        AmbiguitySpec(-0.1)
    with pytest.raises(DomainError):
        AmbiguitySpec(0.1, r=0.5)


# --- boundedness ------------------------------------------------------------


def test_diagnose_examples():
    assert diagnose_boundedness(Power(0.8), 2, 2) == "bounded"
    assert diagnose_boundedness(Power(0.8), 1.5, 1.5) == "bounded"
    for h in (Power(0.8), Wang(1.0), KusuokaMixture((), 1.0)):
        assert diagnose_boundedness(h, 1, 1) == "unbounded"
    assert diagnose_boundedness(Power(0.5), 1.5, 1.5) in ("undetermined", "unbounded")
    assert diagnose_boundedness(AVaR(0.9), 1, 1) == "bounded"


def test_diagnose_ball_order_above_moments():
    # h in L^2 but not in L^3: an order-2 ball around losses with 1.5 moments
    h = Power(0.6)
    assert math.isfinite(h.q_norm(2)) and math.isinf(h.q_norm(3))
    assert diagnose_boundedness(h, 1.5, 2) == "undetermined"
    # order-1.5 ball: the gain ε ||h||_3 is already infinite
    assert diagnose_boundedness(h, 1.5, 1.5) == "unbounded"


def test_diagnose_dp_metric():
    assert diagnose_boundedness(Power(0.8), 2, 1, metric="dp") == "bounded"
    assert diagnose_boundedness(Power(0.5), 1.5, 1, metric="dp") == "undetermined"


# --- continuity bounds ------------------------------------------------------


def test_continuity_examples(rng):
    F, G = rand_empirical(rng), rand_empirical(rng)
    w1 = wasserstein(F, G, 1)
    assert continuity_bound(AVaR(0.9), F, G, 1) == pytest.approx(10 * w1, rel=1e-12)
    assert continuity_bound(Power(3), F, G, 1) == pytest.approx(3 * w1, rel=1e-12)
    assert continuity_bound(AVaR(0.9), F, F, 1) == 0.0


def test_continuity_power_closed_form(rng):
    F, G = rand_empirical(rng), rand_empirical(rng)
    s, q = 0.8, 2.0
    ref = s / (1 + q * (s - 1)) ** (1 / q) * wasserstein(F, G, 2)
    assert continuity_bound(Power(s), F, G, 2) == pytest.approx(ref, rel=1e-12)
    # dominated by 1.2 * Power(0.8)
    h = PiecewiseConstant([0, 0.5, 1], [0.6, 1.4])
    assert continuity_bound(h, F, G, 2, dominating=(1.2 * 1.4 / 0.8, 0.8)) >= abs(premium(F, h).value - premium(G, h).value)
    with pytest.raises(DomainError):
        continuity_bound(AVaR(0.9), F, G, 2, dominating=(1.0, 0.8))


def test_continuity_no_finite_bound(four_points):
    with pytest.raises(NoFiniteBoundError):
        continuity_bound(Power(0.8), four_points, four_points, 1)
    with pytest.raises(NoFiniteBoundError):
        continuity_bound(Power(0.5), four_points, four_points, 1.5)


@given(nonneg_samples, nonneg_samples)
def test_continuity_bound_holds(x, y):
    F, G = EmpiricalDistribution(x), EmpiricalDistribution(y)
    for h, p in ((AVaR(0.9), 1), (AVaR(0.9), 2), (Power(3), 1), (Power(0.8), 2), (Wang(0.7), 2)):
        gap = abs(distortion_premium(F, h).value - distortion_premium(G, h).value)
        assert gap <= continuity_bound(h, F, G, p) + 1e-9


def test_continuity_on_parametric():
    F, G = Gamma(2, 1), Gamma(2.5, 1)
    h = Power(0.8)
    gap = abs(premium(F, h).value - premium(G, h).value)
    assert gap <= continuity_bound(h, F, G, 2, method="adaptive")


# --- partial coverage -------------------------------------------------------


def test_partial_coverage_examples(rng):
    F, G = rand_empirical(rng), rand_empirical(rng)
    T = XL(1, 5)
    assert partial_coverage_bound(AVaR(0.8), T, F, G, 1) == pytest.approx(5 * wasserstein(F, G, 1))
    assert partial_coverage_bound(AVaR(0.8), T, F, F, 1) == 0.0
    c = 0.3
    assert partial_coverage_bound(Power(2), Proportional(c), F, G, 2) == pytest.approx(c * Power(2).q_norm(2) * wasserstein(F, G, 2))


@given(nonneg_samples, nonneg_samples, st.floats(0, 3), st.floats(0.5, 5))
def test_partial_coverage_bound_holds(x, y, a, width):
    F, G = EmpiricalDistribution(x), EmpiricalDistribution(y)
    T = XL(a, a + width)
    for h, r in ((AVaR(0.8), 1), (Power(2.5), 1), (Power(0.8), 2)):
        gap = abs(premium(apply_transform(T, F), h).value - premium(apply_transform(T, G), h).value)
        assert gap <= partial_coverage_bound(h, T, F, G, r) + 1e-9


# --- combined premium -------------------------------------------------------


def test_robust_ceq_lower_bound(four_points):
    h = AVaR(0.5)
    from distortion_premium.distortion import IdentityDisutility

    assert robust_ceq_lower_bound(four_points, IdentityDisutility(), h, 0.1, 1) == pytest.approx(3.7)
    assert robust_ceq_lower_bound(four_points, IdentityDisutility(), Power(2), 0.1, 2) == pytest.approx(
        robust_premium_rp(four_points, Power(2), 0.1, 2).value, abs=1e-8)
    V = PowerDisutility(2)
    lb = robust_ceq_lower_bound(four_points, V, h, 0.1, 2)
    assert lb >= ceq_premium(four_points, V, h)
    assert robust_ceq_lower_bound(four_points, V, Power(0.8), 0.1, 1) == math.inf


# --- JSON -------------------------------------------------------------------


@pytest.mark.parametrize("h,r", [(AVaR(0.5), 1), (Power(3), 1), (Power(0.8), 1), (Power(2), 2)], ids=repr)
def test_result_json_round_trip(four_points, h, r):
    res = robust_premium_r1(four_points, h, 0.1) if r == 1 else robust_premium_rp(four_points, h, 0.1, r)
    obj = json.loads(json.dumps(res.to_json(verbose=True), allow_nan=False))
    back = RobustResult.from_json(obj)
    assert back.to_json(verbose=True) == obj
    assert back.status == res.status
    assert obj["status"] in ("attained", "sup", "unbounded")


def test_json_statuses(four_points):
    assert robust_premium_r1(four_points, Power(3), 0.1).to_json()["status"] == "sup"
    obj = robust_premium_r1(four_points, Power(0.8), 0.1).to_json()
    assert obj["status"] == "unbounded" and obj["value"] is None
