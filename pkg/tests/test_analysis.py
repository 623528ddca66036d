import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from localdeg.analysis import (
    OracleBoundInputs,
    check_moment_condition,
    clt_check,
    estimate_approx_term,
    estimate_sigma2,
    oracle_bound_profile,
    oracle_bound_rhs,
    sbm_sigma2,
    verify_connectivity,
    wireless_min_n,
)
from localdeg.estimator import Geometric
from localdeg.model import (
    EXAMPLE_SBM,
    BetaScalar,
    Empirical,
    ExponentialDecay,
    HardThreshold,
    RcmSpec,
    SbmSpec,
    UniformCube,
)

# ---------------------------------------------------------------------------
# oracle bound


def _inputs(**kw):
    base = dict(k0=0, k=3, gammas=[0.1] * 5, n=50, sigma2=0.05, initial_error=0.002, approx=0.01)
    base.update(kw)
    return OracleBoundInputs(**base)


def test_bound_without_averaging():
    inp = _inputs(gammas=[0.0] * 5, approx=0.0)
    assert oracle_bound_rhs(inp) == 0.002


def test_bound_single_term():
    g, n, s2, e0, a = 0.3, 80, 0.1, 0.01, 0.02
    inp = OracleBoundInputs(2, 2, [0.9, 0.9, g], n, s2, e0, a)
    want = e0 * math.exp(-2 * g) + g**2 + g**2 * ((3 + 4 * s2 * math.log(n)) / n + a)
    assert oracle_bound_rhs(inp) == pytest.approx(want, rel=1e-14)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_bound_monotone_in_expectation_terms(a1, a2, e1, e2):
    lo, hi = sorted((a1, a2))
    assert oracle_bound_rhs(_inputs(approx=lo)) <= oracle_bound_rhs(_inputs(approx=hi))
    lo, hi = sorted((e1, e2))
    assert oracle_bound_rhs(_inputs(initial_error=lo)) <= oracle_bound_rhs(_inputs(initial_error=hi))


@pytest.mark.parametrize("kw", [{"k0": 4}, {"sigma2": 0.3}, {"approx": -1.0}, {"gammas": [0.1, 0.1]},
                                {"k": 60}])
def test_bound_input_validation(kw):
    with pytest.raises(ValueError):
        _inputs(**kw)


def test_bound_profile_on_example_sbm():
    df = oracle_bound_profile(EXAMPLE_SBM, Geometric(0.1), None, 4, 1000, np.random.default_rng(5))
    assert list(df.columns) == ["k", "rhs", "mse", "mse_se", "approx"]
    assert (df["mse"] >= 0).all() and (df["rhs"] >= 0).all()
    # The bound carries an unknown constant; with constant 1 domination is reported, not required.
    if not (df["rhs"] >= df["mse"]).all():
        warnings.warn("bound with constant 1 does not dominate the simulated MSE")
    print(df.to_string(index=False))


# ---------------------------------------------------------------------------
# sigma^2, approximation term, moment condition


def test_sigma2_constant_rho_is_zero(rng):
    assert estimate_sigma2(UniformCube(2), HardThreshold(5.0), 1000, rng).value == 0.0


def test_sigma2_two_point_bernoulli(rng):
    # P = 1 iff X and Y coincide, which happens with probability 1/2
    est = estimate_sigma2(Empirical([[0.0], [1.0]]), HardThreshold(0.5), 200_000, rng)
    assert abs(est.value - 0.25) < 1e-4


def test_sigma2_degenerate_features(rng):
    assert estimate_sigma2(Empirical([[2.0, 2.0]]), ExponentialDecay(1.0), 100, rng).value == 0.0


@given(st.sampled_from([HardThreshold(0.1), HardThreshold(0.4), ExponentialDecay(1.0), ExponentialDecay(9.0)]),
       st.integers(2, 200), st.integers(0, 2**32))
def test_sigma2_in_range(cf, samples, seed):
    v = estimate_sigma2(BetaScalar(2, 5), cf, samples, np.random.default_rng(seed)).value
    assert 0.0 <= v <= 0.25


def test_sbm_sigma2_matches_sampled_pairs(rng):
    labels = EXAMPLE_SBM.labels()
    n = len(labels)
    i = rng.integers(0, n, 400_000)
    j = rng.integers(0, n, 400_000)
    keep = i != j
    same = labels[i[keep]] == labels[j[keep]]
    p = np.where(same, np.asarray(EXAMPLE_SBM.p)[labels[i[keep]]], EXAMPLE_SBM.q)
    assert sbm_sigma2(EXAMPLE_SBM) == pytest.approx(p.var(), rel=0.02)


def test_approx_term_zero_inside_community(rng):
    spec = SbmSpec((10, 25, 15), (0.3, 0.5, 0.3), 0.0)
    assert estimate_approx_term(spec, None, 3, 50, rng).value == 0.0


def test_approx_term_zero_for_constant_p(rng):
    assert estimate_approx_term(SbmSpec((30,), (0.2,), 0.0), None, 5, 20, rng).value == 0.0


def test_approx_term_hand_evaluated_when_every_community_is_adjacent(rng):
    # q = 1: every community lies in the first annulus, so the max is attained in every replicate.
    c, p, q = (10, 25, 15), (0.3, 0.5, 0.3), 1.0
    n = sum(c)
    truth = [((cj - 1) * pj + (n - cj) * q) / n for cj, pj in zip(c, p)]
    want = max((t - truth[0]) ** 2 for t in truth)
    est = estimate_approx_term(SbmSpec(c, p, q), None, 1, 20, rng)
    assert est.value == pytest.approx(want, rel=1e-12)
    # per community: |n p(X_i) - n p(x)| = |(c_j - c_1) q + c_1 p_1 - c_j p_j + p_j - p_1|
    hand = max(abs((cj - c[0]) * q + c[0] * p[0] - cj * pj + pj - p[0]) for cj, pj in zip(c, p)) ** 2 / n**2
    assert est.value == pytest.approx(hand, rel=1e-12)


def test_moment_condition_constant_rho(rng):
    assert check_moment_condition(UniformCube(2), HardThreshold(10.0), 100, 2000, rng) == (0.0, 0.0, 0.0)


def test_moment_condition_degenerate_features(rng):
    lhs, rhs, ratio = check_moment_condition(Empirical([[0.3]]), ExponentialDecay(1.0), 100, 500, rng)
    assert lhs == rhs == ratio == 0.0


def test_moment_ratio_scales_like_one_over_n():
    args = (BetaScalar(2, 5), HardThreshold(0.05))
    _, _, r1 = check_moment_condition(*args, 100, 20_000, np.random.default_rng(3))
    _, _, r10 = check_moment_condition(*args, 1000, 20_000, np.random.default_rng(3))
    assert r10 == pytest.approx(r1 / 10, rel=1e-12)


# ---------------------------------------------------------------------------
# CLT


def test_clt_moderate(rng):
    z, ks = clt_check(0.01, 10_000, 10_000, rng)
    assert len(z) == 10_000
    assert ks <= 0.05


def test_clt_deep_regime(rng):
    _, ks = clt_check(0.5, 10**6, 10_000, rng)
    assert ks <= 0.01


def test_clt_single_replicate(rng):
    z, ks = clt_check(0.2, 100, 1, rng)
    assert len(z) == 1 and 0 < ks <= 1


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_clt_degenerate_probability(p, rng):
    with pytest.raises(ValueError):
        clt_check(p, 100, 10, rng)


def test_clt_improves_with_np():
    _, ks_small = clt_check(0.01, 1_000, 20_000, np.random.default_rng(1))
    _, ks_large = clt_check(0.01, 100_000, 20_000, np.random.default_rng(1))
    assert ks_large < ks_small - 0.02


def test_clt_full_graph_mode(rng):
    _, ks = clt_check(EXAMPLE_SBM, 50, 300, rng, full_graph=True)
    assert 0 < ks < 1


# ---------------------------------------------------------------------------
# wireless sizing


@pytest.mark.parametrize("p, q, want", [(0.021745, 0.9, 105), (0.9, 0.9, 1), (0.5, 0.9, 4)])
def test_wireless_min_n_examples(p, q, want):
    assert wireless_min_n(p, q) == want


@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_wireless_min_n_brackets(p, q):
    n = wireless_min_n(p, q)
    assert n >= 1
    assert (1 - p) ** n <= 1 - q
    assert n == 1 or (1 - p) ** (n - 1) > 1 - q


@pytest.mark.parametrize("p, q", [(0.0, 0.9), (1.0, 0.9), (0.5, 0.0), (0.5, 1.0)])
def test_wireless_min_n_errors(p, q):
    with pytest.raises(ValueError):
        wireless_min_n(p, q)


def test_verify_connectivity_zero_rho(rng):
    model = RcmSpec(UniformCube(2), HardThreshold(0.0), (0.5, 0.5))
    assert verify_connectivity(model, 50, 200, rng, mode="features").value == 0.0


@pytest.mark.parametrize("mode", ["binomial", "features"])
def test_verify_connectivity_matches_binomial_complement(mode, rng):
    model = RcmSpec(BetaScalar(2, 5), HardThreshold(0.02), (0.3,))
    p = stats.beta.cdf(0.32, 2, 5) - stats.beta.cdf(0.28, 2, 5)
    n = 20
    est = verify_connectivity(model, n, 20_000 if mode == "binomial" else 3000, rng, mode=mode)
    assert abs(est.value - (1 - (1 - p) ** n)) < 3 * est.stderr


def test_verify_connectivity_unknown_mode(rng):
    model = RcmSpec(UniformCube(1), HardThreshold(0.1), (0.5,))
    with pytest.raises(ValueError):
        verify_connectivity(model, 3, 3, rng, mode="other")
