import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extdep import (
    InvertedMev,
    InvertedMevSpec,
    Partition,
    chi_margin_pair,
    chi_pair,
    coefficient_report,
    epsilon,
    epsilon_block,
    epsilon_bounds,
    eval_exponent,
    kappa_block,
    kappa_pair,
    madogram_nu,
    make_asymmetric_logistic,
    make_comonotone,
    make_independence,
    make_logistic,
    make_min_product_mixture,
    moment_e,
    simulate,
)
from extdep.coefficients import kappa_mev_block
from extdep.errors import ModelError

from conftest import catalog_models

NAMES = sorted(catalog_models())


def _inv(model):
    return InvertedMev(InvertedMevSpec(model))


# --- epsilon ---------------------------------------------------------------

def test_epsilon_examples():
    assert epsilon(make_independence(2), Partition.singletons(2)) == pytest.approx(2.0, rel=1e-14)
    assert epsilon(make_logistic(3, 0.5), Partition.singletons(3)) == pytest.approx(math.sqrt(3), rel=1e-14)
    val = epsilon(make_comonotone(3), Partition.singletons(3), [2.0, 3.0, 6.0])
    assert val == pytest.approx(0.5, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(
    name=st.sampled_from(NAMES),
    loglam=st.lists(st.floats(-3, 3), min_size=2, max_size=2),
)
def test_epsilon_is_exponent_at_scaled_levels(name, loglam):
    m = catalog_models()[name]
    part = Partition.parse("1,3|2,4", 4)
    lam = np.exp(loglam)
    t = (m.margins.sigma_array * lam[part.block_of]) ** m.eta
    assert epsilon(m, part, lam) == pytest.approx(eval_exponent(m, t), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(name=st.sampled_from(NAMES), loglam=st.floats(-4, 4), j=st.integers(0, 1))
def test_block_epsilon_homogeneity(name, loglam, j):
    m = catalog_models()[name]
    part = Partition.parse("1,2|3,4", 4)
    lam = math.exp(loglam)
    assert epsilon_block(m, part, j, lam) == pytest.approx(epsilon_block(m, part, j) / lam, rel=1e-12)


def test_epsilon_rejects_bad_lambda():
    m = make_logistic(2, 0.5)
    for lam in ([0.0, 1.0], [-1.0, 1.0], [np.inf, 1.0]):
        with pytest.raises(ModelError):
            epsilon(m, Partition.singletons(2), lam)


def test_epsilon_partition_dimension_mismatch():
    with pytest.raises(ModelError):
        epsilon(make_logistic(3, 0.5), Partition.singletons(2))


# --- moment e --------------------------------------------------------------

def test_moment_examples():
    assert moment_e(make_comonotone(2), Partition.whole(2)) == pytest.approx(0.5, rel=1e-14)
    assert moment_e(make_independence(2), Partition.singletons(2)) == pytest.approx(2 / 3, rel=1e-14)
    assert moment_e(make_logistic(4, 0.5), Partition.parse("1,2|3,4", 4)) == pytest.approx(2 / 3, rel=1e-14)


@pytest.mark.slow
def test_moment_monte_carlo_logistic():
    m = make_logistic(4, 0.5)
    part = Partition.parse("1,2|3,4", 4)
    u = m.margins.cdf(simulate(m, 1_000_000, seed=5).values)
    w = np.maximum(u[:, :2].max(axis=1), u[:, 2:].max(axis=1))
    se = w.std(ddof=1) / math.sqrt(w.size)
    assert abs(w.mean() - 2 / 3) <= 3 * se


# --- nu --------------------------------------------------------------------

def test_nu_examples():
    assert madogram_nu(make_comonotone(2), Partition.singletons(2)) == pytest.approx(0.0, abs=1e-15)
    nu = madogram_nu(make_independence(2), Partition.singletons(2))
    assert nu == pytest.approx(1 / 6, rel=1e-14)
    assert nu == pytest.approx((2 - 1) / (2 * (2 + 1)), rel=1e-14)
    nu1 = madogram_nu(make_logistic(4, 0.5), Partition.parse("1,2|3,4", 4))
    assert nu1 == pytest.approx(2 / 3 - math.sqrt(2) / (1 + math.sqrt(2)), rel=1e-13)
    assert nu1 == pytest.approx(0.080880, abs=1e-6)


@pytest.mark.parametrize("name", NAMES)
def test_nu_nonnegative(name):
    m = catalog_models()[name]
    rng = np.random.default_rng(2)
    for text in ("1|2|3|4", "1,2|3,4", "1,4|2|3"):
        part = Partition.parse(text, 4)
        for _ in range(10):
            assert madogram_nu(m, part, np.exp(rng.uniform(-2, 2, part.p))) >= -1e-15


# --- chi -------------------------------------------------------------------

def test_chi_examples():
    single = Partition.singletons(2)
    assert chi_pair(make_logistic(2, 0.5), single, 0, 1) == pytest.approx(2 - math.sqrt(2), rel=1e-13)
    assert chi_pair(make_independence(4), Partition.parse("1,2|3,4", 4), 0, 1) == pytest.approx(0, abs=1e-14)
    two = Partition.parse("1,2|3,4", 4)
    assert chi_pair(make_logistic(4, 0.5), two, 0, 1) == pytest.approx(2 * math.sqrt(2) - 2, rel=1e-13)
    chi3 = chi_pair(make_min_product_mixture(0.3, 0.5, 1.0, None, 4), two, 0, 1)
    expected = 0.3 * (1 - 2 * 2 ** 0.5 + 4 ** 0.5) + 2 * 2 ** 0.5 - 4 ** 0.5
    assert chi3 == pytest.approx(expected, rel=1e-13)
    assert chi3 == pytest.approx(0.879899, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_chi_logistic_singletons_general(alpha):
    assert chi_pair(make_logistic(2, alpha), Partition.singletons(2), 0, 1) == pytest.approx(2 - 2 ** alpha, rel=1e-13)


def test_chi_margin_pair_examples():
    assert chi_margin_pair(make_independence(2), 0, 1) == pytest.approx(0.0, abs=1e-14)
    assert chi_margin_pair(make_comonotone(2), 0, 1) == pytest.approx(1.0, rel=1e-14)
    assert chi_margin_pair(make_logistic(2, 0.5), 0, 1) == pytest.approx(2 - math.sqrt(2), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(name=st.sampled_from(NAMES), split=st.sampled_from(["1|2|3|4", "1,2|3,4", "1,3|2,4", "1|2,3,4"]))
def test_chi_bounds(name, split):
    m = catalog_models()[name]
    part = Partition.parse(split, 4)
    for j in range(part.p):
        for k in range(j + 1, part.p):
            chi = chi_pair(m, part, j, k)
            cap = min(epsilon_block(m, part, j), epsilon_block(m, part, k))
            assert -1e-12 <= chi <= cap + 1e-12


@settings(max_examples=100, deadline=None)
@given(name=st.sampled_from(NAMES), la=st.floats(-2, 2), lb=st.floats(-2, 2))
def test_chi_symmetry(name, la, lb):
    m = catalog_models()[name]
    part = Partition.parse("1,2|3,4", 4)
    a, b = math.exp(la), math.exp(lb)
    assert chi_pair(m, part, 0, 1, a, b) == chi_pair(m, part, 1, 0, b, a)


def test_chi_rejects_same_block():
    with pytest.raises(ModelError):
        chi_pair(make_logistic(2, 0.5), Partition.singletons(2), 0, 0)


# --- bounds ----------------------------------------------------------------

def test_bounds_attainment():
    part = Partition.parse("1,3|2,4", 4)
    for lam in ([1.0, 1.0], [0.5, 3.0]):
        ind = make_independence(4, 0.7, (1.0, 2.0, 3.0, 0.5))
        assert epsilon(ind, part, lam) == pytest.approx(epsilon_bounds(ind, part, lam)[1], rel=1e-13)
    como = make_comonotone(4)
    lo, hi = epsilon_bounds(como, part)
    assert epsilon(como, part) == lo == 1.0
    assert hi == 2.0


def test_bounds_strict_for_min_product():
    m = make_min_product_mixture(0.3, 0.5, 1.0, None, 4)
    part = Partition.parse("1,2|3,4", 4)
    lo, hi = epsilon_bounds(m, part, [1.0, 2.0])
    assert lo < epsilon(m, part, [1.0, 2.0]) < hi


# --- kappa -----------------------------------------------------------------

def test_kappa_pair_examples():
    assert kappa_pair(_inv(make_comonotone(2)), 0, 1) == pytest.approx(1.0, rel=1e-14)
    assert kappa_pair(_inv(make_independence(2)), 0, 1) == pytest.approx(0.5, rel=1e-14)
    assert kappa_pair(_inv(make_logistic(2, 0.5)), 0, 1) == pytest.approx(2 ** -0.5, rel=1e-14)


def test_kappa_block_examples():
    inv = _inv(make_logistic(4, 0.3))
    assert kappa_block(inv, Partition.singletons(4), 0, 2) == kappa_pair(inv, 0, 2)
    assert kappa_block(inv, Partition.parse("1,2|3,4", 4), 0, 1) == pytest.approx(2 ** -0.3, rel=1e-14)
    beta = [0.9, 0.2, 0.6, 0.4]
    inv = _inv(make_asymmetric_logistic(beta, 0.5))
    part = Partition.parse("1,3|2,4", 4)
    brute = max(1 / (beta[a] ** 2 + beta[b] ** 2) ** 0.5 for a in (0, 2) for b in (1, 3))
    assert kappa_block(inv, part, 0, 1) == pytest.approx(brute, rel=1e-14)


def test_kappa_requires_inverted():
    with pytest.raises(ModelError):
        kappa_pair(make_logistic(2, 0.5), 0, 1)


def test_kappa_mev_regimes():
    part = Partition.singletons(2)
    assert kappa_mev_block(make_independence(2), part, 0, 1) == 0.5
    assert kappa_mev_block(make_logistic(2, 0.9), part, 0, 1) == 1.0


# --- report ----------------------------------------------------------------

def test_report_logistic_blocks():
    rep = coefficient_report(make_logistic(4, 0.5), Partition.parse("1,2|3,4", 4)).to_dict()
    assert list(rep) == ["kind", "coefficients_of", "d", "partition", "lambda", "epsilon_joint", "moment_e",
                         "epsilon_blocks", "pairs", "nu", "bounds"]
    assert rep["epsilon_joint"] == pytest.approx(2.0, rel=1e-14)
    assert rep["pairs"][0]["chi"] == pytest.approx(2 * math.sqrt(2) - 2, rel=1e-13)
    assert rep["pairs"][0]["kappa"] == 1.0
    assert rep["bounds"]["lower"] <= rep["epsilon_joint"] <= rep["bounds"]["upper"]


def test_report_inverted_uses_generator_and_kappa():
    rep = coefficient_report(_inv(make_logistic(2, 0.5)), Partition.singletons(2)).to_dict()
    assert rep["coefficients_of"] == "generator"
    assert rep["pairs"][0]["kappa"] == pytest.approx(2 ** -0.5, rel=1e-14)


def test_report_block_limit():
    m = make_independence(33)
    with pytest.raises(ModelError):
        coefficient_report(m, Partition.singletons(33))
    rep = coefficient_report(m, Partition.singletons(33), allow_large=True)
    assert len(rep.pairs) == 33 * 32 // 2
