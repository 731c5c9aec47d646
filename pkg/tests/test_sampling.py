import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import hermitians, unit_vectors
from qdiscern.discrimination import discernability, saturating_observable, simple_optimal
from qdiscern.errors import DomainError
from qdiscern.linalg import expectation, standard_pair, uncertainty
from qdiscern.sampling import (
    OutcomeDistribution,
    ThresholdRule,
    chebyshev_bound,
    chebyshev_check,
    chebyshev_tail_bound,
    enumerate_tail,
    exact_error_probability,
    identify,
    outcome_distribution,
    run_experiment,
    sample_mean,
    threshold,
    trial_rng,
)

PI = math.pi
COIN = OutcomeDistribution.from_atoms([-1.0, 1.0], [0.5, 0.5])


def dist(mean, std):
    return OutcomeDistribution.from_atoms([mean - std, mean + std], [0.5, 0.5])


# -- outcome distributions

def test_outcome_distribution_basis_state():
    d = outcome_distribution(np.diag([1.0, -1.0]), np.array([1, 0], dtype=complex))
    assert d.values == pytest.approx((-1.0, 1.0))
    assert d.probs == pytest.approx((0.0, 1.0))


def test_outcome_distribution_optimal_observable():
    pair = standard_pair(PI / 3)
    d = outcome_distribution(simple_optimal(pair), pair.v)
    s = math.sin(PI / 3)
    probs = dict(zip(np.round(d.values, 12), d.probs))
    assert probs[1.0] == pytest.approx((1 - s) / 2, abs=1e-12)
    assert probs[-1.0] == pytest.approx((1 + s) / 2, abs=1e-12)
    assert probs[1.0] == pytest.approx(0.0669873, abs=1e-7)
    assert probs[-1.0] == pytest.approx(0.9330127, abs=1e-7)


def test_outcome_distribution_identity():
    psi = np.array([0.6, 0.8j, 0.0])
    d = outcome_distribution(np.eye(3), psi)
    assert d.values == pytest.approx((1.0,))
    assert d.probs == pytest.approx((1.0,))
    assert d.variance == 0.0


def test_distribution_rejects_bad_probabilities():
    with pytest.raises(ValueError):
        OutcomeDistribution.from_atoms([0, 1], [0.5, 0.6])
    with pytest.raises(ValueError):
        OutcomeDistribution.from_atoms([0, 1], [1.1, -0.1])
    d = OutcomeDistribution.from_atoms([0, 1], [1 + 1e-13, -1e-13])
    assert d.probs[1] == 0.0


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_moments_agree_with_linalg(data):
    a = data.draw(hermitians(min_dim=2, max_dim=5))
    psi = data.draw(unit_vectors(a.shape[0]))
    d = outcome_distribution(a, psi)
    scale = max(1.0, np.abs(np.linalg.eigvalsh(a)).max())
    assert d.mean == pytest.approx(expectation(a, psi), abs=1e-10 * scale)
    assert d.std == pytest.approx(uncertainty(a, psi), abs=1e-6 * scale)
    assert d.variance == pytest.approx(uncertainty(a, psi) ** 2, abs=1e-10 * scale**2)


# -- threshold rule

def test_threshold_symmetric():
    r = threshold(dist(0, 1), dist(1, 1))
    assert r.x0 == pytest.approx(0.5)


def test_threshold_cross_weighting():
    r = threshold(dist(0, 1), dist(3, 2))
    assert r.x0 == pytest.approx(1.0)
    assert r.delta == pytest.approx(1.0)


def test_threshold_relabels_when_reversed():
    r = threshold(dist(3, 2), dist(0, 1))
    assert (r.x1, r.x2) == (0.0, 3.0)
    assert r.labels == (2, 1)
    assert identify(-1.0, r) == 2 and identify(2.0, r) == 1


@settings(max_examples=200, deadline=None)
@given(
    st.floats(-5, 5), st.floats(0.01, 5), st.floats(0.0, 3), st.floats(0.0, 3)
)
def test_threshold_identity(x1, gap, s1, s2):
    if s1 + s2 < 1e-3:
        s1 += 1e-3
    r = threshold(dist(x1, s1), dist(x1 + gap, s2))
    assert r.x1 + r.t1 == pytest.approx(r.x0, abs=1e-12 * max(1, abs(x1) + gap))
    assert r.x2 - r.t2 == pytest.approx(r.x0, abs=1e-12 * max(1, abs(x1) + gap))
    assert r.x1 <= r.x0 <= r.x2


def test_threshold_errors():
    with pytest.raises(DomainError, match="indistinguishable by mean"):
        threshold(dist(1, 1), dist(1, 2))
    with pytest.raises(DomainError, match="degenerate"):
        threshold(dist(0, 0), dist(1, 0))


# -- Chebyshev bound and identification

def test_chebyshev_bound_values():
    assert chebyshev_bound(1.0, 100) == pytest.approx(0.01)
    assert chebyshev_bound(math.sqrt(3), 100) == pytest.approx(1 / 300)
    assert chebyshev_bound(math.tan(PI / 2 - 1e-6), 1) < 1e-11
    assert chebyshev_bound(math.inf, 5) == 0.0
    with pytest.raises(DomainError):
        chebyshev_bound(0.0, 10)


def test_identify_examples():
    r = ThresholdRule(0.0, 3.0, 1.0, 2.0, 1.0, 1.0)
    assert identify(1.0, r) == 2
    assert identify(math.nextafter(1.0, 0.0), r) == 1
    assert identify(3.0, r) == 2


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_identify_monotone(a, b):
    r = ThresholdRule(0.0, 3.0, 1.0, 2.0, 1.0, 1.0)
    lo, hi = sorted((a, b))
    assert identify(lo, r) <= identify(hi, r)


# -- sampling

def test_sample_mean_single_outcome():
    d = OutcomeDistribution.from_atoms([2.5], [1.0])
    assert all(sample_mean(d, 7, trial_rng(s, 0)) == 2.5 for s in range(5))


def test_sample_mean_frozen_values():
    # values fixed by Philox(key=12345, counter block = trial index)
    got = [sample_mean(COIN, 4, trial_rng(12345, i)) for i in range(5)]
    assert got == [0.5, 1.0, -0.5, 0.0, 1.0]


def test_sample_mean_concentrates():
    d = OutcomeDistribution.from_atoms([-1.0, 0.5, 2.0], [0.2, 0.5, 0.3])
    n = 2000
    hits = sum(
        abs(sample_mean(d, n, trial_rng(seed, 0)) - d.mean) <= 5 * d.std / math.sqrt(n)
        for seed in range(200)
    )
    assert hits >= 198


def test_chebyshev_check_zero_variance():
    d = OutcomeDistribution.from_atoms([1.0], [1.0])
    assert chebyshev_check(d, 0.1, 5, 100, 0) == (0.0, 0.0)


def test_chebyshev_check_tight_point():
    tail, bound = chebyshev_check(COIN, 1.0, 1, 1000, 3)
    assert tail == 1.0 and bound == 1.0


def test_tail_by_brute_force():
    strings = list(itertools.product([-1, 1], repeat=4))
    assert len(strings) == 16
    brute = Fraction(sum(abs(Fraction(sum(s), 4)) >= Fraction(1, 2) for s in strings), 16)
    assert brute == Fraction(5, 8)
    half = Fraction(1, 2)
    assert enumerate_tail([-1, 1], [half, half], half, 4) == brute
    assert chebyshev_tail_bound([-1, 1], [half, half], half, 4) == 1
    tail, bound = chebyshev_check(COIN, 0.5, 4, 200_000, 7)
    assert bound == 1.0
    assert tail == pytest.approx(0.625, abs=4 * math.sqrt(0.625 * 0.375 / 200_000))


@st.composite
def rational_distributions(draw):
    k = draw(st.integers(1, 8))
    values = [Fraction(draw(st.integers(-20, 20)), draw(st.integers(1, 6))) for _ in range(k)]
    weights = [draw(st.integers(1, 10)) for _ in range(k)]
    total = sum(weights)
    return values, [Fraction(w, total) for w in weights]


@settings(max_examples=150, deadline=None)
@given(rational_distributions(), st.integers(1, 6), st.fractions(Fraction(1, 50), Fraction(10)))
def test_chebyshev_never_violated(dist_, n, t):
    values, probs = dist_
    if len(values) > 4:
        n = min(n, 4)  # keep the enumeration small
    assert enumerate_tail(values, probs, t, n) <= chebyshev_tail_bound(values, probs, t, n)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3.0), st.integers(1, 6), st.integers(0, 2**32))
def test_empirical_tail_within_bound(t, n, seed):
    d = OutcomeDistribution.from_atoms([-1.0, 0.0, 2.0], [0.3, 0.3, 0.4])
    trials = 2000
    tail, bound = chebyshev_check(d, t, n, trials, seed)
    b = min(bound, 1.0)
    assert tail <= bound + 3 * math.sqrt(b * (1 - b) / trials) + 1e-12


# -- experiments

def test_orthogonal_pair_never_errs():
    pair = standard_pair(PI / 2)
    rep = run_experiment(np.diag([1.0, -1.0]), pair, 0.5, 3, 2000, 1)
    assert rep.errors == 0 and rep.empirical_error == 0.0
    assert rep.cheb_bound == 0.0


def test_error_within_chebyshev_bound():
    pair = standard_pair(PI / 4)
    a = saturating_observable(pair, PI / 2)
    rep = run_experiment(a, pair, 0.5, 100, 100_000, 11)
    assert rep.delta == pytest.approx(1.0, abs=1e-12)
    assert rep.cheb_bound == pytest.approx(0.01)
    assert rep.empirical_error <= rep.cheb_bound
    assert rep.errors <= rep.trials * rep.cheb_bound + 4 * math.sqrt(rep.trials * rep.cheb_bound)


def test_more_copies_fewer_errors():
    pair = standard_pair(PI / 4)
    a = saturating_observable(pair, PI / 2)
    one = run_experiment(a, pair, 0.5, 1, 20_000, 5)
    many = run_experiment(a, pair, 0.5, 100, 20_000, 5)
    se = math.sqrt(one.empirical_error * (1 - one.empirical_error) / one.trials)
    assert many.empirical_error < one.empirical_error - 5 * se


def test_experiment_deterministic_and_parallel_invariant():
    pair = standard_pair(0.4)
    a = saturating_observable(pair, 1.2)
    ref = run_experiment(a, pair, 0.3, 5, 3000, 2**63 + 17)
    assert run_experiment(a, pair, 0.3, 5, 3000, 2**63 + 17) == ref
    for workers in (2, 3, 8):
        assert run_experiment(a, pair, 0.3, 5, 3000, 2**63 + 17, workers=workers) == ref


@pytest.mark.parametrize("p1", [0.5, 0.2])
def test_experiment_matches_exact_error(p1):
    pair = standard_pair(PI / 5)
    a = saturating_observable(pair, 1.0)
    d1, d2 = outcome_distribution(a, pair.v), outcome_distribution(a, pair.w)
    rule = threshold(d1, d2)
    exact = exact_error_probability(d1, d2, rule, 6, p1)
    rep = run_experiment(a, pair, p1, 6, 40_000, 99)
    se = math.sqrt(exact * (1 - exact) / rep.trials)
    assert abs(rep.empirical_error - exact) <= 4 * se
    assert exact <= rep.cheb_bound


def test_experiment_preconditions():
    pair = standard_pair(PI / 4)
    a = saturating_observable(pair, PI / 2)
    with pytest.raises(DomainError):
        run_experiment(a, pair, 1.0, 5, 10, 0)
    with pytest.raises(DomainError):
        run_experiment(a, pair, 0.5, 0, 10, 0)
    with pytest.raises(DomainError):
        run_experiment(np.eye(2), pair, 0.5, 5, 10, 0)
    assert discernability(np.eye(2), pair).delta is None


def test_report_serializes():
    pair = standard_pair(PI / 4)
    rep = run_experiment(saturating_observable(pair, PI / 2), pair, 0.5, 10, 100, 0)
    d = rep.to_dict()
    assert d["empirical_error"] == d["errors"] / d["trials"]
    assert set(d) >= {"n", "trials", "p1", "errors", "cheb_bound", "seed", "binomial_se"}
