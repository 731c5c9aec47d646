"""Identifying the generating state from the mean of an n-sample.

Measuring A on a pure state yields a discrete distribution on the spectrum
of A. Two such distributions are told apart by comparing the sample mean
with a split point X0 weighted by the two standard deviations; Chebyshev's
inequality bounds the misidentification probability by 1 / (n delta^2).

Randomness: trial ``i`` of a run seeded with ``seed`` draws from its own
counter-based Philox stream (key = seed, counter block = i), so results do
not depend on trial order or on how trials are split across workers.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from itertools import combinations_with_replacement

import numpy as np

from .discrimination import discernability
from .errors import DomainError
from .linalg import StatePair, as_hermitian, eigendecompose
from .tolerances import DEFAULT, Tolerances

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class OutcomeDistribution:
    values: tuple[float, ...]
    probs: tuple[float, ...]
    mean: float
    variance: float

    @classmethod
    def from_atoms(cls, values, probs, tol: Tolerances = DEFAULT) -> "OutcomeDistribution":
        vals = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        if vals.shape != p.shape or vals.ndim != 1 or vals.size == 0:
            raise ValueError("values and probs must be equal-length non-empty lists")
        if np.any(p < -tol.negative_radicand):
            raise ValueError(f"negative probability {p.min()!r}")
        p = np.clip(p, 0.0, None)
        if abs(p.sum() - 1.0) > tol.probability:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        mean = float(np.dot(p, vals))
        var = float(np.dot(p, (vals - mean) ** 2))
        return cls(tuple(vals.tolist()), tuple(p.tolist()), mean, var)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.probs)
        c[-1] = 1.0
        return c


def outcome_distribution(a, psi, tol: Tolerances = DEFAULT) -> OutcomeDistribution:
    """Distribution of measurement outcomes of A in the pure state psi."""
    a = as_hermitian(a, tol)
    spectral = eigendecompose(a, tol)
    return OutcomeDistribution.from_atoms(spectral.eigenvalues, spectral.probabilities(psi), tol)


@dataclass(frozen=True)
class ThresholdRule:
    """Split point between two outcome distributions with x1 < x2.

    ``labels`` maps (below x0, at or above x0) back to the caller's labels;
    it is (2, 1) when the inputs had to be swapped to make x1 < x2.
    """

    x1: float
    x2: float
    sigma1: float
    sigma2: float
    x0: float
    delta: float
    labels: tuple[int, int] = (1, 2)

    @property
    def t1(self) -> float:
        return self.sigma1 * self.delta

    @property
    def t2(self) -> float:
        return self.sigma2 * self.delta

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.delta):
            d["delta"] = "inf"
        return d


def threshold(d1: OutcomeDistribution, d2: OutcomeDistribution,
              tol: Tolerances = DEFAULT) -> ThresholdRule:
    x1, x2, s1, s2 = d1.mean, d2.mean, d1.std, d2.std
    labels = (1, 2)
    if abs(x2 - x1) <= tol.identity:
        raise DomainError("indistinguishable by mean")
    if x1 > x2:
        x1, x2, s1, s2 = x2, x1, s2, s1
        labels = (2, 1)
    if s1 + s2 <= tol.zero_uncertainty:
        raise DomainError("degenerate: both distributions have zero deviation")
    x0 = (s2 * x1 + s1 * x2) / (s1 + s2)
    x0 = min(max(x0, x1), x2)
    return ThresholdRule(x1, x2, s1, s2, x0, (x2 - x1) / (s1 + s2), labels)


def _disjoint_rule(d1: OutcomeDistribution, d2: OutcomeDistribution) -> ThresholdRule:
    # zero deviations: point masses at distinct values, split at the midpoint
    x1, x2, labels = d1.mean, d2.mean, (1, 2)
    if x1 > x2:
        x1, x2, labels = x2, x1, (2, 1)
    return ThresholdRule(x1, x2, 0.0, 0.0, 0.5 * (x1 + x2), math.inf, labels)


def chebyshev_bound(delta: float, n: int) -> float:
    if delta <= 0:
        raise DomainError("delta must be positive")
    if n < 1:
        raise DomainError("n must be a positive integer")
    if math.isinf(delta):
        return 0.0
    return 1.0 / (n * delta * delta)


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for trial ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(
        np.random.Philox(key=seed & SEED_MASK, counter=[0, 0, 0, index])
    )


def _draw(dist: OutcomeDistribution, cdf: np.ndarray, n: int, rng) -> float:
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    np.minimum(idx, len(cdf) - 1, out=idx)
    return float(np.asarray(dist.values)[idx].mean())


def sample_mean(dist: OutcomeDistribution, n: int, rng: np.random.Generator) -> float:
    """Mean of n independent draws by inverse-CDF sampling."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    return _draw(dist, dist.cdf(), n, rng)


def identify(mean: float, rule: ThresholdRule) -> int:
    """Below x0 -> first label; ties at x0 go to the second label."""
    return rule.labels[0] if mean < rule.x0 else rule.labels[1]


@dataclass(frozen=True)
class TrialReport:
    n: int
    trials: int
    p1: float
    errors: int
    empirical_error: float
    cheb_bound: float
    seed: int
    delta: float

    @property
    def binomial_se(self) -> float:
        """Standard error of an error-rate estimate whose true value is the bound."""
        b = min(self.cheb_bound, 1.0)
        return math.sqrt(b * (1.0 - b) / self.trials)

    @property
    def within_bound(self) -> bool:
        return self.empirical_error <= self.cheb_bound + 3.0 * self.binomial_se

    def to_dict(self) -> dict:
        d = asdict(self)
        d["binomial_se"] = self.binomial_se
        d["within_bound"] = self.within_bound
        if math.isinf(self.delta):
            d["delta"] = "inf"
        return d


def _count_errors(d1, d2, rule, p1, n, seed, indices) -> int:
    cdfs = {1: d1.cdf(), 2: d2.cdf()}
    dists = {1: d1, 2: d2}
    errors = 0
    for i in indices:
        rng = trial_rng(seed, i)
        truth = 1 if rng.random() < p1 else 2
        m = _draw(dists[truth], cdfs[truth], n, rng)
        errors += identify(m, rule) != truth
    return errors


def run_experiment(
    a,
    pair: StatePair,
    p1: float,
    n: int,
    trials: int,
    seed: int,
    workers: int = 1,
    tol: Tolerances = DEFAULT,
) -> TrialReport:
    """Monte Carlo estimate of the probability that the threshold rule errs.

    Each trial picks the true state (state 1 with probability p1), measures A
    on n copies, and classifies the sample mean.
    """
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie in (0, 1)")
    if n < 1 or trials < 1:
        raise DomainError("n and trials must be positive integers")
    if not 0 <= seed <= SEED_MASK:
        raise DomainError("seed must be a 64-bit unsigned integer")
    stats = discernability(a, pair, tol)
    if not stats.defined or stats.delta == 0.0:
        raise DomainError("discernability undefined or zero for this observable")
    d1 = outcome_distribution(a, pair.v, tol)
    d2 = outcome_distribution(a, pair.w, tol)
    if d1.std + d2.std <= tol.zero_uncertainty:
        rule = _disjoint_rule(d1, d2)
    else:
        rule = threshold(d1, d2, tol)

    if workers <= 1:
        errors = _count_errors(d1, d2, rule, p1, n, seed, range(trials))
    else:
        chunks = np.array_split(np.arange(trials), workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                lambda idx: _count_errors(d1, d2, rule, p1, n, seed, idx.tolist()), chunks
            )
            errors = sum(parts)
    return TrialReport(
        n=n,
        trials=trials,
        p1=p1,
        errors=int(errors),
        empirical_error=errors / trials,
        cheb_bound=chebyshev_bound(stats.delta, n),
        seed=seed,
        delta=stats.delta,
    )


def chebyshev_check(
    dist: OutcomeDistribution, t: float, n: int, trials: int, seed: int
) -> tuple[float, float]:
    """Empirical frequency of |m_n - mean| >= t, paired with (1/n)(sigma/t)^2."""
    if t <= 0:
        raise DomainError("t must be positive")
    if n < 1 or trials < 1:
        raise DomainError("n and trials must be positive integers")
    bound = dist.variance / (n * t * t)
    if dist.variance == 0.0:
        return 0.0, bound
    cdf = dist.cdf()
    vals = np.asarray(dist.values)
    rng = np.random.Generator(np.random.Philox(key=seed & SEED_MASK))
    hits = 0
    block = max(1, 2_000_000 // n)
    done = 0
    while done < trials:
        k = min(block, trials - done)
        idx = np.searchsorted(cdf, rng.random((k, n)), side="right")
        np.minimum(idx, len(cdf) - 1, out=idx)
        means = vals[idx].mean(axis=1)
        hits += int(np.count_nonzero(np.abs(means - dist.mean) >= t))
        done += k
    return hits / trials, bound


def _multinomial(counts) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def enumerate_tail(values, probs, t, n: int):
    """Exact P(|m_n - X| >= t) by enumerating every outcome string.

    Strings are grouped by their multiset of atoms (the mean depends on
    nothing else) and weighted by the multinomial count. Pass ``Fraction``
    inputs for exact rational arithmetic.
    """
    values = list(values)
    probs = list(probs)
    mean = sum(p * x for p, x in zip(probs, values))
    tail = 0 * probs[0]
    for combo in combinations_with_replacement(range(len(values)), n):
        counts = Counter(combo)
        m = sum(values[i] for i in combo) / n
        if abs(m - mean) >= t:
            w = _multinomial(counts.values())
            for i, c in counts.items():
                w = w * probs[i] ** c
            tail += w
    return tail


def chebyshev_tail_bound(values, probs, t, n: int):
    """(1/n)(sigma/t)^2 in the same arithmetic as the inputs."""
    mean = sum(p * x for p, x in zip(probs, values))
    var = sum(p * (x - mean) ** 2 for p, x in zip(probs, values))
    return var / (n * t * t)


def exact_error_probability(
    d1: OutcomeDistribution, d2: OutcomeDistribution, rule: ThresholdRule, n: int, p1: float
) -> float:
    """Exact misidentification probability of the threshold rule (small n)."""
    def wrong(dist: OutcomeDistribution, truth: int) -> float:
        total = 0.0
        for combo in combinations_with_replacement(range(len(dist.values)), n):
            counts = Counter(combo)
            m = sum(dist.values[i] for i in combo) / n
            if identify(m, rule) != truth:
                w = float(_multinomial(counts.values()))
                for i, c in counts.items():
                    w *= dist.probs[i] ** c
                total += w
        return total

    return p1 * wrong(d1, 1) + (1.0 - p1) * wrong(d2, 2)

