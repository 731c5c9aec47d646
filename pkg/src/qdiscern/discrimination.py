"""Closed-form two-state discrimination quantities.

Covers the discernability of an observable, Fleming's upper bound tan(theta)
and the master inequality behind it, the conditions under which the bound is
attained, the one-parameter family of observables attaining it, and the
single-shot reference optima (minimum-error and unambiguous discrimination).
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError, InvariantViolation, NumericalCorruption
from .linalg import (
    StatePair,
    as_hermitian,
    as_vector,
    eigendecompose,
    expectation,
    uncertainty,
)
from .tolerances import DEFAULT, Tolerances

INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DiscriminationStats:
    mean_v: float
    mean_w: float
    sigma_v: float
    sigma_w: float
    delta: float | None  # None: both uncertainties vanish, delta undefined

    @property
    def defined(self) -> bool:
        return self.delta is not None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "ok" if self.defined else "undefined"
        if self.delta is not None and math.isinf(self.delta):
            d["delta"] = "inf"
        return d


def _moments(a: np.ndarray, v: np.ndarray, w: np.ndarray, tol: Tolerances):
    return (
        expectation(a, v, tol),
        expectation(a, w, tol),
        uncertainty(a, v, tol),
        uncertainty(a, w, tol),
    )


def discernability(a, pair: StatePair, tol: Tolerances = DEFAULT) -> DiscriminationStats:
    """|<A>_w - <A>_v| / (Delta_v A + Delta_w A) together with its ingredients."""
    a = as_hermitian(a, tol)
    mv, mw, sv, sw = _moments(a, pair.v, pair.w, tol)
    spread = sv + sw
    diff = abs(mw - mv)
    if spread > tol.zero_uncertainty:
        return DiscriminationStats(mv, mw, sv, sw, diff / spread)
    scale = max(1.0, float(np.max(np.abs(a))))
    if diff <= tol.derived * scale:
        return DiscriminationStats(mv, mw, sv, sw, None)
    if pair.orthogonal:
        # v, w eigenvectors for distinct eigenvalues: perfectly distinguishable
        return DiscriminationStats(mv, mw, sv, sw, math.inf)
    raise NumericalCorruption(
        f"zero total uncertainty ({spread:.3g}) but means differ by {diff:.3g} "
        f"for non-orthogonal states"
    )


def fleming_bound(pair: StatePair) -> float:
    """tan(theta), the largest discernability any observable can reach."""
    if pair.orthogonal or pair.theta >= math.pi / 2:
        raise DomainError("bound infinite: states are orthogonal")
    if pair.theta <= 0.0:
        raise DomainError("states are parallel")
    return math.tan(pair.theta)


def qmie_gap(a, v, w, tol: Tolerances = DEFAULT) -> float:
    """Slack in the master inequality for arbitrary unit vectors v, w.

    Returns (Dv A + Dw A) sqrt(1 - |<w,v>|^2) - |<A>_w - <A>_v| |<w,v>|,
    which is non-negative for every Hermitian A.
    """
    a = as_hermitian(a, tol)
    v = as_vector(v, unit=True, tol=tol)
    w = as_vector(w, unit=True, tol=tol)
    mv, mw, sv, sw = _moments(a, v, w, tol)
    ov = np.vdot(v, w)
    c = min(1.0, abs(ov))
    # |w - <v,w> v| = sin(theta), accurate even for nearly parallel states
    s = float(np.linalg.norm(w - ov * v))
    return (sv + sw) * s - abs(mw - mv) * c


def check_qmie(a, pair: StatePair, tol: Tolerances = DEFAULT) -> float:
    """Master-inequality gap for a state pair; raises if the inequality fails."""
    gap = qmie_gap(a, pair.v, pair.w, tol)
    scale = max(1.0, float(np.linalg.norm(np.asarray(a), 2)))
    if gap < -tol.qmie * scale:
        raise InvariantViolation(f"master inequality violated: gap = {gap!r}")
    return gap


def build_onb(pair: StatePair) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of span{v, w} symmetric about v and w.

    v = cos(theta/2) e1 - sin(theta/2) e2 and w = cos(theta/2) e1 + sin(theta/2) e2.
    """
    half = pair.theta / 2
    e1 = (pair.v + pair.w) / (2 * math.cos(half))
    e2 = (pair.w - pair.v) / (2 * math.sin(half))
    return e1, e2


@dataclass(frozen=True)
class SaturatingFamilySpec:
    """Member lambda * A0(alpha) + mu * Id of the bound-reaching family.

    A0(alpha) = cos(alpha) (E11 - E22) + sin(alpha) (E12 + E21) in the basis
    (e1, e2) from :func:`build_onb`; A0 acts as zero off span{v, w}.
    """

    alpha: float
    lambda_scale: float
    mu_shift: float
    e1: np.ndarray
    e2: np.ndarray

    def restriction(self) -> np.ndarray:
        """A0 as a 2x2 matrix in the (e1, e2) basis."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return np.array([[c, s], [s, -c]], dtype=complex)

    def matrix(self) -> np.ndarray:
        basis = np.column_stack([self.e1, self.e2])
        a0 = basis @ self.restriction() @ basis.conj().T
        a = self.lambda_scale * a0 + self.mu_shift * np.eye(basis.shape[0])
        return 0.5 * (a + a.conj().T)


def family_operator(
    pair: StatePair, alpha: float, lambda_scale: float = 1.0, mu_shift: float = 0.0
) -> np.ndarray:
    """The family formula evaluated at any alpha, without the range check.

    Only alpha in [theta, pi - theta] reaches the bound; other values are
    useful as near-miss controls.
    """
    e1, e2 = build_onb(pair)
    return SaturatingFamilySpec(alpha, lambda_scale, mu_shift, e1, e2).matrix()


def saturating_observable(
    pair: StatePair,
    alpha: float,
    lambda_scale: float = 1.0,
    mu_shift: float = 0.0,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    theta = pair.theta
    slack = tol.identity
    if not (theta - slack <= alpha <= math.pi - theta + slack):
        raise DomainError(
            f"alpha = {alpha!r} outside saturating range [{theta!r}, {math.pi - theta!r}]"
        )
    if lambda_scale == 0.0:
        raise DomainError("lambda_scale must be non-zero")
    return family_operator(pair, alpha, lambda_scale, mu_shift)


def simple_optimal(pair: StatePair) -> np.ndarray:
    """(rho2 - rho1) / sin(theta): the alpha = pi/2 member."""
    return (pair.rho2 - pair.rho1) / math.sin(pair.theta)


@dataclass(frozen=True)
class SaturationReport:
    stabilizes_subspace: bool
    subspace_residual: float
    lam: complex | None
    lambda_imag_residual: float
    lambda_in_hull: bool
    saturated: bool
    qmie_gap: float
    delta: float
    bound: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = None if self.lam is None else [self.lam.real, self.lam.imag]
        del d["lam"]
        d["bound"] = "inf" if math.isinf(self.bound) else self.bound
        return d


def _span_projector(pair: StatePair) -> np.ndarray:
    e1, e2 = build_onb(pair)
    return np.outer(e1, e1.conj()) + np.outer(e2, e2.conj())


def check_saturation(a, pair: StatePair, tol: float | None = None,
                     tolerances: Tolerances = DEFAULT) -> SaturationReport:
    """Test whether A attains Fleming's bound via its structural conditions.

    The bound is attained iff (i) A leaves span{v, w} invariant and (ii)
    <w, A v> = lam <w, v> with lam real and between <A>_v and <A>_w.
    Residuals are divided by Dv A + Dw A so the test is scale and shift
    invariant, like the discernability itself.
    """
    tol = tolerances.saturation if tol is None else tol
    a = as_hermitian(a, tolerances)
    mv, mw, sv, sw = _moments(a, pair.v, pair.w, tolerances)
    spread = sv + sw
    if spread <= tol:
        raise DomainError("trivial case: v and w are eigenvectors for one eigenvalue")

    q = _span_projector(pair)
    off = np.eye(pair.dim) - q
    residual = max(np.linalg.norm(off @ (a @ pair.v)), np.linalg.norm(off @ (a @ pair.w)))
    residual /= spread
    stabilizes = bool(residual <= tol)

    gap = qmie_gap(a, pair.v, pair.w, tolerances)
    delta = abs(mw - mv) / spread

    if pair.orthogonal:
        # saturation there would force zero uncertainties, excluded above
        return SaturationReport(stabilizes, float(residual), None, math.inf, False,
                                False, gap, delta, math.inf)

    lam = complex(np.vdot(pair.w, a @ pair.v) / np.vdot(pair.w, pair.v))
    imag_res = abs(lam.imag) / spread
    lo, hi = min(mv, mw), max(mv, mw)
    in_hull = bool(lo - tol * spread <= lam.real <= hi + tol * spread)
    saturated = stabilizes and imag_res <= tol and in_hull
    return SaturationReport(stabilizes, float(residual), lam, float(imag_res), in_hull,
                            bool(saturated), gap, delta, math.tan(pair.theta))


def min_error_prob(theta: float, p1: float) -> float:
    """Largest single-shot detection probability with two-outcome measurements."""
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie in (0, 1)")
    if not 0.0 <= theta <= math.pi / 2:
        raise DomainError("theta must lie in [0, pi/2]")
    p2 = 1.0 - p1
    c = math.cos(theta)
    return 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - 4.0 * p1 * p2 * c * c)))


def unambiguous_regime(theta: float | None, p1: float, *, cos_theta: float | None = None) -> int:
    """1 if sqrt(min(p)/max(p)) >= cos(theta), else 2."""
    c = math.cos(theta) if cos_theta is None else cos_theta
    p2 = 1.0 - p1
    ratio = math.sqrt(min(p1, p2) / max(p1, p2))
    return 1 if ratio >= c else 2


def unambiguous_max(theta: float | None, p1: float, *, cos_theta: float | None = None) -> float:
    """Largest conclusive probability of error-free three-outcome discrimination.

    Pass ``cos_theta`` instead of ``theta`` to avoid a cos(arccos(x)) round
    trip when the overlap itself is the known quantity.
    """
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie in (0, 1)")
    if cos_theta is None:
        if theta is None or not 0.0 < theta <= math.pi / 2:
            raise DomainError("theta must lie in (0, pi/2]")
        c = math.cos(theta)
    else:
        if not 0.0 <= cos_theta < 1.0:
            raise DomainError("cos_theta must lie in [0, 1)")
        c = cos_theta
    p2 = 1.0 - p1
    if unambiguous_regime(None, p1, cos_theta=c) == 1:
        return 1.0 - 2.0 * math.sqrt(p1 * p2) * c
    return max(p1, p2) * (1.0 - c * c)


def detection_prob(
    a,
    pair: StatePair,
    p1: float,
    assignment: Mapping[float, int | str],
    tol: Tolerances = DEFAULT,
) -> float:
    """Probability that a single measurement of A names the true state.

    ``assignment`` maps eigenvalues to 1, 2 or ``"inconclusive"``; keys are
    matched to the spectrum within the eigenvalue merge tolerance.
    """
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie in (0, 1)")
    spectral = eigendecompose(a, tol)
    match_tol = tol.eig_merge * max(1.0, max(abs(x) for x in spectral.eigenvalues))
    pv = spectral.probabilities(pair.v)
    pw = spectral.probabilities(pair.w)
    total = 0.0
    for i, lam in enumerate(spectral.eigenvalues):
        label = next((lab for key, lab in assignment.items() if abs(key - lam) <= match_tol),
                     None)
        if label is None:
            raise KeyError(f"eigenvalue {lam!r} has no assigned label")
        if label == 1:
            total += p1 * pv[i]
        elif label == 2:
            total += (1.0 - p1) * pw[i]
        elif label not in (INCONCLUSIVE, 0):
            raise ValueError(f"unknown label {label!r}")
    return float(total)
