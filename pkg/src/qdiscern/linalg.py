"""Small dense complex linear algebra for pure states and observables.

Vectors and operators are plain ``numpy`` arrays (complex128); the helpers
``as_vector`` and ``as_hermitian`` validate and normalise inputs. The inner
product is conjugate-linear in its first argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DomainError, NotHermitianError, NotUnitError
from .tolerances import DEFAULT, Tolerances


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def as_vector(x, unit: bool = False, tol: Tolerances = DEFAULT) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise DimensionError(f"expected a non-empty 1-d vector, got shape {v.shape}")
    if unit:
        n2 = np.vdot(v, v).real
        if abs(n2 - 1.0) > tol.unit_norm:
            raise NotUnitError(f"vector is not normalised: <psi,psi> = {n2!r}")
    return v


def as_hermitian(m, tol: Tolerances = DEFAULT) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    dev = np.max(np.abs(a - a.conj().T))
    if dev > tol.hermitian:
        raise NotHermitianError(f"matrix is not Hermitian (max |A - A^H| = {dev:.3g})")
    return a


def _check_dims(a: np.ndarray, psi: np.ndarray) -> None:
    if a.shape[0] != psi.shape[0]:
        raise DimensionError(f"operator dim {a.shape[0]} != vector dim {psi.shape[0]}")


def inner(u, v) -> complex:
    u = as_vector(u)
    v = as_vector(v)
    if u.shape != v.shape:
        raise DimensionError(f"dimension mismatch: {u.size} vs {v.size}")
    return complex(np.vdot(u, v))


def expectation(a, psi, tol: Tolerances = DEFAULT) -> float:
    """<psi, A psi> for a unit vector psi."""
    a = as_hermitian(a, tol)
    psi = as_vector(psi, unit=True, tol=tol)
    _check_dims(a, psi)
    val = np.vdot(psi, a @ psi)
    scale = max(1.0, float(np.max(np.abs(a))))
    if abs(val.imag) > tol.imag_part * scale:
        raise NotHermitianError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def uncertainty(a, psi, tol: Tolerances = DEFAULT) -> float:
    """Standard deviation of A in the pure state psi.

    Evaluated as the norm of the component of A psi orthogonal to psi, which
    equals sqrt(<A^2> - <A>^2) but does not lose half the digits when psi is
    (nearly) an eigenvector.
    """
    a = as_hermitian(a, tol)
    psi = as_vector(psi, unit=True, tol=tol)
    _check_dims(a, psi)
    apsi = a @ psi
    mean = np.vdot(psi, apsi).real
    return float(np.linalg.norm(apsi - mean * psi))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))

    def probabilities(self, psi) -> np.ndarray:
        """Born probabilities <psi, P_i psi>, tiny negatives clamped to zero."""
        psi = as_vector(psi, unit=True)
        p = np.array([np.vdot(psi, proj @ psi).real for proj in self.projectors])
        return np.clip(p, 0.0, None)


def eigendecompose(a, tol: Tolerances = DEFAULT) -> SpectralDecomposition:
    """Spectral decomposition with near-degenerate eigenvalues merged.

    Eigenvalues closer than ``tol.eig_merge`` times the spectral norm are
    treated as one eigenspace; the reported eigenvalue is the group mean.
    """
    a = as_hermitian(a, tol)
    herm = 0.5 * (a + a.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    norm = float(np.max(np.abs(vals))) if vals.size else 0.0
    thresh = tol.eig_merge * norm
    groups: list[list[int]] = [[0]]
    for i in range(1, len(vals)):
        if vals[i] - vals[groups[-1][-1]] <= thresh:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues, projectors, mults = [], [], []
    for g in groups:
        basis = vecs[:, g]
        eigenvalues.append(float(np.mean(vals[g])))
        projectors.append(_frozen(basis @ basis.conj().T))
        mults.append(len(g))
    return SpectralDecomposition(tuple(eigenvalues), tuple(projectors), tuple(mults))


def angle_between(v, w) -> float:
    """Angle arccos|<v,w>| in [0, pi/2]; invariant under phases of v and w."""
    v = as_vector(v, unit=True)
    w = as_vector(w, unit=True)
    c = min(1.0, abs(inner(v, w)))
    return math.acos(c)


@dataclass(frozen=True)
class StatePair:
    """Two unit vectors with <v, w> = cos(theta) real and non-negative.

    Use :func:`make_state_pair` to build one; it fixes the phase of ``w``.
    """

    v: np.ndarray
    w: np.ndarray
    theta: float
    orthogonal: bool = field(default=False)

    @property
    def dim(self) -> int:
        return self.v.shape[0]

    @property
    def overlap(self) -> float:
        return float(np.vdot(self.v, self.w).real)

    @property
    def rho1(self) -> np.ndarray:
        return np.outer(self.v, self.v.conj())

    @property
    def rho2(self) -> np.ndarray:
        return np.outer(self.w, self.w.conj())


def make_state_pair(v, w, tol: Tolerances = DEFAULT) -> StatePair:
    v = as_vector(v, unit=True, tol=tol)
    w = as_vector(w, unit=True, tol=tol)
    if v.shape != w.shape:
        raise DimensionError(f"dimension mismatch: {v.size} vs {w.size}")
    ov = np.vdot(v, w)
    mod = abs(ov)
    if mod >= 1.0 - tol.unit_norm:
        raise DomainError("v and w are parallel (theta = 0); nothing to discriminate")
    orthogonal = mod <= tol.unit_norm
    if orthogonal:
        return StatePair(_frozen(v), _frozen(w), math.pi / 2, True)
    w = w * (ov.conjugate() / mod)
    return StatePair(_frozen(v), _frozen(w), math.acos(mod), False)


def standard_pair(theta: float, dim: int = 2) -> StatePair:
    """The pair v = e_0, w = cos(theta) e_0 + sin(theta) e_1 in C^dim."""
    if dim < 2:
        raise DimensionError("need dim >= 2 for two independent states")
    v = np.zeros(dim, dtype=complex)
    w = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    w[0] = math.cos(theta)
    w[1] = math.sin(theta)
    return make_state_pair(v, w)


def random_unit_vector(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (z + z.conj().T)
