"""Brute-force search oracles for the closed-form optima.

``maximize_delta`` searches all Hermitian matrices of a given dimension for
the largest discernability; the result should approach tan(theta) and never
exceed it. ``maximize_detection`` scans rank-one projectors in span{v, w}
for the best single-shot detection probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .discrimination import build_onb, family_operator
from .errors import DimensionError, DomainError, InvariantViolation
from .linalg import StatePair, make_state_pair

MAX_SEARCH_DIM = 4
UNDEFINED_SPREAD = 1e-9
SOUNDNESS_SLACK = 1e-9


def to_hermitian(params, dim: int) -> np.ndarray:
    """Unpack dim^2 reals into a Hermitian matrix.

    Layout: the dim diagonal entries, then (re, im) pairs for the strict
    upper triangle in row-major order. A pair (re, im) places re - i*im above
    the diagonal and re + i*im below it, so [0, 0, 0, 1] is Pauli Y.
    """
    p = np.asarray(params, dtype=float)
    if p.shape != (dim * dim,):
        raise DimensionError(f"expected {dim * dim} parameters, got {p.size}")
    a = np.diag(p[:dim]).astype(complex)
    iu, ju = np.triu_indices(dim, k=1)
    off = p[dim:].reshape(-1, 2)
    z = off[:, 0] + 1j * off[:, 1]
    a[ju, iu] = z
    a[iu, ju] = z.conj()
    return a


def from_hermitian(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    dim = a.shape[0]
    iu, ju = np.triu_indices(dim, k=1)
    z = a[ju, iu]
    return np.concatenate([a.diagonal().real, np.column_stack([z.real, z.imag]).ravel()])


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 8
    max_evals: int = 20_000
    seed: int = 0
    xatol: float = 1e-10
    fatol: float = 1e-13
    init_noise: float = 0.1
    polish_rounds: int = 2

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown search config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SearchResult:
    best_value: float
    best_operator: np.ndarray
    restarts: int
    evaluations: int
    converged: bool
    best_restart: int
    bound: float

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "bound": self.bound,
            "gap": self.bound - self.best_value,
            "best_operator": self.best_operator,
            "restarts": self.restarts,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "best_restart": self.best_restart,
        }


def embed_pair(pair: StatePair, dim: int) -> StatePair:
    if pair.dim > dim:
        raise DimensionError(f"pair lives in dim {pair.dim} > search dim {dim}")
    if pair.dim == dim:
        return pair
    pad = np.zeros(dim - pair.dim)
    return make_state_pair(np.concatenate([pair.v, pad]), np.concatenate([pair.w, pad]))


class _DeltaObjective:
    """Negative discernability with a runtime check of Fleming's bound."""

    def __init__(self, pair: StatePair, dim: int):
        self.v = pair.v
        self.w = pair.w
        self.dim = dim
        self._iu, self._ju = np.triu_indices(dim, k=1)
        self._diag = np.arange(dim)
        self.bound = math.tan(pair.theta)
        self.evaluations = 0

    def delta(self, params) -> float:
        dim = self.dim
        a = np.zeros((dim, dim), dtype=complex)
        diag = params[:dim] - params[:dim].mean()
        a[self._diag, self._diag] = diag
        z = params[dim::2] + 1j * params[dim + 1::2]
        a[self._ju, self._iu] = z
        a[self._iu, self._ju] = z.conj()
        norm = math.sqrt(diag @ diag + 2.0 * (params[dim:] @ params[dim:]))
        if norm == 0.0:
            return -math.inf
        a /= norm
        av, aw = a @ self.v, a @ self.w
        mv = np.vdot(self.v, av).real
        mw = np.vdot(self.w, aw).real
        spread = np.linalg.norm(av - mv * self.v) + np.linalg.norm(aw - mw * self.w)
        if spread < UNDEFINED_SPREAD:
            return -math.inf
        d = abs(mw - mv) / spread
        if d > self.bound + SOUNDNESS_SLACK:
            raise InvariantViolation(f"delta {d!r} exceeds tan(theta) = {self.bound!r}")
        return d

    def __call__(self, params) -> float:
        self.evaluations += 1
        d = self.delta(params)
        return 1e10 if d == -math.inf else -d


def _starts(pair: StatePair, dim: int, cfg: SearchConfig) -> list[np.ndarray]:
    rng = np.random.default_rng(cfg.seed)
    starts = []
    for k in range(cfg.restarts):
        if k % 2 == 0:
            starts.append(rng.normal(size=dim * dim))
        else:
            alpha = rng.uniform(pair.theta, math.pi - pair.theta)
            lam = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
            a = family_operator(pair, alpha, lam, rng.normal())
            starts.append(from_hermitian(a) + cfg.init_noise * rng.normal(size=dim * dim))
    return starts


def _local_search(obj: _DeltaObjective, x0: np.ndarray, cfg: SearchConfig):
    budget = cfg.max_evals
    opts = dict(xatol=cfg.xatol, fatol=cfg.fatol, adaptive=True)
    res = minimize(obj, x0, method="Nelder-Mead", options=dict(maxfev=budget, **opts))
    used = res.nfev
    # restart the simplex at the optimum: Nelder-Mead can stall on flat ridges
    for _ in range(cfg.polish_rounds):
        if used >= budget:
            break
        again = minimize(obj, res.x, method="Nelder-Mead",
                         options=dict(maxfev=budget - used, **opts))
        used += again.nfev
        if again.fun <= res.fun:
            res = again
    return res, used < budget


def maximize_delta(pair: StatePair, dim: int, config: SearchConfig | None = None) -> SearchResult:
    """Multistart Nelder-Mead over Hermitian matrices of size ``dim``.

    Half the starts are Gaussian random matrices, half are perturbed members
    of the bound-reaching family. ``converged`` means the best run stopped on
    its own tolerances and a second restart found the same value.
    """
    cfg = config or SearchConfig()
    if not 2 <= dim <= MAX_SEARCH_DIM:
        raise DimensionError(f"search dim must be in [2, {MAX_SEARCH_DIM}]")
    if pair.orthogonal or pair.theta >= math.pi / 2:
        raise DomainError("bound infinite: states are orthogonal")
    pair = embed_pair(pair, dim)
    obj = _DeltaObjective(pair, dim)

    results = []
    for x0 in _starts(pair, dim, cfg):
        res, finished = _local_search(obj, x0, cfg)
        results.append((-res.fun, res.x, finished))

    values = np.array([r[0] for r in results])
    best = int(np.argmax(values))  # argmax returns the lowest index on ties
    best_value, best_x, finished = results[best]
    agree = np.sum(values >= best_value - 1e-7 * max(1.0, best_value))
    a = to_hermitian(best_x, dim)
    return SearchResult(
        best_value=float(obj.delta(best_x)),
        best_operator=a,
        restarts=cfg.restarts,
        evaluations=obj.evaluations,
        converged=bool(finished and agree >= 2),
        best_restart=best,
        bound=obj.bound,
    )


def maximize_detection(pair: StatePair, p1: float, grid_resolution: int = 64) -> float:
    """Best p1 <v,Pv> + p2 <w,(1-P)w> over rank-one projectors P in span{v, w}."""
    if not 0.0 < p1 < 1.0:
        raise DomainError("p1 must lie in (0, 1)")
    e1, e2 = build_onb(pair)
    basis = np.column_stack([e1, e2])
    vc = basis.conj().T @ pair.v
    wc = basis.conj().T @ pair.w
    p2 = 1.0 - p1

    def detect(x) -> float:
        phi, chi = x
        u = np.array([math.cos(phi), np.exp(1j * chi) * math.sin(phi)])
        return p1 * abs(np.vdot(u, vc)) ** 2 + p2 * (1.0 - abs(np.vdot(u, wc)) ** 2)

    phis = np.linspace(0.0, math.pi, grid_resolution, endpoint=False)
    chis = np.linspace(0.0, 2 * math.pi, grid_resolution, endpoint=False)
    grid = [(detect((f, c)), f, c) for f in phis for c in chis]
    _, f0, c0 = max(grid)
    res = minimize(lambda x: -detect(x), [f0, c0], method="Nelder-Mead",
                   options=dict(xatol=1e-12, fatol=1e-15, maxfev=5000))
    return float(max(-res.fun, max(grid)[0]))
