import math

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qdiscern.linalg import make_state_pair, standard_pair

finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def hermitians(draw, dim=None, min_dim=2, max_dim=6):
    d = draw(st.integers(min_dim, max_dim)) if dim is None else dim
    re = draw(arrays(np.float64, (d, d), elements=finite))
    im = draw(arrays(np.float64, (d, d), elements=finite))
    z = re + 1j * im
    return 0.5 * (z + z.conj().T)


@st.composite
def unit_vectors(draw, dim):
    re = draw(arrays(np.float64, (dim,), elements=finite))
    im = draw(arrays(np.float64, (dim,), elements=finite))
    z = re + 1j * im
    n = np.linalg.norm(z)
    from hypothesis import assume
    assume(n > 1e-3)
    return z / n


@pytest.fixture
def pair_pi3():
    return standard_pair(math.pi / 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pair_from(v, w):
    return make_state_pair(np.asarray(v, dtype=complex), np.asarray(w, dtype=complex))


def split_perturbation(pair, alpha, h):
    """Split a Hermitian perturbation at a family member into (in-family, off-family).

    In-family directions keep the bound attained: anything acting only on the
    orthogonal complement of span{v, w}, the identity on the span, A0 itself
    (rescaling) and dA0/dalpha. The off-family remainder is what a structural
    check has to detect.
    """
    from qdiscern.discrimination import build_onb, family_operator

    e1, e2 = build_onb(pair)
    q = np.outer(e1, e1.conj()) + np.outer(e2, e2.conj())
    comp = np.eye(pair.dim) - q
    inside = comp @ h @ comp
    rest = h - inside
    basis = []
    for d in (family_operator(pair, alpha), q, family_operator(pair, alpha + math.pi / 2)):
        for b in basis:
            d = d - np.vdot(b, d) * b
        basis.append(d / np.linalg.norm(d))
    for b in basis:
        c = np.vdot(b, rest).real
        inside = inside + c * b
        rest = rest - c * b
    return inside, rest


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[num])
