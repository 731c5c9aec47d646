"""Numerical tolerances shared across the package.

The closed-form results are exact; these constants absorb floating point
error. Error grows with composition depth, hence the ladder:
construction identities < derived equalities < optimizer comparisons.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    unit_norm: float = 1e-12
    hermitian: float = 1e-12
    imag_part: float = 1e-12
    negative_radicand: float = 1e-12
    eig_merge: float = 1e-9
    decomposition: float = 1e-10
    zero_uncertainty: float = 1e-12
    identity: float = 1e-12
    derived: float = 1e-10
    qmie: float = 1e-10
    saturation: float = 1e-8
    optimizer: float = 1e-4
    probability: float = 1e-10

    def replace(self, **changes: float) -> "Tolerances":
        return dataclasses.replace(self, **changes)


DEFAULT = Tolerances()
