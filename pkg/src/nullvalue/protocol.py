"""The null-value protocol: Bayes conditional, the NV quantity, and the
two postselection tunings.

Scheme A postselects so the bar of psi_f is orthogonal to the reference
state itself; scheme B so it is orthogonal to the back-action rotated
reference K0|psi0>.  Under either tuning the reference state almost always
fails to reach the inconclusive branch, which is what amplifies the
conditional signal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .errors import NumericalDegeneracyError
from .povm import KrausPair, make_kraus, projector, tree_probabilities
from .states import PureState

Postselection = Union[Literal["A", "B"], PureState]

#: Tolerance of the NV dual-formula consistency assertion.
NV_IDENTITY_ATOL = 1e-10


@dataclass(frozen=True)
class SchemeConfig:
    """Measurement orientation M, collapse probability p, postselection rule
    and reference state.  ``postselection`` is 'A', 'B', or an explicit
    PureState psi_f (e.g. a measured, possibly elliptic one)."""

    M: PureState
    p: float
    postselection: Postselection
    reference: PureState

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"collapse probability p={self.p} outside [0, 1]")

    @property
    def kraus(self) -> KrausPair:
        return make_kraus(self.M, 0.0, self.p)

    def resolved_psi_f(self) -> PureState:
        if isinstance(self.postselection, PureState):
            return self.postselection
        if self.postselection == "A":
            return resolve_scheme_a(self.reference)
        if self.postselection == "B":
            return resolve_scheme_b(self.reference, self.M, self.p)
        raise ValueError(f"unknown postselection rule {self.postselection!r}")


def resolve_scheme_a(reference: PureState) -> PureState:
    """Scheme A: psi_f equals the reference, so psi_f_bar is orthogonal to
    it and the reference always clicks at the second measurement."""
    return PureState(reference.a0, reference.a1)


def resolve_scheme_b(reference: PureState, M: PureState, p: float) -> PureState:
    """Scheme B: psi_f along the back-action rotated reference K0|psi0>,
    so the *rotated* reference always clicks at the second measurement.

    In the experiment gauge (M = |1>, reference at angle -Delta_M) this is
    tan(theta_f) = -sqrt(1-p) tan(Delta_M).
    """
    k0 = make_kraus(M, 0.0, p).k0
    v = k0 @ reference.vec
    n = np.linalg.norm(v)
    if n < 1e-9:
        raise NumericalDegeneracyError("reference state fully absorbed by the "
                                       "partial-collapse measurement")
    return PureState(v[0] / n, v[1] / n)


def conditional_nv_prob(psi: PureState, cfg: SchemeConfig) -> float:
    """P(click at first | no click at second), via Bayes on the tree:
    P(Mw) / [P(Mw) + P(no Mw) P(no Ms | no Mw)]."""
    tree = tree_probabilities(psi, cfg.kraus, cfg.resolved_psi_f())
    p_w, _, p_q = tree.leaves()
    denom = p_w + p_q
    if denom <= 0.0:
        raise NumericalDegeneracyError("conditional undefined: both no-click "
                                       "branches have zero probability")
    return p_w / denom


def null_value(psi: PureState, cfg: SchemeConfig) -> float:
    """The null value (1/p) P(Mw | no Ms).

    Also evaluates the equivalent form <psi|A|psi> / P(no Ms) with
    A = |M><M| and asserts the two agree; the identity is exact because
    P(Mw) = p <psi|A|psi> and a first-measurement click forces no click
    at the second.
    """
    if cfg.p <= 0.0:
        raise ValueError("null value requires a positive collapse probability")
    cond = conditional_nv_prob(psi, cfg)
    nv = cond / cfg.p
    tree = tree_probabilities(psi, cfg.kraus, cfg.resolved_psi_f())
    p_w, _, p_q = tree.leaves()
    a_expect = float(np.real(psi.vec.conj() @ projector(cfg.M) @ psi.vec))
    alt = a_expect / (p_w + p_q)
    if not math.isclose(nv, alt, rel_tol=0.0, abs_tol=NV_IDENTITY_ATOL * max(1.0, abs(nv))):
        raise AssertionError(f"null-value dual-formula mismatch: {nv} vs {alt}")
    return nv
