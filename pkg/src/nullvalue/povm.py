"""Partial-collapse Kraus pair, the three-outcome POVM, and the
sequential measurement tree.

The first (partial-collapse) measurement clicks on |Mbar>, |M> with
probabilities p0, p1 and destroys the system when it clicks.  A null
outcome applies the back-action operator K0.  The second measurement
projects onto {|psi_f>, |psi_f_bar>}.  The three possible records are
(click, -), (no click, click), (no click, no click), carried by the POVM
elements Pi1, Pi2, PiQ which sum to the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .states import ATOL_ALGEBRA, PureState, orthogonal_complement

Operator2 = np.ndarray  # 2x2 complex matrix

I2 = np.eye(2, dtype=complex)


def projector(s: PureState) -> Operator2:
    return np.outer(s.vec, s.vec.conj())


def is_hermitian(op: Operator2, atol: float = ATOL_ALGEBRA) -> bool:
    return bool(np.max(np.abs(op - op.conj().T)) < atol)


def hermitian_eigenvalues(op: Operator2) -> tuple[float, float]:
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, ascending."""
    a = op[0, 0].real
    d = op[1, 1].real
    b2 = abs(op[0, 1]) ** 2
    half_tr = 0.5 * (a + d)
    disc = math.sqrt(max(0.25 * (a - d) ** 2 + b2, 0.0))
    return half_tr - disc, half_tr + disc


def is_positive_semidefinite(op: Operator2, atol: float = ATOL_ALGEBRA) -> bool:
    return is_hermitian(op, atol) and hermitian_eigenvalues(op)[0] >= -atol


@dataclass(frozen=True)
class KrausPair:
    """Click / no-click operators of the partial-collapse measurement.

    K1 = sqrt(p0)|Mbar><Mbar| + sqrt(p1)|M><M|
    K0 = sqrt(1-p0)|Mbar><Mbar| + sqrt(1-p1)|M><M|
    """

    k1: Operator2
    k0: Operator2
    p0: float
    p1: float

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(self.k1.conj().T @ self.k1
                                   + self.k0.conj().T @ self.k0 - I2)))


@dataclass(frozen=True)
class PovmTriple:
    """POVM elements for the two-step protocol: first-measurement click,
    postselection click, and the inconclusive (null-value) branch."""

    pi1: Operator2
    pi2: Operator2
    piQ: Operator2

    def completeness_defect(self) -> float:
        return float(np.max(np.abs(self.pi1 + self.pi2 + self.piQ - I2)))

    def elements(self) -> tuple[Operator2, Operator2, Operator2]:
        return self.pi1, self.pi2, self.piQ


@dataclass(frozen=True)
class TreeProbabilities:
    """Leaf probabilities of the three-outcome measurement tree.

    ``degenerate`` marks the pW == 1 case: the state is absorbed with
    certainty and the post-measurement state is undefined (``post_state``
    then holds the input unchanged and must not be used).
    """

    pW: float
    pS_given_noW: float
    pNoS_given_noW: float
    post_state: PureState
    degenerate: bool = False

    def leaves(self) -> tuple[float, float, float]:
        """(click, -), (no click, click), (no click, no click)."""
        return (self.pW,
                (1.0 - self.pW) * self.pS_given_noW,
                (1.0 - self.pW) * self.pNoS_given_noW)


def make_kraus(M: PureState, p0: float, p1: float) -> KrausPair:
    """Kraus pair of the partial-collapse measurement along |M>.

    The main-scheme convention is p0 = 0, p1 = p (only |M> is measured).
    """
    for name, p in (("p0", p0), ("p1", p1)):
        if not (0.0 <= p <= 1.0) or not math.isfinite(p):
            raise ValueError(f"{name}={p} outside [0, 1]")
    pm = projector(M)
    pmb = projector(orthogonal_complement(M))
    k1 = math.sqrt(p0) * pmb + math.sqrt(p1) * pm
    k0 = math.sqrt(1.0 - p0) * pmb + math.sqrt(1.0 - p1) * pm
    return KrausPair(k1=k1, k0=k0, p0=p0, p1=p1)


def make_povm(kraus: KrausPair, psi_f: PureState) -> PovmTriple:
    """POVM of the partial-collapse stage followed by projection onto
    {psi_f, psi_f_bar}."""
    pf = projector(psi_f)
    pfb = projector(orthogonal_complement(psi_f))
    k0, k1 = kraus.k0, kraus.k1
    return PovmTriple(pi1=k1.conj().T @ k1,
                      pi2=k0.conj().T @ pf @ k0,
                      piQ=k0.conj().T @ pfb @ k0)


def tree_probabilities(psi: PureState, kraus: KrausPair,
                       psi_f: PureState) -> TreeProbabilities:
    """Leaf probabilities of the sequential tree, plus the back-action
    rotated post-state K0|psi>/||K0|psi>||.

    Equal, within ATOL_ALGEBRA, to the POVM expectations of make_povm:
    pW = <Pi1>, (1-pW)*pS = <Pi2>, (1-pW)*pNoS = <PiQ>.
    """
    v = psi.vec
    k1v = kraus.k1 @ v
    pW = float(np.real(np.vdot(k1v, k1v)))
    pW = min(max(pW, 0.0), 1.0)
    k0v = kraus.k0 @ v
    norm = np.linalg.norm(k0v)
    if norm < 1e-9:
        return TreeProbabilities(pW=1.0, pS_given_noW=0.0, pNoS_given_noW=0.0,
                                 post_state=psi, degenerate=True)
    post = PureState(k0v[0] / norm, k0v[1] / norm)
    ps = float(abs(psi_f.inner(post)) ** 2)
    ps = min(max(ps, 0.0), 1.0)
    return TreeProbabilities(pW=pW, pS_given_noW=ps, pNoS_given_noW=1.0 - ps,
                             post_state=post)
