"""Qubit pure states as exact complex amplitude pairs.

Angle convention: a state built from angles (theta, phi) is

    cos(theta)|0> + sin(theta) e^{i phi}|1>

so theta is the *coefficient* angle, half the Bloch polar angle.  All
closed-form expressions in this package are written in this gauge, which
is why they carry factors of 2*theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Absolute tolerance for algebraic identities (normalization, orthogonality,
#: POVM completeness).
ATOL_ALGEBRA = 1e-12


@dataclass(frozen=True)
class BlochAngles:
    """Coefficient angles of a qubit state: theta in [0, pi], phi in [0, 2*pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("angles must be finite")
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", self.phi % (2.0 * math.pi))


@dataclass(frozen=True)
class PureState:
    """Normalized complex amplitudes on |0> and |1>.

    Construction renormalizes, so ``|a0|^2 + |a1|^2 == 1`` always holds
    within ATOL_ALGEBRA.  Global phase is physically irrelevant; every
    exported probability is invariant under it.
    """

    a0: complex
    a1: complex

    def __post_init__(self):
        a = np.array([self.a0, self.a1], dtype=complex)
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("amplitudes must be finite")
        n = np.linalg.norm(a)
        if n < 1e-14:
            raise ValueError("cannot normalize the zero vector")
        a /= n
        object.__setattr__(self, "a0", complex(a[0]))
        object.__setattr__(self, "a1", complex(a[1]))

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.a0, self.a1], dtype=complex)

    def inner(self, other: "PureState") -> complex:
        """The amplitude <self|other>."""
        return complex(np.vdot(self.vec, other.vec))


def state_from_angles(angles: BlochAngles) -> PureState:
    """cos(theta)|0> + sin(theta) e^{i phi}|1> for the given angles."""
    t, ph = angles.theta, angles.phi
    return PureState(math.cos(t), math.sin(t) * complex(math.cos(ph), math.sin(ph)))


def state(theta: float, phi: float = 0.0) -> PureState:
    """Shorthand for state_from_angles(BlochAngles(theta, phi)) allowing any
    finite theta (reduced modulo the sphere)."""
    c, s = math.cos(theta), math.sin(theta)
    return PureState(c, s * complex(math.cos(phi), math.sin(phi)))


def overlap_probability(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 -- symmetric in its arguments and phase invariant."""
    return float(abs(a.inner(b)) ** 2)


def orthogonal_complement(s: PureState) -> PureState:
    """The state orthogonal to ``s``.

    Phase convention: the first nonzero amplitude of the result is real
    and positive, so the output is reproducible.
    """
    t = np.array([-np.conj(s.a1), np.conj(s.a0)])
    # rotate the global phase so the leading nonzero entry is real-positive
    lead = t[0] if abs(t[0]) > 1e-14 else t[1]
    t = t * (abs(lead) / lead)
    return PureState(t[0], t[1])
