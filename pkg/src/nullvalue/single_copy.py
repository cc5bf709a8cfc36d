"""Single-copy discrimination: minimum-error scheme, the three-outcome
intermediate scheme, cap-averaged error probabilities, and orientation
optimization.

Gauge: psi0 = |0>, M = cos(tm)|0> + sin(tm)|1>, the alternate state is
psi_delta = cos(d1)|0> + sin(d1) e^{i d2}|1>, and the postselection is
psi_f = cos(tf)|0> + sin(tf) e^{i pf}|1>.  The unknown-state prior is
uniform over a cap of half-angle Delta around psi0, with surface measure
sin(2 d1) d(d1) d(d2), d1 in [0, Delta], d2 in [0, pi].

The closed-form expectation functions below are an independent scalar
reference path for the matrix route in :mod:`nullvalue.povm`; the
equality of the two routes is enforced by tests.  The common bracket
multiplying sqrt(1-p) in ``expect_delta_piQ`` is algebraically regrouped
into three compact terms (verified exact against the matrix route).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalDegeneracyError
from .povm import PovmTriple
from .states import PureState, overlap_probability


@dataclass(frozen=True)
class CapPrior:
    """Uniform prior over a Bloch cap of half-angle ``delta_max`` (coefficient
    angle, at most pi/2; pi/2 covers the full sphere in this gauge)."""

    delta_max: float

    def __post_init__(self):
        if not 0.0 < self.delta_max <= math.pi / 2 + 1e-12:
            raise ValueError(f"delta_max={self.delta_max} outside (0, pi/2]")

    @property
    def normalization(self) -> float:
        """S(Delta) = integral of sin(2 d1) over the cap = pi sin^2(Delta)."""
        return math.pi * math.sin(self.delta_max) ** 2

    @property
    def mean_cos2d1(self) -> float:
        """Cap average of cos(2 d1): equals cos^2(Delta)."""
        return math.cos(self.delta_max) ** 2


@dataclass(frozen=True)
class SingleCopyReport:
    """Error / inconclusive probabilities of the intermediate scheme for one
    (psi0, psi_delta) pair, with the four underlying POVM expectations."""

    p_err: float
    p_inc: float
    expect_0_piQ: float
    expect_delta_piQ: float
    expect_0_pi2: float
    expect_delta_pi1: float


def min_error_prob(psi0: PureState, psi_delta: PureState, M: PureState) -> float:
    """Average error of the single strong measurement along M: a click is
    declared 'psi_delta', so the two error branches are |<M|psi0>|^2 and
    1 - |<M|psi_delta>|^2."""
    p_delta_given_0 = overlap_probability(M, psi0)
    p_0_given_delta = 1.0 - overlap_probability(M, psi_delta)
    return 0.5 * (p_0_given_delta + p_delta_given_0)


def cap_averaged_confusion(theta_M: float, cap: CapPrior) -> float:
    """Cap average of the confusion probability P(psi0 | psi_delta):
    (1 - cos(2 theta_M) cos^2(Delta)) / 2."""
    return 0.5 * (1.0 - math.cos(2.0 * theta_M) * cap.mean_cos2d1)


# ---------------------------------------------------------------------------
# Closed-form POVM expectations (reference path, p0 = 0, p1 = p)
# ---------------------------------------------------------------------------

def _g_h(tm, p):
    q = np.sqrt(1.0 - p)
    g = 1.0 - p * np.cos(2 * tm) * np.cos(tm) ** 2 + (q - 1.0) * np.sin(2 * tm) ** 2
    h = p * np.cos(tm) ** 2 + (q - 1.0) * np.cos(2 * tm)
    return g, h


def expect_0_piQ(tm, p, tf, pf):
    """<psi0|PiQ|psi0> in closed form."""
    g, h = _g_h(tm, p)
    return 0.5 * (1.0 - p * np.cos(tm) ** 2 - np.cos(2 * tf) * g
                  + np.sin(2 * tf) * np.sin(2 * tm) * np.cos(pf) * h)


def expect_0_pi2(tm, p, tf, pf):
    """<psi0|Pi2|psi0> in closed form."""
    g, h = _g_h(tm, p)
    return 0.5 * (1.0 - p * np.cos(tm) ** 2 + np.cos(2 * tf) * g
                  - np.sin(2 * tf) * np.sin(2 * tm) * np.cos(pf) * h)


def expect_delta_pi1(tm, p, d1, d2):
    """<psi_delta|Pi1|psi_delta> in closed form."""
    return 0.5 * p * (1.0 + np.cos(2 * tm) * np.cos(2 * d1)
                      + np.sin(2 * tm) * np.sin(2 * d1) * np.cos(d2))


def _head_factors(tm, tf, pf, d1, d2):
    a = 1.0 + np.cos(2 * tm) * np.cos(2 * tf) + np.sin(2 * tm) * np.sin(2 * tf) * np.cos(pf)
    b = 1.0 - np.cos(2 * tm) * np.cos(2 * d1) - np.sin(2 * tm) * np.sin(2 * d1) * np.cos(d2)
    c = 1.0 - np.cos(2 * tm) * np.cos(2 * tf) - np.sin(2 * tm) * np.sin(2 * tf) * np.cos(pf)
    d = 1.0 + np.cos(2 * tm) * np.cos(2 * d1) + np.sin(2 * tm) * np.sin(2 * d1) * np.cos(d2)
    return a, b, c, d


def _interference_bracket(tm, tf, pf, d1, d2):
    """Angular bracket multiplying sqrt(1-p)/2 in <psi_delta|PiQ|psi_delta>."""
    k = np.sin(2 * d1) * np.sin(2 * tf) * np.cos(d2 - pf)
    ell = (np.sin(2 * d1) * np.cos(2 * tf) * np.cos(d2)
           + np.cos(2 * d1) * np.sin(2 * tf) * np.cos(pf))
    return (-2.0 * k + ell * np.sin(4 * tm)
            + np.sin(2 * tm) ** 2
            * (np.sin(2 * d1) * np.sin(2 * tf) * (np.cos(d2 - pf) + np.cos(d2 + pf))
               - 2.0 * np.cos(2 * d1) * np.cos(2 * tf)))


def expect_delta_piQ(tm, p, tf, pf, d1, d2):
    """<psi_delta|PiQ|psi_delta> in closed form."""
    a, b, c, d = _head_factors(tm, tf, pf, d1, d2)
    e = 2.0 * _interference_bracket(tm, tf, pf, d1, d2)
    return 0.25 * (a * b + (1.0 - p) * c * d + 0.5 * np.sqrt(1.0 - p) * e)


# ---------------------------------------------------------------------------
# Intermediate scheme pointwise and cap-averaged quantities
# ---------------------------------------------------------------------------

def intermediate_report(psi0: PureState, psi_delta: PureState,
                        povm: PovmTriple) -> SingleCopyReport:
    """Error and inconclusive probabilities of the three-outcome scheme via
    the POVM matrix route."""
    def ev(op, s):
        return float(np.real(s.vec.conj() @ op @ s.vec))

    e0q = ev(povm.piQ, psi0)
    edq = ev(povm.piQ, psi_delta)
    e02 = ev(povm.pi2, psi0)
    ed1 = ev(povm.pi1, psi_delta)
    p_inc = 0.5 * (e0q + edq)
    conclusive = 1.0 - p_inc
    if conclusive <= 1e-15:
        raise NumericalDegeneracyError("all outcomes inconclusive (p_inc = 1)")
    p_err = 0.5 * (e02 + ed1) / conclusive
    return SingleCopyReport(p_err=p_err, p_inc=p_inc, expect_0_piQ=e0q,
                            expect_delta_piQ=edq, expect_0_pi2=e02,
                            expect_delta_pi1=ed1)


def cap_averaged_intermediate(theta_M: float, theta_f: float, phi_f: float,
                              p: float, cap: CapPrior):
    """Cap averages of <psi_delta|PiQ|psi_delta> and <psi_delta|Pi1|psi_delta>.

    Averaging kills every cos(d2) moment, leaves cos^2(Delta) for cos(2 d1),
    and turns cos(d2 -+ pf) into +-(2/pi) sin(pf) weighted by the first
    sin(2 d1) moment of the cap.
    """
    tm, tf, pf = theta_M, theta_f, phi_f
    D = cap.delta_max
    q = np.sqrt(1.0 - p)
    c2 = cap.mean_cos2d1
    a = 1.0 + np.cos(2 * tm) * np.cos(2 * tf) + np.sin(2 * tm) * np.sin(2 * tf) * np.cos(pf)
    c = 1.0 - np.cos(2 * tm) * np.cos(2 * tf) - np.sin(2 * tm) * np.sin(2 * tf) * np.cos(pf)
    # cap average of sin(2 d1) over the sin(2 d1) measure
    m1 = (D / 2.0 - math.sin(4 * D) / 8.0) / math.sin(D) ** 2
    avg_e = (-(8.0 / math.pi) * np.sin(pf) * np.sin(2 * tf) * m1
             + 2.0 * c2 * np.sin(2 * tf) * np.cos(pf) * np.sin(4 * tm)
             - 4.0 * np.sin(2 * tm) ** 2 * np.cos(2 * tf) * c2)
    mean_piQ = 0.25 * (a * (1.0 - np.cos(2 * tm) * c2)
                       + (1.0 - p) * c * (1.0 + np.cos(2 * tm) * c2)
                       + 0.5 * q * avg_e)
    mean_pi1 = 0.5 * p * (1.0 + np.cos(2 * tm) * c2)
    return mean_piQ, mean_pi1


def cap_averaged_error(theta_M, theta_f, phi_f: float, p: float,
                       cap: CapPrior):
    """Cap-averaged intermediate-scheme error probability (contour-plot
    objective).  Accepts scalar or broadcastable array angles."""
    mean_piQ, mean_pi1 = cap_averaged_intermediate(theta_M, theta_f, phi_f, p, cap)
    e0q = expect_0_piQ(theta_M, p, theta_f, phi_f)
    e02 = expect_0_pi2(theta_M, p, theta_f, phi_f)
    p_inc = 0.5 * (e0q + mean_piQ)
    return 0.5 * (e02 + mean_pi1) / (1.0 - p_inc)


@dataclass(frozen=True)
class OrientationOptimum:
    """Grid scan of the cap-averaged error over (theta_M, theta_f)."""

    theta_M: float
    theta_f: float
    p_err: float
    theta_M_grid: np.ndarray
    theta_f_grid: np.ndarray
    p_err_grid: np.ndarray  # shape (len(theta_M_grid), len(theta_f_grid))


def optimize_orientations(p: float, cap: CapPrior, phi_f: float = 0.0,
                          grid: int = 101, refine: bool = True) -> OrientationOptimum:
    """Minimize the cap-averaged error over measurement orientations.

    Uniform grid over [0, pi/2]^2, argmin ties broken lexicographically
    (smallest theta_M, then smallest theta_f), followed by an optional
    golden-section polish of each coordinate inside the winning cell's
    neighborhood.  The reported grid is always the raw scan.
    """
    if grid < 32:
        raise ValueError("grid resolution must be at least 32 points per axis")
    tms = np.linspace(0.0, math.pi / 2, grid)
    tfs = np.linspace(0.0, math.pi / 2, grid)
    g = cap_averaged_error(tms[:, None], tfs[None, :], phi_f, p, cap)
    i, j = np.unravel_index(np.argmin(g), g.shape)  # C order = lexicographic
    best_tm, best_tf, best = tms[i], tfs[j], float(g[i, j])
    if refine:
        from scipy.optimize import minimize_scalar
        lo_m, hi_m = tms[max(i - 1, 0)], tms[min(i + 1, grid - 1)]
        lo_f, hi_f = tfs[max(j - 1, 0)], tfs[min(j + 1, grid - 1)]
        tm, tf = best_tm, best_tf
        for _ in range(2):
            r = minimize_scalar(lambda x: cap_averaged_error(x, tf, phi_f, p, cap),
                                bounds=(lo_m, hi_m), method="bounded")
            tm = float(r.x)
            r = minimize_scalar(lambda x: cap_averaged_error(tm, x, phi_f, p, cap),
                                bounds=(lo_f, hi_f), method="bounded")
            tf = float(r.x)
        val = float(cap_averaged_error(tm, tf, phi_f, p, cap))
        if val < best:
            best_tm, best_tf, best = tm, tf, val
    return OrientationOptimum(theta_M=best_tm, theta_f=best_tf, p_err=best,
                              theta_M_grid=tms, theta_f_grid=tfs, p_err_grid=g)
