"""Multi-copy statistics: signals, Poisson noise propagation, SNRs,
decision thresholds, and Monte Carlo count generation.

Counts follow the experiment's naming: n_w clicks at the partial-collapse
measurement, n_p no-clicks at the postselection (the inconclusive leaf),
n_s positive detections of the standard single-measurement scheme.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .errors import NumericalDegeneracyError
from .protocol import SchemeConfig
from .povm import tree_probabilities
from .states import PureState, overlap_probability


@dataclass(frozen=True)
class CountRecord:
    """Observed or analytic counts for one input state over n_total copies.

    Variances default to the Poisson value (the count itself) when None;
    binned acquisition fills them with empirical estimates.
    """

    n_w: float = 0.0
    n_p: float = 0.0
    n_s: float = 0.0
    n_total: float = 0.0
    var_w: Optional[float] = None
    var_p: Optional[float] = None
    var_s: Optional[float] = None

    def __post_init__(self):
        for name in ("n_w", "n_p", "n_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} negative")
        for name in ("var_w", "var_p", "var_s"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} negative")

    @property
    def poisson_var_w(self) -> float:
        return self.var_w if self.var_w is not None else self.n_w

    @property
    def poisson_var_p(self) -> float:
        return self.var_p if self.var_p is not None else self.n_p

    @property
    def poisson_var_s(self) -> float:
        return self.var_s if self.var_s is not None else self.n_s


@dataclass(frozen=True)
class SnrReport:
    signal: float
    noise: float
    snr: float
    decision_threshold: float
    decided: bool


def _report(signal: float, noise: float, eta: float) -> SnrReport:
    if noise <= 0.0:
        if signal == 0.0:
            z = z_critical(eta)
            return SnrReport(0.0, 0.0, 0.0, z, False)
        raise NumericalDegeneracyError("zero noise with nonzero signal")
    z = z_critical(eta)
    snr = signal / noise
    return SnrReport(signal=signal, noise=noise, snr=snr,
                     decision_threshold=z, decided=snr > z)


def z_critical(eta: float) -> float:
    """Critical value z with Phi(z) = 1 - eta for the standard normal."""
    if not 0.0 < eta < 0.5:
        raise ValueError(f"eta={eta} outside (0, 0.5)")
    return float(ndtri(1.0 - eta))


# ---------------------------------------------------------------------------
# Standard (single strong measurement) scheme
# ---------------------------------------------------------------------------

def signal_std(rec_delta: CountRecord, rec_0: CountRecord) -> float:
    """|n_s(delta) - n_s(0)| for equal numbers of prepared copies."""
    if rec_delta.n_total != rec_0.n_total:
        raise ValueError("records must come from equal numbers of copies")
    return abs(rec_delta.n_s - rec_0.n_s)


def snr_std(rec_delta: CountRecord, rec_0: CountRecord, eta: float = 0.05) -> SnrReport:
    """Standard-scheme SNR with propagated Poisson (or supplied) variances."""
    s = signal_std(rec_delta, rec_0)
    noise = math.sqrt(rec_delta.poisson_var_s + rec_0.poisson_var_s)
    return _report(s, noise, eta)


def snr_std_small_angle(theta_M: float, delta: float, n: float) -> float:
    """Linearized standard-scheme SNR, sqrt(2)|sin(theta_M)| delta sqrt(N).

    This is the first-order-in-delta theory value; it requires
    cos(theta_M) >> delta to coincide with the exact count-based SNR and is
    conventionally extended to theta_M = pi/2 as the theory curve.
    """
    return math.sqrt(2.0) * abs(math.sin(theta_M)) * abs(delta) * math.sqrt(n)


# ---------------------------------------------------------------------------
# Null-value scheme
# ---------------------------------------------------------------------------

def _conditional(rec: CountRecord) -> float:
    denom = rec.n_w + rec.n_p
    if denom <= 0.0:
        raise NumericalDegeneracyError("conditional estimator undefined: "
                                       "n_w + n_p = 0")
    return rec.n_w / denom


def signal_nv(rec_delta: CountRecord, rec_0: CountRecord) -> float:
    """N |n_w/(n_w+n_p)|_delta - n_w/(n_w+n_p)|_0|."""
    if rec_delta.n_total != rec_0.n_total:
        raise ValueError("records must come from equal numbers of copies")
    n = rec_delta.n_total
    return n * abs(_conditional(rec_delta) - _conditional(rec_0))


def nv_signal_partials(rec: CountRecord) -> tuple[float, float]:
    """(|dS/dn_w|, |dS/dn_p|) of the per-record term N * n_w/(n_w+n_p)."""
    n = rec.n_total
    tot = rec.n_w + rec.n_p
    if tot <= 0.0:
        raise NumericalDegeneracyError("partials undefined: n_w + n_p = 0")
    return n * rec.n_p / tot ** 2, n * rec.n_w / tot ** 2


def snr_nv(rec_delta: CountRecord, rec_0: CountRecord, eta: float = 0.05) -> SnrReport:
    """NV-scheme SNR: the noise propagates the four count variances through
    the partial derivatives of the conditional difference."""
    if rec_delta.n_w == 0.0 and rec_0.n_w == 0.0:
        return _report(0.0, 0.0, eta)
    s = signal_nv(rec_delta, rec_0)
    var = 0.0
    for rec in (rec_delta, rec_0):
        dw, dp = nv_signal_partials(rec)
        var += dw ** 2 * rec.poisson_var_w + dp ** 2 * rec.poisson_var_p
    return _report(s, math.sqrt(var), eta)


def snr_nv_asymptotic(delta: float, delta_M: float, p: float, n: float) -> float:
    """Weak-collapse scaling form sin^2(delta) / (sin(delta_M + delta)
    sqrt(p)) * sqrt(N).  A scaling (~) statement, not an equality."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p={p} outside (0, 1]")
    return math.sin(delta) ** 2 / (math.sin(delta_M + delta) * math.sqrt(p)) * math.sqrt(n)


# ---------------------------------------------------------------------------
# Analytic and Monte Carlo counts
# ---------------------------------------------------------------------------

def expected_counts(psi: PureState, cfg: SchemeConfig, n: float) -> CountRecord:
    """Exact expected counts N * P_leaf (and the standard-scheme
    expectation N |<M|psi>|^2), as float-valued counts."""
    tree = tree_probabilities(psi, cfg.kraus, cfg.resolved_psi_f())
    p_w, _, p_q = tree.leaves()
    return CountRecord(n_w=n * p_w, n_p=n * p_q,
                       n_s=n * overlap_probability(cfg.M, psi), n_total=n)


def simulate_counts(psi: PureState, cfg: SchemeConfig, n: int, seed: int,
                    noise_model: str = "poissonized") -> CountRecord:
    """Monte Carlo counts for one input state.

    'binomial' draws the three leaf occupancies of exactly n independent
    tree traversals (multinomial); 'poissonized' draws Poisson counts with
    means n * P_leaf, matching the coherent-light variance model.  The
    standard-scheme count n_s uses an independent draw from the same
    stream.  Counter-based Philox streams keyed on the seed make the
    result reproducible regardless of execution order.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if noise_model not in ("binomial", "poissonized"):
        raise ValueError(f"unknown noise model {noise_model!r}")
    tree = tree_probabilities(psi, cfg.kraus, cfg.resolved_psi_f())
    leaves = np.clip(np.array(tree.leaves()), 0.0, 1.0)
    leaves /= leaves.sum()
    p_s = overlap_probability(cfg.M, psi)
    rng = np.random.Generator(np.random.Philox(key=seed))
    if noise_model == "binomial":
        n_w, _, n_p = rng.multinomial(n, leaves)
        n_s = rng.binomial(n, p_s)
    else:
        n_w = rng.poisson(n * leaves[0])
        n_p = rng.poisson(n * leaves[2])
        n_s = rng.poisson(n * p_s)
    return CountRecord(n_w=float(n_w), n_p=float(n_p), n_s=float(n_s),
                       n_total=float(n))
