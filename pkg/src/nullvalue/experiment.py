"""Stochastic photon-counting simulation of the polarization experiment.

A photon prepared by the input polarizer meets a glass window that
reflects the vertical component from its front face (the partial-collapse
click, detector D_W), may also reflect from the back face (lost, but with
additional back-action on the transmitted light), and is finally analyzed
by a second polarizer: absorbed (postselection click) or passed through
to detector D_P.  Arm efficiencies, dark counts, and a retardance on the
transmitted vertical component model the real apparatus.

Channel naming follows the detectors: d_w (front reflection), d_p
(transmitted and passed), d_n (standard-scheme polarizer, crossed with
the reference state).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError
from .multicopy import CountRecord, SnrReport, snr_nv, snr_std
from .povm import make_kraus
from .protocol import SchemeConfig
from .states import PureState, orthogonal_complement, overlap_probability, state


@dataclass(frozen=True)
class ExperimentConfig:
    """Optical-path parameters of the apparatus."""

    p_front: float = 0.15        # front-face reflection prob. for vertical pol.
    p_back: float = 0.067        # back-face reflection probability
    eta_w: float = 1.0           # reflected-arm detection efficiency
    eta_p: float = 1.0           # transmitted-arm detection efficiency
    dark_rate: float = 0.0       # dark counts per bin per detector
    bin_count: int = 1
    photons_per_measurement: int = 11250
    ellipticity_phase: float = 0.0  # retardance on the transmitted vertical comp.
    delta_M: float = 0.1

    def validate(self) -> list[str]:
        """Names of out-of-range fields (empty when valid)."""
        bad = []
        for name in ("p_front", "p_back", "eta_w", "eta_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                bad.append(name)
        if self.dark_rate < 0 or not math.isfinite(self.dark_rate):
            bad.append("dark_rate")
        if self.bin_count < 1:
            bad.append("bin_count")
        if self.photons_per_measurement < 1:
            bad.append("photons_per_measurement")
        for name in ("ellipticity_phase", "delta_M"):
            if not math.isfinite(getattr(self, name)):
                bad.append(name)
        return bad

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ValueError(f"unknown config fields: {', '.join(unknown)}")
        cfg = cls(**raw)
        bad = cfg.validate()
        if bad:
            raise ValueError(f"config fields out of range: {', '.join(bad)}")
        return cfg


@dataclass(frozen=True)
class WindowOutcome:
    """Fate of a single photon at the window: 'reflected_front',
    'reflected_back', or 'transmitted' (with the post-window state)."""

    kind: str
    post_state: Optional[PureState] = None


@dataclass
class BinnedCounts:
    """Per-bin detector counts for one input angle."""

    delta: float
    d_w: np.ndarray
    d_p: np.ndarray
    d_n: np.ndarray
    photons: int
    dark_rate: float = 0.0
    wall_clock_bin_seconds: Optional[float] = None  # metadata only

    @property
    def bin_count(self) -> int:
        return len(self.d_w)

    def totals(self) -> dict[str, float]:
        return {"d_w": float(self.d_w.sum()), "d_p": float(self.d_p.sum()),
                "d_n": float(self.d_n.sum())}

    def channel_variance_of_total(self, channel: str) -> float:
        """Variance of the channel total estimated from bin-to-bin scatter."""
        bins = getattr(self, channel)
        if len(bins) < 2:
            raise InsufficientDataError("need at least 2 bins for a variance")
        return float(len(bins) * np.var(bins, ddof=1))


def prepare_input(delta: float, cfg: ExperimentConfig) -> PureState:
    """Input polarization cos(delta - Delta_M)|0> + sin(delta - Delta_M)|1>."""
    return state(delta - cfg.delta_M)


def _transmitted_state(psi: PureState, cfg: ExperimentConfig) -> tuple[float, float, PureState]:
    """(front-reflection prob, conditional back-reflection prob, transmitted
    state after both back-actions and the ellipticity phase)."""
    vertical = state(math.pi / 2)
    k0_front = make_kraus(vertical, 0.0, cfg.p_front).k0
    v1 = k0_front @ psi.vec
    p_front = cfg.p_front * abs(psi.a1) ** 2
    n1 = np.linalg.norm(v1)
    s1 = v1 / n1
    p_back = cfg.p_back * abs(s1[1]) ** 2
    k0_back = make_kraus(vertical, 0.0, cfg.p_back).k0
    v2 = k0_back @ s1
    v2[1] *= np.exp(1j * cfg.ellipticity_phase)
    v2 /= np.linalg.norm(v2)
    return p_front, p_back, PureState(v2[0], v2[1])


def window_interaction(psi: PureState, cfg: ExperimentConfig,
                       rng: np.random.Generator) -> WindowOutcome:
    """Single-photon draw of the window stage."""
    p_front, p_back, trans = _transmitted_state(psi, cfg)
    u = rng.random()
    if u < p_front:
        return WindowOutcome("reflected_front")
    if u < p_front + (1.0 - p_front) * p_back:
        return WindowOutcome("reflected_back")
    return WindowOutcome("transmitted", post_state=trans)


def channel_probabilities(psi: PureState, cfg: ExperimentConfig,
                          psi_f: PureState, reference: PureState) -> dict[str, float]:
    """Per-photon detection probabilities at D_W, D_P and the standard-scheme
    detector D_N (polarizer crossed with the reference state)."""
    p_front, p_back, trans = _transmitted_state(psi, cfg)
    p_trans = (1.0 - p_front) * (1.0 - p_back)
    p_pass_p2 = overlap_probability(orthogonal_complement(psi_f), trans)
    return {
        "d_w": p_front * cfg.eta_w,
        "d_p": p_trans * p_pass_p2 * cfg.eta_p,
        "d_n": overlap_probability(orthogonal_complement(reference), psi) * cfg.eta_w,
    }


def _bin_sizes(n: int, bins: int) -> np.ndarray:
    base = np.full(bins, n // bins, dtype=np.int64)
    base[:n % bins] += 1
    return base


def run_experiment(cfg: ExperimentConfig, scheme: SchemeConfig,
                   delta_sweep: Sequence[float], seed: int) -> dict[float, BinnedCounts]:
    """Simulate the full sweep: per delta, N photons through P1 -> window ->
    P2 -> detectors, with dark counts added per bin.

    Photon fates within a bin are independent, so the per-bin channel
    counts are drawn from the exact multinomial over (D_W, D_P, other).
    Each delta uses its own counter-based stream keyed on (seed, index),
    which makes the sweep deterministic and order independent.
    """
    bad = cfg.validate()
    if bad:
        raise ValueError(f"config fields out of range: {', '.join(bad)}")
    psi_f = scheme.resolved_psi_f()
    out: dict[float, BinnedCounts] = {}
    for idx, delta in enumerate(delta_sweep):
        rng = np.random.Generator(np.random.Philox(key=[seed, idx]))
        psi = prepare_input(delta, cfg)
        probs = channel_probabilities(psi, cfg, psi_f, scheme.reference)
        p_vec = np.array([probs["d_w"], probs["d_p"],
                          max(1.0 - probs["d_w"] - probs["d_p"], 0.0)])
        p_vec /= p_vec.sum()
        sizes = _bin_sizes(cfg.photons_per_measurement, cfg.bin_count)
        draws = np.array([rng.multinomial(sz, p_vec) for sz in sizes])
        d_n = rng.binomial(sizes, min(probs["d_n"], 1.0))
        d_w = draws[:, 0]
        d_p = draws[:, 1]
        if cfg.dark_rate > 0:
            d_w = d_w + rng.poisson(cfg.dark_rate, cfg.bin_count)
            d_p = d_p + rng.poisson(cfg.dark_rate, cfg.bin_count)
            d_n = d_n + rng.poisson(cfg.dark_rate, cfg.bin_count)
        out[delta] = BinnedCounts(delta=delta, d_w=np.asarray(d_w, dtype=np.int64),
                                  d_p=np.asarray(d_p, dtype=np.int64),
                                  d_n=np.asarray(d_n, dtype=np.int64),
                                  photons=cfg.photons_per_measurement,
                                  dark_rate=cfg.dark_rate)
    return out


def _dark_subtracted_record(bins: BinnedCounts) -> tuple[CountRecord, bool]:
    """CountRecord from binned totals with mean dark counts subtracted and
    empirical variances; falls back to Poisson variances (flagged) when the
    bins carry no scatter."""
    if bins.bin_count < 2:
        raise InsufficientDataError("need at least 2 bins")
    dark_total = bins.dark_rate * bins.bin_count
    totals = bins.totals()
    vals = {ch: max(totals[ch] - dark_total, 0.0) for ch in ("d_w", "d_p", "d_n")}
    variances = {ch: bins.channel_variance_of_total(ch) for ch in ("d_w", "d_p", "d_n")}
    # channels whose bins carry no scatter fall back to the Poisson variance
    fallback = any(v == 0.0 for v in variances.values())
    variances = {ch: (None if v == 0.0 else v) for ch, v in variances.items()}
    return CountRecord(n_w=vals["d_w"], n_p=vals["d_p"], n_s=vals["d_n"],
                       n_total=float(bins.photons),
                       var_w=variances["d_w"], var_p=variances["d_p"],
                       var_s=variances["d_n"]), fallback


def estimate_snr_from_bins(bins_delta: BinnedCounts, bins_0: BinnedCounts,
                           scheme: str = "nv",
                           eta: float = 0.05) -> tuple[SnrReport, bool]:
    """SNR from binned data using bin-to-bin empirical variances instead of
    the Poisson assumption.  Returns (report, poisson_fallback) where the
    flag marks degenerate zero-variance bins."""
    rec_d, fb_d = _dark_subtracted_record(bins_delta)
    rec_0, fb_0 = _dark_subtracted_record(bins_0)
    fallback = fb_d or fb_0
    if scheme == "std":
        return snr_std(rec_d, rec_0, eta), fallback
    return snr_nv(rec_d, rec_0, eta), fallback


def fit_ellipticity(cfg: ExperimentConfig, scheme_kind: str,
                    deltas: Sequence[float], target_snr: Sequence[float],
                    seed: int, zeta_grid: Optional[Sequence[float]] = None,
                    eta: float = 0.05) -> tuple[float, float]:
    """Sweep the retardance zeta to minimize the squared distance between
    simulated SNR points and supplied experimental SNR values.

    Returns (best zeta, residual sum of squares).  The scheme kind is
    'A', 'B', or 'std'; the reference run at delta = 0 is simulated with
    the same seed, so the fit is deterministic.
    """
    if len(deltas) != len(target_snr) or not deltas:
        raise ValueError("deltas and target_snr must be equal-length, nonempty")
    if cfg.bin_count < 2:
        raise InsufficientDataError("fitting needs at least 2 bins")
    if zeta_grid is None:
        zeta_grid = np.linspace(-0.5, 0.5, 101)
    reference = state(-cfg.delta_M)
    vertical = state(math.pi / 2)
    post = "A" if scheme_kind == "std" else scheme_kind
    scheme = SchemeConfig(vertical, cfg.p_front, post, reference)
    best = (float(zeta_grid[0]), math.inf)
    for zeta in zeta_grid:
        trial_cfg = ExperimentConfig(**{**{f.name: getattr(cfg, f.name)
                                           for f in fields(ExperimentConfig)},
                                        "ellipticity_phase": float(zeta)})
        runs = run_experiment(trial_cfg, scheme, list(deltas) + [0.0], seed)
        rss = 0.0
        for d, target in zip(deltas, target_snr):
            which = "std" if scheme_kind == "std" else "nv"
            rep, _ = estimate_snr_from_bins(runs[d], runs[0.0], scheme=which,
                                            eta=eta)
            rss += (rep.snr - target) ** 2
        if rss < best[1]:
            best = (float(zeta), rss)
    return best
