"""Command-line driver: SNR sweeps, orientation optimization, full
experiment simulation, and POVM inspection.

Exit codes: 0 success, 2 usage/validation error, 3 numerical degeneracy.
CSV output is UTF-8 with a header row, LF line endings, and 9 significant
digits.  All angles are accepted in radians unless --degrees is given;
the flag converts on input only, never on output.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import NumericalDegeneracyError
from .experiment import (BinnedCounts, ExperimentConfig, estimate_snr_from_bins,
                         run_experiment)
from .multicopy import (expected_counts, simulate_counts, snr_nv, snr_std,
                        snr_std_small_angle)
from .povm import make_kraus, make_povm
from .protocol import SchemeConfig
from .single_copy import CapPrior, optimize_orientations
from .states import orthogonal_complement, state


def _fmt(x: float) -> str:
    return "%.9g" % x


@dataclass
class RunManifest:
    """Provenance record accompanying every output file."""

    command: str
    parameters: dict
    seed: int | None
    version: str
    outputs: list[str] = field(default_factory=list)
    duration_seconds: float = 0.0

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _write_csv(path: str | None, header: list[str], rows: list[list[float]]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    body = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(body)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


# ---------------------------------------------------------------------------
# sweep-snr
# ---------------------------------------------------------------------------

SWEEP_HEADER = ["delta", "snr_std", "snr_nv_A", "snr_nv_B",
                "signal_nv_A", "noise_nv_A", "signal_nv_B", "noise_nv_B"]


def _sweep_schemes(delta_m: float, p: float) -> dict[str, SchemeConfig]:
    reference = state(-delta_m)
    vertical = state(math.pi / 2)
    return {"A": SchemeConfig(vertical, p, "A", reference),
            "B": SchemeConfig(vertical, p, "B", reference)}


def cmd_sweep_snr(args) -> int:
    if args.steps < 1:
        print("sweep-snr: --steps must be at least 1", file=sys.stderr)
        return 2
    d_min = _angle(args.delta_min, args.degrees)
    d_max = _angle(args.delta_max, args.degrees)
    delta_m = _angle(args.delta_m, args.degrees)
    if not (math.isfinite(d_min) and math.isfinite(d_max)) or d_max < d_min:
        print("sweep-snr: invalid delta range", file=sys.stderr)
        return 2
    if args.n < 1 or not 0.0 < args.p <= 1.0:
        print("sweep-snr: require --n >= 1 and 0 < --p <= 1", file=sys.stderr)
        return 2
    if args.mode == "mc" and args.seed is None:
        print("sweep-snr: --mode mc requires --seed", file=sys.stderr)
        return 2
    t0 = time.monotonic()
    schemes = _sweep_schemes(delta_m, args.p)
    reference = state(-delta_m)
    m_std = orthogonal_complement(reference)
    deltas = np.linspace(d_min, d_max, args.steps)
    wanted = ("A", "B") if args.scheme == "all" else (args.scheme,)
    rows = []
    for idx, delta in enumerate(deltas):
        psi = state(delta - delta_m)
        row = {"delta": float(delta), "snr_std": math.nan}
        for lbl in ("A", "B"):
            row[f"snr_nv_{lbl}"] = math.nan
            row[f"signal_nv_{lbl}"] = math.nan
            row[f"noise_nv_{lbl}"] = math.nan
        if args.scheme in ("std", "all"):
            if args.mode == "analytic":
                # the linearized theory value (sqrt(2)|sin theta_M| delta sqrt(N))
                row["snr_std"] = snr_std_small_angle(math.pi / 2, delta, args.n)
            else:
                cfg_std = SchemeConfig(m_std, args.p, "A", reference)
                rec_d = simulate_counts(psi, cfg_std, args.n, seed=args.seed * 10007 + 3 * idx)
                rec_0 = simulate_counts(reference, cfg_std, args.n,
                                        seed=args.seed * 10007 + 3 * idx + 1)
                try:
                    row["snr_std"] = snr_std(rec_d, rec_0, args.eta).snr
                except NumericalDegeneracyError as exc:
                    print(f"sweep-snr: skipping std at delta={_fmt(delta)}: {exc}",
                          file=sys.stderr)
        for lbl in wanted:
            if lbl == "std":
                continue
            cfg = schemes[lbl]
            if args.mode == "analytic":
                rec_d = expected_counts(psi, cfg, args.n)
                rec_0 = expected_counts(reference, cfg, args.n)
            else:
                base = args.seed * 20011 + 4 * idx + (0 if lbl == "A" else 2)
                rec_d = simulate_counts(psi, cfg, args.n, seed=base)
                rec_0 = simulate_counts(reference, cfg, args.n, seed=base + 1)
            try:
                rep = snr_nv(rec_d, rec_0, args.eta)
            except NumericalDegeneracyError as exc:
                # degenerate cells are reported and left as NaN in the CSV
                print(f"sweep-snr: skipping scheme {lbl} at delta="
                      f"{_fmt(delta)}: {exc}", file=sys.stderr)
                continue
            row[f"snr_nv_{lbl}"] = rep.snr
            row[f"signal_nv_{lbl}"] = rep.signal
            row[f"noise_nv_{lbl}"] = rep.noise
        rows.append([row[h] for h in SWEEP_HEADER])
    _write_csv(args.out, SWEEP_HEADER, rows)
    if args.out:
        man = RunManifest("sweep-snr",
                          {"delta_min": d_min, "delta_max": d_max,
                           "steps": args.steps, "delta_m": delta_m, "p": args.p,
                           "n": args.n, "scheme": args.scheme, "mode": args.mode,
                           "eta": args.eta},
                          args.seed, __version__, [args.out],
                          time.monotonic() - t0)
        man.write(args.out + ".manifest.json")
    return 0


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

def cmd_optimize(args) -> int:
    cap_delta = _angle(args.cap_delta, args.degrees)
    phi_f = _angle(args.phi_f, args.degrees)
    if args.grid < 32:
        print("optimize: --grid must be at least 32", file=sys.stderr)
        return 2
    if not 0.0 < cap_delta <= math.pi / 2:
        print("optimize: --cap-delta must lie in (0, pi/2]", file=sys.stderr)
        return 2
    if not 0.0 < args.p <= 1.0:
        print("optimize: --p must lie in (0, 1]", file=sys.stderr)
        return 2
    t0 = time.monotonic()
    opt = optimize_orientations(args.p, CapPrior(cap_delta), phi_f, grid=args.grid)
    rows = [[tm, tf, opt.p_err_grid[i, j]]
            for i, tm in enumerate(opt.theta_M_grid)
            for j, tf in enumerate(opt.theta_f_grid)]
    _write_csv(args.out, ["theta_M", "theta_f", "p_err"], rows)
    print(f"argmin: theta_M={_fmt(opt.theta_M)} theta_f={_fmt(opt.theta_f)} "
          f"p_err={_fmt(opt.p_err)}")
    if args.out:
        man = RunManifest("optimize",
                          {"cap_delta": cap_delta, "p": args.p, "phi_f": phi_f,
                           "grid": args.grid},
                          None, __version__, [args.out], time.monotonic() - t0)
        man.write(args.out + ".manifest.json")
    return 0


# ---------------------------------------------------------------------------
# simulate-experiment
# ---------------------------------------------------------------------------

def _channel_stats(bins: BinnedCounts) -> dict:
    out = {}
    for ch in ("d_w", "d_p", "d_n"):
        arr = getattr(bins, ch)
        out[ch] = {"total": float(arr.sum()), "mean_per_bin": float(arr.mean()),
                   "variance_of_total": (bins.channel_variance_of_total(ch)
                                         if bins.bin_count >= 2 else None)}
    return out


def cmd_simulate_experiment(args) -> int:
    import os
    if args.config is not None:
        try:
            cfg = ExperimentConfig.from_json(args.config)
        except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
            print(f"simulate-experiment: invalid config: {exc}", file=sys.stderr)
            return 2
    else:
        cfg = ExperimentConfig()
    try:
        deltas = [_angle(float(tok), args.degrees)
                  for tok in args.delta_list.split(",") if tok.strip()]
    except ValueError:
        print("simulate-experiment: --delta-list must be comma-separated numbers",
              file=sys.stderr)
        return 2
    if not deltas:
        print("simulate-experiment: empty --delta-list", file=sys.stderr)
        return 2
    t0 = time.monotonic()
    reference = state(-cfg.delta_M)
    vertical = state(math.pi / 2)
    if args.scheme == "std":
        scheme = SchemeConfig(vertical, cfg.p_front, "A", reference)
    else:
        scheme = SchemeConfig(vertical, cfg.p_front, args.scheme, reference)
    results = run_experiment(cfg, scheme, deltas + [0.0], seed=args.seed)
    ref_bins = results[0.0]
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    summary = {"config": asdict(cfg), "scheme": args.scheme, "per_delta": []}
    for i, delta in enumerate(deltas):
        bins = results[delta]
        rows = [[delta, ch_idx, b, float(getattr(bins, ch)[b])]
                for ch_idx, ch in enumerate(("d_w", "d_p", "d_n"))
                for b in range(bins.bin_count)]
        # channel column is numeric in the CSV (0=d_w, 1=d_p, 2=d_n)
        path = os.path.join(args.out_dir, f"counts_{i:03d}.csv")
        _write_csv(path, ["delta", "channel", "bin", "count"], rows)
        outputs.append(path)
        entry = {"delta": delta, "channels": _channel_stats(bins)}
        if bins.bin_count >= 2:
            which = "std" if args.scheme == "std" else "nv"
            try:
                rep, fallback = estimate_snr_from_bins(bins, ref_bins,
                                                       scheme=which, eta=args.eta)
            except NumericalDegeneracyError as exc:
                # degenerate cells are reported, not fatal to the sweep
                print(f"simulate-experiment: delta={_fmt(delta)}: {exc}",
                      file=sys.stderr)
                entry["snr"] = {"degenerate": str(exc)}
            else:
                entry["snr"] = {"signal": rep.signal, "noise": rep.noise,
                                "snr": rep.snr, "decided": rep.decided,
                                "poisson_fallback": fallback}
        summary["per_delta"].append(entry)
    summary_path = os.path.join(args.out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(summary_path)
    man = RunManifest("simulate-experiment",
                      {"config": asdict(cfg), "scheme": args.scheme,
                       "delta_list": deltas, "eta": args.eta},
                      args.seed, __version__, outputs, time.monotonic() - t0)
    man.write(os.path.join(args.out_dir, "manifest.json"))
    return 0


# ---------------------------------------------------------------------------
# povm-check
# ---------------------------------------------------------------------------

def _print_matrix(name: str, m: np.ndarray) -> None:
    print(name)
    for row in m:
        print("  [" + "  ".join(f"{v.real:+.9g}{v.imag:+.9g}j" for v in row) + "]")


def cmd_povm_check(args) -> int:
    theta_m = _angle(args.theta_m, args.degrees)
    theta_f = _angle(args.theta_f, args.degrees)
    phi_f = _angle(args.phi_f, args.degrees)
    phi_m = _angle(args.phi_m, args.degrees)
    for name, v in (("--theta-m", theta_m), ("--theta-f", theta_f),
                    ("--phi-f", phi_f), ("--phi-m", phi_m)):
        if not math.isfinite(v):
            print(f"povm-check: {name} must be finite", file=sys.stderr)
            return 2
    if not 0.0 <= args.p <= 1.0:
        print("povm-check: --p must lie in [0, 1]", file=sys.stderr)
        return 2
    kraus = make_kraus(state(theta_m, phi_m), 0.0, args.p)
    povm = make_povm(kraus, state(theta_f, phi_f))
    _print_matrix("Pi_1 (click at the partial measurement):", povm.pi1)
    _print_matrix("Pi_2 (no click, then postselection click):", povm.pi2)
    _print_matrix("Pi_? (no click at either):", povm.piQ)
    print(f"completeness defect: {_fmt(povm.completeness_defect())}")
    print("outcome -> detector mapping:")
    print("  Pi_1 -> reflected-arm click (detector D_W); photon removed")
    print("  Pi_2 -> transmitted photon absorbed by the analyzer (lost)")
    print("  Pi_? -> transmitted photon passes the analyzer (detector D_P);"
          " inconclusive branch")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nullvalue",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep-snr", help="SNR of the three schemes over a "
                                          "sweep of the unknown angle")
    sw.add_argument("--delta-min", type=float, default=0.0)
    sw.add_argument("--delta-max", type=float, default=0.2)
    sw.add_argument("--steps", type=int, default=41)
    sw.add_argument("--delta-m", type=float, default=0.1)
    sw.add_argument("--p", type=float, default=0.15)
    sw.add_argument("--n", type=int, default=11250)
    sw.add_argument("--scheme", choices=["std", "A", "B", "all"], default="all")
    sw.add_argument("--mode", choices=["analytic", "mc"], default="analytic")
    sw.add_argument("--eta", type=float, default=0.05)
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--out", default=None)
    sw.add_argument("--degrees", action="store_true")
    sw.set_defaults(func=cmd_sweep_snr)

    op = sub.add_parser("optimize", help="grid-minimize the cap-averaged "
                                         "discrimination error")
    op.add_argument("--cap-delta", type=float, required=True)
    op.add_argument("--p", type=float, required=True)
    op.add_argument("--phi-f", type=float, default=0.0)
    op.add_argument("--grid", type=int, default=101)
    op.add_argument("--out", default=None)
    op.add_argument("--degrees", action="store_true")
    op.set_defaults(func=cmd_optimize)

    se = sub.add_parser("simulate-experiment", help="binned photon-counting "
                                                    "simulation of the setup")
    se.add_argument("--config", default=None)
    se.add_argument("--scheme", choices=["A", "B", "std"], default="A")
    se.add_argument("--delta-list", required=True)
    se.add_argument("--seed", type=int, required=True)
    se.add_argument("--out-dir", required=True)
    se.add_argument("--eta", type=float, default=0.05)
    se.add_argument("--degrees", action="store_true")
    se.set_defaults(func=cmd_simulate_experiment)

    pc = sub.add_parser("povm-check", help="print the POVM triple and its "
                                           "completeness defect")
    pc.add_argument("--theta-m", type=float, required=True)
    pc.add_argument("--phi-m", type=float, default=0.0)
    pc.add_argument("--p", type=float, required=True)
    pc.add_argument("--theta-f", type=float, required=True)
    pc.add_argument("--phi-f", type=float, default=0.0)
    pc.add_argument("--degrees", action="store_true")
    pc.set_defaults(func=cmd_povm_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericalDegeneracyError as exc:
        print(f"{args.command}: numerical degeneracy: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
