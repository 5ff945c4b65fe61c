"""Command-line harness: ``lhsac {simulate,check,verify,fit,plotscript}``.

Exit codes: 0 success, 1 check failed, 2 usage or configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import math
import os
import sys
import tempfile
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .config import ConfigError, SimConfig, load_config
from .core import CouplingLaw, RejectionBudgetError
from .diagnostics import DecayFitError, check_theorem, diameter_D, envelope_from_report, fit_decay_rate
from .dynamics import Variant
from .integrate import NumericalError, Trajectory, simulate

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

CSV_COLUMNS = ("t", "D", "L_max", "kappa_min", "kappa_max", "lambda_tilde_max_abs",
               "sphere_drift_max", "envelope")


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else format(float(x), ".17g")


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_id() -> str:
    """Short content hash of the package sources."""
    h = hashlib.sha1()
    root = Path(__file__).parent
    for src in sorted(root.glob("*.py")):
        h.update(src.name.encode())
        h.update(src.read_bytes())
    return h.hexdigest()[:12]


def trajectory_csv(traj: Trajectory, full_state: bool) -> str:
    header = list(CSV_COLUMNS)
    n, m = traj.states.shape[1:] if len(traj) else (0, 0)
    if full_state:
        for j in range(n):
            for a in range(m):
                header += [f"z{j}_{a}_re", f"z{j}_{a}_im"]
    lines = [",".join(header)]
    for k, r in enumerate(traj.records):
        row = [_fmt(getattr(r, c)) for c in CSV_COLUMNS]
        if full_state:
            for z in traj.states[k].ravel():
                row += [_fmt(z.real), _fmt(z.imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _auto_envelope(cfg: SimConfig, e0):
    """Envelope for Hebbian runs whose initial data pass the T32/T34 hypotheses."""
    if cfg.law0 is not CouplingLaw.HEBBIAN:
        return None, None
    which = {Variant.SL_PAIR: "T32", Variant.PERTURBED: "T34"}.get(cfg.variant)
    if which is None:
        return None, None
    try:
        report = check_theorem(e0, cfg.params(), which, variant=cfg.variant)
    except ValueError:
        return None, None
    if not report.satisfied:
        return None, report
    D0, _ = diameter_D(e0)
    if not D0 > 0:
        return None, report
    return envelope_from_report(report, D0), report


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    e0 = cfg.initial_ensemble()
    p = cfg.params()
    envelope, report = _auto_envelope(cfg, e0)
    start = time.perf_counter()
    traj = simulate(e0, p, cfg.variant, cfg.integrator, envelope=envelope)
    wall = time.perf_counter() - start
    out = cfg.output_dir()
    csv_path = out / "trajectory.csv"
    atomic_write(csv_path, trajectory_csv(traj, "full_state" in cfg.formats))
    manifest = [
        f"config={Path(args.config).resolve()}",
        f"config_sha256={cfg.digest()}",
        f"seed={cfg.init.seed}",
        f"build={build_id()}",
        f"backend={_kernels.BACKEND}",
        f"variant={cfg.variant.value}",
        f"samples={len(traj)}",
        f"t_final={_fmt(traj.times[-1])}",
        f"wall_time_s={wall:.6f}",
    ]
    if report is not None:
        manifest.append(f"envelope_theorem={report.theorem}")
        manifest.append(f"envelope_satisfied={'true' if report.satisfied else 'false'}")
        if report.satisfied:
            manifest += [f"envelope_kappa={_fmt(report.kappa)}", f"envelope_kappa_M={_fmt(report.kappa_M)}"]
    atomic_write(out / "manifest.txt", "\n".join(manifest) + "\n")
    print(f"wrote {csv_path} ({len(traj)} samples)")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    e0 = cfg.initial_ensemble()
    report = check_theorem(e0, cfg.params(), args.theorem, kappa=args.kappa, variant=cfg.variant)
    print("\n".join(report.to_lines()))
    return EXIT_OK if report.satisfied else EXIT_FAILED


def cmd_verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_FAILED


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trajectory CSV as float arrays (empty cells become NaN)."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from None
    with fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0][: len(CSV_COLUMNS)]) != CSV_COLUMNS:
        raise ConfigError(f"{path}: header must start with {','.join(CSV_COLUMNS)}")
    header = rows[0]
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            data.append([math.nan if cell == "" else float(cell) for cell in row])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric field") from None
    if not data:
        raise ConfigError(f"{path}: no data rows")
    arr = np.array(data, dtype=np.float64)
    return {name: arr[:, k] for k, name in enumerate(header)}


def cmd_fit(args) -> int:
    cols = read_trajectory_csv(args.trajectory_csv)
    lo, hi = args.window
    t = cols["t"]
    if not lo < hi:
        raise ConfigError(f"empty window [{lo}, {hi}]")
    if not np.any((t >= lo) & (t <= hi)):
        raise ConfigError(f"window [{lo}, {hi}] holds no samples (data spans [{t[0]}, {t[-1]}])")
    try:
        rate, r2 = fit_decay_rate((t, cols["D"]), (lo, hi), strict=True)
    except DecayFitError as exc:
        if "underflows" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAILED
        raise ConfigError(str(exc)) from None
    print(f"rate={rate:.17g}")
    print(f"r2={r2:.17g}")
    return EXIT_OK


PLOT_TEMPLATE = '''\
import csv

import matplotlib.pyplot as plt

with open({csv_name!r}, newline="") as fh:
    rows = list(csv.DictReader(fh))


def col(name):
    return [float(r[name]) if r[name] != "" else float("nan") for r in rows]


t = col("t")
fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 7))
ax1.semilogy(t, col("D"), label="D")
ax1.semilogy(t, col("L_max"), label="L_max")
{envelope}ax1.set_ylabel("functional value")
ax1.legend()
ax2.plot(t, col("kappa_min"), label="kappa_min")
ax2.plot(t, col("kappa_max"), label="kappa_max")
ax2.set_xlabel("t")
ax2.set_ylabel("gain")
ax2.legend()
fig.tight_layout()
fig.savefig({png_name!r}, dpi=120)
'''


def cmd_plotscript(args) -> int:
    path = Path(args.trajectory_csv)
    cols = read_trajectory_csv(path)
    has_env = bool(np.any(np.isfinite(cols["envelope"])))
    env = 'ax1.semilogy(t, col("envelope"), "k--", label="envelope")\n' if has_env else ""
    script = PLOT_TEMPLATE.format(csv_name=path.name, png_name=path.stem + ".png", envelope=env)
    out = path.with_name(path.stem + "_plot.py")
    atomic_write(out, script)
    print(f"wrote {out}")
    return EXIT_OK


def _window(text: str) -> float:
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhsac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate a configured experiment")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="evaluate a theorem's hypotheses on the initial data")
    c.add_argument("config")
    c.add_argument("--theorem", required=True, type=str.lower, choices=["t31", "t32", "t33", "t34"])
    c.add_argument("--kappa", type=float, default=None,
                   help="evaluate T32/T34 at this constant instead of searching")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("verify", help="run a self-check battery")
    v.add_argument("--suite", required=True, choices=["invariants", "reductions", "theorems"])
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fit", help="fit an exponential decay rate to D")
    f.add_argument("trajectory_csv")
    f.add_argument("--window", nargs=2, type=_window, required=True, metavar=("T_LO", "T_HI"))
    f.set_defaults(func=cmd_fit)

    ps = sub.add_parser("plotscript", help="emit a matplotlib script for a trajectory CSV")
    ps.add_argument("trajectory_csv")
    ps.set_defaults(func=cmd_plotscript)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, RejectionBudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
