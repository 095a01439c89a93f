"""Command-line entry point.

Subcommands: estimate, sweep, moments-check, eta-sweep, moments-sweep.
Settings come from defaults, then an optional ``--config`` file of flat
``key=value`` lines (same keys as the long flags), then the flags themselves.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields, replace

import numpy as np

from rmtcap.errors import ParameterError, RmtcapError
from rmtcap.harness import (
    ExperimentConfig,
    compare,
    eta_sweep,
    fit_complexity_slope,
    moments_check,
    moments_sweep,
    rows_for,
    sweep_sizes,
)
from rmtcap.report import GNUPLOT_TIMING, emit_report

log = logging.getLogger("rmtcap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _strs(text):
    return tuple(x.strip() for x in str(text).split(",") if x.strip())


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


# flag/config key -> (config field, converter)
KEYS = {
    "shape": ("shape", str),
    "dist": ("dist", lambda s: "truncated_normal" if s in ("normal", "truncnorm") else s),
    "D": ("D", float),
    "M": ("M", int),
    "bs": ("bs", int),
    "users": ("users", int),
    "beta": ("beta", _floats),
    "methods": ("methods", _strs),
    "trials": ("trials", int),
    "eta": ("eta", float),
    "moments": ("moments", int),
    "seed": ("seed", int),
    "mode": ("mode", str),
    "sizes": ("sizes", _ints),
    "reps": ("reps", int),
    "timing-trials": ("timing_trials", int),
    "etas": ("etas", _floats),
    "orders": ("orders", _ints),
    "log-base": ("log_base", str),
    "out": ("out", str),
    "format": ("format", str),
    "threads": ("threads", int),
    "sigma": ("sigma", float),
    "ring-users": ("ring_users", int),
    "d0": ("d0", float),
    "d1": ("d1", float),
    "P": ("P", float),
    "N0": ("N0", float),
    "power-iters": ("power_iters", int),
    "nodes": ("nodes", int),
    "deterministic": ("record_timing", lambda s: not _bool(s)),
}


def read_config_file(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("_", "-")
            if key not in KEYS:
                raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat key=value settings file")
    common.add_argument("--shape", choices=["circle", "square"])
    common.add_argument("--dist", choices=["uniform", "normal", "truncated_normal"])
    common.add_argument("--D", type=str, help="region side/diameter in meters")
    common.add_argument("--M", type=str, help="number of clusters")
    common.add_argument("--bs", type=str, help="BSs per cluster (J_m target)")
    group = common.add_mutually_exclusive_group()
    group.add_argument("--users", type=str, help="explicit user count (overrides --beta)")
    group.add_argument("--beta", type=str, help="users-to-BSs ratio(s), comma separated")
    common.add_argument("--methods", type=str, help="comma list from mpm,cdm")
    common.add_argument("--trials", type=str)
    common.add_argument("--eta", type=str)
    common.add_argument("--moments", type=str, help="polynomial order N (0-3)")
    common.add_argument("--seed", type=str)
    common.add_argument("--mode", choices=["network", "direct"])
    common.add_argument("--log-base", choices=["e", "2"])
    common.add_argument("--out", type=str)
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--threads", type=str)
    common.add_argument("--sigma", type=str)
    common.add_argument("--ring-users", type=str)
    common.add_argument("--power-iters", type=str)
    common.add_argument("--nodes", type=str)
    common.add_argument("--deterministic", action="store_const", const="1",
                        help="leave wall_time_s empty so reports are byte-reproducible")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="rmtcap", description="Cluster capacity estimation experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("estimate", parents=[common], help="one scenario, both methods")
    p = sub.add_parser("sweep", parents=[common], help="timing sweep and slope fit")
    p.add_argument("--sizes", type=str)
    p.add_argument("--reps", type=str)
    p.add_argument("--timing-trials", type=str)
    p.add_argument("--gnuplot", type=str, help="also write a gnuplot script here")
    p = sub.add_parser("moments-check", parents=[common], help="moment formulas vs Monte-Carlo")
    p.add_argument("--draws", type=int, default=2000)
    p.add_argument("--profiles", type=int, default=10)
    p = sub.add_parser("eta-sweep", parents=[common], help="error across eta values")
    p.add_argument("--etas", type=str)
    p = sub.add_parser("moments-sweep", parents=[common], help="error across polynomial orders")
    p.add_argument("--orders", type=str)
    return parser


def config_from_args(ns: argparse.Namespace, **defaults) -> ExperimentConfig:
    settings = {}
    if getattr(ns, "config", None):
        settings.update(read_config_file(ns.config))
    for key in KEYS:
        value = getattr(ns, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = value
    if "users" in settings and "beta" in settings and "users" not in vars(ns):
        settings.pop("users")
    kwargs = dict(defaults)
    for key, value in settings.items():
        name, conv = KEYS[key]
        try:
            kwargs[name] = conv(value)
        except ValueError as exc:
            raise ParameterError(f"bad value for {key}: {value!r}") from exc
    valid = {f.name for f in fields(ExperimentConfig)}
    return ExperimentConfig(**{k: v for k, v in kwargs.items() if k in valid})


def _print_table(header, rows):
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    print("  ".join(str(h).rjust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(str(c).rjust(w) for c, w in zip(r, widths)))


def cmd_estimate(cfg: ExperimentConfig) -> int:
    results = compare(cfg)
    unit = "nats" if cfg.log_base == "e" else "bits"
    table = []
    rows = []
    for res in results:
        sc = res.scenario
        cdm, mpm = res.estimates["cdm"], res.estimates["mpm"]
        table.append((sc.tag, sc.J_m, sc.K_m, f"{sc.profile.beta:.3f}",
                      f"{cdm.value * cfg.log_scale:.6f}", f"{mpm.value * cfg.log_scale:.6f}",
                      f"{100 * res.error:.3f}%"))
        rows.extend(rows_for(cfg, res))
    print(f"capacity per BS in {unit}/channel use, {cfg.trials} paired trials, "
          f"eta={cfg.eta:g}, N={cfg.moments}")
    _print_table(("scenario", "J_m", "K_m", "beta", "CDM", "MPM", "rel.err"), table)
    if cfg.out:
        emit_report(rows, cfg.format, cfg.out)
    return 0


def cmd_sweep(cfg: ExperimentConfig, gnuplot=None) -> int:
    timing = sweep_sizes(cfg)
    records = [{"size": t.size, "method": t.method, "J_m": t.J_m, "K_m": t.K_m,
                "seconds": t.seconds} for t in timing]
    columns = ("size", "method", "J_m", "K_m", "seconds")
    emit_report(records, cfg.format, cfg.out, columns=columns)
    for method in cfg.methods:
        pts = [(t.J_m, t.seconds) for t in timing if t.method == method]
        slope = fit_complexity_slope(*zip(*pts))
        print(f"# {method}: fitted exponent {slope:.3f}", file=sys.stderr if not cfg.out else sys.stdout)
    if gnuplot:
        with open(gnuplot, "w", encoding="utf-8") as fh:
            fh.write(GNUPLOT_TIMING.format(csv=cfg.out or "timing.csv"))
    return 0


def cmd_moments_check(cfg: ExperimentConfig, draws: int, profiles: int) -> int:
    checks = moments_check(seed=cfg.seed, profiles=profiles, draws=draws)
    tol = np.array([0.02, 0.02, 0.05])
    ok = True
    table = []
    for i, chk in enumerate(checks):
        err = chk.rel_error
        good = bool(np.all(err < tol))
        ok &= good
        table.append((i, f"{chk.shape[0]}x{chk.shape[1]}",
                      *(f"{100 * e:.3f}%" for e in err), "ok" if good else "FAIL"))
    _print_table(("profile", "size", "phi1", "phi2", "phi3", "status"), table)
    return 0 if ok else 2


def _sweep_table(cfg, rows, label):
    records = [{"beta": r.beta, "J_m": r.J_m, "K_m": r.K_m, label: r.parameter,
                "cdm": r.cdm, "mpm": r.mpm, "rel_error": r.rel_error} for r in rows]
    columns = ("beta", "J_m", "K_m", label, "cdm", "mpm", "rel_error")
    if cfg.out:
        emit_report(records, cfg.format, cfg.out, columns=columns)
    params = sorted({r.parameter for r in rows})
    betas = list(dict.fromkeys(r.beta for r in rows))
    grid = []
    for p in params:
        line = [f"{p:g}"]
        for b in betas:
            err = next(r.rel_error for r in rows if r.beta == b and r.parameter == p)
            line.append(f"{100 * err:.2f}%")
        grid.append(line)
    _print_table((label, *(f"beta={b:.3g}" for b in betas)), grid)


def cmd_eta_sweep(cfg: ExperimentConfig) -> int:
    _sweep_table(cfg, eta_sweep(cfg), "eta")
    return 0


def cmd_moments_sweep(cfg: ExperimentConfig) -> int:
    _sweep_table(cfg, moments_sweep(cfg), "N")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except UsageError as exc:
        print(f"rmtcap: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if ns.command == "sweep":
            cfg = config_from_args(ns, mode="direct")
            return cmd_sweep(cfg, getattr(ns, "gnuplot", None))
        if ns.command == "eta-sweep":
            return cmd_eta_sweep(config_from_args(ns, beta=(0.125, 0.5, 2.0, 8.0, 32.0)))
        if ns.command == "moments-sweep":
            return cmd_moments_sweep(config_from_args(ns))
        if ns.command == "moments-check":
            return cmd_moments_check(config_from_args(ns), ns.draws, ns.profiles)
        return cmd_estimate(config_from_args(ns))
    except (ParameterError, UsageError) as exc:
        print(f"rmtcap: parameter error: {exc}", file=sys.stderr)
        return 1
    except (RmtcapError, ArithmeticError, OSError) as exc:
        print(f"rmtcap: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
