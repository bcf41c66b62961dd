"""Command-line front end.

Subcommands: model, simulate, fit, threshold, herald, figure. Every option
may also come from a flat ``key=value`` file given with ``--config``; keys
are option names with dashes or underscores, and flags on the command line
win over the file.

Exit codes: 2 for configuration or usage errors, 3 for numerical failures,
4 for truncation errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io as dio
from .decoherence import DENSE_NU_GRID, NOISE_LEVELS, NegativityCurve, negativity_curve, threshold
from .detectors import DetectorKind, DetectorSpec, build_povm
from .errors import DomainError, QuadratureError, TruncationError
from .herald import TmsvResource, herald_state, heralded_wigner_section
from .tomography import (
    DEFAULT_SMOOTHING,
    DEFAULT_JITTER,
    RESAMPLE_VARIANCE_FACTOR,
    ProbeSet,
    ml_reconstruct,
    simulate_clicks,
    uncertainty_envelope,
)

EXIT_CONFIG, EXIT_NUMERIC, EXIT_TRUNCATION = 2, 3, 4
CALIBRATED_EFFICIENCY = 0.28


class ConfigError(ValueError):
    pass


def read_config(path) -> dict:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


def _int_list(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def _radii(args) -> np.ndarray:
    if args.r_points < 2 or args.r_max <= 0:
        raise ConfigError("r-points must be >= 2 and r-max > 0")
    return np.linspace(0.0, args.r_max, args.r_points)


def _emit(doc: dict, out) -> None:
    if out:
        dio.write_json(doc, out)
    else:
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _params(args) -> dict:
    skip = {"func", "config", "out", "outdir", "command", "seed"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ConfigError(f"{args.command} needs " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _spec(args) -> DetectorSpec:
    _require(args, "kind")
    return DetectorSpec(DetectorKind(args.kind), args.eta, args.nu)


# -- commands ----------------------------------------------------------------

def cmd_model(args) -> None:
    povm = build_povm(_spec(args), args.L)
    povm.check()
    _emit(dio.povm_to_dict(povm, dio.provenance(**_params(args))), args.out)


def cmd_simulate(args) -> None:
    _require(args, "out")
    probes = ProbeSet(np.linspace(0.0, args.mu_max, args.points), args.pulses)
    record = simulate_clicks(_spec(args), probes, args.jitter, args.seed)
    dio.write_record_csv(record, args.out, dio.provenance(args.seed, **_params(args)))


def cmd_fit(args) -> None:
    _require(args, "record")
    record = dio.read_record_csv(args.record)
    fit = ml_reconstruct(record, L=args.L, max_iter=args.max_iter, tol=args.tol,
                         smoothing=args.smoothing, outcome=args.outcome)
    trunc_list = _int_list(args.trunc_list)
    if trunc_list:
        env = uncertainty_envelope(record, trunc_list=trunc_list, variance_factor=args.variance_factor,
                                   resamples=args.resamples, seed=args.seed, outcome=args.outcome,
                                   max_iter=args.max_iter, tol=args.tol, smoothing=args.smoothing)
        fit.origin_halfwidth = env.halfwidth
    params = _params(args) | {"record_seed": record.seed}
    _emit(dio.fit_to_dict(fit, dio.provenance(args.seed, **params)), args.out)


def cmd_threshold(args) -> None:
    _require(args, "kind")
    th = threshold(args.kind, args.eta)
    if args.curve:
        crossing = dio.read_curve_csv(args.curve).crossing()
        th = dataclasses.replace(th, nu_star_empirical=crossing)
    _emit(dio.threshold_to_dict(th, dio.provenance(**_params(args))), args.out)


def cmd_herald(args) -> None:
    if args.povm:
        povm = dio.povm_from_dict(dio.read_json(args.povm))
    else:
        povm = build_povm(_spec(args), args.L)
    state = herald_state(povm, args.outcome, TmsvResource(args.lam))
    prov = dio.provenance(**_params(args))
    _emit(dio.state_to_dict(state, prov), args.out)
    if args.section:
        dio.write_section_csv(heralded_wigner_section(state, _radii(args)), args.section, prov)


def _figure2(args, outdir: Path) -> list[Path]:
    kind = DetectorKind(args.detector)
    radii = _radii(args)
    written = []
    prov = dio.provenance(args.seed, **_params(args))
    for nu in NOISE_LEVELS:
        povm = build_povm(DetectorSpec(kind, args.eta, nu), args.L)
        path = outdir / f"fig2_{kind.value}_nu{nu:.2f}.csv"
        dio.write_section_csv(povm.wigner_section(1, radii), path, prov)
        written.append(path)
    inset = outdir / f"fig2_{kind.value}_inset.csv"
    dio.write_curve_csv(negativity_curve(kind, args.eta, NOISE_LEVELS), inset, prov)
    dense = outdir / f"fig2_{kind.value}_inset_theory.csv"
    dio.write_curve_csv(negativity_curve(kind, args.eta, DENSE_NU_GRID), dense, prov)
    written += [inset, dense]
    if args.reconstruct:
        probes = ProbeSet(np.linspace(0.0, args.mu_max, args.points), args.pulses)
        records = [
            simulate_clicks(DetectorSpec(kind, args.eta, nu), probes, args.jitter, args.seed + i)
            for i, nu in enumerate(NOISE_LEVELS)
        ]
        curve = negativity_curve(kind, args.eta, NOISE_LEVELS, "reconstructed", records,
                                 L=args.fit_L, smoothing=args.smoothing)
        rec_path = outdir / f"fig2_{kind.value}_inset_reconstructed.csv"
        dio.write_curve_csv(curve, rec_path, prov)
        th = threshold(kind, args.eta)
        th = dataclasses.replace(th, nu_star_empirical=curve.crossing())
        th_path = outdir / f"fig2_{kind.value}_threshold.json"
        dio.write_json(dio.threshold_to_dict(th, prov), th_path)
        written += [rec_path, th_path]
    return written


def _figure3(args, outdir: Path) -> list[Path]:
    radii = _radii(args)
    resource = TmsvResource(args.lam)
    prov = dio.provenance(**_params(args))
    written, origins = [], []
    for nu in NOISE_LEVELS:
        povm = build_povm(DetectorSpec(args.detector, args.eta, nu), args.L)
        state = herald_state(povm, 1, resource)
        section = heralded_wigner_section(state, radii)
        origins.append(section.origin)
        path = outdir / f"fig3_{args.detector}_nu{nu:.2f}.csv"
        dio.write_section_csv(section, path, prov)
        written.append(path)
    curve = NegativityCurve(np.array(NOISE_LEVELS), np.array(origins), "analytic",
                            DetectorKind(args.detector), args.eta)
    path = outdir / f"fig3_{args.detector}_origin.csv"
    dio.write_curve_csv(curve, path, prov)
    return written + [path]


def cmd_figure(args) -> None:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = _figure2(args, outdir) if args.which == "fig2" else _figure3(args, outdir)
    for path in written:
        print(path)


# -- parser --------------------------------------------------------------------

def _detector_opts(p):
    p.add_argument("--kind", choices=[k.value for k in DetectorKind])
    p.add_argument("--eta", type=float, default=CALIBRATED_EFFICIENCY,
                   help="quantum efficiency (default 0.28, the calibrated value of both devices)")
    p.add_argument("--nu", type=float, default=0.0, help="mean dark counts per detection window")


def _probe_opts(p):
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--mu-max", type=float, default=10.0)
    p.add_argument("--pulses", type=int, default=10**6)
    p.add_argument("--jitter", type=float, default=DEFAULT_JITTER)
    p.add_argument("--seed", type=int, default=0)


def _radius_opts(p):
    p.add_argument("--r-max", type=float, default=3.0)
    p.add_argument("--r-points", type=int, default=121)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file supplying option defaults")

    parser = argparse.ArgumentParser(prog="detdeco", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("model", parents=[common], help="write an analytic POVM as JSON")
    _detector_opts(p)
    p.add_argument("--L", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(func=cmd_model)
    subs["model"] = p

    p = sub.add_parser("simulate", parents=[common], help="simulate coherent-probe click counts")
    _detector_opts(p)
    _probe_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    subs["simulate"] = p

    p = sub.add_parser("fit", parents=[common], help="maximum-likelihood POVM reconstruction")
    p.add_argument("--record")
    p.add_argument("--L", type=int, default=60)
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--outcome", type=int, default=1)
    p.add_argument("--trunc-list", default="", help="comma-separated cutoffs for the error bar")
    p.add_argument("--resamples", type=int, default=16)
    p.add_argument("--variance-factor", type=float, default=RESAMPLE_VARIANCE_FACTOR)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    subs["fit"] = p

    p = sub.add_parser("threshold", parents=[common], help="negativity threshold of the one-click element")
    p.add_argument("--kind", choices=[k.value for k in DetectorKind])
    p.add_argument("--eta", type=float, default=CALIBRATED_EFFICIENCY)
    p.add_argument("--curve", help="reconstructed curve CSV for an empirical crossing")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)
    subs["threshold"] = p

    p = sub.add_parser("herald", parents=[common], help="heralded state on a two-mode squeezed vacuum")
    p.add_argument("--povm", help="POVM JSON; otherwise built from --kind/--eta/--nu")
    _detector_opts(p)
    p.add_argument("--L", type=int, default=60)
    p.add_argument("--outcome", type=int, default=1)
    p.add_argument("--lam", type=float, default=0.6)
    p.add_argument("--section", help="also write the Wigner section CSV here")
    _radius_opts(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_herald)
    subs["herald"] = p

    p = sub.add_parser("figure", parents=[common], help="plot-ready data for the noise study")
    p.add_argument("which", choices=["fig2", "fig3"])
    p.add_argument("--detector", choices=[k.value for k in DetectorKind], default="apd")
    p.add_argument("--eta", type=float, default=CALIBRATED_EFFICIENCY)
    p.add_argument("--L", type=int, default=200)
    p.add_argument("--lam", type=float, default=0.6)
    p.add_argument("--reconstruct", action="store_true", help="fig2: also simulate and fit each noise level")
    p.add_argument("--fit-L", type=int, default=60)
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING)
    _probe_opts(p)
    _radius_opts(p)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_figure)
    subs["figure"] = p
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sp = subs[args.command]
        known = {a.dest for a in sp._actions} - {"help", "config", "func"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        for action in sp._actions:
            if action.dest in cfg and isinstance(action, argparse._StoreTrueAction):
                cfg[action.dest] = cfg[action.dest].lower() in ("1", "true", "yes", "on")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            args.func(args)
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (QuadratureError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError, KeyError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
