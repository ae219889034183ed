"""Command-line front end.

Subcommands: verify, center, semiconj, annulus, growth.  Every command
validates its config completely before computing anything and never writes a
partial output.  Exit codes: 0 success (verify: ABSOLUTE), 2 POINTWISE_ONLY,
3 NOT_PH or unresolvable center structure, 4 solver non-convergence, 64
malformed config.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import coherence, cones, reports, semiconjugacy
from .config import RunConfig, load_config
from .errors import (
    ConfigError,
    NonConvergenceError,
    StepSizeError,
    TangencyError,
    TorusLabError,
)

EXIT_OK = 0
EXIT_POINTWISE = 2
EXIT_NOT_PH = 3
EXIT_NO_CONVERGENCE = 4
EXIT_BAD_CONFIG = 64

# which named tolerance --tol overrides, per command
_TOL_TARGET = {
    "verify": "center",
    "center": "center",
    "semiconj": "solver",
    "annulus": "invariance",
    "growth": "solver",
}


def _outdir(cfg: RunConfig) -> str:
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


def _classify(cfg: RunConfig) -> cones.PHReport:
    return cones.classify(cfg.build_map(), cfg.build_cones(), cfg.grid_n,
                          cfg.depth, tol=cfg.tolerances["center"])


def cmd_verify(cfg: RunConfig) -> int:
    rep = _classify(cfg)
    out = _outdir(cfg)
    payload = reports.ph_report_to_dict(rep)
    payload["rng_seed"] = cfg.rng_seed
    reports.write_json(os.path.join(out, "ph_report.json"), payload)
    reports.write_ph_csv(os.path.join(out, "ph_report.csv"), rep)
    print(f"{rep.classification}: margin {reports.format_float(rep.margin)} "
          f"lambda_abs {reports.format_float(rep.lambda_abs)} "
          f"delta_abs {reports.format_float(rep.delta_abs)} "
          f"delta_pointwise {reports.format_float(rep.delta_pointwise)}")
    if rep.classification == cones.ABSOLUTE:
        return EXIT_OK
    if rep.classification == cones.POINTWISE_ONLY:
        return EXIT_POINTWISE
    return EXIT_NOT_PH


def cmd_center(cfg: RunConfig) -> int:
    rep = _classify(cfg)
    if rep.classification == cones.NOT_PH:
        print("NOT_PH: no trustworthy center field to export", file=sys.stderr)
        return EXIT_NOT_PH
    out = _outdir(cfg)
    reports.write_center_csv(os.path.join(out, "center_field.csv"), rep.center)
    print(f"center field {rep.grid_n}x{rep.grid_n}: max width "
          f"{reports.format_float(float(rep.center.widths.max()))} at depth {rep.depth}")
    return EXIT_OK


def cmd_semiconj(cfg: RunConfig) -> int:
    strip = cfg.build_strip()
    res = semiconjugacy.solve(strip, tol=cfg.tolerances["solver"],
                              shape=cfg.solver["shape"],
                              max_iters=cfg.solver["max_iters"])
    out = _outdir(cfg)
    payload = reports.semiconjugacy_to_dict(res)
    payload["rng_seed"] = cfg.rng_seed
    reports.write_json(os.path.join(out, "semiconjugacy.json"), payload)
    reports.write_u_csv(os.path.join(out, "u.csv"), res)
    print(f"converged in {res.iterations} iterations: residual "
          f"{reports.format_float(res.residual)} u_sup {reports.format_float(res.u_sup)}")
    return EXIT_OK


def cmd_annulus(cfg: RunConfig) -> int:
    tmap = cfg.build_map()
    cf = cfg.build_cones()
    field = cones.compute_center_field(tmap, cf, cfg.grid_n, cfg.depth,
                                       cfg.tolerances["center"])
    found = coherence.hunt_invariant_circles(
        tmap, field, seeds=cfg.seeds, period_max=cfg.period_max,
        invariance_tol=cfg.tolerances["invariance"],
        step=cfg.trace["step"], max_len=cfg.trace["max_len"],
        closure_tol=cfg.tolerances["closure"],
        dir_tol=cfg.tolerances["direction"],
        tangency_tol=cfg.tolerances["tangency"])
    out = _outdir(cfg)
    payload = reports.circles_to_dict(found, cfg.seeds, cfg.period_max,
                                      cfg.tolerances["invariance"])
    payload["rng_seed"] = cfg.rng_seed
    reports.write_json(os.path.join(out, "circles.json"), payload)
    print(f"{len(found)} invariant circle(s) found")
    return EXIT_OK


def cmd_growth(cfg: RunConfig) -> int:
    if cfg.growth["segment"] is None:
        raise ConfigError("growth command needs growth.segment in the config")
    tmap = cfg.build_map()
    cf = cfg.build_cones()
    rep = coherence.grow_unstable_curve(tmap, cf, cfg.growth["segment"],
                                        n_max=cfg.n_max, cell=cfg.growth["cell"])
    if cfg.strip_spec is not None:
        strip = cfg.build_strip()
        semi = semiconjugacy.solve(strip, tol=cfg.tolerances["solver"],
                                   shape=cfg.solver["shape"],
                                   max_iters=cfg.solver["max_iters"])
        k = cfg.growth["K"] if cfg.growth["K"] is not None else rep.K_estimate
        rep = coherence.contradiction_bounds(strip, semi, rep, K=k,
                                             c=cfg.growth["c"])
    out = _outdir(cfg)
    payload = reports.growth_to_dict(rep)
    payload["rng_seed"] = cfg.rng_seed
    reports.write_json(os.path.join(out, "growth.json"), payload)
    reports.write_growth_csv(os.path.join(out, "growth.csv"), rep)
    cross = "none" if rep.crossover_n is None else str(rep.crossover_n)
    print(f"lambda_fit {reports.format_float(rep.lambda_fit)} "
          f"K_estimate {reports.format_float(rep.K_estimate)} crossover {cross}")
    return EXIT_OK


_COMMANDS = {
    "verify": cmd_verify,
    "center": cmd_center,
    "semiconj": cmd_semiconj,
    "annulus": cmd_annulus,
    "growth": cmd_growth,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toruslab",
        description="Cone, center-bundle and growth experiments for torus "
                    "endomorphisms.")
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "verify": "classify domination (ABSOLUTE / POINTWISE_ONLY / NOT_PH)",
        "center": "export the center line field grid as CSV",
        "semiconj": "solve for the semiconjugacy to the linear stretch",
        "annulus": "hunt map-invariant center circles",
        "growth": "iterate a cone-tangent segment; length vs tube area",
    }
    for name, desc in descriptions.items():
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--grid", type=int,
                       help="grid resolution (overrides config grid_n)")
        p.add_argument("--tol", type=float,
                       help=f"override the '{_TOL_TARGET[name]}' tolerance")
        p.add_argument("--seed", type=int, help="override config rng_seed")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.grid is not None:
        if not (16 <= args.grid <= 4096 and args.grid & (args.grid - 1) == 0):
            raise ConfigError(
                f"--grid must be a power of two in [16, 4096], got {args.grid}")
        cfg = replace(cfg, grid_n=args.grid)
    if args.tol is not None:
        if args.tol <= 0.0:
            raise ConfigError(f"--tol must be positive, got {args.tol}")
        tols = dict(cfg.tolerances)
        tols[_TOL_TARGET[args.command]] = args.tol
        cfg = replace(cfg, tolerances=tols)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
        cfg = replace(cfg, rng_seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except NonConvergenceError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (TangencyError, StepSizeError) as exc:
        print(f"center structure unresolved: {exc}", file=sys.stderr)
        return EXIT_NOT_PH
    except TorusLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
