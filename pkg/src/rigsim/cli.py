"""Command line entry point: ``rigsim <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis, experiments
from .errors import RigError
from .genbip import BipartiteIncidence, incidence_stats, sample_incidence
from .graph import build_intersection, components, explore_faithful
from .model import RigConfig, config_from_dict, profile_from_config, validate_profile
from .surrogate import run_surrogate, stop_times

EXIT_OK, EXIT_INVALID, EXIT_CHECK = 0, 1, 2


class CheckFailed(Exception):
    pass


def _load_config(args) -> dict[str, Any]:
    cfg: dict[str, Any] = {}
    if args.config:
        text = args.config
        cfg = json.loads(Path(text).read_text() if not text.lstrip().startswith("{") else text)
    for key in ("n", "m", "c", "shape", "s"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if args.seed is not None:
        cfg["seed"] = args.seed
    return cfg


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=lambda o: o.tolist() if isinstance(o, np.ndarray) else str(o))


def _incidence(args) -> tuple[BipartiteIncidence, RigConfig | None]:
    if getattr(args, "incidence", None):
        return BipartiteIncidence.load(args.incidence), None
    cfg = config_from_dict(_load_config(args))
    return sample_incidence(cfg), cfg


def cmd_gen(args) -> None:
    inc, _ = _incidence(args)
    if args.format == "json":
        _emit(args, _json(incidence_stats(inc).to_dict()))
    else:
        _emit(args, inc.dumps())


def cmd_components(args) -> None:
    inc, cfg = _incidence(args)
    s = args.s if args.s is not None else (cfg.s if cfg else 1)
    summary = components(build_intersection(inc, s))
    if args.format == "csv":
        _emit(args, "size\n" + "\n".join(map(str, summary.sizes)))
    else:
        _emit(args, summary.to_json())


def cmd_explore(args) -> None:
    inc, cfg = _incidence(args)
    trace = explore_faithful(inc, args.v0, cfg.profile if cfg else None)
    if args.format == "json":
        _emit(args, _json({"start": trace.start, "stop_time": trace.stop_time, "y": trace.y, "z": trace.z}))
    else:
        _emit(args, trace.to_csv())


def cmd_surrogate(args) -> None:
    cfg = _load_config(args)
    n, profile, seed = int(cfg["n"]), profile_from_config(cfg), int(cfg.get("seed", 0))
    if args.reps and args.reps > 1:
        t = stop_times(n, profile, args.reps, seed, rate=args.rate)
        if args.format == "csv":
            _emit(args, "stop_time\n" + "\n".join(map(str, t.tolist())))
        else:
            _emit(args, _json({"reps": args.reps, "mean": float(t.mean()), "max": int(t.max()),
                               "stop_times": t}))
        return
    trace = run_surrogate(n, profile, seed, index=args.index, rate=args.rate)
    if args.format == "json":
        _emit(args, _json({"stop_time": trace.stop_time, "y": trace.y, "z": trace.z,
                           "r": trace.r, "phi": trace.phi, "wcum": trace.wcum}))
    else:
        _emit(args, trace.to_csv())


def cmd_predict(args) -> None:
    n = args.n
    if args.c is not None and not args.config:
        c = args.c
    else:
        cfg = _load_config(args)
        n = int(cfg["n"])
        c = validate_profile(profile_from_config(cfg), n).c
    _emit(args, _json(analysis.solve_zeta(c, n).to_dict()))


def cmd_sweep(args) -> None:
    cfg = _load_config(args)
    if args.reps is not None:
        cfg["reps"] = args.reps
    spec = experiments.SweepSpec.from_dict(cfg)
    rows = experiments.sweep(spec, workers=args.workers)
    if args.format == "json":
        _emit(args, _json([r.as_record() for r in rows]))
    else:
        _emit(args, experiments.sweep_csv(rows))
    if args.check:
        bad = experiments.check_sweep(rows, tol=args.tol)
        if bad:
            raise CheckFailed("; ".join(bad))


def cmd_sprinkle(args) -> None:
    cfg = _load_config(args)
    rep = experiments.sprinkle_demo(int(cfg["n"]), profile_from_config(cfg), args.gamma,
                                    int(cfg.get("seed", 0)))
    _emit(args, _json(rep.to_dict()))
    if args.check and rep.largest_after < rep.largest_before:
        raise CheckFailed("largest component shrank after sprinkling")


def cmd_depdemo(args) -> None:
    cfg = _load_config(args)
    rep = experiments.dependence_demo(profile_from_config(cfg), args.reps or 100_000,
                                      int(cfg.get("seed", 0)))
    _emit(args, _json(rep.to_dict()))
    if args.check and rep.joint < rep.product - 4 * rep.se:
        raise CheckFailed("empirical joint below product by more than 4 standard errors")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file or inline JSON object")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--reps", type=int)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--check", action="store_true", help="exit 2 if the built-in check fails")
    common.add_argument("--n", type=int)
    common.add_argument("--m", type=int)
    common.add_argument("--c", type=float)
    common.add_argument("--shape")
    common.add_argument("--s", type=int)

    p = argparse.ArgumentParser(prog="rigsim", description="Random intersection graph experiments")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", parents=[common], help="sample an incidence (RIG-INC v1 text)")
    sp.set_defaults(func=cmd_gen)
    sp = sub.add_parser("components", parents=[common], help="component sizes of a graph")
    sp.add_argument("--incidence", help="RIG-INC v1 file; otherwise sample from the config")
    sp.set_defaults(func=cmd_components)
    sp = sub.add_parser("explore", parents=[common], help="faithful exploration trace")
    sp.add_argument("--incidence")
    sp.add_argument("--v0", type=int, default=0)
    sp.set_defaults(func=cmd_explore)
    sp = sub.add_parser("surrogate", parents=[common], help="surrogate process trace")
    sp.add_argument("--index", type=int, default=0)
    sp.add_argument("--rate", choices=["conditional", "unconditional"], default="conditional")
    sp.set_defaults(func=cmd_surrogate)
    sp = sub.add_parser("predict", parents=[common], help="giant component prediction")
    sp.set_defaults(func=cmd_predict)
    sp = sub.add_parser("sweep", parents=[common], help="phase-transition sweep to CSV")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--tol", type=float, default=0.03)
    sp.set_defaults(func=cmd_sweep)
    sp = sub.add_parser("sprinkle", parents=[common], help="sprinkling demonstration")
    sp.add_argument("--gamma", type=float, required=True)
    sp.set_defaults(func=cmd_sprinkle)
    sp = sub.add_parser("depdemo", parents=[common], help="edge dependence demonstration")
    sp.set_defaults(func=cmd_depdemo)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (RigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
