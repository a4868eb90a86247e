"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 input error, 3 numerical
failure. Every command prints one JSON document on stdout.
"""

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from . import autgroup as ag
from . import jsonio as jio
from . import series as sr
from .config import DEFAULT
from .errors import InputError, NumericalError
from .suites import SUITES
from .tuples import classify, minkowski

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_SEED = 0
SUITE_ORDER = ("defect", "schwarz", "berezin", "projective", "metric")


@dataclass(frozen=True)
class VerifyConfig:
    suite: str = "all"
    caps: Optional[int] = None
    seed: int = DEFAULT_SEED
    tol_scale: float = 1.0
    timings: bool = False


def resolve_seed(flag: Optional[int], config_seed: Optional[int] = None) -> int:
    """--seed beats POLYBALL_SEED, which beats the config file and the default."""
    if flag is not None:
        return int(flag)
    env = os.environ.get("POLYBALL_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"POLYBALL_SEED must be an integer, got {env!r}") from exc
    return DEFAULT_SEED if config_seed is None else int(config_seed)


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    cfg = jio.load_arg(path)
    if not isinstance(cfg, dict):
        raise InputError("config file must hold a JSON object")
    unknown = set(cfg) - {"suite", "caps", "seed", "tol_scale", "timings", "tol", "max_degree"}
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def run_verify(cfg: VerifyConfig) -> dict:
    names = SUITE_ORDER if cfg.suite == "all" else (cfg.suite,)
    # one child stream per suite, so a suite's results do not depend on which others run
    children = dict(zip(SUITE_ORDER, np.random.SeedSequence(cfg.seed).spawn(len(SUITE_ORDER))))
    checks = []
    for name in names:
        t0 = time.perf_counter()
        results = SUITES[name](np.random.default_rng(children[name]), cfg.caps)
        elapsed = (time.perf_counter() - t0) * 1000.0
        for c in results:
            row = {"name": f"{name}.{c.name}", "residual": c.residual,
                   "tolerance": c.tolerance * cfg.tol_scale,
                   "pass": bool(c.residual <= c.tolerance * cfg.tol_scale)}
            if cfg.timings:
                row["runtime_ms"] = round(elapsed, 3)
            checks.append(row)
    checks.sort(key=lambda r: r["name"])
    return {
        "suite": cfg.suite,
        "seed": cfg.seed,
        "config": {"caps": cfg.caps, "tol_scale": cfg.tol_scale,
                   "tolerances": asdict(DEFAULT)},
        "checks": checks,
        "pass": all(r["pass"] for r in checks),
    }


# commands

def cmd_radius(args) -> int:
    s = jio.series_from_json(jio.load_arg(args.series))
    gamma = sr.hadamard_radius(s, args.max_degree)
    per = [{"degree": q, "norm": v} for q, v in sr.degree_norms(s).items()
           if args.max_degree is None or q <= args.max_degree]
    _emit({"gamma": jio._num(gamma), "per_degree": per})
    return EXIT_OK


def cmd_membership(args) -> int:
    X = jio.tuple_from_json(jio.load_arg(args.tuple))
    rep = classify(X, args.tol)
    _emit({"class": rep.cls.value, "minkowski": minkowski(X),
           "min_defect_eig": rep.min_defect_eig, "max_row_norm_sq": rep.max_row_norm_sq,
           "min_partial_eig": rep.min_partial_eig, "boundary_width": rep.boundary_width})
    return EXIT_OK


def _scalar_residual(fn_a, fn_b, n_vec, rng, count=20):
    worst = 0.0
    for _ in range(count):
        z = [(rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2 * n)
             * 0.5 * rng.uniform() for n in n_vec]
        d = ag._flatten(fn_a(z)) - ag._flatten(fn_b(z))
        worst = max(worst, float(np.abs(d).max()))
    return worst


def cmd_aut(args) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(resolve_seed(args.seed)))
    a = jio.automorphism_from_json(jio.load_arg(args.first))
    if args.action == "compose":
        if args.second is None:
            raise InputError("compose needs two automorphisms")
        b = jio.automorphism_from_json(jio.load_arg(args.second))
        c = ag.compose(a, b)
        res = _scalar_residual(lambda z: ag.apply_scalar(c, z),
                               lambda z: ag.apply_scalar(a, ag.apply_scalar(b, z)), a.n_vec, rng)
        _emit({"automorphism": jio.automorphism_to_json(c), "validation_residual": res})
    elif args.action == "invert":
        c = ag.inverse(a)
        res = _scalar_residual(lambda z: ag.apply_scalar(c, ag.apply_scalar(a, z)),
                               lambda z: z, a.n_vec, rng)
        _emit({"automorphism": jio.automorphism_to_json(c), "validation_residual": res})
    else:
        if args.second is None:
            raise InputError("apply needs an automorphism and a tuple")
        X = jio.tuple_from_json(jio.load_arg(args.second))
        Y = ag.apply(a, X)
        _emit({"tuple": jio.tuple_to_json(Y),
               "membership_before": classify(X).cls.value,
               "membership_after": classify(Y).cls.value})
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg_file = _load_config(args.config)
    cfg = VerifyConfig(
        suite=args.suite or cfg_file.get("suite", "all"),
        caps=args.caps if args.caps is not None else cfg_file.get("caps"),
        seed=resolve_seed(args.seed, cfg_file.get("seed")),
        tol_scale=args.tol_scale if args.tol_scale is not None else float(cfg_file.get("tol_scale", 1.0)),
        timings=args.timings or bool(cfg_file.get("timings", False)),
    )
    if cfg.suite not in ("all",) + SUITE_ORDER:
        raise InputError(f"unknown suite {cfg.suite!r}")
    report = run_verify(cfg)
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def _emit(obj) -> None:
    sys.stdout.write(jio.dumps(obj) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyball", description="Polyball operator-theory toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("radius", help="Hadamard radius of a series")
    r.add_argument("series", help="series JSON file or inline JSON")
    r.add_argument("--max-degree", type=int, default=None)
    r.set_defaults(func=cmd_radius)

    m = sub.add_parser("membership", help="classify a tuple and compute its gauge")
    m.add_argument("tuple", help="tuple JSON file or inline JSON")
    m.add_argument("--tol", type=float, default=DEFAULT.eig_tol)
    m.set_defaults(func=cmd_membership)

    a = sub.add_parser("aut", help="automorphism group operations")
    a.add_argument("action", choices=("compose", "invert", "apply"))
    a.add_argument("first", help="automorphism JSON")
    a.add_argument("second", nargs="?", default=None, help="automorphism or tuple JSON")
    a.add_argument("--caps", type=int, default=None)
    a.add_argument("--seed", type=int, default=None)
    a.set_defaults(func=cmd_aut)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=("all",) + SUITE_ORDER, default=None)
    v.add_argument("--caps", type=int, default=None)
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--tol-scale", type=float, default=None)
    v.add_argument("--config", default=None, help="JSON file mirroring the flags")
    v.add_argument("--timings", action="store_true", help="include per-suite runtimes")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(exc, "pairs", None):
            payload["pairs"] = [[[s + 1, j + 1], [t + 1, q + 1]] for (s, j), (t, q) in exc.pairs]
        sys.stderr.write(jio.dumps(payload) + "\n")
        return EXIT_INPUT
    except NumericalError as exc:
        sys.stderr.write(jio.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_NUMERIC
    except (KeyError, TypeError, ValueError) as exc:
        sys.stderr.write(jio.dumps({"error": "InputError", "message": str(exc)}) + "\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
