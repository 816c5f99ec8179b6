"""Command-line front end: ``list``, ``eval`` and ``verify``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from heunref import catalog as cat
from heunref import specfun
from heunref import verifier as ver
from heunref.errors import ConfigError, EmptyPlanError, HeunRefError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("heunref")

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_DOMAIN = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONFIG = 4


@dataclass
class RunConfig:
    command: str = "verify"
    patterns: list[str] = field(default_factory=list)
    seed: int = 42
    draws: int = ver.SamplePlan.n_param_draws
    tol_residual: float = ver.SamplePlan.tol_residual
    tol_quad: float = ver.SamplePlan.tol_quad
    refute_factor: float = ver.SamplePlan.refute_factor
    points_per_interval: int = ver.SamplePlan.points_per_interval
    param_ranges: dict = field(default_factory=dict)
    perturbation: float = 0.0
    out: str | None = None
    format: str = "json"
    verbosity: int = 0

    def validate(self) -> None:
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")

    def plan(self) -> ver.SamplePlan:
        return ver.SamplePlan(
            n_param_draws=self.draws,
            rng_seed=self.seed,
            tol_residual=self.tol_residual,
            tol_quad=self.tol_quad,
            refute_factor=self.refute_factor,
            points_per_interval=self.points_per_interval,
            param_ranges={k: tuple(v) for k, v in self.param_ranges.items()},
            perturbation=self.perturbation,
        )


_CONFIG_ALIASES = {"only": "patterns", "filter": "patterns", "tol": None}


def load_config(path: str | Path) -> dict:
    """Read a TOML or JSON plan file (chosen by extension)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode())
        elif path.suffix.lower() == ".json":
            data = json.loads(raw)
        else:
            raise ConfigError(f"config must be .toml or .json, got {path.name}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table/object")
    return data


def apply_config(cfg: RunConfig, data: dict) -> None:
    known = {f.name for f in fields(RunConfig)} - {"command"}
    for key, val in data.items():
        if key == "tol":
            cfg.tol_residual = cfg.tol_quad = float(val)
            continue
        name = _CONFIG_ALIASES.get(key, key)
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if name == "patterns" and isinstance(val, str):
            val = [val]
        setattr(cfg, name, val)


# -- eval -------------------------------------------------------------------

def _heun(fn: Callable[[specfun.HeunParams, float], float]) -> Callable[..., float]:
    def call(a, q, alpha, beta, gamma, delta, x):
        return fn(specfun.HeunParams(a, q, alpha, beta, gamma, delta), x)

    return call


EVAL_FUNCTIONS: dict[str, tuple[Callable[..., float], str]] = {
    "heun_l": (_heun(specfun.heun_l), "a q alpha beta gamma delta x"),
    "heun_l_prime": (_heun(specfun.heun_l_prime), "a q alpha beta gamma delta x"),
    "hyp2f1": (specfun.hyp2f1, "a b c z"),
    "ellip_f": (specfun.ellip_f_incomplete, "phi k"),
    "ellip_k": (specfun.ellip_k_complete, "k"),
    "ellip_e": (specfun.ellip_e_complete, "k"),
}


def cmd_eval(name: str, args: Sequence[str]) -> int:
    if name not in EVAL_FUNCTIONS:
        print(f"error: unknown function {name!r}; choose from {', '.join(EVAL_FUNCTIONS)}", file=sys.stderr)
        return EXIT_CONFIG
    fn, sig = EVAL_FUNCTIONS[name]
    want = len(sig.split())
    if len(args) != want:
        print(f"error: {name} takes {want} arguments ({sig}), got {len(args)}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        vals = [float(a) for a in args]
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        r = fn(*vals)
    except (HeunRefError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"{r:#.15g}")
    return EXIT_OK


# -- list -------------------------------------------------------------------

def cmd_list(patterns: list[str], fmt: str) -> int:
    chosen = cat.select(patterns)
    if patterns and not chosen:
        print(f"warning: no identities matched {patterns}", file=sys.stderr)
    if fmt == "json":
        print(json.dumps([i.manifest() for i in chosen], indent=2))
        return EXIT_OK
    for i in chosen:
        variants = ",".join(v.name for v in i.variants)
        print(f"{i.id}\t{i.status.value}\t{i.anchor}\t[{i.constraints}]\tvariants={variants}")
    return EXIT_OK


# -- verify -----------------------------------------------------------------

def _summary_lines(reports: Sequence[ver.VerificationReport]) -> list[str]:
    lines = []
    for r in reports:
        res = max((d.max_residual for d in r.draws), default=0.0)
        lines.append(f"{r.identity:18s} {r.variant:26s} {r.verdict.value:12s} max_residual={res:.2e}")
    for s in ver.summarize(reports):
        if s.printed is not ver.Verdict.CONFIRMED:
            fix = ", ".join(s.confirmed_variants) or "none"
            lines.append(f"note: {s.identity} printed form {s.printed.value}; confirmed variants: {fix}")
    return lines


def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate()
    plan = cfg.plan()
    chosen = cat.select(cfg.patterns)
    if not chosen:
        print(f"error: no identities matched {cfg.patterns}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    reports = ver.verify_many(chosen, plan)
    wall = time.perf_counter() - t0
    text = ver.to_json(reports, plan, wall) if cfg.format == "json" else ver.to_csv(reports)
    summary = "\n".join(_summary_lines(reports))
    if cfg.out:
        Path(cfg.out).write_text(text)
        print(summary)
        print(f"report written to {cfg.out} ({wall:.1f} s)")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        print(summary, file=sys.stderr)
    return ver.exit_code(reports)


# -- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heunref", description="Numerical referee for Heun-function integral identities.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    lp = sub.add_parser("list", help="print the identity catalog")
    lp.add_argument("--filter", "--only", dest="patterns", action="append", default=[], metavar="GLOB")
    lp.add_argument("--format", choices=("text", "json"), default="text")

    ep = sub.add_parser("eval", help="evaluate a special function")
    ep.add_argument("function", help=", ".join(EVAL_FUNCTIONS))
    ep.add_argument("args", nargs="*")

    vp = sub.add_parser("verify", help="run a verification sweep")
    vp.add_argument("--only", "--filter", dest="patterns", action="append", default=None, metavar="GLOB")
    vp.add_argument("--seed", type=int)
    vp.add_argument("--draws", type=int)
    vp.add_argument("--tol", type=float, help="residual and quadrature tolerance")
    vp.add_argument("--perturb", type=float, dest="perturbation", help="add eps*x to every antiderivative")
    vp.add_argument("--out")
    vp.add_argument("--format", choices=("json", "csv"))
    vp.add_argument("--config")
    return ap


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command="verify", verbosity=ns.verbose)
    if ns.config:
        apply_config(cfg, load_config(ns.config))
    if ns.patterns is not None:
        cfg.patterns = ns.patterns
    for name in ("seed", "draws", "perturbation", "out", "format"):
        v = getattr(ns, name)
        if v is not None:
            setattr(cfg, name, v)
    if ns.tol is not None:
        cfg.tol_residual = cfg.tol_quad = ns.tol
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(ns.verbose, 2), format="%(levelname)s %(message)s")
    if ns.command == "list":
        return cmd_list(ns.patterns, ns.format)
    if ns.command == "eval":
        return cmd_eval(ns.function, ns.args)
    try:
        return cmd_verify(_config_from_args(ns))
    except (ConfigError, EmptyPlanError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
