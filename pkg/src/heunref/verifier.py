"""Sampling, residual and quadrature checks, verdicts and reports."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import os
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from heunref import catalog as cat
from heunref.catalog import ConcreteIdentity, Identity
from heunref.errors import ConfigError, ConvergenceError, EmptyPlanError, HeunRefError
from heunref.quadrature import quad_adaptive

MAX_REDRAWS = 200
REFUTE_QUORUM = 0.8


class Verdict(str, enum.Enum):
    CONFIRMED = "CONFIRMED"
    REFUTED = "REFUTED"
    INCONCLUSIVE = "INCONCLUSIVE"
    ERROR = "ERROR"


@dataclass(frozen=True)
class SamplePlan:
    n_param_draws: int = 10
    rng_seed: int = 42
    tol_residual: float = 1e-8
    tol_quad: float = 1e-8
    refute_factor: float = 1e3
    points_per_interval: int = 50
    param_ranges: dict = field(default_factory=dict)
    perturbation: float = 0.0
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.n_param_draws < 1:
            raise ConfigError("n_param_draws must be at least 1")
        if self.points_per_interval < 1:
            raise ConfigError("points_per_interval must be at least 1")
        if not (self.tol_residual > 0 and self.tol_quad > 0):
            raise ConfigError("tolerances must be positive")
        if not self.refute_factor > 1:
            raise ConfigError("refute_factor must exceed 1")
        for name, rng in self.param_ranges.items():
            lo, hi = rng
            if not lo <= hi:
                raise ConfigError(f"empty range for {name}: {rng}")

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d["param_ranges"] = {k: list(v) for k, v in sorted(self.param_ranges.items())}
        return d


@dataclass(frozen=True)
class DrawRecord:
    params: dict
    interval: tuple[float, float]
    max_residual: float
    quad_mismatch: float
    verdict: Verdict
    error: str | None = None

    def as_dict(self) -> dict:
        d = {
            "params": {k: _num(v) for k, v in sorted(self.params.items())},
            "interval": [_num(self.interval[0]), _num(self.interval[1])],
            "max_residual": _num(self.max_residual),
            "quad_mismatch": _num(self.quad_mismatch),
            "verdict": self.verdict.value,
        }
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass(frozen=True)
class VerificationReport:
    identity: str
    variant: str
    variant_kind: str
    anchor: str
    status_note: str
    draws: tuple[DrawRecord, ...]
    verdict: Verdict
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "identity": self.identity,
            "variant": self.variant,
            "variant_kind": self.variant_kind,
            "anchor": self.anchor,
            "status_note": self.status_note,
            "verdict": self.verdict.value,
            "draws": [d.as_dict() for d in self.draws],
        }


def _num(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else repr(v)


# -- checks ----------------------------------------------------------------

def residual_derivative(ci: ConcreteIdentity, x: float) -> float:
    """|d/dx antiderivative - integrand| / (1 + |integrand|), derivative exact."""
    g = ci.integrand(x)
    d = ci.derivative(x)
    return abs(d - g) / (1.0 + abs(g))


def quad_mismatch(ci: ConcreteIdentity, tol: float) -> float:
    lo, hi = ci.interval
    if lo == hi:
        return 0.0
    r = quad_adaptive(ci.integrand, lo, hi, tol=tol)
    delta = float(ci.antiderivative(hi)) - float(ci.antiderivative(lo))
    return abs(r.value - delta) / (1.0 + abs(r.value))


def sample_points(lo: float, hi: float, n: int) -> list[float]:
    if lo == hi:
        return [lo]
    return [lo + (hi - lo) * (j + 0.5) / n for j in range(n)]


def classify(value: float, tol: float, refute_factor: float) -> Verdict:
    if not math.isfinite(value):
        return Verdict.INCONCLUSIVE
    if value <= tol:
        return Verdict.CONFIRMED
    if value > refute_factor * tol:
        return Verdict.REFUTED
    return Verdict.INCONCLUSIVE


def check_concrete(ci: ConcreteIdentity, plan: SamplePlan) -> DrawRecord:
    """Residual sweep and quadrature check for one instantiated identity."""
    if plan.perturbation:
        ci = ci.perturbed(plan.perturbation)
    lo, hi = ci.interval
    try:
        res = max(residual_derivative(ci, x) for x in sample_points(lo, hi, plan.points_per_interval))
        qm = quad_mismatch(ci, tol=0.01 * plan.tol_quad)
    except ConvergenceError as exc:
        return DrawRecord(dict(ci.params), ci.interval, math.nan, math.nan, Verdict.INCONCLUSIVE, str(exc))
    except (HeunRefError, ZeroDivisionError, OverflowError, ValueError) as exc:
        return DrawRecord(dict(ci.params), ci.interval, math.nan, math.nan, Verdict.ERROR,
                          f"{type(exc).__name__}: {exc}")
    vr = classify(res, plan.tol_residual, plan.refute_factor)
    vq = classify(qm, plan.tol_quad, plan.refute_factor)
    if vr is Verdict.CONFIRMED and vq is Verdict.CONFIRMED:
        v = Verdict.CONFIRMED
    elif Verdict.REFUTED in (vr, vq):
        v = Verdict.REFUTED
    else:
        v = Verdict.INCONCLUSIVE
    return DrawRecord(dict(ci.params), ci.interval, res, qm, v)


def aggregate(draws: Sequence[DrawRecord]) -> Verdict:
    if not draws:
        raise EmptyPlanError("no draws to aggregate")
    n = len(draws)
    refuted = sum(d.verdict is Verdict.REFUTED for d in draws)
    if refuted >= REFUTE_QUORUM * n:
        return Verdict.REFUTED
    if all(d.verdict is Verdict.CONFIRMED for d in draws):
        return Verdict.CONFIRMED
    return Verdict.INCONCLUSIVE


# -- sampling --------------------------------------------------------------

def draw_rng(seed: int, identity_id: str, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(identity_id.encode()), index])


def _draw_free(ident: Identity, plan: SamplePlan, rng: np.random.Generator) -> dict:
    out = {}
    for f in ident.free:
        if f.name in plan.param_ranges and f.choices is None:
            lo, hi = plan.param_ranges[f.name]
            f = cat.Free(f.name, lo, hi, f.default, integer=f.integer)
        out[f.name] = f.draw(rng)
    return out


def draw_params(ident: Identity, plan: SamplePlan, index: int) -> dict | None:
    """Parameters for draw ``index``; None when every redraw is excluded."""
    rng = draw_rng(plan.rng_seed, ident.id, index)
    for _ in range(MAX_REDRAWS):
        raw = _draw_free(ident, plan, rng)
        try:
            d = cat.resolve_params(ident, raw)
        except HeunRefError:
            continue
        if ident.exclude(d) is not None:
            continue
        return d
    return None


def plan_draws(ident: Identity, plan: SamplePlan) -> list[dict]:
    draws = [draw_params(ident, plan, i) for i in range(plan.n_param_draws)]
    draws = [d for d in draws if d is not None]
    if not draws:
        raise EmptyPlanError(f"{ident.id}: every parameter draw was excluded")
    return draws


def _run_draw(identity_id: str, variant: str, params: dict, plan: SamplePlan) -> DrawRecord:
    try:
        ci = cat.instantiate(identity_id, params, variant)
    except (HeunRefError, ValueError) as exc:
        return DrawRecord(dict(params), (math.nan, math.nan), math.nan, math.nan, Verdict.ERROR,
                          f"{type(exc).__name__}: {exc}")
    return check_concrete(ci, plan)


def _run_batch(jobs: list[tuple[str, str, dict, SamplePlan]]) -> list[DrawRecord]:
    return [_run_draw(*j) for j in jobs]


def worker_count(plan: SamplePlan) -> int:
    if plan.workers is not None:
        n = plan.workers
    else:
        n = os.cpu_count() or 1
        env = os.environ.get("HEUNREF_THREADS")
        if env:
            try:
                n = min(n, int(env))
            except ValueError as exc:
                raise ConfigError(f"HEUNREF_THREADS must be an integer, got {env!r}") from exc
    return max(1, n)


def _execute(jobs: list[tuple[str, str, dict, SamplePlan]], workers: int) -> list[DrawRecord]:
    if workers <= 1 or len(jobs) <= 1:
        return _run_batch(jobs)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_draw, *j) for j in jobs]
        return [f.result() for f in futures]


def _report(ident: Identity, variant: str, draws: list[DrawRecord], wall: float) -> VerificationReport:
    v = ident.variant(variant)
    return VerificationReport(
        identity=ident.id,
        variant=variant,
        variant_kind=v.kind.value,
        anchor=ident.anchor,
        status_note=ident.status.value,
        draws=tuple(draws),
        verdict=aggregate(draws),
        wall_time=wall,
    )


def verify(
    target: str | Identity | ConcreteIdentity,
    plan: SamplePlan | None = None,
    variant: str = "printed",
) -> VerificationReport:
    """Verify one variant of an identity.

    A ``ConcreteIdentity`` is checked as a single draw at its own
    parameters; an id or ``Identity`` is sampled according to ``plan``.
    """
    plan = plan or SamplePlan()
    t0 = time.perf_counter()
    if isinstance(target, ConcreteIdentity):
        ident = cat.get(target.id)
        rec = check_concrete(target, plan)
        return _report(ident, target.variant, [rec], time.perf_counter() - t0)
    ident = target if isinstance(target, Identity) else cat.get(target)
    ident.variant(variant)
    jobs = [(ident.id, variant, d, plan) for d in plan_draws(ident, plan)]
    recs = _execute(jobs, worker_count(plan))
    return _report(ident, variant, recs, time.perf_counter() - t0)


def verify_many(identities: Iterable[Identity], plan: SamplePlan) -> list[VerificationReport]:
    """All variants of every identity, draws shared across variants of one entry."""
    identities = list(identities)
    t0 = time.perf_counter()
    layout: list[tuple[Identity, str, int, int]] = []
    jobs: list[tuple[str, str, dict, SamplePlan]] = []
    for ident in identities:
        params = plan_draws(ident, plan)
        for v in ident.variants:
            start = len(jobs)
            jobs.extend((ident.id, v.name, d, plan) for d in params)
            layout.append((ident, v.name, start, len(jobs)))
    recs = _execute(jobs, worker_count(plan))
    wall = time.perf_counter() - t0
    return [_report(ident, name, recs[a:b], wall) for ident, name, a, b in layout]


# -- summaries and serialisation ----------------------------------------

@dataclass(frozen=True)
class Resolution:
    identity: str
    printed: Verdict
    confirmed_variants: tuple[str, ...]

    @property
    def resolved(self) -> bool:
        return self.printed is Verdict.CONFIRMED or bool(self.confirmed_variants)

    def as_dict(self) -> dict:
        return {
            "identity": self.identity,
            "printed_verdict": self.printed.value,
            "confirmed_variants": list(self.confirmed_variants),
            "resolved": self.resolved,
        }


def summarize(reports: Sequence[VerificationReport]) -> list[Resolution]:
    out: dict[str, Resolution] = {}
    for r in reports:
        cur = out.get(r.identity, Resolution(r.identity, Verdict.INCONCLUSIVE, ()))
        if r.variant == "printed":
            cur = replace(cur, printed=r.verdict)
        elif r.verdict is Verdict.CONFIRMED:
            cur = replace(cur, confirmed_variants=cur.confirmed_variants + (r.variant,))
        out[r.identity] = cur
    return list(out.values())


def exit_code(reports: Sequence[VerificationReport]) -> int:
    verdicts = {r.verdict for r in reports}
    if Verdict.REFUTED in verdicts:
        return 1
    if verdicts == {Verdict.CONFIRMED}:
        return 0
    return 3


def to_json(reports: Sequence[VerificationReport], plan: SamplePlan, wall_time: float | None = None) -> str:
    body = {
        "header": {
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "wall_time_s": round(wall_time if wall_time is not None else max((r.wall_time for r in reports), default=0.0), 3),
        },
        "plan": plan.as_dict(),
        "reports": [r.as_dict() for r in reports],
        "summary": [s.as_dict() for s in summarize(reports)],
    }
    return json.dumps(body, indent=2, sort_keys=False)


CSV_FIELDS = ("identity", "variant", "draw", "params", "lo", "hi", "max_residual", "quad_mismatch", "verdict", "error")


def to_csv(reports: Sequence[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in reports:
        for i, d in enumerate(r.draws):
            w.writerow([
                r.identity, r.variant, i,
                json.dumps({k: _num(v) for k, v in sorted(d.params.items())}),
                repr(float(d.interval[0])), repr(float(d.interval[1])),
                repr(float(d.max_residual)), repr(float(d.quad_mismatch)),
                d.verdict.value, d.error or "",
            ])
    return buf.getvalue()


def strip_header(json_text: str) -> dict:
    """Report body with the run-specific header removed."""
    d = json.loads(json_text)
    d.pop("header", None)
    return d


REPORT_SCHEMA = {
    "type": "object",
    "required": ["header", "plan", "reports"],
    "properties": {
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["identity", "anchor", "verdict", "draws"],
                "properties": {
                    "identity": {"type": "string"},
                    "anchor": {"type": "string"},
                    "verdict": {"enum": [v.value for v in Verdict]},
                    "draws": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["params", "interval", "max_residual", "quad_mismatch", "verdict"],
                        },
                    },
                },
            },
        }
    },
}
