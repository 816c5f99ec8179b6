import csv
import dataclasses
import io
import json
import math
from types import SimpleNamespace

import jsonschema
import pytest

from heunref import catalog as cat
from heunref import verifier as ver
from heunref.catalog import ConcreteIdentity
from heunref.errors import ConfigError, EmptyPlanError
from heunref.verifier import DrawRecord, SamplePlan, Verdict

SMALL = SamplePlan(n_param_draws=3, points_per_interval=15)


def _rec(v: Verdict) -> DrawRecord:
    return DrawRecord({}, (0.0, 1.0), 0.0, 0.0, v)


def _zero_identity(interval=(0.2, 0.7)) -> ConcreteIdentity:
    return ConcreteIdentity("ID-F12", "printed", {}, interval, SimpleNamespace(),
                            lambda ns, x: 0.0, lambda ns, x: 0.0 * x)


def test_f12_residual_is_tight():
    ci = cat.instantiate("ID-F12")
    lo, hi = ci.interval
    for x in ver.sample_points(lo, hi, 20):
        assert ver.residual_derivative(ci, x) <= 1e-10


def test_perturbed_residual_exposes_fault():
    ci = cat.instantiate("ID-F12")
    x = 0.4
    r = ver.residual_derivative(ci.perturbed(0.01), x)
    assert r == pytest.approx(0.01 / (1 + abs(ci.integrand(x))), rel=1e-6)
    assert ver.classify(r, 1e-8, 1e3) is Verdict.REFUTED


def test_zero_integrand_zero_antiderivative():
    ci = _zero_identity()
    assert ver.residual_derivative(ci, 0.3) == 0.0
    assert ver.quad_mismatch(ci, 1e-10) == 0.0


def test_degenerate_interval_still_checks_residual():
    ci = _zero_identity((0.5, 0.5))
    assert ver.quad_mismatch(ci, 1e-10) == 0.0
    rec = ver.check_concrete(ci.perturbed(1e-3), SMALL)
    assert rec.quad_mismatch == 0.0
    assert rec.verdict is Verdict.REFUTED


def test_sample_points_are_interior():
    pts = ver.sample_points(0.0, 1.0, 4)
    assert pts == [0.125, 0.375, 0.625, 0.875]


@pytest.mark.parametrize(
    "value,verdict",
    [(1e-9, Verdict.CONFIRMED), (1e-8, Verdict.CONFIRMED), (5e-7, Verdict.INCONCLUSIVE),
     (2e-5, Verdict.REFUTED), (math.nan, Verdict.INCONCLUSIVE)],
)
def test_classify(value, verdict):
    assert ver.classify(value, 1e-8, 1e3) is verdict


def test_aggregate_rules():
    C, R, I, E = Verdict.CONFIRMED, Verdict.REFUTED, Verdict.INCONCLUSIVE, Verdict.ERROR
    assert ver.aggregate([_rec(C)] * 5) is C
    assert ver.aggregate([_rec(R)] * 4 + [_rec(C)]) is R
    assert ver.aggregate([_rec(R)] * 3 + [_rec(C)] * 2) is I
    assert ver.aggregate([_rec(C)] * 4 + [_rec(I)]) is I
    assert ver.aggregate([_rec(E)] * 5) is I
    with pytest.raises(EmptyPlanError):
        ver.aggregate([])


@pytest.mark.parametrize(
    "kwargs",
    [{"n_param_draws": 0}, {"tol_residual": 0.0}, {"tol_quad": -1.0}, {"refute_factor": 1.0},
     {"points_per_interval": 0}, {"param_ranges": {"alpha": (2.0, 1.0)}}],
)
def test_plan_validation(kwargs):
    with pytest.raises(ConfigError):
        SamplePlan(**kwargs)


def test_empty_plan_when_everything_is_excluded():
    ident = dataclasses.replace(cat.get("ID-F12"), exclude=lambda d: "always")
    with pytest.raises(EmptyPlanError):
        ver.plan_draws(ident, SMALL)


def test_param_ranges_override_draws():
    plan = SamplePlan(n_param_draws=5, param_ranges={"alpha": (1.0, 1.1)})
    for d in ver.plan_draws(cat.get("ID-F12"), plan):
        assert 1.0 <= d["alpha"] <= 1.1


def test_draws_depend_only_on_seed_id_and_index():
    ident = cat.get("ID-F12")
    a = ver.draw_params(ident, SamplePlan(rng_seed=5), 3)
    b = ver.draw_params(ident, SamplePlan(rng_seed=5, n_param_draws=40), 3)
    c = ver.draw_params(ident, SamplePlan(rng_seed=6), 3)
    assert a == b and a != c


def test_verify_known_formula():
    rep = ver.verify("ID-PRUDF", SMALL)
    assert rep.verdict is Verdict.CONFIRMED
    assert rep.identity == "ID-PRUDF" and len(rep.draws) == 3


def test_verify_concrete_identity_single_draw():
    rep = ver.verify(cat.instantiate("ID-F12"), SMALL)
    assert len(rep.draws) == 1 and rep.verdict is Verdict.CONFIRMED


def test_auf1_readings_are_exclusive():
    reps = [ver.verify("ID-AUF1", SMALL, v.name) for v in cat.get("ID-AUF1").variants]
    assert sum(r.verdict is Verdict.CONFIRMED for r in reps) <= 1


def test_determinism_and_workers():
    plan = SamplePlan(n_param_draws=2, points_per_interval=10, workers=1)
    idents = cat.select(["ID-F12", "ID-AUF1"])
    one = ver.verify_many(idents, plan)
    again = ver.verify_many(idents, plan)
    two = ver.verify_many(idents, dataclasses.replace(plan, workers=2))
    body = lambda reps: ver.strip_header(ver.to_json(reps, plan))
    assert body(one) == body(again) == body(two)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("HEUNREF_THREADS", "1")
    assert ver.worker_count(SamplePlan()) == 1
    monkeypatch.setenv("HEUNREF_THREADS", "many")
    with pytest.raises(ConfigError):
        ver.worker_count(SamplePlan())
    assert ver.worker_count(SamplePlan(workers=3)) == 3


def test_summary_and_exit_codes():
    reps = ver.verify_many(cat.select(["ID-AUF1"]), SMALL)
    (res,) = ver.summarize(reps)
    assert res.printed is Verdict.REFUTED
    assert res.confirmed_variants == ("reading-2-plus-tau",)
    assert res.resolved
    assert ver.exit_code(reps) == 1
    assert ver.exit_code([r for r in reps if r.verdict is Verdict.CONFIRMED]) == 0


def test_json_report_matches_schema():
    reps = ver.verify_many(cat.select(["ID-F12", "ID-HEUNHH-DEGEN"]), SMALL)
    text = ver.to_json(reps, SMALL, 1.0)
    doc = json.loads(text)
    jsonschema.validate(doc, ver.REPORT_SCHEMA)
    assert set(doc["header"]) == {"timestamp", "wall_time_s"}
    errors = [d for r in doc["reports"] for d in r["draws"] if d["verdict"] == "ERROR"]
    assert errors and all("error" in d for d in errors)


def test_csv_has_one_row_per_draw():
    reps = ver.verify_many(cat.select(["ID-F12"]), SMALL)
    rows = list(csv.DictReader(io.StringIO(ver.to_csv(reps))))
    assert len(rows) == 3
    assert tuple(rows[0]) == ver.CSV_FIELDS
    assert json.loads(rows[0]["params"])["a"] in (2, 3, 4, 5)
