from math import comb

import pytest
from pydantic import ValidationError

from grassgeo.core.config import settings
from grassgeo.core.errors import DegeneratePoint, UsageError
from grassgeo.schemas.schemas import GramInput, SuiteConfig
from grassgeo.services import suites
from grassgeo.services.suites import CHECKS, SUITES, Check


COMMAND = ["grassgeo", "verify"]


def _config(suite: str, **kwargs) -> SuiteConfig:
    options = {"trials": 2, "max_n": 5, "max_k": 3, "seed": 11}
    options.update(kwargs)
    return SuiteConfig(suite=suite, **options)


def _without_timing(report):
    return report.model_dump(exclude={"elapsed_seconds"})


# ============== Registry ==============

def test_every_suite_has_checks():
    assert {c.suite for c in CHECKS.values()} == set(SUITES)
    assert all(name == c.name for name, c in CHECKS.items())
    assert all(c.tolerance >= 0 and c.anchor for c in CHECKS.values())


def test_checks_for_suite():
    names = [c.name for c in suites.checks_for("einstein")]
    assert names == ["einstein", "ricci_symmetry"]
    assert len(suites.checks_for("all")) == len(CHECKS)


def test_unknown_suite_is_a_usage_error():
    with pytest.raises(UsageError, match="unknown suite 'nope'"):
        suites.checks_for("nope")


# ============== Configuration ==============

def test_tolerance_overrides():
    config = SuiteConfig(suite="einstein", tol={"einstein": 1.0, "*": 2.0})
    assert config.tolerance("einstein", 1e-9) == 1.0
    assert config.tolerance("ricci_symmetry", 1e-9) == 2.0
    assert SuiteConfig(suite="einstein").tolerance("einstein", 1e-9) == 1e-9


def test_config_rejects_bad_dimensions():
    with pytest.raises(ValidationError):
        SuiteConfig(suite="all", max_n=4, max_k=4)
    with pytest.raises(ValidationError):
        SuiteConfig(suite="all", max_n=settings.MAX_N + 1)
    with pytest.raises(ValidationError):
        SuiteConfig(suite="all", trials=0)


def test_field_selection():
    assert [f.value for f in SuiteConfig(suite="all").fields()] == ["R", "C"]
    assert [f.value for f in SuiteConfig(suite="all", field="C").fields()] == ["C"]


# ============== Suites ==============

@pytest.mark.parametrize("suite", ["embedding", "connection", "curvature", "einstein", "minimality"])
def test_geometry_suites_pass(suite):
    report = suites.run_suite(_config(suite), COMMAND)
    failing = [(r.name, r.residual, r.error) for r in report.records if not r.passed]
    assert failing == []
    assert report.passed
    assert report.total == 2 * len(suites.checks_for(suite))


@pytest.mark.slow
def test_geodesic_suite_passes():
    report = suites.run_suite(_config("geodesic", max_n=6, max_k=2, trials=3), COMMAND)
    assert [(r.name, r.residual) for r in report.records if not r.passed] == []


def test_isometry_factor_is_recorded():
    report = suites.run_suite(SuiteConfig(suite="embedding", trials=4, seed=3), COMMAND)
    records = [r for r in report.records if r.name == "isometry_factor"]
    assert len(records) == 4
    for r in records:
        assert r.params["factor"] == comb(int(r.params["k"]) - 1, int(r.params["m"]) - 1)


def test_fields_alternate_over_trials():
    report = suites.run_suite(_config("einstein", trials=4, keep_instances=True), COMMAND)
    fields = [r.instance.field for r in report.records if r.name == "einstein"]
    assert fields == ["R", "C", "R", "C"]


def test_records_keep_instances_only_on_request():
    report = suites.run_suite(_config("einstein"), COMMAND)
    assert all(r.instance is None for r in report.records)
    kept = suites.run_suite(_config("einstein", keep_instances=True), COMMAND)
    assert all(r.instance is not None for r in kept.records)


def test_runs_are_deterministic():
    first = suites.run_suite(_config("curvature"), COMMAND)
    second = suites.run_suite(_config("curvature"), COMMAND)
    assert _without_timing(first) == _without_timing(second)


def test_workers_do_not_change_records():
    serial = suites.run_suite(_config("einstein", trials=3), COMMAND)
    threaded = suites.run_suite(_config("einstein", trials=3, workers=2), COMMAND)
    assert serial.records == threaded.records


def test_seed_changes_instances():
    first = suites.run_suite(_config("einstein", seed=1), COMMAND)
    second = suites.run_suite(_config("einstein", seed=2), COMMAND)
    assert [r.seed for r in first.records] != [r.seed for r in second.records]


def test_raising_check_becomes_error_record(monkeypatch):
    def explode(instance):
        raise DegeneratePoint("boom")

    broken = Check("broken", "einstein", "always raises", 1e-9, CHECKS["einstein"].make_instance, explode)
    monkeypatch.setitem(CHECKS, "broken", broken)

    report = suites.run_suite(_config("einstein", trials=1), COMMAND)
    (record,) = [r for r in report.records if r.name == "broken"]
    assert record.error == "DegeneratePoint: boom"
    assert record.residual is None
    assert record.instance is not None
    assert not report.passed
    assert report.failures == 1


def test_tolerance_override_can_fail_a_check():
    report = suites.run_suite(_config("curvature", tol={"curvature_bianchi": 0.0}, trials=1), COMMAND)
    record = next(r for r in report.records if r.name == "curvature_bianchi")
    assert record.tolerance == 0.0
    assert record.passed == (record.residual == 0.0)
    if not record.passed:
        assert record.instance is not None


@pytest.mark.slow
def test_brackets_suite():
    report = suites.run_suite(_config("brackets", trials=3, oracle_samples=100_000), COMMAND)
    assert all(r.error is None for r in report.records)
    deterministic = {"bracket_plucker", "criterion_vs_slice", "boundary_consistency", "scale_invariance",
                     "cyclic_relabeling"}
    assert [r.name for r in report.records if r.name in deterministic and not r.passed] == []
    oracle = [r for r in report.records if r.name == "criterion_vs_oracle"]
    assert all(r.tolerance == 0.0 for r in oracle)
    assert all(r.params["samples"] == 100_000 for r in oracle)
    assert [(r.trial, r.params["disagreements"]) for r in oracle if not r.passed] == []


def test_oracle_samples_reach_the_instances():
    report = suites.run_suite(_config("brackets", trials=1, oracle_samples=500), COMMAND)
    oracle = next(r for r in report.records if r.name == "criterion_vs_oracle")
    assert oracle.params["samples"] == 500
    assert {"compared", "disagreements", "inconclusive"} <= set(oracle.params)


def test_disagreement_fixture_is_a_gram_input():
    report = suites.run_suite(_config("brackets", trials=1, oracle_samples=500, keep_instances=True), COMMAND)
    record = next(r for r in report.records if r.name == "criterion_vs_oracle")
    fixture = suites.disagreement_fixture(record.model_copy(update={"passed": False}))
    U = GramInput.model_validate(fixture).to_polyhedron()
    assert U.n == record.params["n"]
    assert fixture["seed"] == record.seed
    assert fixture["check"] == "criterion_vs_oracle"
    assert fixture["disagreements"] == int(record.params["disagreements"])


def test_disagreement_fixture_needs_an_instance():
    report = suites.run_suite(_config("brackets", trials=1, oracle_samples=500, keep_instances=True), COMMAND)
    record = next(r for r in report.records if r.name == "criterion_vs_oracle")
    with pytest.raises(UsageError, match="carries no instance"):
        suites.disagreement_fixture(record.model_copy(update={"instance": None}))


# ============== Replay ==============

@pytest.mark.parametrize("suite", ["embedding", "einstein", "geodesic"])
def test_replay_reproduces_residuals(suite):
    report = suites.run_suite(_config(suite, trials=1, keep_instances=True, max_k=2), COMMAND)
    for record in report.records:
        result = suites.replay_record(record)
        assert result.reproduced, record.name
        assert result.passed == record.passed


def test_replay_needs_an_instance():
    report = suites.run_suite(_config("einstein", trials=1), COMMAND)
    with pytest.raises(UsageError, match="carries no instance"):
        suites.replay_record(report.records[0])


def test_replay_rejects_unknown_check():
    report = suites.run_suite(_config("einstein", trials=1, keep_instances=True), COMMAND)
    record = report.records[0].model_copy(update={"name": "missing"})
    with pytest.raises(UsageError, match="unknown check 'missing'"):
        suites.replay_record(record)
