import dataclasses
from fractions import Fraction as F

import pytest

from regionsched.adversaries import gen_alpha_beta_lb, gen_random_slack
from regionsched.core import AlgoParams, Instance, Model, default_params, make_job
from regionsched.harness import TraceMismatch, bench, competitive_ratio, verify_trace
from regionsched.scheduler import run
from regionsched.timeline import Segment

MODELS = [
    default_params(Model.NO_COMMITMENT, F(1, 2)),
    default_params(Model.COMMIT_ON_ADMISSION, F(1, 2)),
    default_params(Model.DELTA_COMMITMENT, F(1, 2), F(1, 8)),
]


@pytest.mark.parametrize("params", MODELS, ids=lambda p: p.model.value)
def test_engine_traces_are_clean(params):
    for seed in range(25):
        inst = gen_random_slack(30, F(1, 2), seed=seed)
        assert verify_trace(run(inst, params), inst, params) == []


def _nested_trace():
    inst = Instance.build([make_job(0, 0, 1, "5/2"), make_job(1, "1/2", "1/10", "4/5")], 1)
    return inst, run(inst, default_params(Model.NO_COMMITMENT, 1))


def test_corrupted_region_end_is_caught():
    _, tr = _nested_trace()
    last = tr.timeline[-1]
    tr.timeline[-1] = Segment(last.start, last.end + F(1, 10), last.owner)
    kinds = {v.kind for v in verify_trace(tr)}
    assert "SizeConservation" in kinds


def test_fabricated_admission_is_caught():
    inst = Instance.build([make_job(0, 0, 1, "5/2"), make_job(1, "1/2", "1/2", "5/4")], 1)
    tr = run(inst, default_params(Model.NO_COMMITMENT, 1))
    assert 1 not in tr.admissions
    tr.admissions[1] = (F(1, 2), 0)
    kinds = {v.kind for v in verify_trace(tr)}
    assert "AdmissionGuard" in kinds


def test_mismatched_triple_is_rejected():
    inst, tr = _nested_trace()
    other = Instance.build([make_job(0, 0, 1, 3)], 1)
    with pytest.raises(TraceMismatch):
        verify_trace(tr, other)
    with pytest.raises(TraceMismatch):
        verify_trace(tr, inst, default_params(Model.NO_COMMITMENT, F(1, 2)))


def test_half_completion_checked_only_for_defaults():
    inst = Instance.build([make_job(0, 0, 1, "3/2"), make_job(1, "1/10", "4/5", "13/10")], 1)
    bad = AlgoParams(F(1), F(9, 10), F(1, 2), Model.COMMIT_ON_ADMISSION)
    assert "CommitmentSafety" not in {v.kind for v in verify_trace(run(inst, bad))}
    fake = dataclasses.replace(bad, alpha=F(16), beta=F(1, 8))
    tr = run(inst, bad)
    tr.params = fake
    kinds = {v.kind for v in verify_trace(tr)}
    assert "CommitmentSafety" in kinds


def test_competitive_ratio():
    single = Instance.build([make_job(0, 0, 1, 2)], 1)
    assert competitive_ratio(single, default_params(Model.NO_COMMITMENT, 1)) == (1, False)
    alpha_beta_case = gen_alpha_beta_lb(F(1, 2), 1, F(1, 8), F(1, 100))
    assert competitive_ratio(alpha_beta_case, AlgoParams(F(1), F(1, 8), F(1, 4), Model.NO_COMMITMENT)) == (9, False)
    assert competitive_ratio(Instance.build([], 1), MODELS[0]) == (1, False)


def test_competitive_ratio_flags_zero_throughput():
    # the window 5/4 is shorter than (1 + delta) * p, so the job is never available
    inst = Instance.build([make_job(0, 0, 1, "5/4")], 1)
    assert competitive_ratio(inst, default_params(Model.NO_COMMITMENT, 1)) == (1, True)


def test_bench_report():
    instances = [gen_random_slack(10, F(1, 2), seed=s) for s in range(12)]
    report = bench(instances, MODELS[0])
    agg = report.aggregate()
    assert agg["instances"] == 12
    assert agg["lambda_violations"] == 0
    assert agg["half_completion_violations"] == 0
    assert agg["invariant_violations"] == 0
    assert [r["instance"] for r in report.rows] == list(range(12))
    row = report.rows[0]
    assert row["lambda"] == "16"
    opt, on_time = F(row["opt"]), row["on_time"]
    assert F(row["ratio"]) == opt / on_time
    csv_text = report.to_csv()
    assert csv_text.splitlines()[0].startswith("instance,model,alpha")
    assert len(csv_text.splitlines()) == 13


def test_bench_is_order_independent():
    instances = [gen_random_slack(8, F(1, 2), seed=s) for s in range(6)]
    a = bench(instances, MODELS[1]).dumps()
    b = bench(list(reversed(instances)), MODELS[1]).dumps()
    assert a == b
