import json
from fractions import Fraction as F

import pytest

from oracles import grid_simulate
from regionsched.adversaries import gen_alpha_beta_lb, gen_grid_instance, gen_random_slack
from regionsched.core import AlgoParams, Instance, Model, default_params, make_job
from regionsched.scheduler import RegionScheduler, Trace, run, spt_pick, verify_commitments
from regionsched.timeline import M

NONE_EPS1 = default_params(Model.NO_COMMITMENT, 1)
ALPHA_BETA_PARAMS = AlgoParams(F(1), F(1, 8), F(1, 4), Model.NO_COMMITMENT)


def alpha_beta_case():
    return gen_alpha_beta_lb(F(1, 2), 1, F(1, 8), F(1, 100))


def test_single_job():
    inst = Instance.build([make_job(0, 0, 1, 2)], 1)
    tr = run(inst, NONE_EPS1)
    assert tr.admissions == {0: (0, M)}
    assert [(s.start, s.end) for s in tr.timeline] == [(0, 1)]
    assert tr.completions == {0: 1}
    assert tr.on_time == [0]


def test_nested_admission():
    inst = Instance.build([make_job(0, 0, 1, "5/2"), make_job(1, "1/2", "1/10", "4/5")], 1)
    tr = run(inst, NONE_EPS1)
    assert set(tr.admissions) == {0, 1}
    assert [(e.job, e.start, e.end) for e in tr.execution] == [
        (0, 0, F(1, 2)),
        (1, F(1, 2), F(3, 5)),
        (0, F(3, 5), F(11, 10)),
    ]
    assert tr.completions == {0: F(11, 10), 1: F(3, 5)}
    assert tr.on_time == [0, 1]
    assert tr.tree.parent == {0: M, 1: 0}
    g = grid_simulate(inst, NONE_EPS1)
    assert g["completions"] == tr.completions


def test_alpha_beta_case_instance_admits_only_the_long_job():
    tr = run(alpha_beta_case(), ALPHA_BETA_PARAMS)
    assert set(tr.admissions) == {0}
    assert tr.on_time == [0]
    assert tr.tree.children[M] == [0] and tr.tree.children[0] == []


def test_spt_pick():
    assert spt_pick({0: F(1), 1: F(1, 10)}, {0: F(0), 1: F(1, 2)}) == 1
    assert spt_pick({}, {}) is None
    assert spt_pick({0: F(1), 2: F(1)}, {0: F(0), 2: F(2)}) == 0
    assert spt_pick({5: F(1), 2: F(1)}, {5: F(0), 2: F(0)}) == 2


def test_counterfactual_single_job():
    sched = RegionScheduler(NONE_EPS1)
    sched.add_job(make_job(0, 0, 1, 2))
    sched.advance_to(F(0))
    assert sched.counterfactual() == {0: 1}
    assert sched.completions == {}


def test_counterfactual_before_small_jobs():
    sched = RegionScheduler(ALPHA_BETA_PARAMS)
    for job in alpha_beta_case().jobs:
        sched.add_job(job)
    sched.advance_to(F(0))
    before = json.dumps(sched.events)
    report = sched.counterfactual()
    assert report == {0: 1}
    assert json.dumps(sched.events) == before
    sched.run_to_quiescence()
    assert sched.completions == {0: 1}


def test_counterfactual_equals_real_run_without_future_releases():
    inst = gen_random_slack(12, F(1, 2), seed=3)
    params = default_params(Model.NO_COMMITMENT, F(1, 2))
    sched = RegionScheduler(params)
    for job in inst.jobs:
        sched.add_job(job)
    sched.advance_to(max(j.r for j in inst.jobs))
    assert sched.counterfactual() == run(inst, params).completions


def test_add_job_rejects_past_release():
    sched = RegionScheduler(NONE_EPS1)
    sched.add_job(make_job(0, 1, 1, 3))
    sched.advance_to(F(1))
    with pytest.raises(ValueError):
        sched.add_job(make_job(1, 1, 1, 3))


def test_verify_commitments_alpha_beta_case_commit_defaults():
    tr = run(alpha_beta_case(), default_params(Model.COMMIT_ON_ADMISSION, F(1, 2)))
    assert verify_commitments(tr) == []


def test_verify_commitments_flags_bad_parameters():
    inst = Instance.build([make_job(0, 0, 1, "3/2"), make_job(1, "1/10", "4/5", "13/10")], 1)
    params = AlgoParams(F(1), F(9, 10), F(1, 2), Model.COMMIT_ON_ADMISSION)
    tr = run(inst, params)
    assert tr.completions == {1: F(9, 10), 0: F(9, 5)}
    assert verify_commitments(tr) == [0]
    assert tr.summary()["commitments_broken"] == 1
    assert grid_simulate(inst, params)["completions"] == tr.completions


def test_verify_commitments_empty_instance():
    tr = run(Instance.build([], 1), default_params(Model.COMMIT_ON_ADMISSION, 1))
    assert verify_commitments(tr) == []


class RecheckingScheduler(RegionScheduler):
    """Re-runs the admission routine right after every admission."""

    def _preempt_routine(self, t):
        admitted = super()._preempt_routine(t)
        if admitted:
            assert not super()._preempt_routine(t)
        return admitted


@pytest.mark.parametrize("model", list(Model))
def test_single_routine_call_per_event_is_exhaustive(model):
    params = default_params(model, F(1, 2), F(1, 4) if model is Model.DELTA_COMMITMENT else None)
    for seed in range(40):
        inst = gen_random_slack(25, F(1, 2), seed=seed)
        sched = RecheckingScheduler(params)
        for job in inst.jobs:
            sched.add_job(job)
        sched.run_to_quiescence()
        assert sched.completions == run(inst, params).completions


def test_alpha_one_jobs_finish_at_region_end():
    params = default_params(Model.NO_COMMITMENT, F(1, 2))
    for seed in range(30):
        tr = run(gen_random_slack(30, F(1, 2), seed=seed), params)
        ends = {}
        for s in tr.timeline:
            ends[s.owner] = s.end
        assert tr.completions == ends


def test_trace_is_deterministic_and_roundtrips():
    inst = gen_random_slack(20, F(1, 3), seed=11)
    params = default_params(Model.DELTA_COMMITMENT, F(1, 3), F(1, 6))
    a = json.dumps(run(inst, params).to_json())
    b = json.dumps(run(inst, params).to_json())
    assert a == b
    again = Trace.from_json(json.loads(a))
    assert json.dumps(again.to_json()) == a


@pytest.mark.parametrize("seed", range(10))
def test_engine_matches_grid_simulation(seed):
    inst = gen_grid_instance(10, 1, seed)
    params = default_params(Model.NO_COMMITMENT, 1)
    tr = run(inst, params)
    g = grid_simulate(inst, params)
    assert {j: a for j, (a, _) in tr.admissions.items()} == g["admitted"]
    assert {j: (M if p is M else p) for j, (_, p) in tr.admissions.items()} == {
        j: (M if p is None else p) for j, p in g["parent"].items()
    }
    assert tr.completions == g["completions"]
