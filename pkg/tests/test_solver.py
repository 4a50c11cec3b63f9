import numpy as np
import pytest

from dmmjump.dynamics import ClauseTopology, DmmParams, initial_memory, euler_step, DmmState
from dmmjump.generators import gen_xorsat
from dmmjump.sat import Cnf, eval_cnf
from dmmjump.solver import (INIT_ALL_ONES, SolveConfig, TrajectorySpec, init_state, parallel_map,
                            solve)


def test_init_modes():
    cnf, _ = gen_xorsat(20, 0)
    s = init_state(cnf, SolveConfig(init=INIT_ALL_ONES))
    assert np.all(s.v == 1) and np.all(s.xs == 0.1) and np.all(s.xl == 1) and s.t == 0
    a = init_state(cnf, SolveConfig(seed=7))
    b = init_state(cnf, SolveConfig(seed=7))
    assert np.array_equal(a.v, b.v) and np.all(np.abs(a.v) <= 1)
    assert not np.array_equal(a.v, init_state(cnf, SolveConfig(seed=8)).v)


def test_explicit_init_validation():
    cnf = Cnf(3, [[1, 2, 3]])
    assert init_state(cnf, SolveConfig(init=[0.1, -0.2, 0.3])).v.tolist() == [0.1, -0.2, 0.3]
    with pytest.raises(ValueError):
        init_state(cnf, SolveConfig(init=[0.1, 0.2]))
    with pytest.raises(ValueError):
        SolveConfig(init=[0.1, 2.0, 0.0])
    with pytest.raises(ValueError):
        SolveConfig(check_every=0)


def test_already_satisfied_solves_at_step_zero():
    res, _ = solve(Cnf(3, [[1, 2, 3]]), SolveConfig(init=INIT_ALL_ONES))
    assert res.solved and res.steps == 0 and res.tts == 0.0
    assert res.assignment == (True, True, True)


def test_solve_small_xorsat_and_determinism():
    cnf, _ = gen_xorsat(20, 4)
    cfg = SolveConfig(seed=11)
    r1, _ = solve(cnf, cfg)
    r2, _ = solve(cnf, cfg)
    assert r1 == r2
    assert r1.solved and eval_cnf(cnf, r1.assignment)[0]
    assert r1.tts == pytest.approx(r1.steps * 0.01)
    d = r1.to_dict()
    assert d["instance_digest"] == cnf.digest() and len(d["assignment"]) == 20


def test_solve_matches_reference_stepper():
    cnf, _ = gen_xorsat(16, 2)
    cfg = SolveConfig(seed=3)
    res, _ = solve(cnf, cfg)
    topo = ClauseTopology.from_cnf(cnf)
    s = init_state(cnf, cfg)
    steps = 0
    while not eval_cnf(cnf, tuple((s.v >= 0).tolist()))[0]:
        s = euler_step(s, topo, cfg.params)
        steps += 1
    assert steps == res.steps


def test_timeout_is_a_result():
    cnf, _ = gen_xorsat(40, 1)
    res, _ = solve(cnf, SolveConfig(DmmParams(max_steps=50), seed=1))
    assert not res.solved and res.steps == 50 and res.assignment is None


def test_check_every_coarsens_detection():
    cnf, _ = gen_xorsat(20, 4)
    fine, _ = solve(cnf, SolveConfig(seed=11))
    coarse, _ = solve(cnf, SolveConfig(seed=11, check_every=7))
    assert coarse.steps % 7 == 0 and coarse.steps >= fine.steps


def test_trajectory_sampling():
    cnf, _ = gen_xorsat(20, 4)
    cfg = SolveConfig(seed=11, trajectory=TrajectorySpec(stride=10, variables=(1, 5)))
    res, traj = solve(cnf, cfg)
    assert len(traj.times) == res.steps // 10 + 1
    assert traj.v_samples.shape == (len(traj.times), 2)
    assert np.all(np.abs(traj.v_samples) <= 1)
    assert traj.to_csv().splitlines()[0] == "t,v1,v5"
    plain, _ = solve(cnf, SolveConfig(seed=11))
    assert plain == res


def _square(x):
    return x * x


def test_parallel_map_order():
    assert parallel_map(_square, range(20), workers=3) == [x * x for x in range(20)]
    assert parallel_map(_square, range(5), workers=1) == [0, 1, 4, 9, 16]


def test_init_stream_independent_of_generator_stream():
    hits = 0
    for seed in range(200):
        cnf, planted = gen_xorsat(20, seed)
        v = init_state(cnf, SolveConfig(seed=seed)).v
        hits += tuple((v >= 0).tolist()) == planted
    assert hits == 0
