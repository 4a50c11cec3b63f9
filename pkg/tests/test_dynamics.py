import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dmmjump import _kernel
from dmmjump.dynamics import (ClauseTopology, DmmParams, DmmState, apply_jumps, apply_jumps_array,
                              clause_value, decode_assignment, derivatives, euler_step, gradient_term,
                              initial_memory, rigidity_term)
from dmmjump.generators import gen_barthel, gen_xorsat
from dmmjump.sat import Cnf, eval_cnf

NEVER = 2**62


def _topo(rows, n=None):
    n = n or int(np.abs(np.asarray(rows)).max())
    return ClauseTopology.from_cnf(Cnf(n, rows))


def test_params_defaults_and_validation():
    p = DmmParams()
    assert (p.alpha, p.beta, p.gamma, p.delta, p.epsilon, p.zeta, p.dt) == (5, 20, 0.25, 0.05, 0.1, 0.1, 0.01)
    for bad in (dict(dt=0), dict(v_thr=1.0), dict(v_jump=-0.1), dict(epsilon=0.5)):
        with pytest.raises(ValueError):
            DmmParams(**bad)


def test_clause_value_examples():
    t = _topo([[1, 2, 3]])
    assert clause_value(t, 0, np.ones(3)) == 0.0
    assert clause_value(t, 0, -np.ones(3)) == 1.0
    t2 = _topo([[1, -2, 3]])
    assert clause_value(t2, 0, np.array([0.5, -0.2, 0.8])) == pytest.approx(0.1, abs=1e-15)


def test_gradient_term_examples():
    t = _topo([[1, 2, 3]])
    assert gradient_term(t, 0, 0, np.array([0.0, 1.0, 1.0])) == 0.0
    assert gradient_term(t, 0, 0, np.array([0.0, -1.0, -1.0])) == 1.0
    t2 = _topo([[-1, 2, -3]])
    assert gradient_term(t2, 0, 0, np.array([0.3, 0.5, -0.2])) == pytest.approx(-0.25, abs=1e-15)


def test_rigidity_term_examples():
    t = _topo([[1, 2, 3]])
    v = np.array([0.6, -0.5, 0.1])
    assert rigidity_term(t, 0, 0, v) == pytest.approx(0.2, abs=1e-15)
    assert rigidity_term(t, 1, 0, v) == 0.0
    assert rigidity_term(t, 0, 0, np.array([1.0, 0.0, 0.0])) == 0.0


def test_derivatives_tie_example():
    t = _topo([[1, 2, 3]])
    p = DmmParams()
    xs, xl = initial_memory(1, p)
    dv, dxs, dxl = derivatives(DmmState(-np.ones(3), xs, xl), t, p)
    assert dv == pytest.approx([1.09] * 3, abs=1e-15)
    assert dxs[0] == pytest.approx(20 * 0.2 * 0.75)
    assert dxl[0] == pytest.approx(5 * 0.95)


def test_derivatives_satisfied_fixed_point():
    # every literal true, so all slacks vanish
    cnf = Cnf(4, [[1, -2, 3], [-2, 3, 4], [1, 3, 4]])
    t = ClauseTopology.from_cnf(cnf)
    v = np.array([1.0, -1.0, 1.0, 1.0])
    p = DmmParams()
    xs = np.full(cnf.num_clauses, 0.5)
    dv, dxs, dxl = derivatives(DmmState(v, xs, np.ones(cnf.num_clauses)), t, p)
    assert np.all(dv == 0)
    assert np.all(dxs < 0) and np.all(dxl == pytest.approx(-p.alpha * p.delta))


def test_zero_adjacency_variable_fixed():
    t = ClauseTopology.from_cnf(Cnf(5, [[1, 2, 3]]))
    p = DmmParams()
    xs, xl = initial_memory(1, p)
    dv, _, _ = derivatives(DmmState(np.array([-1, -1, -1, 0.3, -0.7]), xs, xl), t, p)
    assert dv[3] == 0 and dv[4] == 0


def test_euler_clamps_and_drift():
    t = _topo([[1, 2, 3]])
    p = DmmParams()
    s = DmmState(-np.ones(3), np.full(1, 0.9), np.ones(1))
    s2 = euler_step(s, t, p)
    assert s2.xs[0] == 0.9  # dxs > 0 at the upper clamp
    assert s2.steps == 1 and s2.t == pytest.approx(0.01)
    assert s2.v == pytest.approx(-1 + 0.01 * (0.9 * 1 + 1.1 * 0.1 * 1))
    v, j = apply_jumps_array(np.array([0.5]), np.array([0.5 + 0.01 * -2]), p)
    assert v[0] == pytest.approx(0.48) and not j[0]


@pytest.mark.parametrize("thr, jump, old, new, expected", [
    (0.6, 1.26, 0.61, 0.59, -0.66),
    (0.98, 2.058, 0.99, 0.97, -1.0),
    (0.0, 0.5, -0.01, 0.01, 0.5),
    (0.0, 0.5, 0.01, -0.01, -0.5),
    (0.6, 1.26, 0.7, -0.8, -0.66),  # full traversal still one downward jump
])
def test_apply_jumps_examples(thr, jump, old, new, expected):
    p = DmmParams(v_thr=thr, v_jump=jump)
    v, jumped = apply_jumps(old, new, p)
    assert jumped and v == pytest.approx(expected, abs=1e-12)
    va, ja = apply_jumps_array(np.array([old]), np.array([new]), p)
    assert ja[0] and va[0] == v


def test_apply_jumps_exit_does_not_trigger():
    p = DmmParams(v_thr=0.6, v_jump=1.26)
    assert apply_jumps(0.1, 0.7, p) == (0.7, False)
    assert apply_jumps(0.5, 0.55, p) == (0.55, False)
    assert apply_jumps(0.59, 0.4, DmmParams()) == (0.4, False)


@settings(max_examples=500, deadline=None)
@given(thr=st.floats(0.01, 0.99), mult=st.floats(2.0001, 3.0),
       old=st.floats(-1, 1), dv=st.floats(-3, 3))
def test_band_exclusion_property(thr, mult, old, dv):
    p = DmmParams(v_thr=thr, v_jump=mult * thr)
    if -thr < old < thr:
        return
    v, _ = apply_jumps(old, old + dv, p)
    assert not (-thr < v < thr)
    assert -1 <= v <= 1


def test_decode_tie_rule():
    assert decode_assignment([1.0, -1.0, 0.0]) == (True, False, True)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-1, 1).filter(lambda x: abs(x) > 1e-12), min_size=6, max_size=6))
def test_clause_value_readout_consistency(vs):
    cnf = Cnf(6, [[1, -2, 3], [-4, 5, 6], [2, -5, -6]])
    t = ClauseTopology.from_cnf(cnf)
    v = np.array(vs)
    a = decode_assignment(v)
    for m, cl in enumerate(cnf.clauses):
        c = clause_value(t, m, v)
        assert 0 <= c <= 1
        sat = any(a[lit.variable - 1] != lit.negated for lit in cl.literals)
        assert (c < 0.5) == sat


def test_rigidity_selectivity():
    rng = np.random.default_rng(1)
    cnf, _ = gen_barthel(30, 4.3, 0.08, 1)
    t = ClauseTopology.from_cnf(cnf)
    for _ in range(20):
        v = rng.uniform(-1, 1, 30)
        for m in range(cnf.num_clauses):
            nz = sum(rigidity_term(t, int(t.var[m, k]), m, v) != 0 for k in range(3))
            assert nz == 1


def _run_numpy(cnf, params, v0, steps):
    t = ClauseTopology.from_cnf(cnf)
    xs, xl = initial_memory(cnf.num_clauses, params)
    s = DmmState(v0.copy(), xs, xl)
    for _ in range(steps):
        s = euler_step(s, t, params)
    return s


def _run_kernel(cnf, params, v0, steps, fn=_kernel.integrate):
    t = ClauseTopology.from_cnf(cnf)
    v = v0.copy()
    xs, xl = initial_memory(cnf.num_clauses, params)
    counters = np.zeros(2, dtype=np.int64)
    fn(t.var, t.q, v, xs, xl, np.zeros(cnf.num_vars), np.zeros(cnf.num_clauses), counters,
       _kernel.pack_params(params, cnf.num_clauses), NEVER, NEVER, steps)
    return v, xs, xl, counters


@pytest.mark.parametrize("thr, jump", [(0.0, 0.0), (0.6, 1.26), (0.2, 0.42)])
def test_kernel_matches_numpy_reference(thr, jump):
    cnf, _ = gen_xorsat(24, 5)
    p = DmmParams(v_thr=thr, v_jump=jump)
    v0 = np.random.default_rng(2).uniform(-1, 1, 24)
    ref = _run_numpy(cnf, p, v0, 400)
    v, xs, xl, counters = _run_kernel(cnf, p, v0, 400)
    assert np.array_equal(v, ref.v) and np.array_equal(xs, ref.xs) and np.array_equal(xl, ref.xl)
    assert counters[0] == 400 and counters[1] == ref.jumps


def test_jump_disabled_matches_compiled_out_kernel():
    for seed in range(3):
        cnf, _ = gen_barthel(50, 4.3, 0.08, seed)
        v0 = np.random.default_rng(seed).uniform(-1, 1, 50)
        a = _run_kernel(cnf, DmmParams(v_thr=0.5), v0, 2000)
        b = _run_kernel(cnf, DmmParams(v_thr=0.5), v0, 2000, _kernel.integrate_nojump)
        for x, y in zip(a, b):
            assert np.array_equal(x, y)


def test_kernel_reports_solution_at_satisfied_state():
    cnf, planted = gen_xorsat(10, 1)
    v = np.where(planted, 0.9, -0.9)
    t = ClauseTopology.from_cnf(cnf)
    xs, xl = initial_memory(cnf.num_clauses, DmmParams())
    counters = np.zeros(2, dtype=np.int64)
    status = _kernel.integrate(t.var, t.q, v, xs, xl, np.zeros(10), np.zeros(40), counters,
                               _kernel.pack_params(DmmParams(), 40), 100, 1, 101)
    assert status == _kernel.SOLVED and counters[0] == 0
    assert eval_cnf(cnf, decode_assignment(v))[0]
