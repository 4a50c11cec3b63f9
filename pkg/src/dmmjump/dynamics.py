"""DMM vector field for 3-SAT, forward-Euler stepping and the jump rule.

State per formula with N variables and M clauses:

* ``v``  -- voltages in [-1, 1], one per variable,
* ``xs`` -- short memory in [eps, 1 - eps], one per clause,
* ``xl`` -- long memory in [1, 1e4 * M], one per clause.

The functions here are the readable reference path (scalar helpers plus a
vectorized numpy step). :mod:`dmmjump._kernel` holds the compiled integrator
that the solver uses; the two are cross-checked bit for bit in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .sat import Cnf

XL_MAX_PER_CLAUSE = 1e4


@dataclass(frozen=True)
class DmmParams:
    alpha: float = 5.0
    beta: float = 20.0
    gamma: float = 0.25
    delta: float = 0.05
    epsilon: float = 0.1
    zeta: float = 0.1
    dt: float = 0.01
    v_thr: float = 0.0
    v_jump: float = 0.0
    max_steps: int = 5_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 <= self.v_thr < 1:
            raise ValueError(f"v_thr must lie in [0, 1), got {self.v_thr}")
        if not self.v_jump >= 0:
            raise ValueError(f"v_jump must be >= 0, got {self.v_jump}")
        if not 0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")

    @property
    def jumps_enabled(self) -> bool:
        return self.v_jump > 0

    def with_jumps(self, v_thr: float, v_jump: float) -> "DmmParams":
        return replace(self, v_thr=v_thr, v_jump=v_jump)

    def unmodified(self) -> "DmmParams":
        return replace(self, v_thr=0.0, v_jump=0.0)


@dataclass
class DmmState:
    v: np.ndarray
    xs: np.ndarray
    xl: np.ndarray
    t: float = 0.0
    steps: int = 0
    jumps: int = 0

    def copy(self) -> "DmmState":
        return DmmState(self.v.copy(), self.xs.copy(), self.xl.copy(), self.t, self.steps, self.jumps)


@dataclass(frozen=True)
class ClauseTopology:
    """Clause membership (``var``, ``q``) and its transpose.

    ``var[m, k]`` is the 0-indexed variable in slot ``k`` of clause ``m`` and
    ``q[m, k]`` its polarity (+1 or -1). Variable ``n`` occurs at the
    ``(clause, slot)`` pairs ``adj_clause[adj_ptr[n]:adj_ptr[n+1]]``,
    ``adj_slot[...]``.
    """

    num_vars: int
    var: np.ndarray
    q: np.ndarray
    adj_ptr: np.ndarray = field(repr=False)
    adj_clause: np.ndarray = field(repr=False)
    adj_slot: np.ndarray = field(repr=False)

    @classmethod
    def from_cnf(cls, cnf: Cnf) -> "ClauseTopology":
        var = np.ascontiguousarray(cnf.variable_index(), dtype=np.int64)
        q = np.ascontiguousarray(cnf.polarity(), dtype=np.float64)
        flat = var.ravel()
        order = np.argsort(flat, kind="stable")
        ptr = np.zeros(cnf.num_vars + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=cnf.num_vars), out=ptr[1:])
        return cls(cnf.num_vars, var, q, ptr, order // 3, order % 3)

    @property
    def num_clauses(self) -> int:
        return self.var.shape[0]

    def slot_of(self, n: int, m: int) -> int:
        hits = np.flatnonzero(self.var[m] == n)
        if hits.size == 0:
            raise ValueError(f"variable {n} does not occur in clause {m}")
        return int(hits[0])


def initial_memory(num_clauses: int, params: DmmParams) -> tuple[np.ndarray, np.ndarray]:
    return np.full(num_clauses, params.epsilon), np.ones(num_clauses)


# -- scalar reference terms -------------------------------------------------

def _slacks(topo: ClauseTopology, m: int, v) -> list[float]:
    return [1.0 - topo.q[m, k] * v[topo.var[m, k]] for k in range(3)]


def _min3(a: float, b: float, c: float) -> float:
    # left to right, matching the compiled kernel
    ab = a if a < b else b
    return ab if ab < c else c


def clause_value(topo: ClauseTopology, m: int, v) -> float:
    """Half the smallest literal slack of clause ``m``; 0 satisfied, 1 violated."""
    s = _slacks(topo, m, v)
    return 0.5 * _min3(*s)


def gradient_term(topo: ClauseTopology, n: int, m: int, v) -> float:
    k = topo.slot_of(n, m)
    s = _slacks(topo, m, v)
    others = [s[i] for i in range(3) if i != k]
    return 0.5 * topo.q[m, k] * min(others)


def rigidity_term(topo: ClauseTopology, n: int, m: int, v) -> float:
    """Nonzero only for the literal(s) attaining the clause minimum (ties share)."""
    k = topo.slot_of(n, m)
    s = _slacks(topo, m, v)
    if s[k] == _min3(*s):
        return 0.5 * (topo.q[m, k] - v[n])
    return 0.0


# -- vectorized field and step ----------------------------------------------

def _field(v, xs, xl, topo: ClauseTopology, p: DmmParams):
    q = topo.q
    vv = v[topo.var]
    s = 1.0 - q * vv
    s0, s1, s2 = s[:, 0], s[:, 1], s[:, 2]
    smin = np.minimum(np.minimum(s0, s1), s2)
    C = 0.5 * smin
    G = np.empty_like(s)
    G[:, 0] = 0.5 * q[:, 0] * np.minimum(s1, s2)
    G[:, 1] = 0.5 * q[:, 1] * np.minimum(s0, s2)
    G[:, 2] = 0.5 * q[:, 2] * np.minimum(s0, s1)
    R = np.where(s == smin[:, None], 0.5 * (q - vv), 0.0)
    gate_g = (xl * xs)[:, None]
    gate_r = ((1.0 + p.zeta * xl) * (1.0 - xs))[:, None]
    contrib = gate_g * G + gate_r * R
    # bincount accumulates sequentially in clause-major order
    dv = np.bincount(topo.var.ravel(), weights=contrib.ravel(), minlength=topo.num_vars)
    dxs = p.beta * (xs + p.epsilon) * (C - p.gamma)
    dxl = p.alpha * (C - p.delta)
    return dv, dxs, dxl, C


def derivatives(state: DmmState, topo: ClauseTopology, params: DmmParams):
    """Return ``(dv, dxs, dxl)`` evaluated at ``state``."""
    dv, dxs, dxl, _ = _field(state.v, state.xs, state.xl, topo, params)
    return dv, dxs, dxl


def apply_jumps(v_old: float, v_new: float, params: DmmParams) -> tuple[float, bool]:
    """Jump rule for one voltage, followed by the [-1, 1] clamp.

    Crossing +v_thr downward lands at ``v_thr - v_jump``; crossing -v_thr
    upward lands at ``v_jump - v_thr``. Landings beyond the rails are clamped,
    which equals the "or -/+1 otherwise" branch of the rule.
    """
    thr, jump = params.v_thr, params.v_jump
    if jump > 0:
        if v_old >= thr and v_new < thr:
            return max(thr - jump, -1.0), True
        if v_old <= -thr and v_new > -thr:
            return min(jump - thr, 1.0), True
    return min(max(v_new, -1.0), 1.0), False


def apply_jumps_array(v_old: np.ndarray, v_new: np.ndarray, params: DmmParams):
    thr, jump = params.v_thr, params.v_jump
    out = np.clip(v_new, -1.0, 1.0)
    if jump <= 0:
        return out, np.zeros(v_new.shape, dtype=bool)
    down = (v_old >= thr) & (v_new < thr)
    up = ~down & (v_old <= -thr) & (v_new > -thr)
    out[down] = max(thr - jump, -1.0)
    out[up] = min(jump - thr, 1.0)
    return out, down | up


def euler_step(state: DmmState, topo: ClauseTopology, params: DmmParams) -> DmmState:
    """One forward-Euler step: simultaneous update, memory clamps, jumps, voltage clamp."""
    dv, dxs, dxl, _ = _field(state.v, state.xs, state.xl, topo, params)
    dt = params.dt
    xs = np.clip(state.xs + dt * dxs, params.epsilon, 1.0 - params.epsilon)
    xl = np.clip(state.xl + dt * dxl, 1.0, XL_MAX_PER_CLAUSE * topo.num_clauses)
    v, jumped = apply_jumps_array(state.v, state.v + dt * dv, params)
    return DmmState(v, xs, xl, state.t + dt, state.steps + 1, state.jumps + int(jumped.sum()))


def decode_assignment(v) -> tuple[bool, ...]:
    """Boolean readout: variable is true iff its voltage is >= 0."""
    return tuple((np.asarray(v) >= 0).tolist())
