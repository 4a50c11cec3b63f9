"""Compiled forward-Euler integrator for the DMM equations.

One pass over the clauses per step evaluates the clause functions, the
Boolean satisfiability of the current state and the voltage derivatives, so
the per-step solution check costs nothing extra. The floating-point
expressions mirror :func:`dmmjump.dynamics._field` term by term; the two
paths agree bit for bit.

Two variants are compiled: with the jump logic, and with it removed at
compile time (``integrate_nojump``), so the unmodified dynamics can be
checked against a build that has no jump code at all.
"""

from __future__ import annotations

import numba as nb
import numpy as np

PAUSED = 0
SOLVED = 1
TIMEOUT = 2


def _make_integrator(with_jumps: bool):
    JUMPS = with_jumps

    @nb.njit(cache=True, nogil=True)
    def integrate(var, q, v, xs, xl, scratch_dv, scratch_c, counters, fparams,
                  max_steps, check_every, n_steps):
        """Advance at most ``n_steps`` steps in place.

        counters = [steps, jumps]; fparams = [alpha, beta, gamma, delta,
        epsilon, zeta, dt, v_thr, v_jump, xl_max]. Returns PAUSED, SOLVED or
        TIMEOUT. SOLVED leaves the state at the satisfying step.
        """
        alpha = fparams[0]
        beta = fparams[1]
        gamma = fparams[2]
        delta = fparams[3]
        eps = fparams[4]
        zeta = fparams[5]
        dt = fparams[6]
        thr = fparams[7]
        jump = fparams[8]
        xl_max = fparams[9]
        land_down = thr - jump
        if land_down < -1.0:
            land_down = -1.0
        land_up = jump - thr
        if land_up > 1.0:
            land_up = 1.0
        jumping = JUMPS and jump > 0.0

        M = var.shape[0]
        N = v.shape[0]
        dv = scratch_dv
        C = scratch_c
        start = counters[0]
        while True:
            steps = counters[0]
            if steps - start >= n_steps and steps < max_steps:
                return PAUSED
            for n in range(N):
                dv[n] = 0.0
            unsat = 0
            for m in range(M):
                i0 = var[m, 0]
                i1 = var[m, 1]
                i2 = var[m, 2]
                q0 = q[m, 0]
                q1 = q[m, 1]
                q2 = q[m, 2]
                v0 = v[i0]
                v1 = v[i1]
                v2 = v[i2]
                s0 = 1.0 - q0 * v0
                s1 = 1.0 - q1 * v1
                s2 = 1.0 - q2 * v2
                m01 = s0 if s0 < s1 else s1
                m02 = s0 if s0 < s2 else s2
                m12 = s1 if s1 < s2 else s2
                smin = m01 if m01 < s2 else s2
                C[m] = 0.5 * smin
                # literal true iff sign(v) matches polarity (v >= 0 reads as true)
                if not ((v0 >= 0.0) == (q0 > 0.0) or (v1 >= 0.0) == (q1 > 0.0)
                        or (v2 >= 0.0) == (q2 > 0.0)):
                    unsat += 1
                xsm = xs[m]
                xlm = xl[m]
                gg = xlm * xsm
                gr = (1.0 + zeta * xlm) * (1.0 - xsm)
                r0 = 0.5 * (q0 - v0) if s0 == smin else 0.0
                r1 = 0.5 * (q1 - v1) if s1 == smin else 0.0
                r2 = 0.5 * (q2 - v2) if s2 == smin else 0.0
                dv[i0] += gg * (0.5 * q0 * m12) + gr * r0
                dv[i1] += gg * (0.5 * q1 * m02) + gr * r1
                dv[i2] += gg * (0.5 * q2 * m01) + gr * r2
            if unsat == 0 and (steps % check_every == 0 or steps == max_steps):
                return SOLVED
            if steps >= max_steps:
                return TIMEOUT
            lo = eps
            hi = 1.0 - eps
            for m in range(M):
                c = C[m]
                x = xs[m] + dt * (beta * (xs[m] + eps) * (c - gamma))
                xs[m] = lo if x < lo else (hi if x > hi else x)
                y = xl[m] + dt * (alpha * (c - delta))
                xl[m] = 1.0 if y < 1.0 else (xl_max if y > xl_max else y)
            jumps = 0
            for n in range(N):
                old = v[n]
                new = old + dt * dv[n]
                if JUMPS:
                    if jumping and old >= thr and new < thr:
                        v[n] = land_down
                        jumps += 1
                        continue
                    if jumping and old <= -thr and new > -thr:
                        v[n] = land_up
                        jumps += 1
                        continue
                v[n] = -1.0 if new < -1.0 else (1.0 if new > 1.0 else new)
            counters[0] = steps + 1
            counters[1] += jumps

    return integrate


integrate = _make_integrator(True)
integrate_nojump = _make_integrator(False)


def pack_params(params, num_clauses: int) -> np.ndarray:
    from .dynamics import XL_MAX_PER_CLAUSE

    return np.array([params.alpha, params.beta, params.gamma, params.delta, params.epsilon,
                     params.zeta, params.dt, params.v_thr, params.v_jump,
                     XL_MAX_PER_CLAUSE * num_clauses], dtype=np.float64)
