"""Drive the DMM dynamics to a solution or to the step cutoff."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernel
from .dynamics import ClauseTopology, DmmParams, DmmState, decode_assignment, initial_memory
from .rng import Stream, domain_seed, run_seed  # noqa: F401  (run_seed re-exported)
from .sat import Cnf, assignment_to_ints, eval_cnf

SCHEMA_VERSION = 1

INIT_RANDOM = "random"
INIT_ALL_ONES = "all-ones"
INIT_TAG = 0x696E69745F76  # "init_v"


@dataclass(frozen=True)
class TrajectorySpec:
    stride: int = 1
    variables: tuple[int, ...] | None = None  # 1-indexed; None records all

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError("trajectory stride must be >= 1")


@dataclass(frozen=True)
class SolveConfig:
    params: DmmParams = field(default_factory=DmmParams)
    seed: int = 0
    init: str | Sequence[float] = INIT_RANDOM
    check_every: int = 1
    trajectory: TrajectorySpec | None = None

    def __post_init__(self):
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")
        if isinstance(self.init, str):
            if self.init not in (INIT_RANDOM, INIT_ALL_ONES):
                raise ValueError(f"unknown init mode {self.init!r}")
        else:
            v = np.asarray(self.init, dtype=np.float64)
            if v.ndim != 1 or np.any(np.abs(v) > 1):
                raise ValueError("explicit init must be a vector with entries in [-1, 1]")
            object.__setattr__(self, "init", tuple(v.tolist()))


@dataclass(frozen=True)
class SolveResult:
    solved: bool
    steps: int
    tts: float
    jumps: int
    assignment: tuple[bool, ...] | None
    seed: int
    instance_digest: str

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "solved": self.solved,
            "steps": self.steps,
            "tts": self.tts,
            "jumps": self.jumps,
            "assignment": None if self.assignment is None else assignment_to_ints(self.assignment),
            "seed": self.seed,
            "instance_digest": self.instance_digest,
        }


@dataclass
class Trajectory:
    variables: tuple[int, ...]
    times: np.ndarray
    v_samples: np.ndarray  # (samples, len(variables))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"v{i}" for i in self.variables])
        for t, row in zip(self.times.tolist(), self.v_samples.tolist()):
            w.writerow([repr(t)] + [repr(x) for x in row])
        return buf.getvalue()


def init_state(cnf: Cnf, config: SolveConfig) -> DmmState:
    n = cnf.num_vars
    if config.init == INIT_RANDOM:
        v = 2.0 * Stream(domain_seed(config.seed, INIT_TAG)).uniform(n) - 1.0
    elif config.init == INIT_ALL_ONES:
        v = np.ones(n)
    else:
        v = np.array(config.init, dtype=np.float64)
        if v.size != n:
            raise ValueError(f"explicit init has length {v.size}, formula has {n} variables")
    xs, xl = initial_memory(cnf.num_clauses, config.params)
    return DmmState(v, xs, xl)


def solve(cnf: Cnf, config: SolveConfig, *, topology: ClauseTopology | None = None
          ) -> tuple[SolveResult, Trajectory | None]:
    """Integrate until the decoded assignment satisfies ``cnf`` or ``max_steps`` pass.

    A timeout is a normal result (``solved=False``), not an error.
    """
    p = config.params
    topo = topology or ClauseTopology.from_cnf(cnf)
    state = init_state(cnf, config)
    v, xs, xl = state.v, state.xs, state.xl
    dv = np.zeros(cnf.num_vars)
    cbuf = np.zeros(cnf.num_clauses)
    counters = np.zeros(2, dtype=np.int64)
    fparams = _kernel.pack_params(p, cnf.num_clauses)

    def advance(n_steps):
        return _kernel.integrate(topo.var, topo.q, v, xs, xl, dv, cbuf, counters, fparams,
                                 p.max_steps, config.check_every, n_steps)

    traj = None
    if config.trajectory is None:
        status = advance(p.max_steps + 1)
    else:
        spec = config.trajectory
        cols = (np.arange(cnf.num_vars) if spec.variables is None
                else np.asarray(spec.variables, dtype=np.int64) - 1)
        times, rows = [0.0], [v[cols].copy()]
        while True:
            status = advance(spec.stride)
            steps = int(counters[0])
            if steps % spec.stride == 0 and steps > 0 and (len(times) - 1) * spec.stride < steps:
                times.append(steps * p.dt)
                rows.append(v[cols].copy())
            if status != _kernel.PAUSED:
                break
        traj = Trajectory(tuple((cols + 1).tolist()), np.array(times), np.array(rows))

    steps = int(counters[0])
    solved = status == _kernel.SOLVED
    assignment = decode_assignment(v) if solved else None
    if solved and not eval_cnf(cnf, assignment)[0]:
        raise RuntimeError("solver reported a solution that fails verification")
    result = SolveResult(solved, steps, steps * p.dt, int(counters[1]), assignment,
                         config.seed, cnf.digest())
    return result, traj


def default_workers() -> int:
    return os.cpu_count() or 1


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> list:
    """Order-preserving map over a bounded process pool (in-process for 1 worker)."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
