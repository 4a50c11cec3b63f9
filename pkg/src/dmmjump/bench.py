"""Benchmark campaigns: paired baseline/jump runs over sweeps and sizes."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import MedianUndefinedError, TtsSampleSet, acceleration_factor, median_tts
from .dynamics import ClauseTopology, DmmParams
from .generators import GeneratorSpec, generate
from .rng import run_seed
from .solver import SolveConfig, parallel_map, solve

SCHEMA_VERSION = 1

# Threshold sweep with v_jump = 2.1 v_thr, and a jump-size sweep at v_thr = 0.
JUMP_MULT = 2.1
DEFAULT_THRESHOLDS = (0.2, 0.4, 0.6, 0.8, 0.98)
DEFAULT_JUMPS = (0.2, 0.4, 0.6, 0.8, 1.0)


def threshold_sweep(thresholds: Sequence[float] = DEFAULT_THRESHOLDS, mult: float = JUMP_MULT):
    return tuple((float(t), round(mult * t, 12)) for t in thresholds)


def jump_sweep(jumps: Sequence[float] = DEFAULT_JUMPS, v_thr: float = 0.0):
    return tuple((float(v_thr), float(j)) for j in jumps)


@dataclass(frozen=True)
class CampaignSpec:
    generator: GeneratorSpec
    instance_count: int
    sweep: tuple[tuple[float, float], ...]
    baseline: bool = True
    sizes: tuple[int, ...] | None = None
    master_seed: int = 0
    max_steps: int = 5_000_000
    repeats: int = 1
    params: DmmParams = field(default_factory=DmmParams)
    # execution resource only; excluded from equality and from exported payloads
    workers: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sweep", tuple((float(a), float(b)) for a, b in self.sweep))
        if self.sizes is not None:
            object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        if self.instance_count < 1:
            raise ValueError("instance_count must be >= 1")
        if not self.sweep:
            raise ValueError("sweep must not be empty")
        if self.sizes is not None and (not self.sizes or min(self.sizes) < 4):
            raise ValueError("sizes must be nonempty and all >= 4")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        for thr, jump in self.sweep:
            self.params.with_jumps(thr, jump)  # validates

    @property
    def size_list(self) -> tuple[int, ...]:
        return self.sizes if self.sizes is not None else (self.generator.n,)

    def to_dict(self) -> dict:
        p = self.params
        return {
            "generator": self.generator.to_dict(),
            "instance_count": self.instance_count,
            "sweep": [list(pt) for pt in self.sweep],
            "baseline": self.baseline,
            "sizes": None if self.sizes is None else list(self.sizes),
            "master_seed": self.master_seed,
            "max_steps": self.max_steps,
            "repeats": self.repeats,
            "params": {k: getattr(p, k) for k in
                       ("alpha", "beta", "gamma", "delta", "epsilon", "zeta", "dt")},
        }

    @classmethod
    def from_dict(cls, d: dict, workers: int = 1) -> "CampaignSpec":
        return cls(
            generator=GeneratorSpec.from_dict(d["generator"]),
            instance_count=int(d["instance_count"]),
            sweep=tuple(tuple(pt) for pt in d["sweep"]),
            baseline=bool(d["baseline"]),
            sizes=None if d.get("sizes") is None else tuple(d["sizes"]),
            master_seed=int(d["master_seed"]),
            max_steps=int(d["max_steps"]),
            repeats=int(d.get("repeats", 1)),
            params=DmmParams(**d.get("params", {})),
            workers=workers,
        )


@dataclass
class Cell:
    n: int
    v_thr: float
    v_jump: float
    samples: TtsSampleSet
    steps: np.ndarray
    jumps: np.ndarray
    median: float | None
    nmtts: float | None = None
    baseline: bool = False
    reason: str | None = None  # why the median is undefined


@dataclass
class CampaignResult:
    spec: CampaignSpec
    baseline: dict[int, Cell]
    cells: list[Cell]
    wall_clock: float = 0.0

    def cell(self, n: int, v_thr: float, v_jump: float) -> Cell:
        for c in self.cells:
            if c.n == n and c.v_thr == v_thr and c.v_jump == v_jump:
                return c
        raise KeyError((n, v_thr, v_jump))

    @property
    def complete(self) -> bool:
        """True when every reported median (and NMTTS) is defined."""
        cells = self.cells + list(self.baseline.values())
        return all(c.median is not None for c in cells)

    @property
    def total_steps(self) -> int:
        cells = self.cells + list(self.baseline.values())
        return int(sum(int(c.steps.sum()) for c in cells))


def _instance_seeds(spec: CampaignSpec, i: int) -> tuple[int, int, int, int]:
    inst, rep = divmod(i, spec.repeats)
    return inst, rep, run_seed(spec.master_seed, inst, 0), run_seed(spec.master_seed, inst, 1 + rep)


def _run_instance(spec: CampaignSpec, task: tuple[int, int]):
    """All runs for one (size, simulation index): baseline first, then the sweep."""
    n, i = task
    _, _, gen_seed, solver_seed = _instance_seeds(spec, i)
    cnf, _ = generate(spec.generator.with_n(n).with_seed(gen_seed))
    topo = ClauseTopology.from_cnf(cnf)
    base = replace(spec.params, max_steps=spec.max_steps)
    points = ([(0.0, 0.0)] if spec.baseline else []) + list(spec.sweep)
    out = []
    for thr, jump in points:
        cfg = SolveConfig(base.with_jumps(thr, jump), seed=solver_seed)
        res, _ = solve(cnf, cfg, topology=topo)
        out.append((res.tts, not res.solved, res.steps, res.jumps))
    return out


def _median_or_none(s: TtsSampleSet) -> tuple[float | None, str | None]:
    try:
        return median_tts(s), None
    except MedianUndefinedError as e:
        return None, str(e)


def _make_cell(n, thr, jump, rows, baseline=False) -> Cell:
    arr = np.array(rows, dtype=np.float64).reshape(-1, 4)
    samples = TtsSampleSet(arr[:, 0], arr[:, 1].astype(bool))
    med, err = _median_or_none(samples)
    return Cell(n, thr, jump, samples, arr[:, 2].astype(np.int64), arr[:, 3].astype(np.int64),
                med, baseline=baseline, reason=err)


def run_campaign(spec: CampaignSpec) -> CampaignResult:
    """Run every (size, sweep point, simulation) cell.

    Simulation ``(inst, rep)`` uses generator seed ``run_seed(master, inst, 0)``
    and solver seed ``run_seed(master, inst, 1 + rep)``; the baseline and every
    sweep point of that simulation share the instance and the initial voltages.
    """
    t0 = time.perf_counter()
    tasks = [(n, i) for n in spec.size_list for i in range(spec.instance_count * spec.repeats)]
    outputs = parallel_map(partial(_run_instance, spec), tasks, spec.workers)
    by_size: dict[int, list] = {n: [] for n in spec.size_list}
    for (n, _), out in sorted(zip(tasks, outputs), key=lambda x: x[0]):
        by_size[n].append(out)

    baseline: dict[int, Cell] = {}
    cells: list[Cell] = []
    off = 1 if spec.baseline else 0
    for n, runs in by_size.items():
        if spec.baseline:
            baseline[n] = _make_cell(n, 0.0, 0.0, [r[0] for r in runs], baseline=True)
        for k, (thr, jump) in enumerate(spec.sweep):
            cell = _make_cell(n, thr, jump, [r[off + k] for r in runs])
            base = baseline.get(n)
            if base is not None and base.median is not None and cell.median is not None:
                cell.nmtts = cell.median / base.median
            cells.append(cell)
    return CampaignResult(spec, baseline, cells, time.perf_counter() - t0)


# -- export ------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _point_name(n: int, thr: float, jump: float, base: bool = False) -> str:
    if base:
        return f"tts_n{n}_base.csv"
    return f"tts_n{n}_thr{thr:g}_jump{jump:g}.csv"


def _samples_csv(spec: CampaignSpec, cell: Cell) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instance", "repeat", "tts", "censored", "steps", "jumps"])
    for i in range(cell.samples.n_inst):
        inst, rep = divmod(i, spec.repeats)
        w.writerow([inst, rep, repr(float(cell.samples.samples[i])), int(cell.samples.censored[i]),
                    int(cell.steps[i]), int(cell.jumps[i])])
    return buf.getvalue()


SWEEP_COLUMNS = ["v_thr", "v_jump", "n", "median_mod", "median_base", "nmtts",
                 "censored_mod", "censored_base", "model_curve", "mean_jumps_mod"]


def sweep_table(result: CampaignResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for c in result.cells:
        base = result.baseline.get(c.n)
        model = acceleration_factor(c.v_jump) if c.v_jump <= 2 else None
        w.writerow([_fmt(c.v_thr), _fmt(c.v_jump), c.n, _fmt(c.median),
                    _fmt(None if base is None else base.median), _fmt(c.nmtts),
                    c.samples.censored_count, "" if base is None else base.samples.censored_count,
                    _fmt(model), _fmt(float(c.jumps.mean()))])
    return buf.getvalue()


def manifest(result: CampaignResult) -> dict:
    cells = []
    for c in list(result.baseline.values()) + result.cells:
        cells.append({
            "n": c.n, "v_thr": c.v_thr, "v_jump": c.v_jump,
            "baseline": c.baseline,
            "file": _point_name(c.n, c.v_thr, c.v_jump, c.baseline),
            "median": c.median, "nmtts": c.nmtts,
            "censored": c.samples.censored_count, "n_inst": c.samples.n_inst,
            "mean_jumps": float(c.jumps.mean()), "total_steps": int(c.steps.sum()),
            "undefined_reason": c.reason,
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "spec": result.spec.to_dict(),
        "complete": result.complete,
        "total_steps": result.total_steps,
        "cells": cells,
    }


def export_campaign(result: CampaignResult, out_dir: str | Path, formats=("csv", "json"),
                    include_timing: bool = False) -> list[Path]:
    """Write ``sweep.csv``, raw ``tts_*.csv`` tables and ``manifest.json``.

    The payload is a pure function of the spec. Wall-clock time is written
    to ``timing.json`` only when requested.
    """
    out = Path(out_dir)
    written: list[Path] = []

    def put(name: str, text: str):
        path = out / name
        try:
            path.write_text(text, encoding="utf-8", newline="\n")
        except OSError as e:
            raise OSError(f"cannot write {path}: {e}") from e
        written.append(path)

    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {out}: {e}") from e
    if "csv" in formats:
        put("sweep.csv", sweep_table(result))
        for c in result.baseline.values():
            put(_point_name(c.n, 0, 0, True), _samples_csv(result.spec, c))
        for c in result.cells:
            put(_point_name(c.n, c.v_thr, c.v_jump), _samples_csv(result.spec, c))
    if "json" in formats:
        put("manifest.json", json.dumps(manifest(result), indent=2, sort_keys=True) + "\n")
    if include_timing:
        put("timing.json", json.dumps({"wall_clock_s": result.wall_clock,
                                       "workers": result.spec.workers,
                                       "total_steps": result.total_steps}, indent=2) + "\n")
    return written
