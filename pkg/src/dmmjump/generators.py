"""Seeded generators for planted 3-SAT ensembles.

Two families are provided:

* 3-regular 3-XORSAT: ``n`` parity equations over ``n`` variables, every
  variable in exactly three equations, each equation expanded to 4 clauses.
* Barthel planted 3-SAT: clause negation patterns drawn with probabilities
  that null the mean bias toward the planted assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np

from .rng import Stream
from .sat import Cnf, write_dimacs

MAX_RESTARTS = 10_000


class GenerationError(RuntimeError):
    pass


class Kind(str, Enum):
    XORSAT = "xorsat"
    BARTHEL = "barthel"


@dataclass(frozen=True)
class XorEquation:
    """``x_i xor x_j xor x_k = parity`` over 1-indexed, distinct variables."""

    vars: tuple[int, int, int]
    parity: bool

    def __post_init__(self):
        if len(self.vars) != 3 or len(set(self.vars)) != 3:
            raise ValueError(f"XOR equation needs 3 distinct variables, got {self.vars}")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: Kind
    n: int
    ratio: float | None = None
    p0: float | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.XORSAT:
            if self.n < 4:
                raise ValueError(f"XORSAT needs n >= 4, got {self.n}")
        else:
            if self.ratio is None or self.p0 is None:
                raise ValueError("Barthel generator needs ratio and p0")
            if not self.ratio > 0:
                raise ValueError(f"ratio must be positive, got {self.ratio}")
            if not 0 <= self.p0 <= 0.25:
                raise ValueError(f"p0 must lie in [0, 1/4] so that p1 >= 0, got {self.p0}")
            if self.n < 3:
                raise ValueError(f"Barthel needs n >= 3, got {self.n}")
            if barthel_clause_count(self.n, self.ratio) < 1:
                raise ValueError("ratio * n rounds to zero clauses")

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.kind, self.n, self.ratio, self.p0, seed)

    def with_n(self, n: int) -> "GeneratorSpec":
        return GeneratorSpec(self.kind, n, self.ratio, self.p0, self.seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        return cls(Kind(d["kind"]), int(d["n"]), d.get("ratio"), d.get("p0"), int(d.get("seed", 0)))

    def comment(self) -> str:
        return (f"generator kind={self.kind.value} n={self.n} ratio={self.ratio} "
                f"p0={self.p0} seed={self.seed}")


def xor_to_cnf(eq: XorEquation) -> list[tuple[int, int, int]]:
    """Four clauses, each excluding one assignment that violates the parity.

    For parity 1 the excluded assignments are the even ones
    (000, 011, 101, 110); for parity 0 the first variable is flipped.
    """
    i, j, k = eq.vars
    odd = [(i, j, k), (i, -j, -k), (-i, j, -k), (-i, -j, k)]
    if eq.parity:
        return odd
    return [(-a, b, c) for a, b, c in odd]


def _xor_wiring(n: int, stream: Stream) -> np.ndarray:
    """Configuration model: 3 stubs per variable, shuffled into triples.

    A triple repeating a variable rejects the whole matching.
    """
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(MAX_RESTARTS):
        triples = stubs[stream.permutation(3 * n)].reshape(n, 3)
        if not np.any((triples[:, 0] == triples[:, 1]) | (triples[:, 0] == triples[:, 2])
                      | (triples[:, 1] == triples[:, 2])):
            return np.sort(triples, axis=1)
    raise GenerationError(f"no simple 3-regular wiring for n={n} after {MAX_RESTARTS} restarts")


def gen_xorsat(n: int, seed: int) -> tuple[Cnf, tuple[bool, ...]]:
    """3-regular 3-XORSAT instance with ``4 n`` clauses and its planted solution."""
    GeneratorSpec(Kind.XORSAT, n, seed=seed)
    stream = Stream(seed)
    planted = stream.signs(n)
    triples = _xor_wiring(n, stream)
    # parity chosen so that the planted assignment satisfies every equation
    parity = np.logical_xor.reduce(planted[triples], axis=1)
    rows = []
    for (a, b, c), p in zip(triples.tolist(), parity.tolist()):
        rows.extend(xor_to_cnf(XorEquation((a + 1, b + 1, c + 1), p)))
    return Cnf.from_array(n, np.array(rows, dtype=np.int64)), tuple(planted.tolist())


def barthel_probs(p0: float) -> tuple[float, float, float, float]:
    """Per-pattern probabilities ``(p0, p1, p2, p3)`` by number of literals
    false under the planted assignment.

    Solves ``p0 + 3 p1 + 3 p2 = 1`` and ``p0 + p1 = p2 + p3`` with ``p3 = 0``.
    """
    if not 0 <= p0 <= 0.25:
        raise ValueError(f"p0 must lie in [0, 1/4], got {p0}")
    return p0, (1 - 4 * p0) / 6, (1 + 2 * p0) / 6, 0.0


def barthel_clause_count(n: int, ratio: float) -> int:
    x = ratio * n
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


# bit k of a pattern set => literal in slot k is false under the planted assignment
_PATTERN_TYPES = np.array([bin(p).count("1") for p in range(8)])


def gen_barthel(n: int, ratio: float, p0: float, seed: int) -> tuple[Cnf, tuple[bool, ...]]:
    """Planted 3-SAT instance in the Barthel ensemble."""
    GeneratorSpec(Kind.BARTHEL, n, ratio, p0, seed)
    m = barthel_clause_count(n, ratio)
    stream = Stream(seed)
    planted = stream.signs(n)

    # uniform unordered triple of distinct variables
    a = stream.below(n, m)
    b = stream.below(n - 1, m)
    b = b + (b >= a)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    c = stream.below(n - 2, m)
    c = c + (c >= lo)
    c = c + (c >= hi)
    vars_ = np.sort(np.stack([a, b, c], axis=1), axis=1)

    # pattern 7 (all literals false) has probability p3 = 0 and is never drawn
    cdf = np.cumsum(np.array(barthel_probs(p0))[_PATTERN_TYPES[:7]])
    cdf[-1] = 1.0
    pattern = np.searchsorted(cdf, stream.uniform(m), side="right")
    false_lit = ((pattern[:, None] >> np.arange(3)) & 1).astype(bool)
    # literal value = planted XOR negated, so negated = planted XOR wanted value
    negated = planted[vars_] ^ ~false_lit
    lits = np.where(negated, -(vars_ + 1), vars_ + 1)
    return Cnf.from_array(n, lits), tuple(planted.tolist())


def generate(spec: GeneratorSpec) -> tuple[Cnf, tuple[bool, ...]]:
    if spec.kind is Kind.XORSAT:
        return gen_xorsat(spec.n, spec.seed)
    return gen_barthel(spec.n, spec.ratio, spec.p0, spec.seed)


def instance_text(spec: GeneratorSpec) -> str:
    cnf, planted = generate(spec)
    return write_dimacs(cnf, planted, comments=[spec.comment()])
