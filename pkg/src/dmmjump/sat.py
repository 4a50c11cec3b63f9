"""3-SAT data model, evaluation and DIMACS I/O.

Variables are 1-indexed at the API surface (DIMACS convention) and 0-indexed
in the packed literal arrays used by the numerical code.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

Assignment = tuple  # tuple[bool, ...] of length num_vars


class CnfError(ValueError):
    """Invalid formula construction."""


class DimacsError(CnfError):
    """Malformed DIMACS input. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeaderError(DimacsError):
    pass


class ClauseArityError(DimacsError):
    pass


class DuplicateVariableError(DimacsError):
    pass


class LiteralRangeError(DimacsError):
    pass


@dataclass(frozen=True)
class Literal:
    variable: int
    negated: bool = False

    def __post_init__(self):
        if self.variable < 1:
            raise CnfError(f"variable index must be >= 1, got {self.variable}")

    @classmethod
    def from_int(cls, lit: int) -> "Literal":
        if lit == 0:
            raise CnfError("0 is not a literal")
        return cls(abs(lit), lit < 0)

    def to_int(self) -> int:
        return -self.variable if self.negated else self.variable

    def value(self, a: Sequence[bool]) -> bool:
        return bool(a[self.variable - 1]) != self.negated


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise CnfError(f"3-SAT clause needs exactly 3 literals, got {len(self.literals)}")
        if len({lit.variable for lit in self.literals}) != 3:
            raise CnfError(f"duplicate variable in clause {self.to_ints()}")

    @classmethod
    def from_ints(cls, lits: Iterable[int]) -> "Clause":
        return cls(tuple(Literal.from_int(int(x)) for x in lits))

    def to_ints(self) -> tuple[int, ...]:
        return tuple(lit.to_int() for lit in self.literals)


class Cnf:
    """An immutable 3-SAT formula.

    The canonical storage is an ``(M, 3)`` array of signed DIMACS literals;
    :attr:`clauses` materializes :class:`Clause` objects on demand.
    """

    __slots__ = ("num_vars", "_lits", "_digest")

    def __init__(self, num_vars: int, clauses: Iterable[Clause | Sequence[int]]):
        rows = []
        for c in clauses:
            if isinstance(c, Clause):
                rows.append(c.to_ints())
            else:
                rows.append(Clause.from_ints(c).to_ints())
        self._init(num_vars, np.array(rows, dtype=np.int64).reshape(-1, 3))

    @classmethod
    def from_array(cls, num_vars: int, lits) -> "Cnf":
        """Build from an ``(M, 3)`` integer array of signed literals (validated)."""
        arr = np.asarray(lits, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise CnfError(f"literal array must have shape (M, 3), got {arr.shape}")
        a = np.abs(arr)
        if np.any(a == 0):
            raise CnfError("0 is not a literal")
        if np.any((a[:, 0] == a[:, 1]) | (a[:, 0] == a[:, 2]) | (a[:, 1] == a[:, 2])):
            raise CnfError("duplicate variable in clause")
        obj = cls.__new__(cls)
        obj._init(num_vars, arr.copy())
        return obj

    def _init(self, num_vars: int, arr: np.ndarray) -> None:
        if num_vars < 3:
            raise CnfError(f"need at least 3 variables, got {num_vars}")
        if arr.shape[0] < 1:
            raise CnfError("formula needs at least one clause")
        if np.abs(arr).max() > num_vars:
            raise CnfError(f"literal index exceeds num_vars={num_vars}")
        arr.flags.writeable = False
        self.num_vars = int(num_vars)
        self._lits = arr
        self._digest = None

    @property
    def num_clauses(self) -> int:
        return self._lits.shape[0]

    @property
    def literals(self) -> np.ndarray:
        """Read-only ``(M, 3)`` array of signed 1-indexed literals."""
        return self._lits

    @property
    def clauses(self) -> tuple[Clause, ...]:
        return tuple(Clause.from_ints(row) for row in self._lits.tolist())

    def variable_index(self) -> np.ndarray:
        """0-indexed variable per literal slot, shape ``(M, 3)``."""
        return np.abs(self._lits) - 1

    def polarity(self) -> np.ndarray:
        """+1 for a positive literal, -1 for a negated one, shape ``(M, 3)``."""
        return np.sign(self._lits)

    def digest(self) -> str:
        if self._digest is None:
            self._digest = hashlib.sha256(write_dimacs(self).encode()).hexdigest()[:16]
        return self._digest

    def __eq__(self, other):
        if not isinstance(other, Cnf):
            return NotImplemented
        return self.num_vars == other.num_vars and np.array_equal(self._lits, other._lits)

    def __hash__(self):
        return hash((self.num_vars, self._lits.tobytes()))

    def __repr__(self):
        return f"Cnf(num_vars={self.num_vars}, num_clauses={self.num_clauses})"


def eval_clause(clause: Clause, a: Sequence[bool]) -> bool:
    return any(lit.value(a) for lit in clause.literals)


def eval_cnf(cnf: Cnf, a: Sequence[bool]) -> tuple[bool, int]:
    """Return ``(satisfied, unsat_count)`` for assignment ``a``."""
    vals = np.asarray(a, dtype=bool)
    if vals.shape != (cnf.num_vars,):
        raise ValueError(f"assignment length {vals.size} != num_vars {cnf.num_vars}")
    lits = cnf.literals
    true_lit = vals[np.abs(lits) - 1] == (lits > 0)
    unsat = int(np.count_nonzero(~true_lit.any(axis=1)))
    return unsat == 0, unsat


def assignment_to_ints(a: Sequence[bool]) -> list[int]:
    return [i + 1 if v else -(i + 1) for i, v in enumerate(a)]


def parse_dimacs(data: bytes | str) -> tuple[Cnf, Assignment | None]:
    """Parse a 3-SAT DIMACS file.

    Returns the formula and the planted assignment if a ``c planted`` comment
    is present. CRLF line endings are accepted.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    header = None
    planted_ints = None
    rows: list[tuple[int, int, int]] = []
    pending: list[int] = []
    pending_line = 0
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            toks = line.split()
            if len(toks) >= 2 and toks[0] == "c" and toks[1] == "planted":
                try:
                    planted_ints = [int(t) for t in toks[2:]]
                except ValueError:
                    raise DimacsError("bad planted comment", lineno) from None
                planted_line = lineno
            continue
        if line.startswith("p"):
            toks = line.split()
            if header is not None:
                raise MalformedHeaderError("duplicate header", lineno)
            if len(toks) != 4 or toks[1] != "cnf":
                raise MalformedHeaderError(f"expected 'p cnf N M', got {line!r}", lineno)
            try:
                n, m = int(toks[2]), int(toks[3])
            except ValueError:
                raise MalformedHeaderError(f"non-integer header fields in {line!r}", lineno) from None
            if n < 3 or m < 1:
                raise MalformedHeaderError(f"need N >= 3 and M >= 1, got N={n} M={m}", lineno)
            header = (n, m)
            continue
        if header is None:
            raise MalformedHeaderError("clause before 'p cnf' header", lineno)
        try:
            toks = [int(t) for t in line.split()]
        except ValueError:
            raise DimacsError(f"non-integer token in {line!r}", lineno) from None
        for lit in toks:
            if not pending:
                pending_line = lineno
            if lit == 0:
                _check_clause(pending, header[0], pending_line)
                rows.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if header is None:
        raise MalformedHeaderError("missing 'p cnf' header")
    if pending:
        raise ClauseArityError("unterminated clause (missing trailing 0)", pending_line)
    n, m = header
    if len(rows) != m:
        raise MalformedHeaderError(f"header declares {m} clauses, found {len(rows)}")
    cnf = Cnf.from_array(n, np.array(rows, dtype=np.int64))
    planted = None
    if planted_ints is not None:
        if sorted(abs(x) for x in planted_ints) != list(range(1, n + 1)):
            raise DimacsError("planted comment must list each variable once", planted_line)
        vals = [False] * n
        for x in planted_ints:
            vals[abs(x) - 1] = x > 0
        planted = tuple(vals)
    return cnf, planted


def _check_clause(lits: list[int], n: int, lineno: int) -> None:
    if len(lits) != 3:
        raise ClauseArityError(f"clause has {len(lits)} literals, 3-SAT requires 3", lineno)
    for x in lits:
        if abs(x) > n:
            raise LiteralRangeError(f"literal {x} exceeds declared N={n}", lineno)
    if len({abs(x) for x in lits}) != 3:
        raise DuplicateVariableError(f"duplicate variable in clause {lits}", lineno)


def write_dimacs(cnf: Cnf, planted: Sequence[bool] | None = None,
                 comments: Sequence[str] = ()) -> str:
    out = [f"c {c}" for c in comments]
    if planted is not None:
        if len(planted) != cnf.num_vars:
            raise ValueError("planted assignment length does not match num_vars")
        out.append("c planted " + " ".join(map(str, assignment_to_ints(planted))))
    out.append(f"p cnf {cnf.num_vars} {cnf.num_clauses}")
    out.extend(f"{a} {b} {c} 0" for a, b, c in cnf.literals.tolist())
    return "\n".join(out) + "\n"
