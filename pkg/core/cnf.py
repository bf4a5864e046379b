"""
CNF Formulas
DIMACS parsing and emission, random k-CNF generation and evaluation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import Settings
from core.errors import CnfFormatError

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, slots=True)
class Literal:
    """A variable (1-based) with a polarity"""

    variable: int
    negated: bool = False

    def to_dimacs(self) -> int:
        return -self.variable if self.negated else self.variable

    @classmethod
    def from_dimacs(cls, value: int) -> "Literal":
        return cls(abs(value), value < 0)

    def value(self, bit: int) -> bool:
        """Truth value of the literal when its variable holds `bit`"""
        return bool(bit) != self.negated


@dataclass(frozen=True, slots=True)
class Clause:
    """Disjunction of literals over distinct variables"""

    literals: Tuple[Literal, ...]

    def __post_init__(self):
        if not self.literals:
            raise CnfFormatError("Empty clause")
        variables = [lit.variable for lit in self.literals]
        if len(set(variables)) != len(variables):
            raise CnfFormatError(f"Clause repeats a variable: {self.to_dimacs()}")

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> Tuple[int, ...]:
        return tuple(lit.variable for lit in self.literals)

    def to_dimacs(self) -> List[int]:
        return [lit.to_dimacs() for lit in self.literals]

    def evaluate(self, bits: Sequence[int]) -> bool:
        return any(lit.value(bits[lit.variable - 1]) for lit in self.literals)

    @classmethod
    def of(cls, *values: int) -> "Clause":
        """Build a clause from signed DIMACS integers"""
        return cls(tuple(Literal.from_dimacs(v) for v in values))


@dataclass(frozen=True)
class CnfFormula:
    """Conjunction of clauses over variables 1..num_vars"""

    num_vars: int
    clauses: Tuple[Clause, ...]
    width: int = field(default=0)

    def __post_init__(self):
        if self.num_vars < 1:
            raise CnfFormatError(f"Formula needs at least one variable, got {self.num_vars}")
        if not self.clauses:
            raise CnfFormatError("Formula needs at least one clause")
        widest = max(c.width for c in self.clauses)
        if self.width == 0:
            object.__setattr__(self, 'width', widest)
        elif self.width < widest:
            raise CnfFormatError(f"Declared width {self.width} below widest clause {widest}")
        for clause in self.clauses:
            for var in clause.variables:
                if var > self.num_vars:
                    raise CnfFormatError(f"Variable {var} out of range 1..{self.num_vars}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def n(self) -> int:
        return self.num_vars

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def k(self) -> int:
        return self.width


def _normalize_clause(values: Sequence[int]) -> Optional[Clause]:
    """Drop repeated literals; return None for a tautology"""
    seen = []
    for value in values:
        if -value in seen:
            return None
        if value not in seen:
            seen.append(value)
    return Clause.of(*seen)


def parse_dimacs(text: Union[str, bytes]) -> CnfFormula:
    """Parse DIMACS CNF text into a formula"""
    if isinstance(text, bytes):
        text = text.decode('utf-8', errors='replace')

    header: Optional[Tuple[int, int]] = None
    clauses: List[Clause] = []
    raw_count = 0
    current: List[int] = []

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith('c'):
            continue
        if line.startswith('%'):
            break
        if line.startswith('p'):
            if header is not None:
                raise CnfFormatError(f"Line {line_no}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != 'cnf':
                raise CnfFormatError(f"Line {line_no}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise CnfFormatError(f"Line {line_no}: malformed header {line!r}") from None
            if header[0] < 1 or header[1] < 1:
                raise CnfFormatError(f"Line {line_no}: header needs n >= 1 and m >= 1")
            continue
        if header is None:
            raise CnfFormatError(f"Line {line_no}: clause before 'p cnf' header")
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise CnfFormatError(f"Line {line_no}: bad literal {token!r}") from None
            if value == 0:
                if not current:
                    raise CnfFormatError(f"Line {line_no}: empty clause")
                raw_count += 1
                clause = _normalize_clause(current)
                if clause is None:
                    logger.warning(f"Dropping tautological clause {current}")
                else:
                    clauses.append(clause)
                current = []
                continue
            if abs(value) > header[0]:
                raise CnfFormatError(
                    f"Line {line_no}: literal {value} out of range 1..{header[0]}"
                )
            current.append(value)

    if header is None:
        raise CnfFormatError("Missing 'p cnf' header")
    if current:
        logger.warning("Final clause lacks a terminating 0; accepting it")
        raw_count += 1
        clause = _normalize_clause(current)
        if clause is not None:
            clauses.append(clause)
    if raw_count != header[1]:
        raise CnfFormatError(f"Header declares {header[1]} clauses, found {raw_count}")
    if not clauses:
        raise CnfFormatError("Every clause is a tautology")
    return CnfFormula(header[0], tuple(clauses))


def emit_dimacs(formula: CnfFormula, comments: Iterable[str] = ()) -> str:
    """Render a formula as DIMACS text"""
    lines = [f"c {comment}" for comment in comments]
    lines.append(f"p cnf {formula.num_vars} {formula.num_clauses}")
    for clause in formula.clauses:
        lines.append(" ".join(str(v) for v in clause.to_dimacs()) + " 0")
    return "\n".join(lines) + "\n"


class ClauseSampler:
    """
    Portable stream of random clauses.

    Consumes only the raw 64-bit output of numpy's PCG64 bit generator, so a
    seed yields the same formula on every platform and numpy release.
    Variables come from a partial Fisher-Yates shuffle over a persistent
    pool, bounded integers from rejection sampling, and the negation bits of
    a clause from one further raw word.
    """

    def __init__(self, seed: int):
        self._bitgen = np.random.PCG64(seed & _MASK64)

    def next_word(self) -> int:
        return int(self._bitgen.random_raw())

    def bounded(self, bound: int) -> int:
        """Uniform integer in [0, bound)"""
        limit = ((1 << 64) // bound) * bound
        while True:
            word = self.next_word()
            if word < limit:
                return word % bound

    def clause(self, pool: List[int], k: int) -> Clause:
        n = len(pool)
        for i in range(k):
            j = i + self.bounded(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        signs = self.next_word()
        return Clause(tuple(Literal(pool[i], bool((signs >> i) & 1)) for i in range(k)))


def random_kcnf(n: int, m: int, k: int, seed: int) -> CnfFormula:
    """Sample m clauses of k distinct variables out of n, each negated with probability 1/2"""
    if k < 1 or k > n:
        raise CnfFormatError(f"Clause width must satisfy 1 <= k <= n, got k={k}, n={n}")
    if k > 64:
        raise CnfFormatError(f"Clause width {k} exceeds the 64 sign bits of one draw")
    if m < 1:
        raise CnfFormatError(f"Need at least one clause, got m={m}")
    sampler = ClauseSampler(seed)
    pool = list(range(1, n + 1))
    clauses = tuple(sampler.clause(pool, k) for _ in range(m))
    return CnfFormula(n, clauses, k)


def splitmix64(value: int) -> int:
    """One SplitMix64 output for the given state"""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *parts: int) -> int:
    """Mix a base seed with integer coordinates into an independent seed"""
    state = splitmix64(seed & _MASK64)
    for part in parts:
        state = splitmix64(state ^ (part & _MASK64))
    return state


def evaluate(formula: CnfFormula, bits: Sequence[int]) -> bool:
    """Truth value of the formula under an assignment of all variables"""
    if len(bits) != formula.num_vars:
        raise CnfFormatError(f"Assignment has {len(bits)} bits, formula has {formula.num_vars} variables")
    return all(clause.evaluate(bits) for clause in formula.clauses)


def evaluate_batch(formula: CnfFormula, assignments: np.ndarray) -> np.ndarray:
    """Evaluate the formula on every row of an (S, n) 0/1 matrix"""
    assignments = np.asarray(assignments, dtype=bool)
    if assignments.ndim != 2 or assignments.shape[1] != formula.num_vars:
        raise CnfFormatError(f"Expected shape (S, {formula.num_vars}), got {assignments.shape}")
    result = np.ones(assignments.shape[0], dtype=bool)
    for clause in formula.clauses:
        satisfied = np.zeros(assignments.shape[0], dtype=bool)
        for lit in clause.literals:
            column = assignments[:, lit.variable - 1]
            satisfied |= ~column if lit.negated else column
        result &= satisfied
    return result


def phase_transition_m(n: int, k: int, ratio: Optional[float] = None) -> int:
    """Clause count at the satisfiability threshold, floor(ratio * n)"""
    if ratio is None:
        ratio = Settings.get_phase_transition_ratio(k)
        if ratio is None:
            raise CnfFormatError(f"No known threshold ratio for k={k}; pass one explicitly")
    if ratio <= 0:
        raise CnfFormatError(f"Ratio must be positive, got {ratio}")
    return max(1, math.floor(ratio * n))
