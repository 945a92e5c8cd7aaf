"""Source problems: 3-CNF satisfiability, quantified 3-CNF truth, and the
two-player formula game G2, each with a deliberately brute-force oracle.

The oracles are the trusted side of every equivalence check in this package,
so they stay exhaustive and simple: no unit propagation, no solver backends.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import FormulaError, ParseError

Var = Union[int, str]
Assignment = Dict[Var, bool]

MAX_TERM_LITERALS = 12


@dataclass(frozen=True)
class Literal:
    """A variable occurrence with a polarity.

    CNF/QBF literals use 1-based integer variables (DIMACS style); G2 literals
    use string variable names.
    """

    var: Var
    positive: bool = True

    def __post_init__(self):
        if isinstance(self.var, int) and self.var < 1:
            raise FormulaError(f"integer variables are 1-based, got {self.var}")

    @classmethod
    def from_dimacs(cls, lit: int) -> "Literal":
        if lit == 0:
            raise FormulaError("0 is a clause terminator, not a literal")
        return cls(abs(lit), lit > 0)

    def to_dimacs(self) -> int:
        if not isinstance(self.var, int):
            raise FormulaError("only integer-variable literals have a DIMACS form")
        return self.var if self.positive else -self.var

    def negated(self) -> "Literal":
        return Literal(self.var, not self.positive)

    def holds(self, assignment: Assignment) -> bool:
        if self.var not in assignment:
            raise FormulaError(f"assignment is missing variable {self.var!r}")
        return assignment[self.var] == self.positive

    def __str__(self) -> str:
        sign = "" if self.positive else "!"
        return f"{sign}{self.var}"


Clause = Tuple[Literal, Literal, Literal]


@dataclass
class CnfFormula:
    """A 3-CNF formula; every clause holds exactly three literals, padded by
    repeating the last literal when the source clause was shorter."""

    num_vars: int
    clauses: List[Clause] = field(default_factory=list)

    def __post_init__(self):
        if self.num_vars < 0:
            raise FormulaError("num_vars must be non-negative")
        for clause in self.clauses:
            if len(clause) != 3:
                raise FormulaError("every clause must hold exactly 3 literals")
            for lit in clause:
                if not isinstance(lit.var, int) or lit.var > self.num_vars:
                    raise FormulaError(f"literal {lit} outside declared variables")

    @property
    def variables(self) -> List[int]:
        return list(range(1, self.num_vars + 1))


class Quantifier(Enum):
    EXISTS = "e"
    FORALL = "a"


@dataclass
class QbfFormula:
    """A fully quantified 3-CNF formula; prefix is ordered outermost first."""

    prefix: List[Tuple[Quantifier, int]]
    matrix: CnfFormula

    def __post_init__(self):
        seen = set()
        for _, var in self.prefix:
            if var in seen:
                raise FormulaError(f"variable {var} quantified twice")
            seen.add(var)
        for clause in self.matrix.clauses:
            for lit in clause:
                if lit.var not in seen:
                    raise FormulaError(f"variable {lit.var} is free (not quantified)")

    def num_universal(self) -> int:
        return sum(1 for q, _ in self.prefix if q is Quantifier.FORALL)

    def num_existential(self) -> int:
        return sum(1 for q, _ in self.prefix if q is Quantifier.EXISTS)


@dataclass
class DnfFormula:
    """A disjunction of conjunctive terms, each holding 1 to 12 literals."""

    terms: List[List[Literal]]

    def __post_init__(self):
        if not self.terms:
            raise FormulaError("a DNF formula needs at least one term")
        for term in self.terms:
            if not term:
                raise FormulaError("empty DNF term")
            if len(term) > MAX_TERM_LITERALS:
                raise FormulaError(
                    f"term has {len(term)} literals, maximum is {MAX_TERM_LITERALS}"
                )

    @property
    def variables(self) -> List[Var]:
        out = []
        for term in self.terms:
            for lit in term:
                if lit.var not in out:
                    out.append(lit.var)
        return out


class Side(Enum):
    PLAYER = "player"
    OPPONENT = "opponent"

    def other(self) -> "Side":
        return Side.OPPONENT if self is Side.PLAYER else Side.PLAYER


@dataclass
class G2Setup:
    """A G2 instance: one DNF target per side, a variable ownership partition,
    and initial values covering exactly the variables the formulas mention."""

    player_formula: DnfFormula
    opponent_formula: DnfFormula
    ownership: Dict[Var, Side]
    initial_values: Dict[Var, bool]

    def __post_init__(self):
        used = set(self.player_formula.variables) | set(self.opponent_formula.variables)
        owned = set(self.ownership)
        if owned != used:
            missing = used - owned
            extra = owned - used
            detail = []
            if missing:
                detail.append(f"unowned: {sorted(map(str, missing))}")
            if extra:
                detail.append(f"owned but unused: {sorted(map(str, extra))}")
            raise FormulaError("ownership must cover exactly the formula variables; " + "; ".join(detail))
        if set(self.initial_values) != used:
            raise FormulaError("initial values must cover exactly the formula variables")

    def variables(self, side: Side) -> List[Var]:
        return [v for v in sorted(self.ownership, key=str) if self.ownership[v] is side]


# ---------------------------------------------------------------------------
# parsing


def _dimacs_lines(text: str) -> Iterator[Tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield lineno, line


def _parse_clause_tokens(tokens: Sequence[str], lineno: int, num_vars: int) -> Clause:
    lits: List[Literal] = []
    for tok in tokens:
        try:
            value = int(tok)
        except ValueError:
            raise ParseError(f"bad literal {tok!r}", lineno)
        if value == 0:
            break
        lits.append(Literal.from_dimacs(value))
    else:
        raise ParseError("clause line is not 0-terminated", lineno)
    if not lits:
        raise ParseError("empty clause", lineno)
    if len(lits) > 3:
        raise ParseError(f"clause has {len(lits)} literals, maximum is 3", lineno)
    for lit in lits:
        if lit.var > num_vars:
            raise ParseError(f"variable {lit.var} out of range (header says {num_vars})", lineno)
    while len(lits) < 3:
        lits.append(lits[-1])
    return (lits[0], lits[1], lits[2])


def parse_cnf(text: str) -> CnfFormula:
    """Parse a DIMACS CNF document ("p cnf V C" header, 0-terminated clause
    lines, "c" comment lines). Short clauses are padded to three literals by
    repeating the last literal."""
    num_vars: Optional[int] = None
    declared = 0
    clauses: List[Clause] = []
    for lineno, line in _dimacs_lines(text):
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise ParseError("header must be 'p cnf <vars> <clauses>'", lineno)
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        clauses.append(_parse_clause_tokens(line.split(), lineno, num_vars))
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    if len(clauses) != declared:
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, clauses)


def parse_qbf(text: str) -> QbfFormula:
    """Parse a QDIMACS document: quantifier lines 'e ... 0' / 'a ... 0' after
    the header, outermost first, then clause lines."""
    num_vars: Optional[int] = None
    declared = 0
    prefix: List[Tuple[Quantifier, int]] = []
    clauses: List[Clause] = []
    in_clauses = False
    for lineno, line in _dimacs_lines(text):
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("header must be 'p cnf <vars> <clauses>'", lineno)
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ParseError("content before 'p cnf' header", lineno)
        kind = line.split(None, 1)[0]
        if kind in ("e", "a"):
            if in_clauses:
                raise ParseError("quantifier line after clauses", lineno)
            tokens = line.split()[1:]
            if not tokens or tokens[-1] != "0":
                raise ParseError("quantifier line is not 0-terminated", lineno)
            for tok in tokens[:-1]:
                var = int(tok)
                if var < 1 or var > num_vars:
                    raise ParseError(f"variable {var} out of range", lineno)
                if any(v == var for _, v in prefix):
                    raise ParseError(f"variable {var} quantified twice", lineno)
                prefix.append((Quantifier(kind), var))
            continue
        in_clauses = True
        clauses.append(_parse_clause_tokens(line.split(), lineno, num_vars))
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    if len(clauses) != declared:
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    quantified = {v for _, v in prefix}
    for clause in clauses:
        for lit in clause:
            if lit.var not in quantified:
                raise ParseError(f"variable {lit.var} is never quantified")
    return QbfFormula(prefix, CnfFormula(num_vars, clauses))


def parse_dnf(text: str) -> DnfFormula:
    """Parse DNF syntax: terms joined by '|', literals by '&', negation '!'."""
    terms: List[List[Literal]] = []
    for chunk in text.split("|"):
        term: List[Literal] = []
        for tok in chunk.split("&"):
            tok = tok.strip()
            if not tok:
                raise ParseError(f"empty literal in term {chunk.strip()!r}")
            positive = True
            while tok.startswith("!"):
                positive = not positive
                tok = tok[1:].strip()
            if not tok.isidentifier():
                raise ParseError(f"bad variable name {tok!r}")
            term.append(Literal(tok, positive))
        terms.append(term)
    try:
        return DnfFormula(terms)
    except FormulaError as exc:
        raise ParseError(str(exc)) from exc


def parse_g2(text: str) -> G2Setup:
    """Parse a G2 setup: 'player:' and 'opponent:' DNF lines, 'owns player:'
    and 'owns opponent:' variable lists, and an 'init:' line of var=0/1."""
    player = opponent = None
    ownership: Dict[Var, Side] = {}
    initial: Dict[Var, bool] = {}
    seen_init = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered.startswith("owns player:") or lowered.startswith("owns opponent:"):
            side = Side.PLAYER if "player" in lowered.split(":", 1)[0] else Side.OPPONENT
            for name in line.split(":", 1)[1].split():
                if name in ownership:
                    raise ParseError(f"variable {name!r} owned twice", lineno)
                ownership[name] = side
        elif lowered.startswith("player:"):
            player = parse_dnf(line.split(":", 1)[1])
        elif lowered.startswith("opponent:"):
            opponent = parse_dnf(line.split(":", 1)[1])
        elif lowered.startswith("init:"):
            seen_init = True
            for pair in line.split(":", 1)[1].split():
                if "=" not in pair:
                    raise ParseError(f"bad init entry {pair!r}", lineno)
                name, value = pair.split("=", 1)
                if value not in ("0", "1"):
                    raise ParseError(f"init value must be 0 or 1, got {value!r}", lineno)
                initial[name.strip()] = value == "1"
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno)
    if player is None or opponent is None:
        raise ParseError("both 'player:' and 'opponent:' formulas are required")
    if not seen_init:
        raise ParseError("missing 'init:' line")
    try:
        return G2Setup(player, opponent, ownership, initial)
    except FormulaError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# evaluation


def eval_clause(clause: Sequence[Literal], assignment: Assignment) -> bool:
    return any(lit.holds(assignment) for lit in clause)


def _require_total(variables: Iterator, assignment: Assignment) -> None:
    for var in variables:
        if var not in assignment:
            raise FormulaError(f"assignment is missing variable {var!r}")


def eval_cnf(formula: CnfFormula, assignment: Assignment) -> bool:
    """True iff every clause has at least one true literal; the assignment
    must cover every variable the clauses mention."""
    _require_total((lit.var for clause in formula.clauses for lit in clause), assignment)
    return all(eval_clause(clause, assignment) for clause in formula.clauses)


def eval_term(term: Sequence[Literal], assignment: Assignment) -> bool:
    if not term:
        raise FormulaError("empty DNF term")
    return all(lit.holds(assignment) for lit in term)


def eval_dnf(formula: DnfFormula, assignment: Assignment) -> bool:
    """True iff some term has all literals true; the assignment must cover
    every variable the formula mentions."""
    _require_total(iter(formula.variables), assignment)
    return any(eval_term(term, assignment) for term in formula.terms)


# ---------------------------------------------------------------------------
# oracles


def tqbf_oracle(formula: QbfFormula) -> bool:
    """Decide a quantified formula by recursive expansion; universal branches
    visit the positive value before the negative one."""

    def expand(index: int, assignment: Assignment) -> bool:
        if index == len(formula.prefix):
            return eval_cnf(formula.matrix, assignment)
        quant, var = formula.prefix[index]
        for value in (True, False):
            assignment[var] = value
            result = expand(index + 1, assignment)
            del assignment[var]
            if quant is Quantifier.EXISTS and result:
                return True
            if quant is Quantifier.FORALL and not result:
                return False
        return quant is Quantifier.FORALL

    return expand(0, {})


def sat_assignments(formula: CnfFormula) -> Iterator[Assignment]:
    """Yield every satisfying assignment, exhaustively over 2^num_vars."""
    variables = formula.variables
    for bits in itertools.product((True, False), repeat=len(variables)):
        assignment = dict(zip(variables, bits))
        if eval_cnf(formula, assignment):
            yield assignment


def sat_oracle(formula: CnfFormula) -> Optional[Assignment]:
    """Return some satisfying assignment, or None when unsatisfiable."""
    for assignment in sat_assignments(formula):
        return assignment
    return None


GameNode = Tuple[Tuple[bool, ...], Side]


def _g2_moves(setup: G2Setup, variables: List[Var], values: Tuple[bool, ...],
              side: Side) -> List[Tuple[bool, ...]]:
    moves = [values]  # passing is always allowed
    for i, var in enumerate(variables):
        if setup.ownership[var] is side:
            flipped = list(values)
            flipped[i] = not flipped[i]
            moves.append(tuple(flipped))
    return moves


def _g2_arrival(setup: G2Setup, variables: List[Var], values: Tuple[bool, ...],
                mover: Side) -> Optional[Side]:
    """Winner when `mover` just produced `values`, or None if play continues.
    The mover's formula is checked first."""
    assignment = dict(zip(variables, values))
    first = setup.player_formula if mover is Side.PLAYER else setup.opponent_formula
    second = setup.opponent_formula if mover is Side.PLAYER else setup.player_formula
    if eval_dnf(first, assignment):
        return mover
    if eval_dnf(second, assignment):
        return mover.other()
    return None


def g2_win_region(setup: G2Setup) -> Dict[GameNode, Tuple[bool, ...]]:
    """Least-fixpoint attractor of Player wins.

    Returns, for every node from which Player forces a win, one witnessing
    move (the successor value vector for Player nodes; an arbitrary entry for
    Opponent nodes). Infinite play is not a Player win, so nodes outside the
    region include all draws.
    """
    variables = sorted(setup.ownership, key=str)
    nodes: List[GameNode] = [
        (values, side)
        for values in itertools.product((False, True), repeat=len(variables))
        for side in (Side.PLAYER, Side.OPPONENT)
    ]
    winning: Dict[GameNode, Tuple[bool, ...]] = {}
    changed = True
    while changed:
        changed = False
        for node in nodes:
            if node in winning:
                continue
            values, side = node
            outcomes = []
            for move in _g2_moves(setup, variables, values, side):
                winner = _g2_arrival(setup, variables, move, side)
                if winner is Side.PLAYER:
                    outcomes.append((move, True))
                elif winner is Side.OPPONENT:
                    outcomes.append((move, False))
                else:
                    outcomes.append((move, (move, side.other()) in winning))
            if side is Side.PLAYER:
                for move, won in outcomes:
                    if won:
                        winning[node] = move
                        changed = True
                        break
            else:
                if all(won for _, won in outcomes):
                    winning[node] = outcomes[0][0]
                    changed = True
    return winning


def g2_oracle(setup: G2Setup) -> bool:
    """True iff Player 1 forces a finite win from the initial values."""
    variables = sorted(setup.ownership, key=str)
    initial = tuple(setup.initial_values[v] for v in variables)
    return (initial, Side.PLAYER) in g2_win_region(setup)
