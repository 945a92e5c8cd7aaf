"""Equivalence sweeps: enumerate source problems up to size bounds, reduce
them, solve the reductions, and compare against the brute-force oracles."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

from .errors import CapExceeded
from .formula import (
    CnfFormula,
    DnfFormula,
    G2Setup,
    Literal,
    QbfFormula,
    Quantifier,
    Side,
    g2_oracle,
    sat_oracle,
    tqbf_oracle,
)
from .engine import solve_always, solve_deterministic
from .reducer import Variant, reduce_problem


@dataclass
class SweepRecord:
    variant: str
    description: str
    oracle: bool
    solved: Optional[bool]  # None when the state cap was hit
    agree: bool


@dataclass
class SweepResult:
    variant: str
    records: List[SweepRecord]

    @property
    def checked(self) -> int:
        return len(self.records)

    @property
    def mismatches(self) -> List[SweepRecord]:
        return [r for r in self.records if not r.agree]

    @property
    def cap_hits(self) -> int:
        return sum(1 for r in self.records if r.solved is None)


# ---------------------------------------------------------------------------
# instance enumeration


def clause_types(num_vars: int) -> List[Tuple[int, int, int]]:
    """All 3-literal clause multisets over +-1..num_vars, as sorted DIMACS
    triples."""
    literals = [v for var in range(1, num_vars + 1) for v in (var, -var)]
    return sorted(set(itertools.combinations_with_replacement(sorted(literals), 3)))


def _clause(triple: Sequence[int]) -> Tuple[Literal, Literal, Literal]:
    a, b, c = (Literal.from_dimacs(x) for x in triple)
    return (a, b, c)


def enumerate_cnf(max_vars: int, max_clauses: int) -> Iterator[CnfFormula]:
    """Every 3-CNF formula with up to max_vars variables and max_clauses
    clauses, deduplicated up to clause order (clause multisets); the variable
    count is the highest variable used (1 for the empty formula)."""
    yield CnfFormula(1, [])
    types = clause_types(max_vars)
    for count in range(1, max_clauses + 1):
        for combo in itertools.combinations_with_replacement(types, count):
            num_vars = max(abs(x) for triple in combo for x in triple)
            yield CnfFormula(num_vars, [_clause(t) for t in combo])


def enumerate_qbf(max_vars: int, max_clauses: int) -> Iterator[QbfFormula]:
    """Every QBF with 1..max_vars quantified variables (in canonical order;
    renamings are covered by matrix enumeration) and up to max_clauses
    clauses over those variables, including the empty matrix."""
    for num_vars in range(1, max_vars + 1):
        types = clause_types(num_vars)
        matrices: List[List] = [[]]
        for count in range(1, max_clauses + 1):
            matrices.extend(
                [_clause(t) for t in combo]
                for combo in itertools.combinations_with_replacement(types, count)
            )
        for pattern in itertools.product((Quantifier.EXISTS, Quantifier.FORALL), repeat=num_vars):
            prefix = list(zip(pattern, range(1, num_vars + 1)))
            for matrix in matrices:
                yield QbfFormula(prefix, CnfFormula(num_vars, list(matrix)))


def _terms_over(variables: Sequence[str]) -> List[List[Literal]]:
    """Every nonempty single term over the variables: each variable absent,
    positive, or negative."""
    terms = []
    for combo in itertools.product((None, True, False), repeat=len(variables)):
        term = [Literal(v, pol) for v, pol in zip(variables, combo) if pol is not None]
        if term:
            terms.append(term)
    return terms


def enumerate_g2(max_vars_per_side: int = 1, terms_per_formula: int = 1) -> Iterator[G2Setup]:
    """G2 setups with up to one variable per side and one term per formula:
    all term pairs over the owned variables, all initial values."""
    if max_vars_per_side != 1 or terms_per_formula != 1:
        raise ValueError("only the 1-variable-per-side, 1-term sweep is supported")
    configs = [
        (("a",), ("b",)),  # one variable each
        (("a",), ()),      # opponent owns nothing
        ((), ("b",)),      # player owns nothing
    ]
    for player_vars, opponent_vars in configs:
        all_vars = list(player_vars) + list(opponent_vars)
        terms = _terms_over(all_vars)
        for p_term in terms:
            for o_term in terms:
                used = {lit.var for lit in p_term} | {lit.var for lit in o_term}
                ownership = {v: Side.PLAYER for v in player_vars if v in used}
                ownership.update({v: Side.OPPONENT for v in opponent_vars if v in used})
                if set(ownership) != used:
                    continue
                for bits in itertools.product((False, True), repeat=len(used)):
                    init = dict(zip(sorted(used), bits))
                    yield G2Setup(DnfFormula([list(p_term)]), DnfFormula([list(o_term)]),
                                  dict(ownership), init)


# ---------------------------------------------------------------------------
# sweeping


def _describe(problem) -> str:
    if isinstance(problem, CnfFormula):
        return "cnf[" + " ".join(
            ",".join(str(l.to_dimacs()) for l in cl) for cl in problem.clauses
        ) + f"]v{problem.num_vars}"
    if isinstance(problem, QbfFormula):
        prefix = "".join(("E" if q is Quantifier.EXISTS else "A") + str(v) for q, v in problem.prefix)
        return prefix + "." + _describe(problem.matrix)
    if isinstance(problem, G2Setup):
        def fmt(dnf):
            return "|".join("&".join(str(l) for l in t) for t in dnf.terms)
        init = ",".join(f"{v}={int(problem.initial_values[v])}" for v in sorted(problem.initial_values))
        return f"g2[{fmt(problem.player_formula)} vs {fmt(problem.opponent_formula)}; {init}]"
    return repr(problem)


def _oracle_for(variant: Variant, problem) -> bool:
    if variant is Variant.ABPD:
        return sat_oracle(problem) is not None
    if variant in (Variant.ABED, Variant.ABPS):
        return tqbf_oracle(problem)
    return g2_oracle(problem)


def check_instance(variant: Variant, problem, state_cap: int = 2_000_000) -> SweepRecord:
    expected = _oracle_for(variant, problem)
    reduction = reduce_problem(variant, problem)
    try:
        if variant in (Variant.ABPD, Variant.ABED):
            solved = solve_deterministic(reduction, state_cap=state_cap)[0]
        else:
            solved = solve_always(reduction, state_cap=state_cap)
    except CapExceeded:
        return SweepRecord(variant.value, _describe(problem), expected, None, False)
    return SweepRecord(variant.value, _describe(problem), expected, solved, solved == expected)


def sweep(
    variant: Variant,
    problems: Iterable,
    state_cap: int = 2_000_000,
    stop_on_mismatch: bool = False,
    progress: Optional[Callable[[int], None]] = None,
) -> SweepResult:
    records = []
    for i, problem in enumerate(problems):
        record = check_instance(variant, problem, state_cap)
        records.append(record)
        if progress is not None and (i + 1) % 1000 == 0:
            progress(i + 1)
        if stop_on_mismatch and not record.agree:
            break
    return SweepResult(variant.value, records)


def problems_for(variant: Variant, max_vars: int, max_clauses: int) -> Iterator:
    if variant is Variant.ABPD:
        return enumerate_cnf(max_vars, max_clauses)
    if variant in (Variant.ABED, Variant.ABPS):
        return enumerate_qbf(max_vars, max_clauses)
    return enumerate_g2()


# ---------------------------------------------------------------------------
# random instances (scaling and monotonicity checks)


def random_cnf(rng: random.Random, num_vars: int, num_clauses: int) -> CnfFormula:
    clauses = []
    for _ in range(num_clauses):
        clauses.append(tuple(
            Literal(rng.randint(1, num_vars), rng.random() < 0.5) for _ in range(3)
        ))
    return CnfFormula(num_vars, clauses)


def random_qbf(rng: random.Random, num_vars: int, num_clauses: int) -> QbfFormula:
    prefix = [
        (rng.choice((Quantifier.EXISTS, Quantifier.FORALL)), v)
        for v in range(1, num_vars + 1)
    ]
    return QbfFormula(prefix, random_cnf(rng, num_vars, num_clauses))


def random_g2(rng: random.Random) -> G2Setup:
    names = ["p", "q"]
    def term():
        out = []
        for v in names:
            pol = rng.choice((None, True, False))
            if pol is not None:
                out.append(Literal(v, pol))
        return out or [Literal(rng.choice(names), True)]
    player, opponent = term(), term()
    used = {l.var for l in player} | {l.var for l in opponent}
    ownership = {v: (Side.PLAYER if v == "p" else Side.OPPONENT) for v in names if v in used}
    init = {v: rng.random() < 0.5 for v in used}
    return G2Setup(DnfFormula([player]), DnfFormula([opponent]), ownership, init)


def measure_scaling(
    sizes: Sequence[int], samples: int = 4, seed: int = 7
) -> List[Tuple[int, float, float]]:
    """Average gate and total size (gates + tunnels) of ABED reductions over
    random QBFs where size n splits into variables + clauses."""
    rng = random.Random(seed)
    rows = []
    for n in sizes:
        gate_counts, totals = [], []
        for _ in range(samples):
            num_vars = max(1, n // 2)
            num_clauses = max(0, n - num_vars)
            reduction = reduce_problem(Variant.ABED, random_qbf(rng, num_vars, num_clauses))
            gate_counts.append(reduction.gate_count())
            totals.append(reduction.size())
        rows.append((n, sum(gate_counts) / samples, sum(totals) / samples))
    return rows


def fit_power_law(rows: Sequence[Tuple[int, float]]) -> Tuple[float, float]:
    """Least-squares fit of count ~ a * n^b in log space; returns (a, b)."""
    import math

    xs = [math.log(n) for n, _ in rows]
    ys = [math.log(c) for _, c in rows]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    b = sxy / sxx if sxx else 0.0
    a = math.exp(my - b * mx)
    return a, b
