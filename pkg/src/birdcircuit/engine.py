"""Execute shot strategies against a reduction and decide solvability.

Deterministic variants are decided by a shortest-win search over reachable
gate-position states; stochastic variants by AND-OR search where every
Random-gate resolution (left, right, stuck) is an adversarial branch.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import CapExceeded, EngineError, StrategyError
from .formula import Literal, QbfFormula, Quantifier
from .gates import (
    OUT_PIG,
    OUT_TRAPPED,
    BirdOutcome,
    GateState,
    Phase,
    Position,
    Resolver,
)
from .reducer import ReductionOutput, Variant

DEFAULT_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class SimState:
    """Complete dynamic state of a level between shots."""

    gate_positions: Mapping[str, GateState]
    birds_remaining: int
    pig_alive: bool = True
    doomed: bool = False

    @property
    def ordering_phase(self) -> Optional[Phase]:
        for value in self.gate_positions.values():
            if isinstance(value, Phase):
                return value
        return None

    def serialize(self) -> str:
        cells = []
        for gid in sorted(self.gate_positions):
            value = self.gate_positions[gid]
            if isinstance(value, Phase):
                code = {"ready": "P", "moved": "B", "opp_moved": "C"}[value.value]
            else:
                code = "O" if value is Position.OPEN else "X"
            cells.append(f"{gid}={code}")
        flags = f"birds={self.birds_remaining};pig={int(self.pig_alive)};doomed={int(self.doomed)}"
        return ";".join(cells) + ";" + flags

    def state_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:12]


@dataclass(frozen=True)
class Shot:
    target: str


@dataclass(frozen=True)
class Outcome:
    result: str  # "win" | "loss" | "ongoing"
    shots_used: int
    final: SimState


StepFn = Callable[[SimState, ReductionOutput], Optional[str]]


class StrategyScript:
    """A replayable strategy: fresh() yields an independent step function so
    the same script can be run against many resolution branches."""

    def __init__(self, factory: Callable[[], StepFn]):
        self._factory = factory

    def fresh(self) -> StepFn:
        return self._factory()


Strategy = Union[Sequence[str], StepFn, StrategyScript]


# ---------------------------------------------------------------------------
# firing and running


def initial_sim(reduction: ReductionOutput, resolver: Optional[Resolver] = None) -> SimState:
    """Level state before the first shot; resolves any construction-time
    random events (these consume resolver decisions but no birds)."""
    cc = reduction.circuit.compiled()
    working = list(cc.encode_state(reduction.initial_positions))
    for port in reduction.initial_events:
        cc.run(working, cc.port_id[port], resolver)
    positions = cc.decode_state(working)
    return SimState(
        gate_positions=positions,
        birds_remaining=reduction.bird_budget,
        pig_alive=True,
        doomed=_is_doomed(reduction, positions),
    )


def _is_doomed(reduction: ReductionOutput, positions: Mapping[str, GateState]) -> bool:
    return any(positions[g] is Position.CLOSED for g in reduction.doom_gates)


def fire(
    reduction: ReductionOutput,
    sim: SimState,
    shot: Union[Shot, str],
    resolver: Optional[Resolver] = None,
) -> Tuple[SimState, BirdOutcome]:
    """Fire one bird at a named entrance; returns the successor state."""
    target = shot.target if isinstance(shot, Shot) else shot
    if sim.birds_remaining <= 0:
        raise EngineError("no birds left")
    if not sim.pig_alive:
        raise EngineError("the pig is already dead")
    cc = reduction.circuit.compiled()
    pid = cc.entrance_ids.get(target)
    if pid is None:
        raise EngineError(f"unknown shot target {target!r}")
    working = list(cc.encode_state(sim.gate_positions))
    code, detail = cc.run(working, pid, resolver)
    positions = cc.decode_state(working)
    outcome = cc.outcome(code, detail)
    return (
        SimState(
            gate_positions=positions,
            birds_remaining=sim.birds_remaining - 1,
            pig_alive=sim.pig_alive and code != OUT_PIG,
            doomed=sim.doomed or _is_doomed(reduction, positions),
        ),
        outcome,
    )


def run_strategy(
    reduction: ReductionOutput,
    strategy: Strategy,
    resolver: Optional[Resolver] = None,
    transcript: Optional[List[Tuple[str, BirdOutcome, str]]] = None,
) -> Outcome:
    """Fold fire over a strategy until a win, a guaranteed loss, bird
    exhaustion, or the strategy running dry."""
    if isinstance(strategy, StrategyScript):
        step: StepFn = strategy.fresh()
    elif callable(strategy):
        step = strategy
    else:
        shots = iter(list(strategy))
        step = lambda sim, r: next(shots, None)

    sim = initial_sim(reduction, resolver)
    used = 0
    while True:
        if not sim.pig_alive:
            return Outcome("win", used, sim)
        if sim.doomed or sim.birds_remaining == 0:
            return Outcome("loss", used, sim)
        target = step(sim, reduction)
        if target is None:
            return Outcome("ongoing", used, sim)
        sim, outcome = fire(reduction, sim, target, resolver)
        used += 1
        if transcript is not None:
            transcript.append((target, outcome, sim.state_hash()))


def load_strategy_file(text: str) -> List[str]:
    """Strategy files hold one shot-target name per line; '#' comments."""
    shots = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            shots.append(line)
    return shots


# ---------------------------------------------------------------------------
# deterministic solving: shortest winning shot sequence


def solve_deterministic(
    reduction: ReductionOutput,
    budget: Optional[int] = None,
    state_cap: int = DEFAULT_STATE_CAP,
    prune_trapped: bool = True,
) -> Tuple[bool, Optional[List[str]]]:
    """Breadth-first shortest-win search over gate-position states.

    Sound for ABPD/ABED only (no Random gates).  Shots whose bird is trapped
    are skipped by default: in these constructions every productive bird ends
    in a sink, so trapped shots only burn gates and birds (the oracle
    equivalence sweeps exercise this assumption across the full instance
    space; disable the flag to search every shot).
    """
    if reduction.variant not in (Variant.ABPD, Variant.ABED):
        raise EngineError("solve_deterministic applies to deterministic variants only")
    if reduction.initial_events:
        raise EngineError("deterministic reduction has unresolved random events")
    budget = reduction.bird_budget if budget is None else budget
    cc = reduction.circuit.compiled()
    start = cc.encode_state(reduction.initial_positions)
    doom_idx = [cc.state_index[g] for g in reduction.doom_gates]
    if any(start[i] == 0 for i in doom_idx):
        return False, None

    entrance_items = list(cc.entrance_ids.items())
    parents: Dict[Tuple[int, ...], Tuple[Optional[Tuple[int, ...]], Optional[str]]] = {start: (None, None)}
    frontier = [start]
    depth = 0
    while frontier and depth < budget:
        depth += 1
        nxt: List[Tuple[int, ...]] = []
        for state in frontier:
            for name, pid in entrance_items:
                working = list(state)
                code, _ = cc.run(working, pid)
                if code == OUT_PIG:
                    witness = [name]
                    cursor = state
                    while parents[cursor][1] is not None:
                        cursor, shot = parents[cursor][0], parents[cursor][1]
                        witness.append(shot)
                    witness.reverse()
                    return True, witness
                if code == OUT_TRAPPED and prune_trapped:
                    continue
                successor = tuple(working)
                if successor == state or successor in parents:
                    continue
                if any(successor[i] == 0 for i in doom_idx):
                    continue
                parents[successor] = (state, name)
                if len(parents) > state_cap:
                    raise CapExceeded(f"deterministic search exceeded {state_cap} states")
                nxt.append(successor)
        frontier = nxt
    return False, None


# ---------------------------------------------------------------------------
# adversarial solving: AND-OR over resolutions


def solve_always(
    reduction: ReductionOutput,
    budget: Optional[int] = None,
    state_cap: int = DEFAULT_STATE_CAP,
) -> bool:
    """True iff the player wins on every Random-gate resolution branch within
    the bird budget: player shots are OR nodes, resolutions AND branches."""
    if reduction.variant not in (Variant.ABPS, Variant.ABES):
        raise EngineError("solve_always applies to stochastic variants only")
    budget = reduction.bird_budget if budget is None else budget
    cc = reduction.circuit.compiled()
    doom_idx = [cc.state_index[g] for g in reduction.doom_gates]
    entrance_items = list(cc.entrance_ids.items())
    memo_fail: Dict[Tuple[int, ...], int] = {}
    memo_win: Dict[Tuple[int, ...], int] = {}

    def check_cap():
        if len(memo_fail) + len(memo_win) > state_cap:
            raise CapExceeded(f"adversarial search exceeded {state_cap} states")

    def wins(state: Tuple[int, ...], birds: int) -> bool:
        if any(state[i] == 0 for i in doom_idx):
            return False
        if birds <= 0:
            return False
        if birds <= memo_fail.get(state, 0):
            return False
        won_at = memo_win.get(state)
        if won_at is not None and birds >= won_at:
            return True
        for _, pid in entrance_items:
            branches = cc.run_branching(state, pid)
            # skip pure no-op shots (every branch keeps the state, no pig)
            if all(code != OUT_PIG and nxt == state for _, code, _, nxt in branches):
                continue
            if all(
                code == OUT_PIG or wins(nxt, birds - 1)
                for _, code, _, nxt in branches
            ):
                memo_win[state] = min(birds, memo_win.get(state, birds))
                check_cap()
                return True
        memo_fail[state] = max(birds, memo_fail.get(state, 0))
        check_cap()
        return False

    start = cc.encode_state(reduction.initial_positions)
    starts: List[Tuple[int, ...]] = [start]
    for port in reduction.initial_events:
        pid = cc.port_id[port]
        expanded: List[Tuple[int, ...]] = []
        for state in starts:
            for _, code, _, nxt in cc.run_branching(state, pid):
                if code == OUT_PIG:
                    raise EngineError("construction-time bird reached the pig")
                expanded.append(nxt)
        starts = expanded
    return all(wins(state, budget) for state in starts)


# ---------------------------------------------------------------------------
# scripted strategies


AssignmentPolicy = Mapping  # var -> bool
ExistentialPolicy = Callable[[object, Dict[object, bool]], bool]


def _clause_check_shot(gid: str, literals: Sequence[Literal], assignment: Mapping) -> str:
    for slot, lit in enumerate(literals, start=1):
        if lit.holds(assignment):
            return f"{gid}.check{slot}"
    raise StrategyError(f"clause {gid} is unsatisfied; no checkable slot")


def script_abpd(reduction: ReductionOutput, assignment: AssignmentPolicy) -> List[str]:
    """Set every variable per the assignment, then check each clause."""
    formula = reduction.source
    shots: List[str] = []
    for var, gid in zip(formula.variables, reduction.roles["chain"]):
        if assignment[var]:
            shots += [f"{gid}.set_pos", f"{gid}.check_pos"]
        else:
            shots += [f"{gid}.set_neg", f"{gid}.check_neg"]
    for gid, clause in zip(reduction.roles["clauses"], formula.clauses):
        shots.append(_clause_check_shot(gid, clause, assignment))
    return shots


def script_abed(reduction: ReductionOutput, policy: ExistentialPolicy) -> List[str]:
    """Full framework run: one cycle per universal value combination, then
    the pass through the finish gadget.  `policy(var, universal_values)`
    chooses each existential value when its gadget is enabled."""
    formula: QbfFormula = reduction.source
    main = reduction.roles["main_chain"]
    clause_ids = reduction.roles["clauses"]
    uqf_order = reduction.roles["uqf_order"]
    universals = [var for _, quant, var in main if quant is Quantifier.FORALL]
    uqf_vars = {gid: reduction.blueprint(gid).params["var"] for gid in uqf_order}

    values: Dict[object, bool] = {}
    assignment: Dict[object, bool] = {}
    shots: List[str] = []

    def walk(from_index: int) -> None:
        for gid, quant, var in main[from_index:]:
            if quant is Quantifier.EXISTS:
                choice = bool(policy(var, dict(assignment)))
                assignment[var] = choice
                shots.extend(
                    [f"{gid}.set_pos", f"{gid}.check_pos"]
                    if choice
                    else [f"{gid}.set_neg", f"{gid}.check_neg"]
                )
            else:
                values[var] = True
                assignment[var] = True
                shots.append(f"{gid}.check")

    walk(0)
    while True:
        for gid, clause in zip(clause_ids, formula.matrix.clauses):
            shots.append(_clause_check_shot(gid, clause, assignment))
        if not universals:
            return shots
        if not any(values[u] for u in universals):
            shots.append("uqf_first.enable")
            shots.extend(f"{gid}.next" for gid in uqf_order)
            return shots
        shots.append("uqf_first.enable")
        for gid in uqf_order:
            var = uqf_vars[gid]
            if values[var]:
                shots += [f"{gid}.set_neg", f"{gid}.check_adj"]
                values[var] = False
                assignment[var] = False
                uqt_index = next(i for i, (g, _, v) in enumerate(main) if v == var)
                walk(uqt_index + 1)
                break
            shots.append(f"{gid}.next")


def script_abps(reduction: ReductionOutput, policy: ExistentialPolicy) -> StrategyScript:
    """Single pass down the chain, reading resolved universal values off the
    level state so existential choices can adapt to them."""
    formula: QbfFormula = reduction.source
    main = reduction.roles["main_chain"]
    clause_ids = reduction.roles["clauses"]

    def factory() -> StepFn:
        plan: List[Tuple] = []
        for gid, quant, var in main:
            plan.append(("quant", gid, quant, var))
        for gid, clause in zip(clause_ids, formula.matrix.clauses):
            plan.append(("clause", gid, clause))
        pending: List[str] = []
        assignment: Dict[object, bool] = {}
        index = 0

        def step(sim: SimState, r: ReductionOutput) -> Optional[str]:
            nonlocal index
            if pending:
                return pending.pop(0)
            while index < len(plan):
                item = plan[index]
                index += 1
                if item[0] == "quant":
                    _, gid, quant, var = item
                    if quant is Quantifier.EXISTS:
                        choice = bool(policy(var, dict(assignment)))
                        assignment[var] = choice
                        pending.extend(
                            [f"{gid}.set_pos", f"{gid}.check_pos"]
                            if choice
                            else [f"{gid}.set_neg", f"{gid}.check_neg"]
                        )
                    else:
                        observed = r.var_value(sim.gate_positions, var)
                        assignment[var] = bool(observed)
                        pending.append(f"{gid}.check")
                else:
                    _, gid, clause = item
                    # universal outcomes may have changed after this plan was
                    # drawn up, so refresh them from the live state
                    for _, quant, var in main:
                        if quant is Quantifier.FORALL:
                            assignment[var] = bool(r.var_value(sim.gate_positions, var))
                    try:
                        pending.append(_clause_check_shot(gid, clause, assignment))
                    except StrategyError:
                        return None
                return pending.pop(0)
            return None

        return step

    return StrategyScript(factory)


G2Move = Tuple  # ("move", var, value) | ("pass",) | ("opp",) | ("check_opp",) | ("check_self",)


def script_abes(reduction: ReductionOutput, moves: Sequence[G2Move]) -> StrategyScript:
    """Expand abstract game moves into shots.  A ("move", var, value) step
    opens the choice gates in front of the literal and then fires the move
    bird; a ("pass",) step selects a literal that is already true."""
    choice_literals: List[Literal] = reduction.roles["choice_literals"]

    def factory() -> StepFn:
        pending: List[str] = []
        index = 0

        def open_shots(sim: SimState, upto: int) -> List[str]:
            shots = []
            for i in range(upto):
                lit = choice_literals[i]
                gate = f"cho.A{i + 1}"
                if sim.gate_positions[gate] is Position.CLOSED:
                    shots.append(f"cho.open_{lit.var}_{'pos' if lit.positive else 'neg'}")
            return shots

        def step(sim: SimState, r: ReductionOutput) -> Optional[str]:
            nonlocal index
            if pending:
                return pending.pop(0)
            if index >= len(moves):
                return None
            move = moves[index]
            index += 1
            if move[0] == "move":
                _, var, value = move
                target = choice_literals.index(Literal(var, bool(value)))
                pending.extend(open_shots(sim, target))
                pending.append("ord.move")
            elif move[0] == "pass":
                true_lit = next(
                    (i for i, lit in enumerate(choice_literals)
                     if r.var_value(sim.gate_positions, lit.var) == lit.positive),
                    None,
                )
                if true_lit is None:
                    pending.append("ord.move")  # no variables: traversal is a pass
                else:
                    pending.extend(open_shots(sim, true_lit))
                    pending.append("ord.move")
            elif move[0] == "opp":
                pending.append("ord.opp_move")
            elif move[0] == "check_opp":
                pending.append("ord.check_opp")
            elif move[0] == "check_self":
                pending.append("ord.check_self")
            else:
                raise StrategyError(f"unknown abstract move {move!r}")
            return pending.pop(0)

        return step

    return StrategyScript(factory)


def script_strategy(reduction: ReductionOutput, policy) -> Strategy:
    """Build the framework-conformant strategy for the reduction's variant."""
    if reduction.variant is Variant.ABPD:
        return script_abpd(reduction, policy)
    if reduction.variant is Variant.ABED:
        return script_abed(reduction, policy)
    if reduction.variant is Variant.ABPS:
        return script_abps(reduction, policy)
    return script_abes(reduction, policy)


# ---------------------------------------------------------------------------
# running a strategy against every adversarial resolution sequence


class _PrefixResolver:
    def __init__(self, script: Tuple[int, ...]):
        self.script = script
        self.used = 0

    def __call__(self, gate_id: str) -> int:
        if self.used >= len(self.script):
            raise _MoreResolutions()
        value = self.script[self.used]
        self.used += 1
        return value


class _MoreResolutions(Exception):
    pass


def winning_existential_policy(formula: QbfFormula) -> ExistentialPolicy:
    """Choose each existential value by looking ahead with the truth
    expansion of the remaining prefix (an oracle-backed policy; it wins
    whenever the formula is true)."""
    from .formula import eval_cnf

    prefix = formula.prefix
    position = {var: i for i, (_, var) in enumerate(prefix)}

    def remainder_true(index: int, assignment: Dict) -> bool:
        if index == len(prefix):
            return eval_cnf(formula.matrix, assignment)
        quant, var = prefix[index]
        results = []
        for value in (True, False):
            assignment[var] = value
            results.append(remainder_true(index + 1, assignment))
            del assignment[var]
        return any(results) if quant is Quantifier.EXISTS else all(results)

    def policy(var, fixed: Dict) -> bool:
        idx = position[var]
        # only the outer prefix is really fixed; values of inner variables
        # left over from an earlier framework cycle must be re-branched
        trial = {v: fixed[v] for _, v in prefix[:idx] if v in fixed}
        for value in (True, False):
            trial[var] = value
            if remainder_true(idx + 1, trial):
                return value
        return True

    return policy


def run_strategy_all_resolutions(
    reduction: ReductionOutput, strategy: Strategy
) -> List[Tuple[Tuple[int, ...], Outcome]]:
    """Replay a strategy against every resolution sequence the adversary can
    produce; returns one (resolution path, outcome) per branch."""
    results: List[Tuple[Tuple[int, ...], Outcome]] = []
    pending: List[Tuple[int, ...]] = [()]
    while pending:
        script = pending.pop()
        resolver = _PrefixResolver(script)
        try:
            outcome = run_strategy(reduction, strategy, resolver)
        except _MoreResolutions:
            pending.extend(script + (code,) for code in (2, 1, 0))
            continue
        results.append((script, outcome))
    return results
