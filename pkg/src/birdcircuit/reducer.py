"""Compile source problems into complete circuits.

Each variant arranges gadget blueprints per its framework: a vertical main
chain of quantifier gadgets feeding clause gadgets, plus the variant-specific
exit machinery (a pig behind the last clause, a finish gadget with a pass
door, or the move-order loop of the two-player game form).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import CircuitError
from .formula import (
    CnfFormula,
    G2Setup,
    Literal,
    QbfFormula,
    Quantifier,
    Side,
    Var,
)
from .gadgets import CONSUME, PIG, GadgetBlueprint, GadgetKind, build_gadget
from .gates import (
    Circuit,
    Gate,
    GateState,
    Port,
    Position,
    SinkKind,
    propagate_from_port,
)


class Variant(Enum):
    ABPD = "abpd"  # polynomial birds, deterministic
    ABED = "abed"  # exponential birds, deterministic
    ABPS = "abps"  # polynomial birds, stochastic
    ABES = "abes"  # exponential birds, stochastic


@dataclass
class ReductionOutput:
    variant: Variant
    circuit: Circuit
    gadgets: List[Tuple[str, GadgetBlueprint]]  # framework order
    entrances: Dict[str, Port]  # shot-target order
    bird_budget: int
    source: object
    initial_positions: Dict[str, GateState]
    initial_events: List[Port]  # phantom birds resolved at play start
    doom_gates: List[str]  # closed => the pig is permanently unreachable
    var_sites: Dict[Var, Tuple[Tuple[str, ...], Tuple[str, ...]]]
    roles: Dict[str, object] = field(default_factory=dict)

    def inventory(self) -> Counter:
        return Counter(bp.kind for _, bp in self.gadgets)

    def blueprint(self, gid: str) -> GadgetBlueprint:
        for name, bp in self.gadgets:
            if name == gid:
                return bp
        raise KeyError(gid)

    def gate_count(self) -> int:
        return len(self.circuit.gates)

    def size(self) -> int:
        return len(self.circuit.gates) + len(self.circuit.tunnels)

    def var_value(self, positions: Mapping[str, GateState], var: Var) -> Optional[bool]:
        """Read a variable's current value off its clause literal gates;
        None when the variable has no clause occurrences.  An unset variable
        (all its gates closed) reads as False."""
        pos_sites, neg_sites = self.var_sites.get(var, ((), ()))
        if pos_sites:
            return positions[pos_sites[0]] is Position.OPEN
        if neg_sites:
            return positions[neg_sites[0]] is Position.CLOSED
        return None

    def manifest(self) -> str:
        return "\n".join(self.entrances) + "\n"


class _Assembler:
    """Instantiates blueprints under prefixes and wires them together."""

    def __init__(self):
        self.circuit = Circuit()
        self.circuit.add_sink("consume", SinkKind.CONSUME)
        self.circuit.add_sink("pig", SinkKind.PIG)
        self.blueprints: Dict[str, GadgetBlueprint] = {}
        self.order: List[str] = []
        self.entrance_order: List[Tuple[str, Port]] = []

    def place(self, gid: str, bp: GadgetBlueprint) -> None:
        for role, (kind, initial) in bp.gates.items():
            self.circuit.add_gate(f"{gid}.{role}", kind, initial)
        for src, dst in bp.tunnels.items():
            self.circuit.add_tunnel(self._port(gid, src), self._port(gid, dst))
        self.blueprints[gid] = bp
        self.order.append(gid)

    def _port(self, gid: str, port: Port) -> Port:
        if port == CONSUME:
            return Port("consume", "in")
        if port == PIG:
            return Port("pig", "in")
        return Port(f"{gid}.{port.gate}", port.name)

    def inp(self, gid: str, label: str) -> Port:
        return self._port(gid, self.blueprints[gid].inputs[label])

    def outs(self, gid: str, label: str) -> Tuple[Port, ...]:
        return tuple(self._port(gid, p) for p in self.blueprints[gid].outputs[label])

    def wire(self, gid: str, label: str, dst: Port) -> None:
        for src in self.outs(gid, label):
            self.circuit.add_tunnel(src, dst)

    def wire_to_consume(self, gid: str, label: str) -> None:
        self.wire(gid, label, Port("consume", "in"))

    def wire_to_pig(self, gid: str, label: str) -> None:
        self.wire(gid, label, Port("pig", "in"))

    def entrance(self, name: str, gid: str, label: str) -> None:
        port = self.inp(gid, label)
        self.circuit.add_entrance(name, port)
        self.entrance_order.append((name, port))

    def player_entrances(self, gid: str, name_map: Mapping[str, str]) -> None:
        for label in self.blueprints[gid].player_inputs:
            self.entrance(name_map[label], gid, label)

    def wire_modify_chain(self, sources: Sequence[Port], stops: Sequence[Tuple[str, str]]) -> None:
        """Thread a variable-setting bird through clause literal gates:
        stops are (clause gid, 'lit{i}_true'/'lit{i}_false') in framework
        order; the tail is consumed."""
        current = tuple(sources)
        for gid, label in stops:
            dst = self.inp(gid, f"{label}_in")
            for src in current:
                self.circuit.add_tunnel(src, dst)
            current = self.outs(gid, f"{label}_out")
        for src in current:
            self.circuit.add_tunnel(src, Port("consume", "in"))

    def set_initial(self, gate_id: str, state: GateState) -> None:
        gate = self.circuit.gates[gate_id]
        self.circuit.gates[gate_id] = Gate(gate.kind, state)
        self.circuit._compiled = None

    def apply_phantom(self, port: Port) -> None:
        """Bake the effect of a construction-time enabling bird into the
        initial gate positions (deterministic routes only)."""
        outcome, after = propagate_from_port(self.circuit, self.circuit.initial_state(), port)
        for gid, state in after.items():
            if self.circuit.gates[gid].initial != state:
                self.set_initial(gid, state)


def _clause_stops(
    clause_specs: Sequence[Tuple[str, Sequence[Literal], int]],
    var: Var,
    value: bool,
) -> List[Tuple[str, str]]:
    """Stops for the bird that sets `var` to `value`: open the gates whose
    literal just became true, close the ones that became false.
    clause_specs rows are (gid, literals, gate-name offset)."""
    stops = []
    for gid, literals, _ in clause_specs:
        for slot, lit in enumerate(literals, start=1):
            if lit.var != var:
                continue
            becomes_true = lit.positive == value
            stops.append((gid, f"lit{slot}_{'true' if becomes_true else 'false'}"))
    return stops


def _eq_names(gid: str) -> Dict[str, str]:
    return {
        "set_pos_in": f"{gid}.set_pos",
        "set_neg_in": f"{gid}.set_neg",
        "check_pos_in": f"{gid}.check_pos",
        "check_neg_in": f"{gid}.check_neg",
    }


# ---------------------------------------------------------------------------
# ABPD: one EQ per variable, one clause gadget per clause, pig after the last


def reduce_abpd(formula: CnfFormula) -> ReductionOutput:
    asm = _Assembler()
    variables = formula.variables
    eq_ids = [f"eq{v}" for v in variables]
    clause_ids = [f"cl{i}" for i in range(1, len(formula.clauses) + 1)]

    for v, gid in zip(variables, eq_ids):
        asm.place(gid, build_gadget(GadgetKind.EQ, var=v))
        asm.player_entrances(gid, _eq_names(gid))
    for gid, clause in zip(clause_ids, formula.clauses):
        asm.place(gid, build_gadget(GadgetKind.CLAUSE_E, literals=clause))
        asm.player_entrances(gid, {f"check{i}_in": f"{gid}.check{i}" for i in (1, 2, 3)})

    chain = eq_ids + clause_ids
    for current, nxt in zip(chain, chain[1:]):
        asm.wire(current, "enable_next_out", asm.inp(nxt, "enable_in"))
    if chain:
        asm.wire_to_pig(chain[-1], "enable_next_out")

    clause_specs = [(gid, formula.clauses[i], 3) for i, gid in enumerate(clause_ids)]
    var_sites = {}
    for v, gid in zip(variables, eq_ids):
        asm.wire_modify_chain(asm.outs(gid, "modify_pos_out"), _clause_stops(clause_specs, v, True))
        asm.wire_modify_chain(asm.outs(gid, "modify_neg_out"), _clause_stops(clause_specs, v, False))
        var_sites[v] = _sites(clause_specs, v)

    if eq_ids:
        asm.apply_phantom(asm.inp(eq_ids[0], "enable_in"))

    return ReductionOutput(
        variant=Variant.ABPD,
        circuit=asm.circuit,
        gadgets=[(g, asm.blueprints[g]) for g in asm.order],
        entrances=dict(asm.entrance_order),
        bird_budget=2 * len(variables) + len(formula.clauses),
        source=formula,
        initial_positions=asm.circuit.initial_state(),
        initial_events=[],
        doom_gates=[],
        var_sites=var_sites,
        roles={"chain": eq_ids, "clauses": clause_ids},
    )


def _sites(clause_specs, var) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    pos, neg = [], []
    for gid, literals, offset in clause_specs:
        for slot, lit in enumerate(literals, start=1):
            if lit.var == var:
                (pos if lit.positive else neg).append(f"{gid}.S{slot + offset}")
    return tuple(pos), tuple(neg)


# ---------------------------------------------------------------------------
# ABED: the full quantified framework with finish gadget and UQF column


def reduce_abed(formula: QbfFormula) -> ReductionOutput:
    asm = _Assembler()
    num_universal = formula.num_universal()
    num_existential = formula.num_existential()
    num_clauses = len(formula.matrix.clauses)

    main: List[Tuple[str, Quantifier, int]] = []  # (gid, quantifier, var)
    for quant, var in formula.prefix:
        gid = f"eq{var}" if quant is Quantifier.EXISTS else f"uqt{var}"
        kind = GadgetKind.EQ if quant is Quantifier.EXISTS else GadgetKind.UQT
        asm.place(gid, build_gadget(kind, var=var))
        if quant is Quantifier.EXISTS:
            asm.player_entrances(gid, _eq_names(gid))
        else:
            asm.player_entrances(gid, {"check_in": f"{gid}.check"})
        main.append((gid, quant, var))

    clause_ids = [f"cl{i}" for i in range(1, num_clauses + 1)]
    for gid, clause in zip(clause_ids, formula.matrix.clauses):
        asm.place(gid, build_gadget(GadgetKind.CLAUSE_E, literals=clause))
        asm.player_entrances(gid, {f"check{i}_in": f"{gid}.check{i}" for i in (1, 2, 3)})

    fin = "fin"
    asm.place(fin, build_gadget(GadgetKind.FINISH, with_trigger=num_universal > 0))

    # universal column, innermost (rightmost in the prefix) first
    universals = [var for quant, var in formula.prefix if quant is Quantifier.FORALL]
    uqf_ids = [f"uqf{v}" for v in reversed(universals)]
    for gid, var in zip(uqf_ids, reversed(universals)):
        asm.place(gid, build_gadget(GadgetKind.UQF, var=var))
    if uqf_ids:
        asm.entrance("uqf_first.enable", uqf_ids[0], "enable_in")
        for gid in uqf_ids:
            asm.player_entrances(gid, {
                "set_neg_in": f"{gid}.set_neg",
                "check_adj_in": f"{gid}.check_adj",
                "next_in": f"{gid}.next",
            })

    # main enable chain: quantifiers, then clauses, then the finish gadget
    chain_ids = [gid for gid, _, _ in main] + clause_ids
    for current, nxt in zip(chain_ids, chain_ids[1:]):
        asm.wire(current, "enable_next_out", asm.inp(nxt, "enable_in"))
    if chain_ids:
        if num_universal > 0:
            asm.wire(chain_ids[-1], "enable_next_out", asm.inp(fin, "enable_in"))
        else:
            # with no universals there is no framework cycle; passing the
            # last check is the win itself
            asm.wire(chain_ids[-1], "enable_next_out", asm.inp(fin, "pass_in"))

    # modify chains
    clause_specs = [(gid, formula.matrix.clauses[i], 3) for i, gid in enumerate(clause_ids)]
    var_sites = {}
    for gid, quant, var in main:
        if quant is Quantifier.EXISTS:
            asm.wire_modify_chain(asm.outs(gid, "modify_pos_out"), _clause_stops(clause_specs, var, True))
            asm.wire_modify_chain(asm.outs(gid, "modify_neg_out"), _clause_stops(clause_specs, var, False))
        else:
            asm.wire_modify_chain(asm.outs(gid, "modify_pos_out"), _clause_stops(clause_specs, var, True))
            asm.wire_modify_chain(
                asm.outs(f"uqf{var}", "modify_neg_out"), _clause_stops(clause_specs, var, False)
            )
        var_sites[var] = _sites(clause_specs, var)

    # UQF column wiring
    for i, gid in enumerate(uqf_ids):
        var = asm.blueprints[gid].params["var"]
        # pass-down route
        if i + 1 < len(uqf_ids):
            asm.wire(gid, "next_uqf_out", asm.inp(uqf_ids[i + 1], "enable_in"))
        else:
            asm.wire(gid, "next_uqf_out", asm.inp(fin, "pass_in"))
        # adjacent route re-enters the main chain right after this UQ-T
        idx = chain_ids.index(f"uqt{var}")
        if idx + 1 < len(chain_ids):
            asm.wire(gid, "enable_adjacent_out", asm.inp(chain_ids[idx + 1], "enable_in"))
        else:
            asm.wire(gid, "enable_adjacent_out", asm.inp(fin, "enable_in"))
        # enable-chain tail: the first gadget continues into the disable chain
        if i == 0:
            for current, nxt in zip(clause_ids, clause_ids[1:]):
                asm.wire(current, "disable_next_out", asm.inp(nxt, "disable_in"))
            head = asm.inp(clause_ids[0], "disable_in") if clause_ids else asm.inp(fin, "trigger_in")
            asm.wire(gid, "enable_chain_out", head)
            if clause_ids:
                asm.wire(clause_ids[-1], "disable_next_out", asm.inp(fin, "trigger_in"))
        else:
            asm.wire_to_consume(gid, "enable_chain_out")

    if main:
        asm.apply_phantom(asm.inp(main[0][0], "enable_in"))

    budget = (num_clauses + 2 * num_existential + 3 * num_universal) * 2**num_universal
    return ReductionOutput(
        variant=Variant.ABED,
        circuit=asm.circuit,
        gadgets=[(g, asm.blueprints[g]) for g in asm.order],
        entrances=dict(asm.entrance_order),
        bird_budget=budget,
        source=formula,
        initial_positions=asm.circuit.initial_state(),
        initial_events=[],
        doom_gates=[f"{fin}.S1"],
        var_sites=var_sites,
        roles={
            "main_chain": main,
            "clauses": clause_ids,
            "uqf_order": uqf_ids,
            "finish": fin,
        },
    )


# ---------------------------------------------------------------------------
# ABPS: EQ / UQR chain, clause gadgets pre-set to all-universals-negative


def reduce_abps(formula: QbfFormula) -> ReductionOutput:
    asm = _Assembler()
    num_universal = formula.num_universal()
    num_existential = formula.num_existential()
    num_clauses = len(formula.matrix.clauses)

    main: List[Tuple[str, Quantifier, int]] = []
    for quant, var in formula.prefix:
        gid = f"eq{var}" if quant is Quantifier.EXISTS else f"uqr{var}"
        kind = GadgetKind.EQ if quant is Quantifier.EXISTS else GadgetKind.UQR
        asm.place(gid, build_gadget(kind, var=var))
        if quant is Quantifier.EXISTS:
            asm.player_entrances(gid, _eq_names(gid))
        else:
            asm.player_entrances(gid, {"check_in": f"{gid}.check"})
        main.append((gid, quant, var))

    clause_ids = [f"cl{i}" for i in range(1, num_clauses + 1)]
    for gid, clause in zip(clause_ids, formula.matrix.clauses):
        asm.place(gid, build_gadget(GadgetKind.CLAUSE_E, literals=clause))
        asm.player_entrances(gid, {f"check{i}_in": f"{gid}.check{i}" for i in (1, 2, 3)})

    chain_ids = [gid for gid, _, _ in main] + clause_ids
    for current, nxt in zip(chain_ids, chain_ids[1:]):
        asm.wire(current, "enable_next_out", asm.inp(nxt, "enable_in"))
    if chain_ids:
        asm.wire_to_pig(chain_ids[-1], "enable_next_out")

    clause_specs = [(gid, formula.matrix.clauses[i], 3) for i, gid in enumerate(clause_ids)]
    var_sites = {}
    universals = {var for quant, var in formula.prefix if quant is Quantifier.FORALL}
    for gid, quant, var in main:
        asm.wire_modify_chain(asm.outs(gid, "modify_pos_out"), _clause_stops(clause_specs, var, True))
        if quant is Quantifier.EXISTS:
            asm.wire_modify_chain(asm.outs(gid, "modify_neg_out"), _clause_stops(clause_specs, var, False))
        var_sites[var] = _sites(clause_specs, var)

    # clause gadgets start as if every universal variable is negative
    for var in universals:
        _, neg_sites = var_sites[var]
        for gate_id in neg_sites:
            asm.set_initial(gate_id, Position.OPEN)

    initial_events: List[Port] = []
    if main:
        start_gid, start_quant, _ = main[0]
        start_port = asm.inp(start_gid, "enable_in")
        if start_quant is Quantifier.FORALL:
            # the construction-time enabling bird falls into a Random gate,
            # so its outcome is resolved when play starts
            initial_events.append(start_port)
        else:
            asm.apply_phantom(start_port)

    return ReductionOutput(
        variant=Variant.ABPS,
        circuit=asm.circuit,
        gadgets=[(g, asm.blueprints[g]) for g in asm.order],
        entrances=dict(asm.entrance_order),
        bird_budget=2 * num_existential + num_universal + num_clauses,
        source=formula,
        initial_positions=asm.circuit.initial_state(),
        initial_events=initial_events,
        doom_gates=[],
        var_sites=var_sites,
        roles={"main_chain": main, "clauses": clause_ids},
    )


# ---------------------------------------------------------------------------
# ABES: the two-player game form


def reduce_abes(setup: G2Setup) -> ReductionOutput:
    asm = _Assembler()
    player_vars = setup.variables(Side.PLAYER)
    opponent_vars = setup.variables(Side.OPPONENT)
    choice_literals = [Literal(v, pol) for v in player_vars for pol in (True, False)]
    random_literals = [Literal(v, pol) for v in opponent_vars for pol in (True, False)]

    asm.place("ord", build_gadget(GadgetKind.ORDERING))
    asm.entrance("ord.move", "ord", "move_in")
    asm.entrance("ord.check_self", "ord", "check_self_in")
    asm.entrance("ord.opp_move", "ord", "opp_move_in")
    asm.entrance("ord.check_opp", "ord", "check_opp_in")

    asm.place("cho", build_gadget(GadgetKind.CHOICE, literals=choice_literals))
    for i, lit in enumerate(choice_literals, start=1):
        asm.entrance(f"cho.open_{lit.var}_{'pos' if lit.positive else 'neg'}", "cho", f"open{i}_in")

    asm.place("rnd", build_gadget(GadgetKind.RANDOM_TREE, literals=random_literals))

    player_ids = [f"pcl{i}" for i in range(1, len(setup.player_formula.terms) + 1)]
    opponent_ids = [f"ocl{i}" for i in range(1, len(setup.opponent_formula.terms) + 1)]
    for gid, term in zip(player_ids, setup.player_formula.terms):
        asm.place(gid, build_gadget(GadgetKind.CLAUSE_G, literals=term))
    for gid, term in zip(opponent_ids, setup.opponent_formula.terms):
        asm.place(gid, build_gadget(GadgetKind.CLAUSE_G, literals=term))
    asm.place("res", build_gadget(GadgetKind.RESULT))

    # move-order loop
    asm.wire("ord", "move_out", asm.inp("cho", "choice_in"))
    asm.wire("ord", "opp_move_out", asm.inp("rnd", "random_in"))
    asm.wire("ord", "check_self_out", asm.inp(player_ids[0], "check_in"))
    asm.wire("ord", "check_opp_out", asm.inp(opponent_ids[0], "check_in"))

    # check chains: a failed clause passes the bird to the next clause
    for ids, result_label in ((player_ids, "win_in"), (opponent_ids, "lose_in")):
        for current, nxt in zip(ids, ids[1:]):
            asm.wire(current, "fail_out", asm.inp(nxt, "check_in"))
        asm.wire_to_consume(ids[-1], "fail_out")
        for gid in ids:
            asm.wire(gid, "satisfied_out", asm.inp("res", result_label))

    # modify chains thread both sides' clause gadgets in framework order
    clause_specs = [
        (gid, term, 0)
        for gid, term in zip(player_ids + opponent_ids,
                             setup.player_formula.terms + setup.opponent_formula.terms)
    ]
    var_sites: Dict[Var, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {}
    for v in player_vars + opponent_vars:
        var_sites[v] = _sites(clause_specs, v)
    for i, lit in enumerate(choice_literals, start=1):
        asm.wire_modify_chain(
            asm.outs("cho", f"modify_lit{i}_out"),
            _clause_stops(clause_specs, lit.var, lit.positive),
        )
    for i, lit in enumerate(random_literals):
        asm.wire_modify_chain(
            asm.outs("rnd", f"modify_lit{i}_out"),
            _clause_stops(clause_specs, lit.var, lit.positive),
        )

    # clause gates reflect the initial variable values
    for gid, term, offset in clause_specs:
        for slot, lit in enumerate(term, start=1):
            if lit.holds(setup.initial_values):
                asm.set_initial(f"{gid}.S{slot + offset}", Position.OPEN)

    budget = (2 * len(player_vars) + 4) * 2 ** (len(player_vars) + len(opponent_vars))
    return ReductionOutput(
        variant=Variant.ABES,
        circuit=asm.circuit,
        gadgets=[(g, asm.blueprints[g]) for g in asm.order],
        entrances=dict(asm.entrance_order),
        bird_budget=budget,
        source=setup,
        initial_positions=asm.circuit.initial_state(),
        initial_events=[],
        doom_gates=["res.S1"],
        var_sites=var_sites,
        roles={
            "ordering": "ord",
            "choice": "cho",
            "random": "rnd",
            "player_clauses": player_ids,
            "opponent_clauses": opponent_ids,
            "result": "res",
            "choice_literals": choice_literals,
        },
    )


def reduce_problem(variant: Variant, problem) -> ReductionOutput:
    if variant is Variant.ABPD:
        return reduce_abpd(problem)
    if variant is Variant.ABED:
        return reduce_abed(problem)
    if variant is Variant.ABPS:
        return reduce_abps(problem)
    return reduce_abes(problem)


# ---------------------------------------------------------------------------
# geometry annotation


@dataclass(frozen=True)
class PhysicsParams:
    gravity: float = 10.0
    max_speed: float = 100.0
    gate_width: float = 10.0
    gate_height: float = 10.0
    tunnel_width: float = 2.0

    def __post_init__(self):
        for name in ("gravity", "max_speed", "gate_width", "gate_height", "tunnel_width"):
            if getattr(self, name) <= 0:
                raise CircuitError(f"physics parameter {name} must be strictly positive")

    def apex_height(self) -> float:
        """Greatest height a full-speed shot can reach above the slingshot."""
        return self.max_speed**2 / (2 * self.gravity)

    def reach_drop(self, strip_width: float) -> float:
        """Vertical drop below the slingshot guaranteeing every entrance at
        most `strip_width` away is reachable."""
        return max(0.0, -strip_width + (self.gravity / self.max_speed**2) * strip_width**2)


@dataclass(frozen=True)
class Box:
    name: str
    x: int
    y: int
    width: int
    height: int


@dataclass
class LevelDescription:
    width: int
    height: int
    slingshot: Tuple[int, int]
    birds: object  # explicit list for poly variants, (type, count) otherwise
    pigs: List[Tuple[str, int, int]]
    boxes: List[Box]
    routes: List[Tuple[str, Tuple[int, int], Tuple[int, int]]]

    def to_text(self) -> str:
        lines = [
            f"size {self.width} {self.height}",
            f"slingshot {self.slingshot[0]} {self.slingshot[1]}",
        ]
        if isinstance(self.birds, tuple):
            lines.append(f"birds {self.birds[0]} x{self.birds[1]}")
        else:
            lines.append("birds " + " ".join(self.birds))
        for kind, x, y in self.pigs:
            lines.append(f"pig {kind} {x} {y}")
        for box in self.boxes:
            lines.append(f"box {box.name} {box.x} {box.y} {box.width} {box.height}")
        for name, (x1, y1), (x2, y2) in self.routes:
            lines.append(f"route {name} {x1} {y1} {x2} {y2}")
        return "\n".join(lines) + "\n"


def annotate_geometry(reduction: ReductionOutput, params: Optional[PhysicsParams] = None) -> LevelDescription:
    """Lay the reduction out as an abstract level: slingshot at the apex
    height, entrance tunnels in a horizontal strip below the reachability
    bound, gadget boxes stacked underneath, one pig in the exit gadget."""
    params = params or PhysicsParams()
    n_entrances = len(reduction.entrances)
    if n_entrances == 0:
        raise CircuitError("reduction has no entrances; nothing is reachable")

    strip_width = params.tunnel_width * n_entrances
    shift = strip_width  # everything moves right to guarantee release points
    sling = (int(round(shift)), int(round(params.apex_height())))
    strip_y = sling[1] + params.reach_drop(strip_width) + params.tunnel_width

    boxes: List[Box] = []
    routes: List[Tuple[str, Tuple[int, int], Tuple[int, int]]] = []
    for i, name in enumerate(reduction.entrances):
        x = shift + i * params.tunnel_width
        boxes.append(Box(f"entrance:{name}", int(round(x)), int(round(strip_y)),
                         int(math.ceil(params.tunnel_width)), int(math.ceil(params.tunnel_width))))

    # main column of gadget boxes; UQF gadgets go in a left-hand column
    top = strip_y + 3 * params.tunnel_width
    uqf_ids = set(reduction.roles.get("uqf_order", ()))
    columns = {False: shift + 2 * params.gate_width, True: shift}
    cursor = {False: top, True: top}
    centers: Dict[str, Tuple[int, int]] = {}
    for gid, bp in reduction.gadgets:
        left = gid in uqf_ids
        height = params.gate_height * max(1, len(bp.gates))
        box = Box(gid, int(round(columns[left])), int(round(cursor[left])),
                  int(math.ceil(params.gate_width)), int(math.ceil(height)))
        boxes.append(box)
        centers[gid] = (box.x + box.width // 2, box.y + box.height // 2)
        cursor[left] += height + params.gate_height

    for name, port in reduction.entrances.items():
        gid = port.gate.rsplit(".", 1)[0]
        if gid in centers:
            i = list(reduction.entrances).index(name)
            x = int(round(shift + i * params.tunnel_width))
            routes.append((name, (x, int(round(strip_y))), centers[gid]))

    pig_host = next(
        (gid for gid, bp in reduction.gadgets if bp.kind in (GadgetKind.FINISH, GadgetKind.RESULT)),
        None,
    )
    if pig_host is not None:
        pig_xy = centers[pig_host]
    else:
        # the pig sits in its own box after the last clause gadget
        y = int(round(cursor[False]))
        boxes.append(Box("pig_zone", int(round(columns[False])), y,
                         int(math.ceil(params.gate_width)), int(math.ceil(params.gate_height))))
        pig_xy = (int(round(columns[False] + params.gate_width / 2)),
                  int(round(y + params.gate_height / 2)))

    width = max(b.x + b.width for b in boxes) + int(math.ceil(params.gate_width))
    height = max(b.y + b.height for b in boxes) + int(math.ceil(params.gate_height))
    if reduction.variant in (Variant.ABPD, Variant.ABPS):
        birds = ["red"] * reduction.bird_budget
    else:
        birds = ("red", reduction.bird_budget)
    return LevelDescription(
        width=width,
        height=height,
        slingshot=sling,
        birds=birds,
        pigs=[("small", pig_xy[0], pig_xy[1])],
        boxes=boxes,
        routes=routes,
    )
