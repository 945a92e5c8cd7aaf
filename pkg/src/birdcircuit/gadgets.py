"""Gadget blueprints: wired gate subgraphs with semantically labeled ports.

Each blueprint lists its internal gates by role name ("A1", "S2", ...),
its internal tunnels, its named inputs (entrance ports) and outputs (exit
ports left for the circuit assembler to tunnel onward).  A blueprint can be
turned into a standalone circuit for exhaustive behavioural enumeration, or
instantiated under a prefix inside a larger circuit.

Gadget catalogue:

* eq         two Selector + four AUT gates; an enabled gadget lets the player
             commit one of two values for its variable, then hands control on.
* uqt        one AUT gate; enabling it sets its variable positive.
* uqf        two Selector + three AUT gates; alternates between "set the
             variable negative" and "pass control to the next gadget below".
* clause_e   six Selectors; a checker bird passes iff the gadget is enabled
             and one chosen literal gate is open (existential-framework form).
* finish     trigger-counting exit gadget; two triggers without a re-enable
             in between make the level unsolvable.
* uqr        one AUT + one Random gate; enabling it sets the variable
             positive with an uncertain outcome.
* ordering   the three-phase move-order automaton.
* choice     a row of AUT gates, one per player literal; a traversal bird
             exits at the first closed gate's literal port.
* random_tree  a binary tree of Random gates fanning out to literal ports.
* clause_g   a Selector chain, one gate per term literal; a checker bird
             passes the whole chain iff every literal is true (game form).
* result     single Selector; first bird in either wins the level or locks it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import GadgetError
from .gates import (
    Circuit,
    GateKind,
    GateState,
    Phase,
    Port,
    Position,
    SinkKind,
)


class GadgetKind:
    EQ = "eq"
    UQT = "uqt"
    UQF = "uqf"
    CLAUSE_E = "clause_e"
    FINISH = "finish"
    UQR = "uqr"
    ORDERING = "ordering"
    CHOICE = "choice"
    RANDOM_TREE = "random_tree"
    CLAUSE_G = "clause_g"
    RESULT = "result"

    ALL = (EQ, UQT, UQF, CLAUSE_E, FINISH, UQR, ORDERING, CHOICE, RANDOM_TREE, CLAUSE_G, RESULT)


CONSUME = Port("@consume", "in")
PIG = Port("@pig", "in")


@dataclass
class GadgetBlueprint:
    kind: str
    gates: Dict[str, Tuple[GateKind, Optional[GateState]]]
    tunnels: Dict[Port, Port]
    inputs: Dict[str, Port]
    outputs: Dict[str, Tuple[Port, ...]]
    player_inputs: Tuple[str, ...]
    params: Dict[str, object] = field(default_factory=dict)

    def stateful_roles(self) -> List[str]:
        return [r for r, (k, _) in self.gates.items()
                if k in (GateKind.SELECTOR, GateKind.AUT, GateKind.ORDERING)]

    def to_circuit(self) -> Circuit:
        """Standalone circuit with one exit sink per output label and every
        input exposed as an external entrance (for behaviour enumeration)."""
        circuit = Circuit()
        circuit.add_sink("@consume", SinkKind.CONSUME)
        circuit.add_sink("@pig", SinkKind.PIG)
        for role, (kind, initial) in self.gates.items():
            circuit.add_gate(role, kind, initial)
        for label in self.outputs:
            circuit.add_sink(f"@out:{label}", SinkKind.EXIT)
        for src, dst in self.tunnels.items():
            circuit.add_tunnel(src, dst)
        for label, sources in self.outputs.items():
            for src in sources:
                circuit.add_tunnel(src, Port(f"@out:{label}", "in"))
        for label, port in self.inputs.items():
            circuit.add_entrance(label, port)
        return circuit


class _Builder:
    def __init__(self, kind: str, **params):
        self.kind = kind
        self.params = params
        self.gates: Dict[str, Tuple[GateKind, Optional[GateState]]] = {}
        self.tunnels: Dict[Port, Port] = {}
        self.inputs: Dict[str, Port] = {}
        self.outputs: Dict[str, Tuple[Port, ...]] = {}
        self.player_inputs: List[str] = []

    def gate(self, role: str, kind: GateKind, initial: Optional[GateState] = None):
        self.gates[role] = (kind, initial)

    def tunnel(self, src: str, dst: str):
        self.tunnels[Port.parse(src)] = Port.parse(dst)

    def chain(self, *ports: str):
        for src, dst in zip(ports, ports[1:]):
            self.tunnel(src, dst)

    def consume(self, src: str):
        self.tunnels[Port.parse(src)] = CONSUME

    def pig(self, src: str):
        self.tunnels[Port.parse(src)] = PIG

    def input(self, label: str, port: str, player: bool = False):
        self.inputs[label] = Port.parse(port)
        if player:
            self.player_inputs.append(label)

    def output(self, label: str, *ports: str):
        self.outputs[label] = tuple(Port.parse(p) for p in ports)

    def build(self) -> GadgetBlueprint:
        return GadgetBlueprint(
            kind=self.kind,
            gates=self.gates,
            tunnels=self.tunnels,
            inputs=self.inputs,
            outputs=self.outputs,
            player_inputs=tuple(self.player_inputs),
            params=self.params,
        )


# ---------------------------------------------------------------------------
# the eleven blueprints


def _eq(var) -> GadgetBlueprint:
    b = _Builder(GadgetKind.EQ, var=var)
    b.gate("S1", GateKind.SELECTOR)
    b.gate("S2", GateKind.SELECTOR)
    for role in ("A1", "A2", "A3", "A4"):
        b.gate(role, GateKind.AUT)
    # commit-positive route: closes A1 and S2, opens the positive checker A3
    b.input("set_pos_in", "A1.TI", player=True)
    b.chain("A1.TL", "S1.TI")
    b.chain("S1.TL", "S2.RI")
    b.chain("S2.RO", "A3.LI")
    b.output("modify_pos_out", "A3.LO")
    # commit-negative route: closes A2 and S1, opens the negative checker A4
    b.input("set_neg_in", "A2.TI", player=True)
    b.chain("A2.TL", "S1.RI")
    b.chain("S1.RO", "S2.TI")
    b.chain("S2.TL", "A4.LI")
    b.output("modify_neg_out", "A4.LO")
    # checker routes
    b.input("check_pos_in", "A3.TI", player=True)
    b.input("check_neg_in", "A4.TI", player=True)
    b.output("enable_next_out", "A3.TL", "A4.TL")
    # enable chain re-opens the four interlock gates
    b.input("enable_in", "A1.LI")
    b.chain("A1.LO", "A2.LI")
    b.chain("A2.LO", "S1.LI")
    b.chain("S1.LO", "S2.LI")
    b.consume("S2.LO")
    return b.build()


def _uqt(var) -> GadgetBlueprint:
    b = _Builder(GadgetKind.UQT, var=var)
    b.gate("A1", GateKind.AUT)
    b.input("enable_in", "A1.LI")
    b.output("modify_pos_out", "A1.LO")
    b.input("check_in", "A1.TI", player=True)
    b.output("enable_next_out", "A1.TL")
    return b.build()


def _uqf(var) -> GadgetBlueprint:
    b = _Builder(GadgetKind.UQF, var=var)
    b.gate("S1", GateKind.SELECTOR)
    b.gate("S2", GateKind.SELECTOR)
    for role in ("A1", "A2", "A3"):
        b.gate(role, GateKind.AUT)
    # set-negative route: closes A1+S1, opens the lock A2 and the checker A3
    b.input("set_neg_in", "A1.TI", player=True)
    b.chain("A1.TL", "S1.RI")
    b.chain("S1.RO", "S2.TI")
    b.chain("S2.TL", "A2.LI")
    b.chain("A2.LO", "A3.LI")
    b.output("modify_neg_out", "A3.LO")
    # pass-down route: only open when unlocked; closes S2 and A2 again
    b.input("next_in", "S1.TI", player=True)
    b.chain("S1.TL", "S2.RI")
    b.chain("S2.RO", "A2.TI")
    b.output("next_uqf_out", "A2.TL")
    # adjacent checker
    b.input("check_adj_in", "A3.TI", player=True)
    b.output("enable_adjacent_out", "A3.TL")
    # enable chain re-opens A1, S1, S2; its tail is wired by the assembler
    # (the first gadget of a column continues into the disable chain)
    b.input("enable_in", "A1.LI")
    b.chain("A1.LO", "S1.LI")
    b.chain("S1.LO", "S2.LI")
    b.output("enable_chain_out", "S2.LO")
    return b.build()


def _clause_e(literals: Sequence) -> GadgetBlueprint:
    if len(literals) != 3:
        raise GadgetError(f"existential clause gadget takes exactly 3 literals, got {len(literals)}")
    b = _Builder(GadgetKind.CLAUSE_E, literals=tuple(literals))
    for i in (1, 2, 3):
        b.gate(f"S{i}", GateKind.SELECTOR)
        b.gate(f"S{i + 3}", GateKind.SELECTOR)
    # checker routes: pass iff the enable gate and its literal gate are open
    for i in (1, 2, 3):
        b.input(f"check{i}_in", f"S{i}.TI", player=True)
        b.chain(f"S{i}.TL", f"S{i + 3}.TI")
    b.output("enable_next_out", "S4.TL", "S5.TL", "S6.TL")
    # enable chain opens S1..S3
    b.input("enable_in", "S1.LI")
    b.chain("S1.LO", "S2.LI")
    b.chain("S2.LO", "S3.LI")
    b.consume("S3.LO")
    # disable chain closes S1..S3 and continues to the next clause gadget
    b.input("disable_in", "S1.RI")
    b.chain("S1.RO", "S2.RI")
    b.chain("S2.RO", "S3.RI")
    b.output("disable_next_out", "S3.RO")
    # literal set routes; the assembler chains these per variable
    for i in (1, 2, 3):
        b.input(f"lit{i}_true_in", f"S{i + 3}.LI")
        b.output(f"lit{i}_true_out", f"S{i + 3}.LO")
        b.input(f"lit{i}_false_in", f"S{i + 3}.RI")
        b.output(f"lit{i}_false_out", f"S{i + 3}.RO")
    return b.build()


def _finish(with_trigger: bool = True) -> GadgetBlueprint:
    b = _Builder(GadgetKind.FINISH, with_trigger=with_trigger)
    b.gate("S1", GateKind.SELECTOR, Position.OPEN)
    b.input("pass_in", "S1.TI")
    b.pig("S1.TL")
    if with_trigger:
        b.gate("A1", GateKind.AUT, Position.CLOSED)
        b.input("enable_in", "A1.LI")
        b.consume("A1.LO")
        # first trigger disables, second locks the level unsolvable
        b.input("trigger_in", "A1.TI")
        b.consume("A1.TL")
        b.chain("A1.TR", "S1.RI")
        b.consume("S1.RO")
    return b.build()


def _uqr(var) -> GadgetBlueprint:
    b = _Builder(GadgetKind.UQR, var=var)
    b.gate("A1", GateKind.AUT)
    b.gate("R1", GateKind.RANDOM)
    b.input("enable_in", "A1.LI")
    b.chain("A1.LO", "R1.T")
    b.output("modify_pos_out", "R1.L")
    b.consume("R1.R")
    b.input("check_in", "A1.TI", player=True)
    b.output("enable_next_out", "A1.TL")
    return b.build()


def _ordering() -> GadgetBlueprint:
    b = _Builder(GadgetKind.ORDERING)
    b.gate("O1", GateKind.ORDERING, Phase.READY)
    b.input("move_in", "O1.SP_I", player=True)
    b.input("opp_move_in", "O1.SO_I", player=True)
    b.input("check_opp_in", "O1.CO_I", player=True)
    b.input("check_self_in", "O1.CP_I", player=True)
    b.output("move_out", "O1.SP_O")
    b.output("opp_move_out", "O1.SO_O")
    b.output("check_opp_out", "O1.CO_O")
    b.output("check_self_out", "O1.CP_O")
    return b.build()


def _choice(literals: Sequence) -> GadgetBlueprint:
    """One AUT gate per player literal, in the given order.  A traversal bird
    closes the open prefix and exits at the first closed gate's literal port;
    with every gate open it falls through as a pass."""
    literals = tuple(literals)
    if len(literals) != len(set(literals)):
        raise GadgetError("duplicate player literals in choice gadget")
    b = _Builder(GadgetKind.CHOICE, literals=literals)
    n = len(literals)
    for i in range(1, n + 1):
        b.gate(f"A{i}", GateKind.AUT)
    if n:
        b.input("choice_in", "A1.TI")
        for i in range(1, n):
            b.chain(f"A{i}.TL", f"A{i + 1}.TI")
        b.consume(f"A{n}.TL")
        for i in range(1, n + 1):
            b.output(f"modify_lit{i}_out", f"A{i}.TR")
            b.input(f"open{i}_in", f"A{i}.LI", player=True)
            b.consume(f"A{i}.LO")
    else:
        # a player with no variables can only pass
        b.gate("X1", GateKind.CROSSOVER)
        b.input("choice_in", "X1.DI")
        b.consume("X1.DO")
    return b.build()


def _random_tree(literals: Sequence) -> GadgetBlueprint:
    """Binary tree of Random gates with one leaf exit per opponent literal.
    A stuck bird anywhere in the tree is a pass."""
    literals = tuple(literals)
    b = _Builder(GadgetKind.RANDOM_TREE, literals=literals)
    n = len(literals)
    if n == 0:
        b.gate("X1", GateKind.CROSSOVER)
        b.input("random_in", "X1.DI")
        b.consume("X1.DO")
        return b.build()
    counter = itertools.count(1)
    leaf_ports: Dict[int, str] = {}

    def build(lo: int, hi: int) -> Tuple[str, str]:
        """Return (entry port, owning role) for literals[lo:hi]."""
        if hi - lo == 1:
            return f"leaf{lo}", ""
        role = f"R{next(counter)}"
        b.gate(role, GateKind.RANDOM)
        mid = (lo + hi + 1) // 2
        for side, (clo, chi) in (("L", (lo, mid)), ("R", (mid, hi))):
            entry, _ = build(clo, chi)
            if entry.startswith("leaf"):
                leaf_ports[int(entry[4:])] = f"{role}.{side}"
            else:
                b.tunnel(f"{role}.{side}", entry)
        return f"{role}.T", role

    if n == 1:
        # a single literal still needs one Random gate so the outcome stays
        # uncertain (right exit and stuck are passes)
        b.gate("R1", GateKind.RANDOM)
        b.input("random_in", "R1.T")
        b.output("modify_lit0_out", "R1.L")
        b.consume("R1.R")
        return b.build()
    entry, _ = build(0, n)
    b.input("random_in", entry)
    for i in range(n):
        b.output(f"modify_lit{i}_out", leaf_ports[i])
    return b.build()


def _clause_g(literals: Sequence) -> GadgetBlueprint:
    """Game-form clause: a Selector per literal; the checker bird must
    traverse every gate, and any closed gate diverts it to the next clause."""
    literals = tuple(literals)
    if not 1 <= len(literals) <= 12:
        raise GadgetError(f"game clause gadget takes 1..12 literals, got {len(literals)}")
    b = _Builder(GadgetKind.CLAUSE_G, literals=literals)
    n = len(literals)
    for i in range(1, n + 1):
        b.gate(f"S{i}", GateKind.SELECTOR)
    b.input("check_in", "S1.TI")
    for i in range(1, n):
        b.chain(f"S{i}.TL", f"S{i + 1}.TI")
    b.output("satisfied_out", f"S{n}.TL")
    b.output("fail_out", *[f"S{i}.TR" for i in range(1, n + 1)])
    for i in range(1, n + 1):
        b.input(f"lit{i}_true_in", f"S{i}.LI")
        b.output(f"lit{i}_true_out", f"S{i}.LO")
        b.input(f"lit{i}_false_in", f"S{i}.RI")
        b.output(f"lit{i}_false_out", f"S{i}.RO")
    return b.build()


def _result() -> GadgetBlueprint:
    b = _Builder(GadgetKind.RESULT)
    b.gate("S1", GateKind.SELECTOR, Position.OPEN)
    b.input("win_in", "S1.TI")
    b.pig("S1.TL")
    b.input("lose_in", "S1.RI")
    b.consume("S1.RO")
    return b.build()


def build_gadget(kind: str, **params) -> GadgetBlueprint:
    """Construct a blueprint; parameters depend on the kind (bound variable,
    clause literals, player literal order, opponent literal list)."""
    if kind == GadgetKind.EQ:
        return _eq(params["var"])
    if kind == GadgetKind.UQT:
        return _uqt(params["var"])
    if kind == GadgetKind.UQF:
        return _uqf(params["var"])
    if kind == GadgetKind.CLAUSE_E:
        return _clause_e(params["literals"])
    if kind == GadgetKind.FINISH:
        return _finish(params.get("with_trigger", True))
    if kind == GadgetKind.UQR:
        return _uqr(params["var"])
    if kind == GadgetKind.ORDERING:
        return _ordering()
    if kind == GadgetKind.CHOICE:
        return _choice(params["literals"])
    if kind == GadgetKind.RANDOM_TREE:
        return _random_tree(params["literals"])
    if kind == GadgetKind.CLAUSE_G:
        return _clause_g(params["literals"])
    if kind == GadgetKind.RESULT:
        return _result()
    raise GadgetError(f"unknown gadget kind {kind!r}")


# ---------------------------------------------------------------------------
# state predicates


def gadget_state(blueprint: GadgetBlueprint, positions: Mapping[str, GateState]) -> Dict[str, object]:
    """Evaluate the gadget-level predicates for a gate-position map keyed by
    role names."""

    def is_open(role: str) -> bool:
        return positions[role] is Position.OPEN

    kind = blueprint.kind
    if kind == GadgetKind.EQ:
        return {"enabled": all(is_open(r) for r in ("A1", "A2", "S1", "S2"))}
    if kind in (GadgetKind.UQT, GadgetKind.UQR):
        return {"enabled": is_open("A1")}
    if kind == GadgetKind.UQF:
        return {
            "enabled": all(is_open(r) for r in ("A1", "S1", "S2")),
            "unlocked": is_open("A2"),
        }
    if kind == GadgetKind.CLAUSE_E:
        return {
            "enabled": all(is_open(r) for r in ("S1", "S2", "S3")),
            "activated": any(is_open(r) for r in ("S4", "S5", "S6")),
        }
    if kind == GadgetKind.FINISH:
        if not is_open("S1"):
            state = "unsolvable"
        elif blueprint.params.get("with_trigger", True) and not is_open("A1"):
            state = "disabled"
        else:
            state = "enabled"
        return {"state": state}
    if kind == GadgetKind.ORDERING:
        return {"phase": positions["O1"]}
    if kind == GadgetKind.CHOICE:
        n = len(blueprint.params["literals"])
        prefix = 0
        while prefix < n and is_open(f"A{prefix + 1}"):
            prefix += 1
        return {"open_prefix": prefix, "selects": None if prefix >= n else prefix}
    if kind == GadgetKind.RANDOM_TREE:
        return {}
    if kind == GadgetKind.CLAUSE_G:
        n = len(blueprint.params["literals"])
        return {"activated": all(is_open(f"S{i}") for i in range(1, n + 1))}
    if kind == GadgetKind.RESULT:
        return {"open": is_open("S1")}
    raise GadgetError(f"unknown gadget kind {kind!r}")


# ---------------------------------------------------------------------------
# behaviour enumeration


MAX_TABLE_ROWS = 1 << 20


@dataclass(frozen=True)
class BehaviorRow:
    state: Tuple[Tuple[str, GateState], ...]
    entrance: str
    resolutions: Tuple[str, ...]
    outcome: str  # output label, or "consumed" / "trapped" / "pig"
    next_state: Tuple[Tuple[str, GateState], ...]


def enumerate_gadget_behavior(blueprint: GadgetBlueprint) -> List[BehaviorRow]:
    """Exhaustive transition table: every gate-position combination times
    every entrance (times every resolution branch for Random gates)."""
    circuit = blueprint.to_circuit()
    cc = circuit.compiled()
    roles = cc.state_gates
    domains = []
    for role in roles:
        if blueprint.gates[role][0] is GateKind.ORDERING:
            domains.append((0, 1, 2))
        else:
            domains.append((0, 1))
    total_states = 1
    for d in domains:
        total_states *= len(d)
    if total_states * max(1, len(blueprint.inputs)) > MAX_TABLE_ROWS:
        raise GadgetError(
            f"state space too large to enumerate ({total_states} states)"
        )

    from .gates import OUT_CONSUMED, OUT_EXITED, OUT_PIG

    res_names = {0: "left", 1: "right", 2: "stuck"}
    rows: List[BehaviorRow] = []
    for combo in itertools.product(*domains):
        decoded = tuple(zip(roles, _decode(cc, combo)))
        for label in blueprint.inputs:
            pid = cc.entrance_ids[label]
            for script, code, detail, nxt in cc.run_branching(combo, pid):
                if code == OUT_EXITED:
                    outcome = cc.exit_labels[detail].split(":", 1)[1]
                elif code == OUT_CONSUMED:
                    outcome = "consumed"
                elif code == OUT_PIG:
                    outcome = "pig"
                else:
                    outcome = "trapped"
                rows.append(
                    BehaviorRow(
                        state=decoded,
                        entrance=label,
                        resolutions=tuple(res_names[r] for r in script),
                        outcome=outcome,
                        next_state=tuple(zip(roles, _decode(cc, nxt))),
                    )
                )
    return rows


def _decode(cc, combo) -> List[GateState]:
    return [cc.decode_state(combo)[role] for role in cc.state_gates]


def format_behavior_table(rows: Sequence[BehaviorRow]) -> str:
    """Render rows as an aligned text table: current state | input |
    next state | output.  Unchanged gates show as '-'."""
    if not rows:
        return "(empty table)\n"
    roles = [r for r, _ in rows[0].state]

    def fmt(value: GateState) -> str:
        if isinstance(value, Phase):
            return value.value
        return "open" if value is Position.OPEN else "closed"

    header = roles + ["input", "res"] + [f"{r}'" for r in roles] + ["output"]
    lines = [header]
    for row in rows:
        nxt = []
        for (_, before), (_, after) in zip(row.state, row.next_state):
            nxt.append("-" if before == after else fmt(after))
        lines.append(
            [fmt(v) for _, v in row.state]
            + [row.entrance, ",".join(row.resolutions) or "-"]
            + nxt
            + [row.outcome]
        )
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for i, line in enumerate(lines):
        out.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
        if i == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"
