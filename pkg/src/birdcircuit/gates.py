"""Gate primitives, circuit assembly, and single-bird propagation.

A circuit is a directed graph of gate instances.  Tunnels connect gate exits
to gate entrances (or to sinks); a bird dropped into an entrance is routed
step by step until it reaches a sink, leaves through an unwired exit
(trapped), or trips the loop cap.  Selector and AUT gates carry a two-valued
position; the ordering element carries a three-valued phase; Random gates
defer to an external resolver; Crossovers are pass-throughs.
"""

from __future__ import annotations

import random as _random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import CircuitError

# ---------------------------------------------------------------------------
# kinds, positions, ports


class GateKind(Enum):
    SELECTOR = "selector"
    AUT = "aut"
    RANDOM = "random"
    CROSSOVER = "crossover"
    ORDERING = "ordering"


class Position(Enum):
    """Two-valued gate position: OPEN is select-left, CLOSED is select-right."""

    OPEN = "open"
    CLOSED = "closed"


SELECT_LEFT = Position.OPEN
SELECT_RIGHT = Position.CLOSED


class Phase(Enum):
    """Ordering element phase.

    READY: the player may make their own move.
    MOVED: the player moved; they may check their own clauses, and must
           eventually trigger an opponent move.
    OPP_MOVED: an opponent move happened; its clauses must be checked before
           anything else except further opponent moves.
    """

    READY = "ready"
    MOVED = "moved"
    OPP_MOVED = "opp_moved"


GateState = Union[Position, Phase]


class Resolution(Enum):
    LEFT = "left"
    RIGHT = "right"
    STUCK = "stuck"


class Port(NamedTuple):
    gate: str
    name: str

    def __str__(self) -> str:
        return f"{self.gate}.{self.name}"

    @classmethod
    def parse(cls, text: str) -> "Port":
        gate, _, name = text.rpartition(".")
        if not gate or not name:
            raise CircuitError(f"bad port syntax {text!r} (want gate.port)")
        return cls(gate, name)


ENTRANCES: Dict[GateKind, Tuple[str, ...]] = {
    GateKind.SELECTOR: ("TI", "LI", "RI"),
    GateKind.AUT: ("TI", "LI"),
    GateKind.RANDOM: ("T",),
    GateKind.CROSSOVER: ("DI", "VI"),
    GateKind.ORDERING: ("SP_I", "SO_I", "CO_I", "CP_I"),
}

EXITS: Dict[GateKind, Tuple[str, ...]] = {
    GateKind.SELECTOR: ("TL", "TR", "LO", "RO"),
    GateKind.AUT: ("TL", "TR", "LO"),
    GateKind.RANDOM: ("L", "R"),
    GateKind.CROSSOVER: ("DO", "VO"),
    GateKind.ORDERING: ("SP_O", "SO_O", "CO_O", "CP_O"),
}

STATEFUL_KINDS = (GateKind.SELECTOR, GateKind.AUT, GateKind.ORDERING)


def default_state(kind: GateKind) -> Optional[GateState]:
    if kind is GateKind.ORDERING:
        return Phase.READY
    if kind in (GateKind.SELECTOR, GateKind.AUT):
        return Position.CLOSED
    return None


# ---------------------------------------------------------------------------
# single-gate semantics


def step_gate(
    kind: GateKind,
    pos: Optional[GateState],
    entrance: str,
    resolution: Optional[Resolution] = None,
) -> Tuple[Optional[str], Optional[GateState]]:
    """Route one bird through one gate.

    Returns (exit name or None, next state).  A None exit means the bird does
    not leave the gate (a stuck Random gate, or a blocked ordering input).
    """
    if entrance not in ENTRANCES[kind]:
        raise CircuitError(f"{kind.value} gate has no entrance {entrance!r}")
    if kind is GateKind.RANDOM:
        if resolution is None:
            raise CircuitError("Random gate needs a resolution")
        if resolution is Resolution.LEFT:
            return "L", None
        if resolution is Resolution.RIGHT:
            return "R", None
        return None, None
    if resolution is not None:
        raise CircuitError(f"{kind.value} gate takes no resolution")

    if kind is GateKind.CROSSOVER:
        return ("DO" if entrance == "DI" else "VO"), None

    if kind is GateKind.SELECTOR:
        assert isinstance(pos, Position)
        if entrance == "TI":
            return ("TL" if pos is Position.OPEN else "TR"), pos
        if entrance == "LI":
            return "LO", Position.OPEN
        return "RO", Position.CLOSED

    if kind is GateKind.AUT:
        assert isinstance(pos, Position)
        if entrance == "TI":
            if pos is Position.OPEN:
                return "TL", Position.CLOSED
            return "TR", Position.CLOSED
        return "LO", Position.OPEN

    # ordering element
    assert isinstance(pos, Phase)
    if entrance == "SP_I":
        if pos is Phase.READY:
            return "SP_O", Phase.MOVED
        return None, pos
    if entrance == "SO_I":
        if pos in (Phase.READY, Phase.MOVED, Phase.OPP_MOVED):
            return "SO_O", Phase.OPP_MOVED
        return None, pos
    if entrance == "CO_I":
        if pos in (Phase.READY, Phase.OPP_MOVED):
            return "CO_O", Phase.READY
        return None, pos
    # CP_I
    if pos is Phase.MOVED:
        return "CP_O", Phase.MOVED
    return None, pos


# ---------------------------------------------------------------------------
# circuits


class SinkKind(Enum):
    PIG = "pig"
    CONSUME = "consume"
    EXIT = "exit"


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    initial: Optional[GateState] = None

    def __post_init__(self):
        if self.kind in STATEFUL_KINDS and self.initial is None:
            object.__setattr__(self, "initial", default_state(self.kind))
        if self.kind is GateKind.ORDERING and not isinstance(self.initial, Phase):
            raise CircuitError("ordering element takes a Phase initial state")
        if self.kind in (GateKind.SELECTOR, GateKind.AUT) and not isinstance(self.initial, Position):
            raise CircuitError(f"{self.kind.value} gate takes a Position initial state")
        if self.kind in (GateKind.RANDOM, GateKind.CROSSOVER) and self.initial is not None:
            raise CircuitError(f"{self.kind.value} gate is stateless")


class OutcomeKind(Enum):
    EXITED = "exited"
    CONSUMED = "consumed"
    TRAPPED = "trapped"
    PIG_KILLED = "pig_killed"


@dataclass(frozen=True)
class BirdOutcome:
    kind: OutcomeKind
    port: Optional[Port] = None  # exit sink for EXITED, blocking port for TRAPPED

    @property
    def label(self) -> Optional[str]:
        # exit sinks are named "@out:<label>"
        if self.kind is OutcomeKind.EXITED and self.port is not None:
            return self.port.gate.split(":", 1)[1] if ":" in self.port.gate else self.port.gate
        return None


Resolver = Callable[[str], Resolution]


class SeededResolver:
    """Pseudo-random resolver for demo and replay; same seed, same outcomes."""

    def __init__(self, seed: int, stuck_weight: float = 0.2):
        self._rng = _random.Random(seed)
        self._stuck = stuck_weight

    def __call__(self, gate_id: str) -> Resolution:
        roll = self._rng.random()
        if roll < self._stuck:
            return Resolution.STUCK
        return Resolution.LEFT if roll < (1 + self._stuck) / 2 else Resolution.RIGHT


class ScriptResolver:
    """Replays a fixed resolution sequence; raises when exhausted."""

    def __init__(self, script: Iterable[Resolution]):
        self._script = list(script)
        self._index = 0

    def __call__(self, gate_id: str) -> Resolution:
        if self._index >= len(self._script):
            raise CircuitError("resolution script exhausted")
        value = self._script[self._index]
        self._index += 1
        return value


@dataclass
class Circuit:
    """Immutable-by-convention gate graph; mutate only through the add_*
    helpers, which keep the compiled form invalidated."""

    gates: Dict[str, Gate] = field(default_factory=dict)
    tunnels: Dict[Port, Port] = field(default_factory=dict)
    entrances: Dict[str, Port] = field(default_factory=dict)
    sinks: Dict[str, SinkKind] = field(default_factory=dict)

    def __post_init__(self):
        self._compiled: Optional[CompiledCircuit] = None

    # -- construction -------------------------------------------------

    def add_gate(self, gate_id: str, kind: GateKind, initial: Optional[GateState] = None) -> None:
        if gate_id in self.gates or gate_id in self.sinks:
            raise CircuitError(f"duplicate gate id {gate_id!r}")
        self.gates[gate_id] = Gate(kind, initial)
        self._compiled = None

    def add_sink(self, sink_id: str, kind: SinkKind) -> None:
        if sink_id in self.sinks or sink_id in self.gates:
            raise CircuitError(f"duplicate sink id {sink_id!r}")
        self.sinks[sink_id] = kind
        self._compiled = None

    def add_tunnel(self, src: Port, dst: Port) -> None:
        self._check_exit(src)
        self._check_entrance(dst)
        if src in self.tunnels:
            raise CircuitError(f"exit {src} already tunneled")
        self.tunnels[src] = dst
        self._compiled = None

    def add_entrance(self, name: str, target: Port) -> None:
        if name in self.entrances:
            raise CircuitError(f"duplicate entrance name {name!r}")
        self._check_entrance(target)
        if target.gate in self.sinks:
            raise CircuitError(f"external entrance {name!r} may not target a sink")
        self.entrances[name] = target
        self._compiled = None

    def _check_exit(self, port: Port) -> None:
        gate = self.gates.get(port.gate)
        if gate is None:
            raise CircuitError(f"tunnel from unknown gate {port.gate!r}")
        if port.name not in EXITS[gate.kind]:
            raise CircuitError(f"{port} is not an exit of a {gate.kind.value} gate")

    def _check_entrance(self, port: Port) -> None:
        if port.gate in self.sinks:
            return
        gate = self.gates.get(port.gate)
        if gate is None:
            raise CircuitError(f"tunnel into unknown gate {port.gate!r}")
        if port.name not in ENTRANCES[gate.kind]:
            raise CircuitError(f"{port} is not an entrance of a {gate.kind.value} gate")

    # -- state --------------------------------------------------------

    def initial_state(self) -> Dict[str, GateState]:
        return {
            gid: gate.initial
            for gid, gate in self.gates.items()
            if gate.kind in STATEFUL_KINDS
        }

    def compiled(self) -> "CompiledCircuit":
        if self._compiled is None:
            self._compiled = CompiledCircuit(self)
        return self._compiled


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    kind: str
    message: str


@dataclass
class ValidationReport:
    findings: List[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def of_kind(self, kind: str) -> List[Finding]:
        return [f for f in self.findings if f.kind == kind]


def validate_circuit(circuit: Circuit) -> ValidationReport:
    """Diagnostic pass: dangling tunnels, duplicate entrance targets, and
    gates with no inbound path from any external entrance.  Unwired exits are
    deliberate (trapped birds), never findings."""
    report = ValidationReport()
    for src, dst in circuit.tunnels.items():
        if src.gate not in circuit.gates:
            report.findings.append(Finding("dangling_tunnel", f"tunnel from unknown gate at {src}"))
        if dst.gate not in circuit.gates and dst.gate not in circuit.sinks:
            report.findings.append(Finding("dangling_tunnel", f"tunnel into unknown endpoint {dst}"))

    targets: Dict[Port, str] = {}
    for name, port in circuit.entrances.items():
        if port.gate not in circuit.gates:
            report.findings.append(Finding("dangling_tunnel", f"entrance {name!r} targets unknown gate {port.gate!r}"))
            continue
        if port in targets:
            report.findings.append(
                Finding("entrance_collision", f"entrances {targets[port]!r} and {name!r} share target {port}")
            )
        targets[port] = name

    reachable = set()
    frontier = [p.gate for p in circuit.entrances.values() if p.gate in circuit.gates]
    while frontier:
        gid = frontier.pop()
        if gid in reachable:
            continue
        reachable.add(gid)
        for exit_name in EXITS[circuit.gates[gid].kind]:
            dst = circuit.tunnels.get(Port(gid, exit_name))
            if dst is not None and dst.gate in circuit.gates and dst.gate not in reachable:
                frontier.append(dst.gate)
    for gid in circuit.gates:
        if gid not in reachable:
            report.findings.append(Finding("unreachable_gate", f"gate {gid!r} has no inbound path from any entrance"))
    return report


# ---------------------------------------------------------------------------
# compiled propagation (hot path)

# opcodes
_OP_SEL_TI, _OP_SEL_LI, _OP_SEL_RI = 0, 1, 2
_OP_AUT_TI, _OP_AUT_LI = 3, 4
_OP_RAND = 5
_OP_CROSS = 6
_OP_ORD_SP, _OP_ORD_SO, _OP_ORD_CO, _OP_ORD_CP = 7, 8, 9, 10
_OP_SINK = 11

# sink codes (stored in the action's first arg)
SINK_PIG, SINK_CONSUME = -1, -2
_TRAPPED = -1  # destination sentinel

# outcome codes returned by CompiledCircuit.run
OUT_PIG, OUT_CONSUMED, OUT_TRAPPED, OUT_EXITED = 0, 1, 2, 3

_PHASE_CODE = {Phase.READY: 0, Phase.MOVED: 1, Phase.OPP_MOVED: 2}
_CODE_PHASE = {v: k for k, v in _PHASE_CODE.items()}
_RES_CODE = {Resolution.LEFT: 0, Resolution.RIGHT: 1, Resolution.STUCK: 2}


class CompiledCircuit:
    """Integer-coded form of a circuit for fast repeated propagation.

    State is a tuple of small ints over the stateful gates: 1/0 for
    open/closed, 0..2 for ordering phases.
    """

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.state_gates: List[str] = [
            gid for gid, g in circuit.gates.items() if g.kind in STATEFUL_KINDS
        ]
        self.state_index = {gid: i for i, gid in enumerate(self.state_gates)}
        initial = []
        for gid in self.state_gates:
            init = circuit.gates[gid].initial
            if isinstance(init, Phase):
                initial.append(_PHASE_CODE[init])
            else:
                initial.append(1 if init is Position.OPEN else 0)
        self.initial = tuple(initial)

        self.port_id: Dict[Port, int] = {}
        ports: List[Port] = []

        def intern(port: Port) -> int:
            pid = self.port_id.get(port)
            if pid is None:
                pid = len(ports)
                self.port_id[port] = pid
                ports.append(port)
            return pid

        # sink action ports first
        self.exit_labels: List[str] = []
        sink_action: Dict[str, Tuple] = {}
        for sid, skind in circuit.sinks.items():
            if skind is SinkKind.PIG:
                sink_action[sid] = (_OP_SINK, -1, sid, SINK_PIG, 0)
            elif skind is SinkKind.CONSUME:
                sink_action[sid] = (_OP_SINK, -1, sid, SINK_CONSUME, 0)
            else:
                label_id = len(self.exit_labels)
                self.exit_labels.append(sid)
                sink_action[sid] = (_OP_SINK, -1, sid, label_id, 0)

        # pre-intern every entrance port so actions can be indexed densely
        for gid, gate in circuit.gates.items():
            for name in ENTRANCES[gate.kind]:
                intern(Port(gid, name))
        for sid in circuit.sinks:
            intern(Port(sid, "in"))
        # destinations of tunnels may use arbitrary sink port names
        for dst in circuit.tunnels.values():
            intern(dst)

        def dest(gid: str, exit_name: str) -> int:
            tunnel = circuit.tunnels.get(Port(gid, exit_name))
            if tunnel is None:
                return _TRAPPED
            return self.port_id[tunnel]

        self.actions: List[Tuple] = [None] * len(ports)
        for port, pid in list(self.port_id.items()):
            if port.gate in circuit.sinks:
                self.actions[pid] = sink_action[port.gate]
                continue
            gate = circuit.gates[port.gate]
            if port.name not in ENTRANCES[gate.kind]:
                raise CircuitError(f"tunnel into non-entrance {port}")
            sidx = self.state_index.get(port.gate, -1)
            gid = port.gate
            kind = gate.kind
            if kind is GateKind.SELECTOR:
                if port.name == "TI":
                    act = (_OP_SEL_TI, sidx, gid, dest(gid, "TL"), dest(gid, "TR"))
                elif port.name == "LI":
                    act = (_OP_SEL_LI, sidx, gid, dest(gid, "LO"), 0)
                else:
                    act = (_OP_SEL_RI, sidx, gid, dest(gid, "RO"), 0)
            elif kind is GateKind.AUT:
                if port.name == "TI":
                    act = (_OP_AUT_TI, sidx, gid, dest(gid, "TL"), dest(gid, "TR"))
                else:
                    act = (_OP_AUT_LI, sidx, gid, dest(gid, "LO"), 0)
            elif kind is GateKind.RANDOM:
                act = (_OP_RAND, sidx, gid, dest(gid, "L"), dest(gid, "R"))
            elif kind is GateKind.CROSSOVER:
                out = "DO" if port.name == "DI" else "VO"
                act = (_OP_CROSS, sidx, gid, dest(gid, out), 0)
            else:  # ordering
                table = {"SP_I": (_OP_ORD_SP, "SP_O"), "SO_I": (_OP_ORD_SO, "SO_O"),
                         "CO_I": (_OP_ORD_CO, "CO_O"), "CP_I": (_OP_ORD_CP, "CP_O")}
                opcode, out = table[port.name]
                act = (opcode, sidx, gid, dest(gid, out), 0)
            self.actions[pid] = act

        self.ports = ports
        self.entrance_ids = {name: self.port_id[p] for name, p in circuit.entrances.items()}
        self.step_cap = max(8, 4 * len(circuit.gates))

    # -- state conversion ----------------------------------------------

    def encode_state(self, state: Mapping[str, GateState]) -> Tuple[int, ...]:
        out = []
        for gid in self.state_gates:
            value = state[gid]
            if isinstance(value, Phase):
                out.append(_PHASE_CODE[value])
            else:
                out.append(1 if value is Position.OPEN else 0)
        return tuple(out)

    def decode_state(self, coded: Sequence[int]) -> Dict[str, GateState]:
        out: Dict[str, GateState] = {}
        for gid, value in zip(self.state_gates, coded):
            if self.circuit.gates[gid].kind is GateKind.ORDERING:
                out[gid] = _CODE_PHASE[value]
            else:
                out[gid] = Position.OPEN if value else Position.CLOSED
        return out

    # -- propagation ----------------------------------------------------

    def run(
        self,
        state: List[int],
        pid: int,
        resolver: Optional[Resolver] = None,
        trace: Optional[List[str]] = None,
    ) -> Tuple[int, int]:
        """Propagate one bird starting at action port `pid`, mutating `state`.

        Returns (outcome code, detail): detail is an exit label id for
        OUT_EXITED and the blocking port id for OUT_TRAPPED.
        """
        actions = self.actions
        steps = 0
        cap = self.step_cap
        while True:
            opcode, sidx, gid, a, b = actions[pid]
            if opcode == _OP_SINK:
                if a == SINK_PIG:
                    return OUT_PIG, 0
                if a == SINK_CONSUME:
                    return OUT_CONSUMED, 0
                return OUT_EXITED, a
            steps += 1
            if steps > cap:
                raise CircuitError(f"loop cap exceeded ({cap} steps); circuit is malformed")
            if trace is not None:
                trace.append(gid)
            if opcode == _OP_SEL_TI:
                nxt = a if state[sidx] else b
            elif opcode == _OP_SEL_LI:
                state[sidx] = 1
                nxt = a
            elif opcode == _OP_SEL_RI:
                state[sidx] = 0
                nxt = a
            elif opcode == _OP_AUT_TI:
                if state[sidx]:
                    state[sidx] = 0
                    nxt = a
                else:
                    nxt = b
            elif opcode == _OP_AUT_LI:
                state[sidx] = 1
                nxt = a
            elif opcode == _OP_RAND:
                if resolver is None:
                    raise CircuitError(f"bird reached Random gate {gid!r} with no resolver")
                res = resolver(gid)
                code = _RES_CODE[res] if isinstance(res, Resolution) else res
                if code == 2:
                    return OUT_TRAPPED, pid
                nxt = a if code == 0 else b
            elif opcode == _OP_CROSS:
                nxt = a
            elif opcode == _OP_ORD_SP:
                if state[sidx] != 0:
                    return OUT_TRAPPED, pid
                state[sidx] = 1
                nxt = a
            elif opcode == _OP_ORD_SO:
                state[sidx] = 2
                nxt = a
            elif opcode == _OP_ORD_CO:
                if state[sidx] == 1:
                    return OUT_TRAPPED, pid
                state[sidx] = 0
                nxt = a
            else:  # _OP_ORD_CP
                if state[sidx] != 1:
                    return OUT_TRAPPED, pid
                nxt = a
            if nxt < 0:
                return OUT_TRAPPED, pid
            pid = nxt

    def run_branching(
        self, state: Sequence[int], pid: int
    ) -> List[Tuple[Tuple[int, ...], int, int, Tuple[int, ...]]]:
        """Enumerate every resolution branch of one bird.

        Returns (resolution path, outcome code, detail, next state) tuples;
        the path lists resolution codes (0 left, 1 right, 2 stuck) in the
        order the Random gates were met.
        """
        results = []
        pending: List[Tuple[int, ...]] = [()]
        while pending:
            script = pending.pop()
            consumed = 0

            def scripted(gate_id: str) -> int:
                nonlocal consumed
                if consumed >= len(script):
                    raise _NeedBranch()
                value = script[consumed]
                consumed += 1
                return value

            working = list(state)
            try:
                code, detail = self.run(working, pid, scripted)
            except _NeedBranch:
                pending.extend(script + (r,) for r in (2, 1, 0))
                continue
            results.append((script, code, detail, tuple(working)))
        return results

    def outcome(self, code: int, detail: int) -> BirdOutcome:
        if code == OUT_PIG:
            return BirdOutcome(OutcomeKind.PIG_KILLED)
        if code == OUT_CONSUMED:
            return BirdOutcome(OutcomeKind.CONSUMED)
        if code == OUT_TRAPPED:
            return BirdOutcome(OutcomeKind.TRAPPED, self.ports[detail])
        label = self.exit_labels[detail]
        return BirdOutcome(OutcomeKind.EXITED, Port(label, "in"))


class _NeedBranch(Exception):
    pass


# ---------------------------------------------------------------------------
# public propagation API


def propagate_bird(
    circuit: Circuit,
    state: Mapping[str, GateState],
    entrance: str,
    resolver: Optional[Resolver] = None,
    trace: Optional[List[str]] = None,
) -> Tuple[BirdOutcome, Dict[str, GateState]]:
    """Drop one bird into a named external entrance and follow it to rest.

    Returns the outcome and the successor state; the input state is not
    mutated.  `trace`, when given, collects visited gate ids in order.
    """
    cc = circuit.compiled()
    if entrance not in cc.entrance_ids:
        raise CircuitError(f"unknown entrance {entrance!r}")
    working = list(cc.encode_state(state))
    code, detail = cc.run(working, cc.entrance_ids[entrance], resolver, trace)
    return cc.outcome(code, detail), cc.decode_state(working)


def propagate_from_port(
    circuit: Circuit,
    state: Mapping[str, GateState],
    port: Port,
    resolver: Optional[Resolver] = None,
) -> Tuple[BirdOutcome, Dict[str, GateState]]:
    """Like propagate_bird, but inject the bird at an arbitrary entrance port
    (used for construction-time phantom birds, never for player shots)."""
    cc = circuit.compiled()
    pid = cc.port_id.get(port)
    if pid is None:
        raise CircuitError(f"unknown port {port}")
    working = list(cc.encode_state(state))
    code, detail = cc.run(working, pid, resolver)
    return cc.outcome(code, detail), cc.decode_state(working)
