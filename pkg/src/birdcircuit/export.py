"""Text-document export and import for circuits, DOT rendering, and the
level-description document."""

from __future__ import annotations

from typing import Dict, List

from .errors import ParseError
from .gadgets import GadgetBlueprint, enumerate_gadget_behavior, format_behavior_table
from .gates import (
    Circuit,
    GateKind,
    Phase,
    Port,
    Position,
    SinkKind,
)
from .reducer import ReductionOutput

_STATE_WORDS = {
    Position.OPEN: "open",
    Position.CLOSED: "closed",
    Phase.READY: "ready",
    Phase.MOVED: "moved",
    Phase.OPP_MOVED: "opp_moved",
}
_WORD_STATES = {v: k for k, v in _STATE_WORDS.items()}


def circuit_to_text(circuit: Circuit) -> str:
    """Serialize a circuit as a line-oriented document:

    gate <id> <kind> [state] / sink <id> <kind> /
    tunnel <src.port> <dst.port> / entrance <name> <gate.port>
    """
    lines = ["circuit v1"]
    for gid, gate in circuit.gates.items():
        state = f" {_STATE_WORDS[gate.initial]}" if gate.initial is not None else ""
        lines.append(f"gate {gid} {gate.kind.value}{state}")
    for sid, kind in circuit.sinks.items():
        lines.append(f"sink {sid} {kind.value}")
    for src, dst in circuit.tunnels.items():
        lines.append(f"tunnel {src} {dst}")
    for name, port in circuit.entrances.items():
        lines.append(f"entrance {name} {port}")
    return "\n".join(lines) + "\n"


def circuit_from_text(text: str) -> Circuit:
    circuit = Circuit()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("circuit"):
        raise ParseError("missing 'circuit' header line", 1)
    pending_tunnels: List[tuple] = []
    pending_entrances: List[tuple] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "gate":
                state = _WORD_STATES[parts[3]] if len(parts) > 3 else None
                circuit.add_gate(parts[1], GateKind(parts[2]), state)
            elif kind == "sink":
                circuit.add_sink(parts[1], SinkKind(parts[2]))
            elif kind == "tunnel":
                pending_tunnels.append((lineno, Port.parse(parts[1]), Port.parse(parts[2])))
            elif kind == "entrance":
                pending_entrances.append((lineno, parts[1], Port.parse(parts[2])))
            else:
                raise ParseError(f"unknown directive {kind!r}", lineno)
        except (KeyError, ValueError, IndexError) as exc:
            raise ParseError(f"bad {kind} line: {exc}", lineno) from exc
    for lineno, src, dst in pending_tunnels:
        circuit.add_tunnel(src, dst)
    for lineno, name, port in pending_entrances:
        circuit.add_entrance(name, port)
    return circuit


_DOT_SHAPES = {
    GateKind.SELECTOR: "box",
    GateKind.AUT: "circle",
    GateKind.RANDOM: "triangle",
    GateKind.CROSSOVER: "diamond",
    GateKind.ORDERING: "hexagon",
}
_SINK_SHAPES = {SinkKind.PIG: "doublecircle", SinkKind.CONSUME: "point", SinkKind.EXIT: "cds"}


def circuit_to_dot(circuit: Circuit, name: str = "circuit") -> str:
    """DOT graph: squares for Selector gates, circles for AUT gates,
    triangles for Random gates; initially open gates get a double border."""
    lines = [f"digraph \"{name}\" {{", "  rankdir=TB;"]
    for gid, gate in circuit.gates.items():
        attrs = [f"shape={_DOT_SHAPES[gate.kind]}"]
        if gate.initial is Position.OPEN:
            attrs.append("peripheries=2")
        if isinstance(gate.initial, Phase):
            attrs.append(f"label=\"{gid}\\n{gate.initial.value}\"")
        lines.append(f"  \"{gid}\" [{', '.join(attrs)}];")
    for sid, kind in circuit.sinks.items():
        label = ", label=\"pig\"" if kind is SinkKind.PIG else ""
        lines.append(f"  \"{sid}\" [shape={_SINK_SHAPES[kind]}{label}];")
    for src, dst in circuit.tunnels.items():
        lines.append(f"  \"{src.gate}\" -> \"{dst.gate}\" [label=\"{src.name}>{dst.name}\", fontsize=8];")
    for ename, port in circuit.entrances.items():
        node = f"in:{ename}"
        lines.append(f"  \"{node}\" [shape=plaintext, label=\"{ename}\"];")
        lines.append(f"  \"{node}\" -> \"{port.gate}\" [label=\"{port.name}\", style=dashed, fontsize=8];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def gadget_tables_text(blueprints: List[GadgetBlueprint]) -> str:
    """Concatenated transition tables, one per blueprint."""
    chunks = []
    for bp in blueprints:
        chunks.append(f"== {bp.kind} {bp.params or ''}".rstrip())
        chunks.append(format_behavior_table(enumerate_gadget_behavior(bp)))
    return "\n".join(chunks)


def reduction_report(reduction: ReductionOutput) -> Dict[str, object]:
    """Stable structured summary of a reduction (the CLI's JSON payload)."""
    return {
        "variant": reduction.variant.value,
        "bird_budget": str(reduction.bird_budget),
        "gates": len(reduction.circuit.gates),
        "tunnels": len(reduction.circuit.tunnels),
        "gadgets": [
            {"id": gid, "kind": bp.kind, "gates": len(bp.gates)}
            for gid, bp in reduction.gadgets
        ],
        "entrances": list(reduction.entrances),
    }
