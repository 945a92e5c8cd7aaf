"""Matplotlib figure rendering: level schematics, circuit diagrams, sweep
summaries, and the reduction-size scaling plot.  All figures render to files
(Agg backend); nothing opens a window."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import Rectangle

from .gates import Circuit, GateKind, Position
from .reducer import LevelDescription

_MARKERS = {
    GateKind.SELECTOR: "s",
    GateKind.AUT: "o",
    GateKind.RANDOM: "^",
    GateKind.CROSSOVER: "D",
    GateKind.ORDERING: "h",
}


def render_level(level: LevelDescription, path: str) -> None:
    """Draw the level layout: gadget boxes, entrance strip, slingshot, pig."""
    fig, ax = plt.subplots(figsize=(9, 7))
    for box in level.boxes:
        entrance = box.name.startswith("entrance:")
        ax.add_patch(Rectangle(
            (box.x, box.y), box.width, box.height,
            fill=entrance, facecolor="#d0e4f5" if entrance else "none",
            edgecolor="#1f77b4" if entrance else "#444444", linewidth=0.8,
        ))
        if not entrance:
            ax.annotate(box.name, (box.x + box.width / 2, box.y + box.height / 2),
                        ha="center", va="center", fontsize=6)
    for _, (x1, y1), (x2, y2) in level.routes:
        ax.plot([x1, x2], [y1, y2], color="#999999", linewidth=0.4, zorder=0)
    ax.plot(*level.slingshot, marker="v", color="#8c564b", markersize=9)
    ax.annotate("slingshot", level.slingshot, fontsize=7, xytext=(4, 4),
                textcoords="offset points")
    for kind, x, y in level.pigs:
        ax.plot(x, y, marker="o", color="#2ca02c", markersize=8)
        ax.annotate(f"pig ({kind})", (x, y), fontsize=7, xytext=(4, 4),
                    textcoords="offset points")
    ax.set_xlim(0, level.width)
    ax.set_ylim(level.height, 0)  # top-left origin, y grows downward
    ax.set_aspect("auto")
    ax.set_xlabel("x")
    ax.set_ylabel("y (downward)")
    birds = level.birds if isinstance(level.birds, tuple) else (level.birds[0] if level.birds else "-", len(level.birds))
    ax.set_title(f"level {level.width}x{level.height}, birds: {birds[0]} x{birds[1]}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_circuit(circuit: Circuit, path: str, title: str = "circuit") -> None:
    """Schematic of the gate graph: one column per gadget instance (gate id
    prefix), gates as the compact marker shapes, tunnels as light edges."""
    groups: Dict[str, List[str]] = {}
    for gid in circuit.gates:
        prefix = gid.rsplit(".", 1)[0] if "." in gid else gid
        groups.setdefault(prefix, []).append(gid)
    coords: Dict[str, Tuple[float, float]] = {}
    for col, (prefix, members) in enumerate(groups.items()):
        for row, gid in enumerate(members):
            coords[gid] = (col * 2.0, row * 1.2)
    for i, sid in enumerate(circuit.sinks):
        coords[sid] = (len(groups) * 2.0, i * 1.2)

    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(groups)), max(4, 0.5 * max(len(m) for m in groups.values()))))
    for src, dst in circuit.tunnels.items():
        x1, y1 = coords[src.gate]
        x2, y2 = coords[dst.gate]
        ax.plot([x1, x2], [y1, y2], color="#bbbbbb", linewidth=0.5, zorder=1)
    for gid, gate in circuit.gates.items():
        x, y = coords[gid]
        open_now = gate.initial is Position.OPEN
        ax.scatter([x], [y], marker=_MARKERS[gate.kind], s=80,
                   facecolors="white" if not open_now else "#ffe08a",
                   edgecolors="#333333", zorder=2)
        ax.annotate(gid, (x, y), fontsize=5, xytext=(3, 3), textcoords="offset points")
    for sid, kind in circuit.sinks.items():
        x, y = coords[sid]
        color = "#2ca02c" if kind.value == "pig" else "#888888"
        ax.scatter([x], [y], marker="*", s=90, color=color, zorder=2)
        ax.annotate(sid, (x, y), fontsize=5, xytext=(3, 3), textcoords="offset points")
    ax.invert_yaxis()
    ax.set_axis_off()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep_summary(records, path: str, title: str = "oracle equivalence sweep") -> None:
    """Bar chart of sweep outcomes: agreements split by verdict, mismatches,
    cap hits."""
    agree_true = sum(1 for r in records if r.agree and r.oracle)
    agree_false = sum(1 for r in records if r.agree and not r.oracle)
    mismatch = sum(1 for r in records if not r.agree and r.solved is not None)
    caps = sum(1 for r in records if r.solved is None)
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = ["agree: solvable", "agree: unsolvable", "mismatch", "cap hit"]
    values = [agree_true, agree_false, mismatch, caps]
    colors = ["#2ca02c", "#1f77b4", "#d62728", "#ff7f0e"]
    bars = ax.bar(labels, values, color=colors)
    for bar, value in zip(bars, values):
        ax.annotate(str(value), (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=9)
    ax.set_ylabel("instances")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_scaling(rows: Sequence[Tuple[int, float, float]], path: str,
                   fit: Optional[Tuple[float, float]] = None) -> None:
    """Log-log plot of reduction size against input size, with the fitted
    power law when given."""
    ns = [n for n, _, _ in rows]
    gates = [g for _, g, _ in rows]
    totals = [t for _, _, t in rows]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(ns, gates, "o-", label="gates")
    ax.plot(ns, totals, "s--", label="gates + tunnels")
    if fit is not None:
        a, b = fit
        ax.plot(ns, [a * n**b for n in ns], ":", color="#555555",
                label=f"fit: {a:.1f} n^{b:.2f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("input size (variables + clauses)")
    ax.set_ylabel("reduction size")
    ax.legend()
    ax.set_title("reduction size scaling")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
