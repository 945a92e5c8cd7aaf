"""Circuit text round-trip, DOT rendering, tables, and figure files."""

import pytest

from birdcircuit.errors import ParseError
from birdcircuit.export import (
    circuit_from_text,
    circuit_to_dot,
    circuit_to_text,
    gadget_tables_text,
    reduction_report,
)
from birdcircuit.formula import parse_g2, parse_qbf
from birdcircuit.gadgets import GadgetKind, build_gadget
from birdcircuit.reducer import PhysicsParams, annotate_geometry, reduce_abed, reduce_abes
from birdcircuit.verify import SweepRecord

FIG7_QDIMACS = "p cnf 4 3\ne 1 0\na 2 0\ne 3 0\na 4 0\n1 2 4 0\n2 -3 -4 0\n-1 -2 3 0\n"


class TestCircuitText:
    def test_roundtrip_preserves_everything(self):
        r = reduce_abed(parse_qbf(FIG7_QDIMACS))
        text = circuit_to_text(r.circuit)
        back = circuit_from_text(text)
        assert back.gates == r.circuit.gates
        assert back.tunnels == r.circuit.tunnels
        assert back.entrances == r.circuit.entrances
        assert back.sinks == r.circuit.sinks

    def test_roundtrip_with_ordering_element(self):
        r = reduce_abes(parse_g2(
            "player: a\nopponent: b\nowns player: a\nowns opponent: b\ninit: a=1 b=0\n"
        ))
        back = circuit_from_text(circuit_to_text(r.circuit))
        assert back.gates == r.circuit.gates
        assert back.gates["ord.O1"].kind.value == "ordering"
        assert back.tunnels == r.circuit.tunnels

    def test_missing_header_rejected(self):
        with pytest.raises(ParseError):
            circuit_from_text("gate g selector open\n")

    def test_bad_directive_rejected(self):
        with pytest.raises(ParseError):
            circuit_from_text("circuit v1\nwires a b\n")


class TestDot:
    def test_shapes_and_borders(self):
        r = reduce_abed(parse_qbf(FIG7_QDIMACS))
        dot = circuit_to_dot(r.circuit)
        assert "shape=box" in dot        # selector gates
        assert "shape=circle" in dot     # aut gates
        assert "shape=doublecircle" in dot  # pig
        assert "peripheries=2" in dot    # initially open gates
        assert dot.count("->") == len(r.circuit.tunnels) + len(r.circuit.entrances)

    def test_random_gates_are_triangles(self):
        s = parse_g2("player: a\nopponent: b\nowns player: a\nowns opponent: b\ninit: a=0 b=0\n")
        dot = circuit_to_dot(reduce_abes(s).circuit)
        assert "shape=triangle" in dot
        assert "shape=hexagon" in dot


class TestTables:
    def test_appendix_layout(self):
        bp = build_gadget(GadgetKind.UQT, var=1)
        text = gadget_tables_text([bp])
        lines = text.splitlines()
        assert lines[0].startswith("== uqt")
        header = lines[1]
        assert "input" in header and "output" in header
        assert any("enable_next_out" in line for line in lines)


class TestReport:
    def test_structured_payload_is_stable(self):
        r = reduce_abed(parse_qbf(FIG7_QDIMACS))
        payload = reduction_report(r)
        assert payload["variant"] == "abed"
        assert payload["bird_budget"] == "52"
        assert len(payload["gadgets"]) == 10
        assert payload["entrances"][0] == "eq1.set_pos"


class TestFigures:
    def test_level_figure_written(self, tmp_path):
        from birdcircuit.viz import render_level

        r = reduce_abed(parse_qbf(FIG7_QDIMACS))
        path = tmp_path / "level.png"
        render_level(annotate_geometry(r, PhysicsParams()), str(path))
        assert path.exists() and path.stat().st_size > 2000

    def test_circuit_figure_written(self, tmp_path):
        from birdcircuit.viz import render_circuit

        r = reduce_abed(parse_qbf(FIG7_QDIMACS))
        path = tmp_path / "circuit.png"
        render_circuit(r.circuit, str(path))
        assert path.exists() and path.stat().st_size > 2000

    def test_sweep_summary_figure(self, tmp_path):
        from birdcircuit.viz import render_sweep_summary

        records = [
            SweepRecord("abpd", "a", True, True, True),
            SweepRecord("abpd", "b", False, False, True),
            SweepRecord("abpd", "c", True, None, False),
        ]
        path = tmp_path / "sweep.png"
        render_sweep_summary(records, str(path))
        assert path.exists() and path.stat().st_size > 2000

    def test_scaling_figure(self, tmp_path):
        from birdcircuit.verify import fit_power_law, measure_scaling
        from birdcircuit.viz import render_scaling

        rows = measure_scaling((4, 8), samples=2)
        fit = fit_power_law([(n, g) for n, g, _ in rows])
        path = tmp_path / "scaling.png"
        render_scaling(rows, str(path), fit)
        assert path.exists() and path.stat().st_size > 2000
