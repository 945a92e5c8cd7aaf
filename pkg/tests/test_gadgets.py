"""Per-gadget behaviour: construction shape, state predicates, and the
documented interaction protocols, checked over reachable states."""

import itertools

import pytest

from birdcircuit.errors import GadgetError
from birdcircuit.formula import Literal
from birdcircuit.gadgets import (
    GadgetKind,
    build_gadget,
    enumerate_gadget_behavior,
    format_behavior_table,
    gadget_state,
)
from birdcircuit.gates import (
    GateKind,
    OutcomeKind,
    Phase,
    Position,
    propagate_bird,
)

OPEN, CLOSED = Position.OPEN, Position.CLOSED


def reachable_states(bp, entrances=None):
    """BFS over gate-position states via bird drops into the given entrances
    (default: all).  Returns {state: set of (entrance, outcome label)}."""
    circuit = bp.to_circuit()
    cc = circuit.compiled()
    start = cc.encode_state(circuit.initial_state())
    entrances = list(entrances or circuit.entrances)
    seen = {start}
    frontier = [start]
    while frontier:
        state = frontier.pop()
        for name in entrances:
            for _, _, _, nxt in cc.run_branching(state, cc.entrance_ids[name]):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return [dict(zip(cc.state_gates, cc.decode_state(s).values())) for s in seen], cc


def fire_label(bp, state, entrance, script=()):
    """One bird; returns (outcome label or kind name, next state dict)."""
    circuit = bp.to_circuit()
    from birdcircuit.gates import ScriptResolver, Resolution

    resolver = ScriptResolver([Resolution(s) for s in script]) if script else None
    outcome, after = propagate_bird(circuit, state, entrance, resolver)
    label = outcome.label if outcome.kind is OutcomeKind.EXITED else outcome.kind.value
    return label, after


class TestEq:
    bp = build_gadget(GadgetKind.EQ, var=1)

    def test_shape(self):
        kinds = [k for k, _ in self.bp.gates.values()]
        assert kinds.count(GateKind.SELECTOR) == 2
        assert kinds.count(GateKind.AUT) == 4
        assert len(self.bp.player_inputs) == 4

    def test_enable_then_commit_positive(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        assert gadget_state(self.bp, state)["enabled"] is False
        label, state = fire_label(self.bp, state, "enable_in")
        assert gadget_state(self.bp, state)["enabled"] is True
        label, state = fire_label(self.bp, state, "set_pos_in")
        assert label == "modify_pos_out"
        assert state["A1"] is CLOSED and state["S2"] is CLOSED and state["A3"] is OPEN
        assert gadget_state(self.bp, state)["enabled"] is False
        label, state = fire_label(self.bp, state, "check_pos_in")
        assert label == "enable_next_out"

    def test_commit_negative_mirror(self):
        circuit = self.bp.to_circuit()
        _, state = fire_label(self.bp, circuit.initial_state(), "enable_in")
        label, state = fire_label(self.bp, state, "set_neg_in")
        assert label == "modify_neg_out"
        assert state["A2"] is CLOSED and state["S1"] is CLOSED and state["A4"] is OPEN

    def test_one_commit_per_enablement(self):
        """From the enabled state exactly one modify exit is reachable, and
        the second commit attempt is swallowed."""
        circuit = self.bp.to_circuit()
        _, enabled = fire_label(self.bp, circuit.initial_state(), "enable_in")
        for first, second in (("set_pos_in", "set_neg_in"), ("set_neg_in", "set_pos_in")):
            label, state = fire_label(self.bp, dict(enabled), first)
            assert label.startswith("modify_")
            label2, _ = fire_label(self.bp, state, second)
            assert label2 == "trapped"

    def test_disabled_states_cannot_open_checkers(self):
        """Player-facing shots from any reachable disabled state never open
        a checker gate that was closed."""
        states, _ = reachable_states(self.bp)
        player = list(self.bp.player_inputs)
        for state in states:
            if gadget_state(self.bp, state)["enabled"]:
                continue
            for entrance in player:
                _, after = fire_label(self.bp, dict(state), entrance)
                for checker in ("A3", "A4"):
                    if state[checker] is CLOSED:
                        assert after[checker] is CLOSED

    def test_structural_coupling_in_reachable_states(self):
        """A2 and S1 always share a position; A1 open implies S2 open."""
        states, _ = reachable_states(self.bp)
        for state in states:
            assert state["A2"] == state["S1"]
            if state["A1"] is OPEN:
                assert state["S2"] is OPEN

    def test_behavior_table_has_all_rows(self):
        rows = enumerate_gadget_behavior(self.bp)
        assert len(rows) == 2**6 * 5  # 64 states x 5 entrances
        text = format_behavior_table(rows)
        assert "modify_pos_out" in text


class TestUqt:
    bp = build_gadget(GadgetKind.UQT, var=2)

    def test_enable_emits_the_positive_set(self):
        circuit = self.bp.to_circuit()
        label, state = fire_label(self.bp, circuit.initial_state(), "enable_in")
        assert label == "modify_pos_out"
        assert gadget_state(self.bp, state)["enabled"] is True

    def test_check_disables_and_hands_on(self):
        circuit = self.bp.to_circuit()
        _, state = fire_label(self.bp, circuit.initial_state(), "enable_in")
        label, state = fire_label(self.bp, state, "check_in")
        assert label == "enable_next_out"
        assert gadget_state(self.bp, state)["enabled"] is False

    def test_check_while_disabled_is_swallowed(self):
        circuit = self.bp.to_circuit()
        label, _ = fire_label(self.bp, circuit.initial_state(), "check_in")
        assert label == "trapped"

    def test_table_is_two_by_two(self):
        assert len(enumerate_gadget_behavior(self.bp)) == 2 * 2


class TestUqf:
    bp = build_gadget(GadgetKind.UQF, var=3)

    def enabled_locked(self):
        circuit = self.bp.to_circuit()
        _, state = fire_label(self.bp, circuit.initial_state(), "enable_in")
        return state

    def test_set_negative_unlocks(self):
        state = self.enabled_locked()
        assert gadget_state(self.bp, state) == {"enabled": True, "unlocked": False}
        label, state = fire_label(self.bp, state, "set_neg_in")
        assert label == "modify_neg_out"
        assert gadget_state(self.bp, state) == {"enabled": False, "unlocked": True}
        assert state["A3"] is OPEN

    def test_pass_down_needs_prior_unlock(self):
        state = self.enabled_locked()
        label, state = fire_label(self.bp, state, "next_in")
        assert label == "trapped"
        assert state["S2"] is CLOSED  # the wasted traversal closes S2

    def test_alternation_cycle(self):
        state = self.enabled_locked()
        _, state = fire_label(self.bp, state, "set_neg_in")
        _, state = fire_label(self.bp, state, "check_adj_in")
        _, state = fire_label(self.bp, state, "enable_in")
        assert gadget_state(self.bp, state) == {"enabled": True, "unlocked": True}
        label, state = fire_label(self.bp, state, "next_in")
        assert label == "next_uqf_out"
        assert state["S2"] is CLOSED and state["A2"] is CLOSED
        assert gadget_state(self.bp, state) == {"enabled": False, "unlocked": False}

    def test_adjacent_checker_requires_set_negative(self):
        state = self.enabled_locked()
        label, _ = fire_label(self.bp, state, "check_adj_in")
        assert label == "trapped"


class TestClauseExistential:
    literals = (Literal(1), Literal(2, False), Literal(3))
    bp = build_gadget(GadgetKind.CLAUSE_E, literals=literals)

    def test_shape(self):
        assert len(self.bp.gates) == 6
        assert all(k is GateKind.SELECTOR for k, _ in self.bp.gates.values())

    def test_check_passes_iff_enabled_and_slot_open(self):
        """Exhaustive over all 64 states and the three checker entrances."""
        for bits in itertools.product((OPEN, CLOSED), repeat=6):
            state = dict(zip(("S1", "S2", "S3", "S4", "S5", "S6"), bits))
            for i in (1, 2, 3):
                label, after = fire_label(self.bp, dict(state), f"check{i}_in")
                should_pass = state[f"S{i}"] is OPEN and state[f"S{i + 3}"] is OPEN
                assert (label == "enable_next_out") == should_pass
                assert after == state  # checks never move gates

    def test_enable_and_disable_chains(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        _, state = fire_label(self.bp, state, "enable_in")
        assert gadget_state(self.bp, state)["enabled"] is True
        label, state = fire_label(self.bp, state, "disable_in")
        assert label == "disable_next_out"
        assert gadget_state(self.bp, state)["enabled"] is False

    def test_literal_routes_toggle_activation(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        assert gadget_state(self.bp, state)["activated"] is False
        label, state = fire_label(self.bp, state, "lit2_true_in")
        assert label == "lit2_true_out"
        assert gadget_state(self.bp, state)["activated"] is True
        label, state = fire_label(self.bp, state, "lit2_false_in")
        assert gadget_state(self.bp, state)["activated"] is False

    def test_requires_exactly_three_literals(self):
        with pytest.raises(GadgetError):
            build_gadget(GadgetKind.CLAUSE_E, literals=(Literal(1), Literal(2)))


class TestFinish:
    bp = build_gadget(GadgetKind.FINISH)

    def test_initially_disabled(self):
        circuit = self.bp.to_circuit()
        assert gadget_state(self.bp, circuit.initial_state()) == {"state": "disabled"}

    def test_trigger_sequence_enabled_disabled_unsolvable(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        _, state = fire_label(self.bp, state, "enable_in")
        assert gadget_state(self.bp, state) == {"state": "enabled"}
        _, state = fire_label(self.bp, state, "trigger_in")
        assert gadget_state(self.bp, state) == {"state": "disabled"}
        _, state = fire_label(self.bp, state, "trigger_in")
        assert gadget_state(self.bp, state) == {"state": "unsolvable"}
        # unsolvable is absorbing
        _, state = fire_label(self.bp, state, "trigger_in")
        assert gadget_state(self.bp, state) == {"state": "unsolvable"}
        _, state = fire_label(self.bp, state, "enable_in")
        assert gadget_state(self.bp, state) == {"state": "unsolvable"}

    def test_pass_kills_pig_iff_door_open(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        label, _ = fire_label(self.bp, state, "pass_in")
        assert label == "pig_killed"
        _, state = fire_label(self.bp, state, "trigger_in")   # disabled -> unsolvable path
        _, state = fire_label(self.bp, state, "trigger_in")
        label, _ = fire_label(self.bp, state, "pass_in")
        assert label == "trapped"

    def test_no_player_entrances(self):
        assert self.bp.player_inputs == ()


class TestUqr:
    bp = build_gadget(GadgetKind.UQR, var=4)

    def test_enable_branches(self):
        """The enabling bird may set the variable positive, vanish right, or
        stay stuck; every branch leaves the gadget enabled."""
        circuit = self.bp.to_circuit()
        cc = circuit.compiled()
        start = cc.encode_state(circuit.initial_state())
        branches = cc.run_branching(start, cc.entrance_ids["enable_in"])
        labels = set()
        for script, code, detail, nxt in branches:
            outcome = cc.outcome(code, detail)
            labels.add(outcome.label or outcome.kind.value)
            assert gadget_state(self.bp, cc.decode_state(nxt))["enabled"] is True
        assert labels == {"modify_pos_out", "consumed", "trapped"}

    def test_check_hands_on(self):
        circuit = self.bp.to_circuit()
        _, state = fire_label(self.bp, circuit.initial_state(), "enable_in", script=("right",))
        label, state = fire_label(self.bp, state, "check_in")
        assert label == "enable_next_out"
        assert gadget_state(self.bp, state)["enabled"] is False


class TestOrdering:
    bp = build_gadget(GadgetKind.ORDERING)

    def test_initial_phase(self):
        circuit = self.bp.to_circuit()
        assert gadget_state(self.bp, circuit.initial_state())["phase"] is Phase.READY

    def test_move_order_lemmas_exhaustively(self):
        """Product-automaton reachability: over every emission sequence of
        any length, (a) between two player moves there is an opponent move
        followed by an opponent check, and (b) after an opponent move no
        self check precedes the opponent check.

        Monitor for (a): `need` walks None -> "so" -> "co" -> None; a player
        move with `need` unsatisfied is a violation.  Monitor for (b):
        `pending` is set by an opponent move and cleared by its check.
        """
        from birdcircuit.gates import step_gate

        start = (Phase.READY, None, False)
        seen = {start}
        frontier = [start]
        while frontier:
            phase, need, pending = frontier.pop()
            for entrance in ("SP_I", "SO_I", "CO_I", "CP_I"):
                emit, next_phase = step_gate(GateKind.ORDERING, phase, entrance)
                if emit is None:
                    continue  # blocked bird: no emission, no phase change
                need2, pending2 = need, pending
                if emit == "SP_O":
                    assert need is None, "player moved again before opponent move+check"
                    need2 = "so"
                elif emit == "SO_O":
                    if need == "so":
                        need2 = "co"
                    pending2 = True
                elif emit == "CO_O":
                    if need == "co":
                        need2 = None
                    pending2 = False
                elif emit == "CP_O":
                    assert not pending, "self check before the opponent check"
                node = (next_phase, need2, pending2)
                if node not in seen:
                    seen.add(node)
                    frontier.append(node)
        assert len(seen) <= 18

    def test_brute_force_sequences(self):
        """Direct check of the two guarantees over every input sequence of
        length 8."""
        inputs = ("SP_I", "SO_I", "CO_I", "CP_I")
        emit_of = {"SP_I": "SP_O", "SO_I": "SO_O", "CO_I": "CO_O", "CP_I": "CP_O"}
        from birdcircuit.gates import step_gate, GateKind

        for length in range(1, 9):
            for seq in itertools.product(inputs, repeat=length):
                phase = Phase.READY
                emissions = []
                for entrance in seq:
                    exit_name, phase = step_gate(GateKind.ORDERING, phase, entrance)
                    if exit_name is not None:
                        emissions.append(exit_name)
                self.check_emissions(emissions)

    @staticmethod
    def check_emissions(emissions):
        # between consecutive SP_O: an SO_O must appear, then a CO_O after it
        last_sp = None
        for i, e in enumerate(emissions):
            if e != "SP_O":
                continue
            if last_sp is not None:
                window = emissions[last_sp + 1 : i]
                assert "SO_O" in window
                assert "CO_O" in window[window.index("SO_O") :]
            last_sp = i
        # after SO_O, no CP_O until a CO_O
        waiting = False
        for e in emissions:
            if e == "SO_O":
                waiting = True
            elif e == "CO_O":
                waiting = False
            elif e == "CP_O":
                assert not waiting

    def test_repeated_opponent_rounds_allowed(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        for entrance in ("opp_move_in", "opp_move_in", "check_opp_in", "check_opp_in"):
            label, state = fire_label(self.bp, state, entrance)
        # second check finds the automaton back in the ready phase
        assert gadget_state(self.bp, state)["phase"] is Phase.READY


class TestChoice:
    literals = (Literal("z"), Literal("z", False), Literal("w"), Literal("w", False))
    bp = build_gadget(GadgetKind.CHOICE, literals=literals)

    def test_shape(self):
        assert len(self.bp.gates) == 4
        assert len(self.bp.player_inputs) == 4

    def test_traversal_exits_at_first_closed_gate(self):
        """Opening a prefix routes the move bird to that literal's port and
        closes the prefix again."""
        circuit = self.bp.to_circuit()
        for target in range(4):
            state = circuit.initial_state()
            for i in range(target):
                _, state = fire_label(self.bp, state, f"open{i + 1}_in")
            assert gadget_state(self.bp, state)["selects"] == target
            label, after = fire_label(self.bp, state, "choice_in")
            assert label == f"modify_lit{target + 1}_out"
            assert all(after[f"A{i + 1}"] is CLOSED for i in range(target))

    def test_all_open_is_a_pass(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        for i in range(4):
            _, state = fire_label(self.bp, state, f"open{i + 1}_in")
        assert gadget_state(self.bp, state)["selects"] is None
        label, after = fire_label(self.bp, state, "choice_in")
        assert label == "consumed"
        assert all(pos is CLOSED for pos in after.values())

    def test_duplicate_literals_rejected(self):
        with pytest.raises(GadgetError):
            build_gadget(GadgetKind.CHOICE, literals=(Literal("z"), Literal("z")))

    def test_empty_choice_passes(self):
        bp = build_gadget(GadgetKind.CHOICE, literals=())
        circuit = bp.to_circuit()
        label, _ = fire_label(bp, circuit.initial_state(), "choice_in")
        assert label == "consumed"


class TestRandomTree:
    def test_four_leaves_three_gates(self):
        bp = build_gadget(GadgetKind.RANDOM_TREE,
                          literals=(Literal("x"), Literal("x", False), Literal("y"), Literal("y", False)))
        assert sum(1 for k, _ in bp.gates.values() if k is GateKind.RANDOM) == 3
        assert sum(1 for label in bp.outputs if label.startswith("modify_")) == 4

    def test_every_leaf_reachable_and_stuck_passes(self):
        bp = build_gadget(GadgetKind.RANDOM_TREE,
                          literals=(Literal("x"), Literal("x", False), Literal("y"), Literal("y", False)))
        circuit = bp.to_circuit()
        cc = circuit.compiled()
        start = cc.encode_state(circuit.initial_state())
        branches = cc.run_branching(start, cc.entrance_ids["random_in"])
        labels = {cc.outcome(code, detail).label or cc.outcome(code, detail).kind.value
                  for _, code, detail, _ in branches}
        assert {f"modify_lit{i}_out" for i in range(4)} <= labels
        assert "trapped" in labels  # stuck anywhere is a pass

    def test_six_leaves_five_gates(self):
        lits = tuple(Literal(v, p) for v in ("a", "b", "c") for p in (True, False))
        bp = build_gadget(GadgetKind.RANDOM_TREE, literals=lits)
        assert sum(1 for k, _ in bp.gates.values() if k is GateKind.RANDOM) == 5


class TestClauseGame:
    bp = build_gadget(GadgetKind.CLAUSE_G, literals=(Literal("x"), Literal("y", False), Literal("z")))

    def test_three_literal_chain(self):
        assert len(self.bp.gates) == 3

    def test_satisfied_iff_all_gates_open(self):
        for bits in itertools.product((OPEN, CLOSED), repeat=3):
            state = dict(zip(("S1", "S2", "S3"), bits))
            label, after = fire_label(self.bp, dict(state), "check_in")
            activated = all(b is OPEN for b in bits)
            assert gadget_state(self.bp, state)["activated"] == activated
            assert (label == "satisfied_out") == activated
            if not activated:
                assert label == "fail_out"
            assert after == state

    def test_literal_count_bounds(self):
        with pytest.raises(GadgetError):
            build_gadget(GadgetKind.CLAUSE_G, literals=())
        with pytest.raises(GadgetError):
            build_gadget(GadgetKind.CLAUSE_G, literals=tuple(Literal(f"v{i}") for i in range(13)))
        bp = build_gadget(GadgetKind.CLAUSE_G, literals=tuple(Literal(f"v{i}") for i in range(12)))
        assert len(bp.gates) == 12


class TestResult:
    bp = build_gadget(GadgetKind.RESULT)

    def test_win_path(self):
        circuit = self.bp.to_circuit()
        label, _ = fire_label(self.bp, circuit.initial_state(), "win_in")
        assert label == "pig_killed"

    def test_first_lose_bird_locks_the_level(self):
        circuit = self.bp.to_circuit()
        state = circuit.initial_state()
        assert gadget_state(self.bp, state)["open"] is True
        label, state = fire_label(self.bp, state, "lose_in")
        assert label == "consumed"
        assert gadget_state(self.bp, state)["open"] is False
        label, _ = fire_label(self.bp, state, "win_in")
        assert label == "trapped"


class TestEnumerationGuard:
    def test_oversized_state_space_rejected(self):
        lits = tuple(Literal(f"v{i}", p) for i in range(11) for p in (True, False))
        bp = build_gadget(GadgetKind.CHOICE, literals=lits)  # 22 gates -> 2^22 states
        with pytest.raises(GadgetError):
            enumerate_gadget_behavior(bp)
