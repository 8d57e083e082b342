from hypothesis import given, settings, strategies as st
import pytest

from oracles import minimax_game

from disorderly.analysis import is_projection_program, is_semi_monotone, max_negated_eidb_per_rule
from disorderly.games import (
    FIG1A,
    FIG1B,
    FIG1C,
    GameGraph,
    builtin_wmdmon,
    builtin_wminit,
    classify_winmove,
    random_game,
    retrograde_solve,
    solve_via_disorderly,
    solve_via_wf,
)

# generated once by random_game(8, 0.3, 7) and frozen
PINNED_MOVES = {
    ("p0", "p1"), ("p0", "p3"), ("p0", "p6"), ("p1", "p0"), ("p1", "p2"), ("p1", "p3"),
    ("p1", "p6"), ("p1", "p7"), ("p2", "p5"), ("p2", "p7"), ("p3", "p0"), ("p3", "p1"),
    ("p3", "p4"), ("p4", "p1"), ("p4", "p2"), ("p4", "p3"), ("p5", "p1"), ("p5", "p4"),
    ("p6", "p1"), ("p6", "p3"), ("p6", "p6"), ("p7", "p0"),
}


def test_builtin_programs_shape():
    assert is_semi_monotone(builtin_wmdmon())
    assert is_projection_program(builtin_wminit())
    assert max_negated_eidb_per_rule(builtin_wmdmon()) == 1


@pytest.mark.parametrize(
    "g, expected",
    [
        (FIG1A, "won={b} lost={a,c} drawn={}"),
        (FIG1B, "won={c} lost={d} drawn={a,b}"),
        (FIG1C, "won={c,e,f,k} lost={d,g,h,i,j,l} drawn={a,b}"),
    ],
)
@pytest.mark.parametrize("solve", [retrograde_solve, solve_via_wf, solve_via_disorderly])
def test_figure_games(g, expected, solve):
    assert str(solve(g)) == expected


def test_single_sink_is_lost():
    g = GameGraph(frozenset({"a"}), frozenset())
    assert retrograde_solve(g).lost == {"a"}


def test_empty_graph():
    g = GameGraph.from_moves([])
    for solve in (retrograde_solve, solve_via_wf, solve_via_disorderly):
        s = solve(g)
        assert not (s.won or s.lost or s.drawn)


def test_moves_must_stay_in_positions():
    with pytest.raises(ValueError):
        GameGraph(frozenset({"a"}), frozenset({("a", "b")}))


def test_random_game_contract():
    assert random_game(0, 0.5, 1) == GameGraph(frozenset(), frozenset())
    assert random_game(6, 0.4, 3) == random_game(6, 0.4, 3)
    with pytest.raises(ValueError):
        random_game(3, 1.5, 0)


def test_random_game_pinned():
    g = random_game(8, 0.3, 7)
    assert g.positions == {f"p{i}" for i in range(8)}
    assert set(g.moves) == PINNED_MOVES
    assert str(retrograde_solve(g)) == "won={} lost={} drawn={p0,p1,p2,p3,p4,p5,p6,p7}"


def test_classify_reads_memories():
    from disorderly.syntax import Fact

    inst = {Fact("won", ("b",)), Fact("may_win", ("b",))}
    assert str(classify_winmove(FIG1A, inst)) == "won={b} lost={a,c} drawn={}"


def _solution_invariants(g, s):
    succ = {p: {b for a, b in g.moves if a == p} for p in g.positions}
    assert s.won | s.lost | s.drawn == g.positions
    assert not (s.won & s.lost or s.won & s.drawn or s.lost & s.drawn)
    for p in g.positions:
        assert (p in s.won) == bool(succ[p] & s.lost)
        assert (p in s.lost) == (succ[p] <= s.won)


@given(st.integers(0, 12), st.floats(0.0, 0.6), st.integers(0, 10_000))
def test_retrograde_matches_minimax(n, density, seed):
    g = random_game(n, density, seed)
    s = retrograde_solve(g)
    assert (s.won, s.lost, s.drawn) == minimax_game(g.positions, g.moves)
    _solution_invariants(g, s)


@given(st.integers(0, 12), st.floats(0.05, 0.5), st.integers(0, 10_000))
def test_all_methods_agree(n, density, seed):
    g = random_game(n, density, seed)
    ref = retrograde_solve(g)
    assert solve_via_wf(g) == ref
    assert solve_via_disorderly(g, seed) == ref


@settings(max_examples=10)
@given(st.integers(1, 10), st.floats(0.1, 0.5), st.integers(0, 10_000))
def test_seed_independence(n, density, seed):
    g = random_game(n, density, seed)
    assert len({solve_via_disorderly(g, s) for s in range(20)}) == 1
