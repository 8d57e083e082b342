"""Win-move workloads: built-in programs, figure graphs and solvers."""

from __future__ import annotations

import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .parser import parse_program
from .syntax import Fact, Program, unary

WINMOVE_TEXT = """\
@output win
win(X) :- move(X,Y), !win(Y).
"""

WMINIT_TEXT = """\
@edb move/2
@idb good_move/2 may_win/1
@output may_win
good_move(X,Y) :- move(X,Y).
may_win(X) :- move(X,Y).
"""

WMDMON_TEXT = """\
@edb move/2
@eidb good_move/2 may_win/1
@idb won/1
@output won
won(X) :- move(X,Y), !may_win(Y).
!good_move(X,Y) :- won(Y), move(X,Y).
!may_win(X) :- forall Y !good_move(X,Y), move(X,_).
"""

# the doubled program: wu underestimates and wo overestimates win
DOUBLED_TEXT = """\
@output wu
wu(X) :- move(X,Y), !wo(Y).
wo(X) :- move(X,Y), !wu(Y).
"""


def builtin_winmove() -> Program:
    return parse_program(WINMOVE_TEXT)


def builtin_wminit() -> Program:
    return parse_program(WMINIT_TEXT, dialect="dlpm")


def builtin_wmdmon() -> Program:
    return parse_program(WMDMON_TEXT)


@dataclass(frozen=True)
class GameGraph:
    positions: frozenset[str]
    moves: frozenset[tuple[str, str]]

    def __post_init__(self):
        for a, b in self.moves:
            if a not in self.positions or b not in self.positions:
                raise ValueError(f"move ({a},{b}) leaves the position set")

    @classmethod
    def from_moves(cls, moves: Iterable[tuple[str, str]], positions: Iterable[str] = ()) -> "GameGraph":
        moves = frozenset(moves)
        pos = set(positions)
        for a, b in moves:
            pos.update((a, b))
        return cls(frozenset(pos), moves)

    @classmethod
    def from_facts(cls, facts: Iterable[Fact]) -> "GameGraph":
        return cls.from_moves(f.args for f in facts if f.pred == "move")

    def facts(self) -> frozenset[Fact]:
        return frozenset(Fact("move", m) for m in self.moves)


@dataclass(frozen=True)
class GameSolution:
    won: frozenset[str]
    lost: frozenset[str]
    drawn: frozenset[str]

    def __str__(self) -> str:
        def fmt(s):
            return "{" + ",".join(sorted(s)) + "}"

        return f"won={fmt(self.won)} lost={fmt(self.lost)} drawn={fmt(self.drawn)}"


FIG1A = GameGraph.from_moves([("a", "b"), ("b", "a"), ("b", "c")])
FIG1B = GameGraph.from_moves([("a", "b"), ("b", "a"), ("b", "c"), ("c", "d")])
FIG1C = GameGraph.from_moves(
    [
        ("a", "b"), ("b", "a"), ("b", "c"), ("c", "d"), ("c", "j"), ("d", "e"), ("d", "f"),
        ("e", "d"), ("e", "g"), ("f", "h"), ("f", "i"), ("j", "k"), ("k", "l"),
    ]
)


def retrograde_solve(g: GameGraph) -> GameSolution:
    """Backward induction with successor counters."""
    succ: dict[str, set[str]] = defaultdict(set)
    pred: dict[str, set[str]] = defaultdict(set)
    for a, b in g.moves:
        succ[a].add(b)
        pred[b].add(a)
    remaining = {p: len(succ[p]) for p in g.positions}
    status: dict[str, str] = {}
    queue = [p for p in g.positions if remaining[p] == 0]
    for p in queue:
        status[p] = "lost"
    while queue:
        p = queue.pop()
        for q in pred[p]:
            if q in status:
                continue
            if status[p] == "lost":
                status[q] = "won"
                queue.append(q)
            else:
                remaining[q] -= 1
                if remaining[q] == 0:
                    status[q] = "lost"
                    queue.append(q)
    won = frozenset(p for p, s in status.items() if s == "won")
    lost = frozenset(p for p, s in status.items() if s == "lost")
    return GameSolution(won, lost, g.positions - won - lost)


def solve_via_wf(g: GameGraph) -> GameSolution:
    from .wellfounded import well_founded_model

    m = well_founded_model(builtin_winmove(), g.facts())
    won = unary(m.true_facts, "win")
    drawn = unary(m.undef_facts, "win")
    return GameSolution(won, g.positions - won - drawn, drawn)


def classify_winmove(g: GameGraph, instance: Iterable[Fact]) -> GameSolution:
    """Read a wmdmon result: won, lost outside may_win, drawn in between."""
    instance = frozenset(instance)
    won = unary(instance, "won")
    may = unary(instance, "may_win")
    return GameSolution(won, g.positions - may - won, may - won)


def solve_via_disorderly(g: GameGraph, seed: int = 0, max_steps: int = 1_000_000) -> GameSolution:
    from .updates import disorderly_run

    init, _ = disorderly_run(builtin_wminit(), g.facts(), seed=seed, max_steps=max_steps)
    final, _ = disorderly_run(builtin_wmdmon(), init.instance, seed=seed + 1, max_steps=max_steps)
    return classify_winmove(g, final.instance)


def random_game(n: int, density: float, seed: int) -> GameGraph:
    """Positions ``p0..p{n-1}``; each ordered pair (self-loops included)
    becomes a move with probability ``density``."""
    if n < 0 or not 0 <= density <= 1:
        raise ValueError("need n >= 0 and 0 <= density <= 1")
    rng = random.Random(seed)
    positions = [f"p{i}" for i in range(n)]
    moves = [(a, b) for a in positions for b in positions if rng.random() < density]
    return GameGraph(frozenset(positions), frozenset(moves))
