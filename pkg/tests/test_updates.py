import random

import pytest
from hypothesis import given, settings, strategies as st

from disorderly.games import FIG1A, FIG1C, builtin_wmdmon, builtin_wminit
from disorderly.generate import program_inputs, random_datalog_neg_program, random_semi_monotone_program
from disorderly.parser import parse_facts, parse_program
from disorderly.syntax import Fact, Update, unary
from disorderly.updates import (
    BudgetExceeded,
    DisorderlyState,
    Fixpoint,
    NoFixpoint,
    NonTermination,
    UpdateBag,
    check_eventually_consistent,
    check_functional,
    check_properties,
    check_terminating,
    det_eval,
    det_step,
    diamond_failures,
    disorderly_result_set,
    disorderly_run,
    disorderly_successors,
    is_terminal,
    iter_trace_lines,
    monotonicity_violations,
    nondet_result_set,
    nondet_run,
    nondet_successors,
    replay,
)

PROP1 = "r :- !r, !s.\ns :- !r, !s."
TAP = "t :- !a.\na :- b.\np :- t.\n!p :- t."
R, S = Fact("r", ()), Fact("s", ())


def ins(f):
    return Update(True, f)


def dele(f):
    return Update(False, f)


def initialized(g):
    return det_eval(builtin_wminit(), g.facts()).instance


# deterministic -----------------------------------------------------------

def test_det_step_fires_all_sink_rules_at_once():
    init = initialized(FIG1C)
    new = det_step(builtin_wmdmon(), init) - init
    assert unary(new, "won") == {"e", "f", "k"}


def test_det_step_fixpoint():
    final = det_eval(builtin_wmdmon(), initialized(FIG1C)).instance
    assert det_step(builtin_wmdmon(), final) == final


def test_det_cancellation():
    p = parse_program("p :- q.\n!p :- q.")
    q = parse_facts("q.")
    assert det_step(p, q) == q
    assert det_step(p, q | {Fact("p", ())}) == q | {Fact("p", ())}


def test_det_oscillation_is_a_cycle():
    p = parse_program("p :- !p.\n!p :- p.")
    res = det_eval(p, frozenset())
    assert isinstance(res, NoFixpoint)
    assert set(res.cycle) == {frozenset(), frozenset({Fact("p", ())})}


def test_det_eval_fig1a():
    res = det_eval(builtin_wmdmon(), initialized(FIG1A))
    assert isinstance(res, Fixpoint)
    assert unary(res.instance, "won") == {"b"}
    # may_win(a) is retracted once good_move(a,b) goes (b is won)
    assert unary(res.instance, "may_win") == {"b"}


def test_det_eval_fig1c():
    res = det_eval(builtin_wmdmon(), initialized(FIG1C))
    assert unary(res.instance, "won") == set("cefk")
    assert unary(res.instance, "may_win") == set("abcefk")


def test_det_eval_empty_program():
    i = parse_facts("e(a,b).")
    assert det_eval(parse_program(""), i) == Fixpoint(i, 0)


def test_det_eval_budget():
    with pytest.raises(BudgetExceeded):
        det_eval(parse_program("p :- !p.\n!p :- p."), frozenset(), max_steps=1)


# non-deterministic --------------------------------------------------------

def test_nondet_prop1():
    p = parse_program(PROP1)
    assert nondet_successors(p, frozenset()) == {frozenset({R}), frozenset({S})}
    assert nondet_result_set(p, frozenset()) == {frozenset({R}), frozenset({S})}


def test_nondet_fixpoint_has_no_changing_successor():
    final = det_eval(builtin_wmdmon(), initialized(FIG1C)).instance
    assert nondet_successors(builtin_wmdmon(), final) == set()


def test_nondet_fig1c_three_successors():
    succ = nondet_successors(builtin_wmdmon(), initialized(FIG1C))
    init = initialized(FIG1C)
    assert {unary(j - init, "won") for j in succ} == {frozenset("e"), frozenset("f"), frozenset("k")}


def test_nondet_result_set_fig1a_and_empty():
    i = initialized(FIG1A)
    assert len(nondet_result_set(builtin_wmdmon(), i)) == 1
    assert nondet_result_set(parse_program(""), i) == {i}


def test_nondet_budget():
    with pytest.raises(BudgetExceeded):
        nondet_result_set(builtin_wmdmon(), initialized(FIG1C), bound=3)


def test_nondet_run_reaches_result():
    p = parse_program(PROP1)
    final, trace = nondet_run(p, frozenset(), seed=3)
    assert final in {frozenset({R}), frozenset({S})}
    assert len(trace) == 1


# disorderly ----------------------------------------------------------------

def test_disorderly_successors_prop1():
    p = parse_program(PROP1)
    succ = disorderly_successors(DisorderlyState(frozenset()), p)
    assert sorted((s.kind, str(s.update)) for s, _ in succ) == [("request", "+r"), ("request", "+s")]
    both = DisorderlyState(frozenset(), UpdateBag.of([ins(R), ins(S)]))
    kinds = [s.kind for s, _ in disorderly_successors(both, p)]
    assert kinds.count("insert") == 2


def test_disorderly_successors_terminal():
    p = parse_program("t(X) :- e(X).")
    assert disorderly_successors(DisorderlyState(frozenset()), p) == []


def test_disorderly_prop1_result_set():
    p = parse_program(PROP1)
    assert disorderly_result_set(p, frozenset()) == {frozenset({R}), frozenset({S}), frozenset({R, S})}
    # capping multiplicities at one does not change the family
    assert disorderly_result_set(p, frozenset(), useful_only=False) == disorderly_result_set(p, frozenset())


def test_disorderly_empty_program():
    i = parse_facts("e(a).")
    final, trace = disorderly_run(parse_program(""), i)
    assert final.instance == i and trace == []
    assert disorderly_result_set(parse_program(""), i) == {i}


def test_disorderly_fig1a_singleton():
    assert len(disorderly_result_set(builtin_wmdmon(), initialized(FIG1A))) == 1


@pytest.mark.parametrize("seed", [0, 1])
def test_disorderly_fig1c_two_seeds(seed):
    final, _ = disorderly_run(builtin_wmdmon(), initialized(FIG1C), seed=seed)
    assert unary(final.instance, "won") == set("cefk")


def test_tap_termination_depends_on_first_choice():
    p = parse_program(TAP)
    b = parse_facts("b.")
    outcomes = {}
    for seed in range(10):
        try:
            final, trace = disorderly_run(p, b, seed=seed, max_steps=2000)
            outcomes[seed] = final.instance
        except NonTermination as e:
            outcomes[seed] = None
            assert e.trace
    assert frozenset({Fact("a", ()), Fact("b", ())}) in outcomes.values()
    assert None in outcomes.values()


def test_tap_t_first_never_terminates():
    p = parse_program(TAP)
    t = Fact("t", ())
    s = replay(p, parse_facts("b."), [("request", ins(t)), ("insert", ins(t))])
    assert t in s.instance
    assert not is_terminal(p, s)


def test_sink_first_schedule_replays():
    # traces pick sink-adjacent positions before the rest
    p = builtin_wmdmon()
    won = lambda x: Fact("won", (x,))
    steps = [("derive", ins(won(x))) for x in "efk"]
    s = replay(p, initialized(FIG1C), steps)
    assert unary(s.instance, "won") == set("efk")


def test_replay_rejects_illegal_steps():
    p = builtin_wmdmon()
    with pytest.raises(ValueError, match="not derivable"):
        replay(p, initialized(FIG1C), [("request", ins(Fact("won", ("c",))))])
    with pytest.raises(ValueError, match="not pending"):
        replay(p, initialized(FIG1C), [("insert", ins(Fact("won", ("e",))))])
    with pytest.raises(ValueError, match="unknown"):
        replay(p, initialized(FIG1C), [("hop", ins(Fact("won", ("e",))))])


def test_trace_line_format():
    p = parse_program(PROP1)
    _, trace = disorderly_run(p, frozenset(), seed=0)
    lines = list(iter_trace_lines(trace))
    assert lines[0] in ("step=1 kind=request update=+r rule=0", "step=1 kind=request update=+s rule=1")
    assert lines[-1].startswith("step=2 kind=insert update=+") and lines[-1].endswith("rule=-")


def test_delete_line():
    u = dele(Fact("q", ("c",)))
    from disorderly.updates import TraceStep

    assert TraceStep("delete", u, 2).line(5) == "step=5 kind=delete update=-q(c) rule=2"


def test_update_bag():
    bag = UpdateBag().add(ins(R)).add(ins(R)).add(dele(S))
    assert bag.count(ins(R)) == 2 and len(bag) == 3
    assert str(bag) == "{-s, +r*2}"
    assert bag.remove(ins(R)).count(ins(R)) == 1
    with pytest.raises(KeyError):
        UpdateBag().remove(ins(R))


# bounded checkers ------------------------------------------------------------

def test_checkers_wmdmon_fig1a():
    i = [initialized(FIG1A)]
    assert check_functional(builtin_wmdmon(), i) == [True]
    assert check_terminating(builtin_wmdmon(), i) == [True]
    assert check_eventually_consistent(builtin_wmdmon(), i) == [True]


def test_checkers_prop1():
    (r,) = check_properties(parse_program(PROP1), [frozenset()])
    assert r.functional is False and len(r.results) == 3


def test_checkers_tap():
    (r,) = check_properties(parse_program(TAP), [parse_facts("b.")])
    assert r.functional is True and r.terminating is False
    assert r.eventually_consistent is False


def test_checkers_inconclusive():
    (r,) = check_properties(builtin_wmdmon(), [initialized(FIG1C)], bound=5)
    assert r.functional is None and r.eventually_consistent is None and "budget" in r.note


# properties ------------------------------------------------------------------

def _sm(seed, friendly=False):
    rng = random.Random(seed)
    p = random_semi_monotone_program(seed, rules=rng.randint(2, 4), friendly=friendly)
    return p, program_inputs(p, rng.randint(1, 3), 0.4, seed)


@given(st.integers(0, 100_000))
def test_concordance(seed):
    p, i = _sm(seed)
    det = det_eval(p, i)
    assert isinstance(det, Fixpoint)
    nd = nondet_result_set(p, i)
    dis = disorderly_result_set(p, i)
    assert nd == dis == {det.instance}


@given(st.integers(0, 100_000))
def test_simulation_nondet_in_disorderly(seed):
    rng = random.Random(seed)
    if rng.random() < 0.5:
        p = random_datalog_neg_program(seed, rules=rng.randint(1, 3))
    else:
        p = random_semi_monotone_program(seed, rules=rng.randint(1, 3))
    i = program_inputs(p, 2, 0.4, seed)
    try:
        nd = nondet_result_set(p, i, bound=5000)
        dis = disorderly_result_set(p, i, bound=20_000)
    except BudgetExceeded:
        return
    assert nd <= dis


@settings(max_examples=5)
@given(st.integers(0, 100_000))
def test_confluence_200_seeds(seed):
    p, i = _sm(seed)
    finals = {disorderly_run(p, i, seed=s)[0].instance for s in range(200)}
    assert len(finals) == 1
    assert len(disorderly_result_set(p, i)) == 1


@given(st.integers(0, 100_000), st.integers(0, 1000))
def test_semi_monotone_traces_are_monotone(seed, run_seed):
    p, i = _sm(seed)
    _, trace = disorderly_run(p, i, seed=run_seed)
    assert monotonicity_violations(p, i, trace) == []


@given(st.integers(0, 100_000), st.integers(0, 1000))
def test_weak_confluence_diamond(seed, run_seed):
    p, i = _sm(seed)
    _, trace = disorderly_run(p, i, seed=run_seed)
    rng = random.Random(run_seed)
    states = [DisorderlyState(i)] + [t.state for t in trace if t.state is not None]
    for s in rng.sample(states, min(4, len(states))):
        assert diamond_failures(p, s) == []


@given(st.integers(0, 100_000))
def test_fair_runs_terminate_at_terminal_states(seed):
    p, i = _sm(seed)
    final, trace = disorderly_run(p, i, seed=seed)
    assert is_terminal(p, final)
    assert replay(p, i, [(t.kind, t.update) for t in trace]).instance == final.instance
