import random

import pytest
from hypothesis import given, settings, strategies as st

from disorderly.analysis import is_friendly, is_semi_monotone, max_negated_eidb_per_rule
from disorderly.audit import AbstractionAuditor, ReadyAuditor
from disorderly.compiler import (
    CompileError,
    compile,
    compile_program,
    compile_universal_mA,
    emptiness_query,
    promote_negated_edb,
    split_single_negation,
    transform_local_guard,
    transform_prime,
)
from disorderly.experiments import MP_INPUT, SEMIPOS_TEXT, compiled_winmove
from disorderly.games import FIG1A, FIG1C, GameGraph, builtin_winmove, builtin_wmdmon, builtin_wminit, random_game, retrograde_solve
from disorderly.generate import program_inputs, random_semi_monotone_program
from disorderly.netsim import (
    Network,
    PartitioningPolicy,
    coordination_free_witness,
    distribute_input,
    fact_policy,
    hash_element_policy,
    random_element_policy,
    run_fair,
    run_heartbeat_only,
    single_node_policy,
)
from disorderly.parser import parse_facts, parse_program, parse_rules
from disorderly.syntax import Fact, active_domain, format_rule, project
from disorderly.transducer import format_transducer, parse_transducer
from disorderly.updates import disorderly_result_set, disorderly_run


def rules_text(p):
    return {format_rule(r) for r in p.rules}


def winners(g):
    return {(x,) for x in retrograde_solve(g).won}


# stage transforms --------------------------------------------------------------

def test_prime_copies_and_rewrites():
    p = transform_prime(builtin_wmdmon())
    text = rules_text(p)
    assert "move'(X1,X2) :- move(X1,X2)." in text
    assert "won(X) :- move'(X,Y), !may_win(Y)." in text
    assert "move'" in p.schema.idb
    assert is_semi_monotone(p)


def test_prime_without_edb_reads_is_unchanged():
    p = parse_program("@eidb k/1\n@idb q/1 r/1\nr(X) :- q(X), !k(X).")
    assert transform_prime(p) is p


def test_local_guards_on_winmove():
    g = transform_local_guard(transform_prime(builtin_wmdmon()), "mR")
    text = rules_text(g)
    assert "won(X) :- move'(X,Y), !may_win(Y), Local_may_win(Y)." in text
    assert "!may_win(X) :- forall Y !good_move(X,Y), move'(X,_1), Local_good_move(X,X)." in text
    assert {"Local_may_win", "Local_good_move"} <= g.schema.edb
    assert is_semi_monotone(g)


def test_guard_uses_shared_variable():
    p = parse_program("@edb e/2\n@eidb k/2 g/2\n@idb p/1\np(X) :- forall W e(X,Y), !k(X,W), !g(W,X).")
    g = transform_local_guard(p, "mR")
    (r,) = g.rules
    assert "Local_k(X,X)" in format_rule(r) and "Local_g(X,X)" in format_rule(r)


def test_non_friendly_rejected_under_mR():
    p = parse_program("@edb e/2\n@eidb k/1\n@idb t/1\n@output t\nt(X) :- e(X,Y), !k(X), !k(Y).")
    assert not is_friendly(p)
    with pytest.raises(CompileError, match="not friendly"):
        compile(p, "mR")
    with pytest.raises(CompileError, match="one negated eidb"):
        compile(p, "mP")


def test_forall_only_atom_is_not_friendly():
    p = parse_program("@edb b/1\n@eidb g/2\n@idb t/1\n@output t\nt(Z) :- forall W b(Z), !g(W,W).")
    assert not is_friendly(p)
    with pytest.raises(CompileError, match="not friendly"):
        compile(p, "mR")


def test_split_example():
    p = parse_program("@edb a/1\n@eidb e/1\n@idb p/1 q/1 h/1\np(X) :- a(X).\nq(X) :- a(X).\nh(X) :- p(X), q(X), !e(X).")
    s = split_single_negation(p)
    text = rules_text(s)
    assert "h'(X) :- p(X), q(X)." in text and "h(X) :- h'(X), !e(X)." in text
    assert all(len(r.negative_body()) <= 1 for r in s.rules)
    assert is_semi_monotone(s)
    i = parse_facts("a(x). a(y). e(y).")
    (res,) = disorderly_result_set(s, i)
    assert project(res, "h") == {("x",)}
    single = parse_program("@edb a/1\n@eidb e/1\n@idb h/1\nh(X) :- a(X), !e(X).")
    assert split_single_negation(single) is single


@given(st.integers(0, 100_000))
def test_split_is_equivalent(seed):
    p = random_semi_monotone_program(seed, rules=3, allow_forall=False, max_neg=1)
    i = program_inputs(p, 2, 0.4, seed)
    s = split_single_negation(p)
    keep = set(p.schema.arities)
    a = {frozenset(f for f in x if f.pred in keep) for x in disorderly_result_set(p, i)}
    b = {frozenset(f for f in x if f.pred in keep) for x in disorderly_result_set(s, i)}
    assert a == b and len(a) == 1


@given(st.integers(0, 100_000))
def test_stages_stay_semi_monotone(seed):
    p = random_semi_monotone_program(seed, rules=3, friendly=True)
    u = compile_program(p, "mR")
    for stage in (u.promoted, u.prime, u.guarded):
        assert is_semi_monotone(stage)
    parse_transducer(format_transducer(u.transducer))


def test_promotion():
    p = parse_program("@edb e/1 c/1\n@idb t/1\n@output t\nt(X) :- e(X), !c(X).", dialect="dlpm")
    q, src = promote_negated_edb(p)
    assert src == {"c": "c"} and "c" in q.schema.eidb and "c" not in q.schema.edb
    p = parse_program("@edb e/2\n@idb t/1\n@output t\nt(X) :- e(X,Y), !e(Y,X).", dialect="dlpm")
    q, src = promote_negated_edb(p)
    assert src == {"e_neg": "e"} and "e" in q.schema.edb
    assert rules_text(q) == {"t(X) :- e(X,Y), !e_neg(Y,X)."}
    assert promote_negated_edb(builtin_wmdmon())[1] == {}


def test_promoted_program_runs_distributed():
    p = parse_program("@edb e/2\n@idb t/1\n@output t\nt(X) :- e(X,Y), !e(Y,X).", dialect="dlpm")
    i = parse_facts("e(a,b). e(b,a). e(b,c). e(c,d).")
    u = compile_program(p, "mR")
    net = Network.complete(3)
    for seed in range(3):
        r = run_fair(distribute_input(i, net, hash_element_policy(net.nodes, str(seed)), u.transducer), seed)
        assert r.output == {("b",), ("c",)}


# gates -------------------------------------------------------------------------

def test_mP_rejects_winmove():
    with pytest.raises(CompileError, match="forall"):
        compile(builtin_wmdmon(), "mP")


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(model="mX"), "unknown model"),
        (dict(model="mR", projection=builtin_winmove()), "not a projection"),
        (dict(model="mR", projection=builtin_wminit(), designated="won"), "not an edb"),
    ],
)
def test_compile_errors(kwargs, match):
    with pytest.raises(CompileError, match=match):
        compile_program(builtin_wmdmon(), **kwargs)


def test_projection_only_for_mR():
    proj = parse_program("@edb c/2\n@idb b/1\nb(X) :- c(X,Y).", dialect="dlpm")
    with pytest.raises(CompileError, match="only supported for mR"):
        compile_program(parse_program(SEMIPOS_TEXT), "mP", proj)


def test_projection_heads_must_be_eidb():
    proj = parse_program("@edb move/2\n@idb won/1\nwon(X) :- move(X,Y).", dialect="dlpm")
    with pytest.raises(CompileError, match="not eidb"):
        compile_program(builtin_wmdmon(), "mR", proj)


def test_non_semi_monotone_rejected():
    p = parse_program("@edb e/1\n@idb t/1 s/1\n@output t\nt(X) :- e(X), !s(X).\ns(X) :- e(X).", dialect="dlpm")
    with pytest.raises(CompileError, match="semi-monotone"):
        compile(p, "mR")


def test_needs_output():
    p = parse_program("@edb e/1\n@idb t/1\nt(X) :- e(X).", dialect="dlpm")
    with pytest.raises(CompileError, match="output"):
        compile(p, "mR")


# compiled win-move -------------------------------------------------------------

def test_report_names_designated_relation():
    u = compiled_winmove()
    assert u.designated == "move"
    assert any("designated relation T = move" in line for line in u.report)
    explicit = compile_program(builtin_wmdmon(), "mR", builtin_wminit(), designated="move")
    assert "designated relation T = move" in explicit.report


def test_winmove_slot_shape():
    t = compiled_winmove().transducer
    text = format_transducer(t)
    # copy-in emulates Local_may_win via both positions of move
    assert "ins m_good_move(X,Y) :- move(X,Y), Local_move(X,X), !m_started, !u_good_move(X,Y)." in text
    assert "ins m_good_move(X,Y) :- move(X,Y), Local_move(Y,Y), !m_started, !u_good_move(X,Y)." in text
    assert "ins m_may_win(X) :- move(X,Y), Local_move(X,X), !m_started, !u_may_win(X)." in text
    assert t.schema.oracles == {"Local_move"}


@pytest.mark.parametrize("seed", range(4))
def test_compiled_winmove_random_cells(seed):
    t = compiled_winmove().transducer
    g = random_game(8, 0.25, seed)
    net = Network.random(1 + seed % 4, seed)
    pol = random_element_policy(net.nodes, sorted(g.positions), seed)
    r = run_fair(distribute_input(g.facts(), net, pol, t), seed)
    assert r.quiescent and r.output == winners(g)


def test_always_forward_is_only_for_bounded_runs():
    u = compile_program(builtin_wmdmon(), "mR", builtin_wminit(), always_forward=True)
    net = Network.complete(2)
    r = run_fair(distribute_input(FIG1A.facts(), net, hash_element_policy(net.nodes), u.transducer), 0, max_steps=2000)
    assert not r.quiescent
    assert r.output == winners(FIG1A)


def test_naive_mP_counterexample():
    naive = compile_program(builtin_wmdmon(), "mP", builtin_wminit(), check_gates=False)
    assert any(line.startswith("WARNING") for line in naive.report)
    net = Network.complete(2)
    pol = fact_policy(net.nodes, {Fact("move", ("a", "b")): ["n0"]}, default=["n1"])
    r = run_heartbeat_only(distribute_input(MP_INPUT, net, pol, naive.transducer), nodes=["n0"])
    assert r.output == {("a",)}
    assert winners(GameGraph.from_facts(MP_INPUT)) == {("b",)}


# semi-positive in mP -----------------------------------------------------------

def test_semi_positive_mP_sweep():
    p = parse_program(SEMIPOS_TEXT)
    u = compile_program(p, "mP")
    assert max_negated_eidb_per_rule(u.guarded) <= 1
    rng = random.Random(5)
    for seed in range(8):
        i = frozenset(
            {Fact("e", (c,)) for c in "abcd" if rng.random() < 0.7}
            | {Fact("b", (c,)) for c in "abcd" if rng.random() < 0.4}
        )
        want = {(c,) for c in "abcd" if Fact("e", (c,)) in i and Fact("b", (c,)) not in i}
        net = Network.random(3, seed)
        pol = PartitioningPolicy("hash-fact", net.nodes, salt=str(seed))
        r = run_fair(distribute_input(i, net, pol, u.transducer), seed)
        assert r.quiescent and r.output == want
    w = coordination_free_witness(u.transducer, i, Network.complete(2), want)
    assert w is not None and w.kind == "single"


@settings(max_examples=30)
@given(st.integers(0, 100_000))
def test_end_to_end_generated_programs(seed):
    rng = random.Random(seed)
    p = random_semi_monotone_program(seed, rules=rng.randint(2, 4), friendly=True)
    i = program_inputs(p, 3, 0.4, seed)
    final, _ = disorderly_run(p, i, seed)
    want = project(final.instance, p.schema.output)
    net = Network.random(3, seed)
    consts = sorted(active_domain(i)) or ["c0"]
    pol = random_element_policy(net.nodes, consts, seed)
    r = run_fair(distribute_input(i, net, pol, compile(p, "mR")), seed)
    assert r.quiescent and r.output == want


# universal mA ------------------------------------------------------------------

@pytest.fixture(scope="module")
def emptiness():
    return compile_universal_mA(emptiness_query(), "wf")


def test_mA_requires_datalog_neg_and_output():
    with pytest.raises(CompileError, match="Datalog-neg"):
        compile_universal_mA(builtin_wmdmon())
    with pytest.raises(CompileError, match="output"):
        compile_universal_mA(parse_program("@edb r/1\nq(X) :- r(X)."))
    with pytest.raises(CompileError, match="engine"):
        compile_universal_mA(emptiness_query(), "magic")
    with pytest.raises(CompileError, match="compile_universal_mA"):
        compile_program(builtin_wmdmon(), "mA")


def test_mA_stages(emptiness):
    t = emptiness.transducer
    assert [(s.name, s.engine, s.guard) for s in t.stages] == [("ready", "stratified", None), ("query", "wf", "ready")]
    assert {"pos_r", "neg_r"} == set(t.schema.s_msg)
    assert compile(emptiness_query(), "mA").schema == t.schema


def test_mA_empty_instance(emptiness):
    net = Network.complete(2)
    r = run_heartbeat_only(distribute_input(set(), net, single_node_policy(net.nodes, adom=True), emptiness.transducer))
    assert r.output == {()}


@pytest.mark.parametrize("facts, want", [("r(a).", set()), ("r(a). r(b).", set()), ("", {()})])
@pytest.mark.parametrize("policy", ["single", "hash"])
def test_mA_emptiness_any_policy(emptiness, facts, want, policy):
    net = Network.complete(2)
    i = parse_facts(facts)
    pol = single_node_policy(net.nodes, "n1", adom=True) if policy == "single" else hash_element_policy(net.nodes, adom=True)
    auditor = ReadyAuditor(emptiness, i)
    r = run_fair(distribute_input(i, net, pol, emptiness.transducer), 3, observer=auditor)
    assert r.quiescent and r.output == want
    assert auditor.ok and auditor.ready_seen > 0


def test_mA_single_node_heartbeat_only(emptiness):
    net = Network.complete(2)
    i = parse_facts("r(a).")
    r = run_heartbeat_only(distribute_input(i, net, single_node_policy(net.nodes, adom=True), emptiness.transducer))
    assert r.quiescent and r.output == set() and r.state.deliveries == 0
    assert Fact("m_ready", ()) in r.state.locals["n0"].instance


@pytest.mark.parametrize("seed", range(3))
def test_mA_winmove(seed):
    u = compile_universal_mA(builtin_winmove(), "wf")
    g = random_game(6, 0.3, seed)
    net = Network.random(3, seed)
    auditor = ReadyAuditor(u, g.facts())
    r = run_fair(distribute_input(g.facts(), net, hash_element_policy(net.nodes, str(seed), adom=True), u.transducer), seed, observer=auditor)
    assert r.quiescent and r.output == winners(g)
    assert auditor.ok


# auditors ----------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(3))
def test_abstraction_auditor_on_compiled_runs(seed):
    u = compiled_winmove()
    net = Network.random(3, seed)
    pol = hash_element_policy(net.nodes, str(seed))
    auditor = AbstractionAuditor(u, FIG1C.facts(), pol)
    r = run_fair(distribute_input(FIG1C.facts(), net, pol, u.transducer), seed, observer=auditor)
    assert r.quiescent and auditor.ok and auditor.transitions == r.state.steps


def test_abstraction_auditor_on_generated_program():
    p = random_semi_monotone_program(11, rules=4, friendly=True)
    u = compile_program(p, "mR")
    i = program_inputs(p, 3, 0.4, 11)
    net = Network.random(3, 11)
    pol = random_element_policy(net.nodes, sorted(active_domain(i)) or ["c0"], 11)
    auditor = AbstractionAuditor(u, i, pol)
    run_fair(distribute_input(i, net, pol, u.transducer), 11, observer=auditor)
    assert auditor.ok


def test_abstraction_auditor_flags_naive_compile():
    naive = compile_program(builtin_wmdmon(), "mP", builtin_wminit(), check_gates=False)
    net = Network.complete(2)
    pol = fact_policy(net.nodes, {Fact("move", ("a", "b")): ["n0"]}, default=["n1"])
    auditor = AbstractionAuditor(naive, MP_INPUT, pol)
    run_heartbeat_only(distribute_input(MP_INPUT, net, pol, naive.transducer), nodes=["n0"], observer=auditor)
    assert auditor.unsound


def test_ready_auditor_flags_premature_output():
    from disorderly.compiler import naive_emptiness_transducer

    u = compile_universal_mA(emptiness_query())
    fake = type(u)(u.query, u.engine, naive_emptiness_transducer())
    net = Network.complete(2)
    i = parse_facts("r(a).")
    auditor = ReadyAuditor(fake, i)
    run_heartbeat_only(distribute_input(i, net, single_node_policy(net.nodes, "n1"), fake.transducer), nodes=["n0"], observer=auditor)
    assert not auditor.ok
