from hypothesis import given, strategies as st

from oracles import brute_valuations

from disorderly.compiler import transform_prime
from disorderly.games import FIG1A
from disorderly.generate import program_inputs, random_instance, random_semi_monotone_program
from disorderly.ground import binding_key, derived_updates, firings, valuations
from disorderly.parser import parse_facts, parse_rules
from disorderly.syntax import Fact, Update


def _updates(rule, inst, **kw):
    return [(binding_key(env), u) for env, u in valuations(rule, inst, **kw)]


def test_rule1_on_fig1a(wmdmon):
    inst = FIG1A.facts() | {Fact("may_win", ("a",)), Fact("may_win", ("b",))}
    got = _updates(wmdmon.rules[0], inst)
    assert got == [((("X", "b"), ("Y", "c")), Update(True, Fact("won", ("b",))))]


def test_empty_instance_yields_nothing(wmdmon):
    for r in wmdmon.rules:
        assert _updates(r, frozenset()) == []


def test_forall_rule_on_prime_program(wmdmon):
    p = transform_prime(wmdmon)
    rule3 = next(r for r in p.rules if r.forall)
    inst = parse_facts("move(a,b). move'(a,b).")
    got = {u for _, u in _updates(rule3, inst)}
    assert got == {Update(False, Fact("may_win", ("a",)))}
    # one remaining good move blocks the deletion
    assert _updates(rule3, inst | {Fact("good_move", ("a", "b"))}) == []


def test_repeated_variables_and_constants():
    (r,) = parse_rules("p(X) :- e(X,X), !f(X,c).")
    inst = parse_facts("e(a,a). e(a,b). e(b,b). f(b,c).")
    assert {u.fact for _, u in _updates(r, inst)} == {Fact("p", ("a",))}


def test_forall_with_repeated_quantified_variable():
    (r,) = parse_rules("!k(X) :- forall Y !g(X,Y,Y), b(X).")
    inst = parse_facts("b(a). b(c). g(a,b,c). g(c,d,d).")
    assert {u.fact for _, u in _updates(r, inst)} == {Fact("k", ("a",))}


def test_oracle_atoms():
    (r,) = parse_rules("p(X) :- e(X), Local_e(X).")
    inst = parse_facts("e(a). e(b).")
    got = _updates(r, inst, oracles={"Local_e": lambda args: args == ("b",)})
    assert [u.fact for _, u in got] == [Fact("p", ("b",))]
    (r,) = parse_rules("p(X) :- e(X), !Local_e(X).")
    got = _updates(r, inst, oracles={"Local_e": lambda args: args == ("b",)})
    assert [u.fact for _, u in got] == [Fact("p", ("a",))]


def test_nullary_rules():
    rules = parse_rules("r :- !r, !s.\ns :- !r, !s.")
    assert derived_updates(rules, frozenset()) == {
        Update(True, Fact("r", ())),
        Update(True, Fact("s", ())),
    }
    assert derived_updates(rules, {Fact("s", ())}) == set()


@given(st.integers(0, 50_000), st.integers(1, 4), st.floats(0.1, 0.7))
def test_valuations_match_brute_force(seed, consts, density):
    p = random_semi_monotone_program(seed)
    inst = random_instance(p.schema.arities, consts, density, seed + 1)
    for r in p.rules:
        assert set(_updates(r, inst)) == brute_valuations(r, inst)


@given(st.integers(0, 50_000))
def test_firings_index_rule_numbers(seed):
    p = random_semi_monotone_program(seed)
    inst = program_inputs(p, 3, 0.4, seed)
    for n, key, u in firings(p, inst):
        assert (key, u) in brute_valuations(p.rules[n], inst)
