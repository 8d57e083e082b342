import pytest

from disorderly.experiments import (
    EXAMPLE1_EXPECTED,
    FIG1_EXPECTED,
    SCENARIOS,
    ExperimentResult,
    partition_resilience,
    run_experiment,
    solve_via_netsim,
)
from disorderly.games import FIG1B, random_game, retrograde_solve


@pytest.mark.parametrize("name", sorted(SCENARIOS))
@pytest.mark.parametrize("seed", [0, 7])
def test_scenarios_pass(name, seed):
    res = run_experiment(name, seed)
    assert res.ok, res.text()


def test_unknown_scenario():
    with pytest.raises(KeyError):
        run_experiment("fig9", 0)


def test_result_text():
    r = ExperimentResult("x", ["a", "b"], False)
    assert r.text() == "# x\na\nb\nresult: MISMATCH\n"


def test_expected_tables_are_consistent():
    assert dict(EXAMPLE1_EXPECTED)["U_2"] == "c,e,f,k"
    assert str(retrograde_solve(FIG1B)) == FIG1_EXPECTED["1b"]


def test_example1_lines():
    lines = run_experiment("example1-table").lines
    assert lines[0] == "U_0  {}" and lines[-1] == "V_2  {a,b,c,e,f,k}"


def test_partition_per_node_detail():
    res = partition_resilience(0, seeds=1)
    assert "quiescent=True output={c,e,f,k}" in res.lines[0]
    assert res.ok


@pytest.mark.parametrize("seed", range(3))
def test_netsim_solver(seed):
    g = random_game(7, 0.3, seed)
    assert solve_via_netsim(g, seed) == retrograde_solve(g)
