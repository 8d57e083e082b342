"""Confluence and concordance sweep over random games and generated programs.

For every workload, runs the disorderly semantics under many seeds and
checks that all runs agree with each other and with the deterministic and
non-deterministic results.
"""

import argparse
import random
import time

from disorderly.games import builtin_wmdmon, builtin_wminit, random_game
from disorderly.generate import program_inputs, random_semi_monotone_program
from disorderly.updates import (
    BudgetExceeded,
    Fixpoint,
    RunStats,
    det_eval,
    disorderly_result_set,
    disorderly_run,
    nondet_result_set,
)


def sweep_games(n: int, seeds: int, max_positions: int) -> int:
    bad = 0
    for gi in range(n):
        rng = random.Random(gi)
        g = random_game(rng.randint(1, max_positions), rng.uniform(0.1, 0.5), gi)
        init = det_eval(builtin_wminit(), g.facts()).instance
        finals = set()
        worst = 0
        for s in range(seeds):
            stats = RunStats()
            final, _ = disorderly_run(builtin_wmdmon(), init, seed=s, stats=stats)
            finals.add(final.instance)
            worst = max(worst, stats.max_obligation_age)
        det = det_eval(builtin_wmdmon(), init)
        agree = len(finals) == 1 and isinstance(det, Fixpoint) and finals == {det.instance}
        bad += not agree
        print(f"game {gi:3d} positions={len(g.positions):2d} moves={len(g.moves):3d} "
              f"results={len(finals)} max_age={worst:3d} {'ok' if agree else 'MISMATCH'}")
    return bad


def sweep_programs(n: int, seeds: int, constants: int) -> int:
    bad = 0
    for seed in range(n):
        rng = random.Random(seed)
        p = random_semi_monotone_program(seed, rules=rng.randint(2, 4))
        i = program_inputs(p, rng.randint(1, constants), 0.35, seed)
        finals = {disorderly_run(p, i, seed=s)[0].instance for s in range(seeds)}
        det = det_eval(p, i)
        try:
            nd, dis = nondet_result_set(p, i), disorderly_result_set(p, i)
            exact = f"nondet={len(nd)} disorderly={len(dis)}"
            agree = nd == dis == finals == {det.instance}
        except BudgetExceeded:
            exact = "enumeration over budget"
            agree = finals == {det.instance}
        bad += not agree
        print(f"program {seed:3d} rules={len(p.rules)} facts={len(i):2d} {exact} {'ok' if agree else 'MISMATCH'}")
    return bad


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--games", type=int, default=100)
    ap.add_argument("--programs", type=int, default=20)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--max-positions", type=int, default=10)
    ap.add_argument("--constants", type=int, default=4)
    args = ap.parse_args()
    t = time.perf_counter()
    bad = sweep_games(args.games, args.seeds, args.max_positions)
    bad += sweep_programs(args.programs, args.seeds, args.constants)
    print(f"mismatches={bad} elapsed={time.perf_counter() - t:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
