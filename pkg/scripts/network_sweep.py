"""Consistency sweep of compiled transducers over random network cells.

Each cell is a (game, topology, policy, seed) combination.  The compiled
win-move transducer (mR with the initialization projection) and the
universal mA transducer are run to quiescence and compared against the
retrograde oracle; optionally every transition is audited against the
centralized abstraction.
"""

import argparse
import time

from disorderly.audit import AbstractionAuditor, ReadyAuditor
from disorderly.compiler import compile_universal_mA
from disorderly.experiments import compiled_winmove
from disorderly.games import builtin_winmove, random_game, retrograde_solve
from disorderly.netsim import Network, distribute_input, hash_element_policy, random_element_policy, run_fair


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=20)
    ap.add_argument("--max-nodes", type=int, default=5)
    ap.add_argument("--positions", type=int, default=8)
    ap.add_argument("--density", type=float, default=0.3)
    ap.add_argument("--audit", action="store_true", help="run the trace auditors on every cell")
    ap.add_argument("--universal", action="store_true", help="also run the mA transducer")
    args = ap.parse_args()
    unit = compiled_winmove()
    universal = compile_universal_mA(builtin_winmove(), "wf") if args.universal else None
    bad = 0
    t = time.perf_counter()
    for k in range(args.cells):
        g = random_game(args.positions, args.density, k)
        want = {(x,) for x in retrograde_solve(g).won}
        net = Network.random(1 + k % args.max_nodes, k)
        pol = random_element_policy(net.nodes, sorted(g.positions), k)
        auditor = AbstractionAuditor(unit, g.facts(), pol) if args.audit else None
        r = run_fair(distribute_input(g.facts(), net, pol, unit.transducer), k, observer=auditor)
        ok = r.quiescent and r.output == want and (auditor is None or auditor.ok)
        line = (f"cell {k:3d} nodes={len(net.nodes)} edges={len(net.edges):2d} steps={r.state.steps:6d} "
                f"deliveries={r.state.deliveries:6d} max_age={r.max_age} mR={'ok' if ok else 'MISMATCH'}")
        if universal is not None:
            upol = hash_element_policy(net.nodes, salt=str(k), adom=True)
            ready = ReadyAuditor(universal, g.facts()) if args.audit else None
            u = run_fair(distribute_input(g.facts(), net, upol, universal.transducer), k, observer=ready)
            uok = u.quiescent and u.output == want and (ready is None or ready.ok)
            line += f" mA={'ok' if uok else 'MISMATCH'}"
            ok &= uok
        bad += not ok
        print(line)
    print(f"mismatches={bad} elapsed={time.perf_counter() - t:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
