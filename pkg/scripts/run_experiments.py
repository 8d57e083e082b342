"""Run every named scenario and write each report under an output directory."""

import argparse
import sys
from pathlib import Path

from disorderly.experiments import SCENARIOS, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, help="directory for one report file per scenario")
    args = ap.parse_args()
    ok = True
    for name in sorted(SCENARIOS):
        res = run_experiment(name, args.seed)
        text = res.text()
        sys.stdout.write(text)
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{name}.txt").write_text(text)
        ok &= res.ok
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
