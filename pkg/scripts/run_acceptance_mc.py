#!/usr/bin/env python3
"""Fill results/ with the desk-scale Monte Carlo runs used by tests/test_acceptance.py.

Resumable: rerunning skips sizes that are already on disk.
"""

import argparse
import os
import sys
import time

from erap import desk


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("names", nargs="*", help=f"subset of {sorted(desk.plan())}")
    args = ap.parse_args()
    t0 = time.time()

    def progress(name, recs):
        if recs is None:
            print(f"[{time.time() - t0:8.0f}s] {name} ...", flush=True)
            return
        for N, r in sorted(recs.items()):
            print(f"    N={N:4d} mean={r.mean_cost:.6f} se={r.std_err:.2e} c={r.c_estimate:.5f}", flush=True)

    desk.run_all(args.threads, args.names or None, progress)
    print(f"done in {time.time() - t0:.0f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
