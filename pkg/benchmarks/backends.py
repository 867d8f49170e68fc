"""Compare the two exact-arithmetic backends on the rational hot path.

The package computes bounds in exact rational arithmetic; the backend is
selected at import time (gmpy2.mpq when available, fractions.Fraction
otherwise).  This script runs the same seeded workload in two fresh
subprocesses, one per backend, and reports wall times.  The workload is
the part that dominates bulk verification: moment-set construction plus
best-of bound evaluation over every applicable request for a batch of
random systems.

Usage: python3 benchmarks/backends.py [--trials 60] [--n-max 8] [--seed 42]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
from eventbounds.certificates import SIDES, TARGETS, BoundRequest
from eventbounds.dispatch import evaluate_request
from eventbounds.errors import NotApplicableError
from eventbounds.moments import moment_set
from eventbounds.numerics import RATIONAL_BACKEND
from eventbounds.verification import _rng, random_system

trials, n_max, seed = json.loads(sys.argv[1])
start = time.perf_counter()
requests = 0
for trial in range(trials):
    rng = _rng(seed, "benchmark", trial)
    system = random_system(rng, rng.randint(2, n_max))
    n = system.n
    for d in range(0, n):
        moments = moment_set(system, d, min(3, n - d + 1))
        windows = [(2, moments.restricted(2))]
        if moments.ell >= 3:
            windows.append((3, moments))
        for r in range(max(d, 1), n + 1):
            for ell, window in windows:
                for target in TARGETS:
                    for side in SIDES:
                        try:
                            evaluate_request(
                                window,
                                BoundRequest(r=r, d=d, ell=ell, side=side, target=target),
                            )
                        except NotApplicableError:
                            continue
                        requests += 1
elapsed = time.perf_counter() - start
print(json.dumps({"backend": RATIONAL_BACKEND, "elapsed": elapsed, "requests": requests}))
"""


def run_backend(backend: str, trials: int, n_max: int, seed: int) -> dict:
    env = dict(os.environ, EVENTBOUNDS_BACKEND=backend)
    output = subprocess.run(
        [sys.executable, "-c", WORKLOAD, json.dumps([trials, n_max, seed])],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(output.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=60)
    parser.add_argument("--n-max", type=int, default=8, dest="n_max")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    results = []
    for backend in ("gmpy2", "fractions"):
        try:
            results.append(run_backend(backend, args.trials, args.n_max, args.seed))
        except subprocess.CalledProcessError as exc:
            print(f"{backend}: unavailable ({exc.stderr.strip().splitlines()[-1]})")
    for result in results:
        rate = result["requests"] / result["elapsed"]
        print(
            f"{result['backend']:10s} {result['elapsed']:8.3f}s "
            f"{result['requests']} requests ({rate:,.0f}/s)"
        )
    if len(results) == 2:
        print(f"speedup: {results[1]['elapsed'] / results[0]['elapsed']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
