#!/usr/bin/env python3
"""Builds the fairknap_py extension module and exercises every exported
surface end to end: instance generation and I/O, feasibility and polytope
membership, continuous greedy, both rounding schemes, repeated-rounding
statistics, the three solvers, and the brute-force oracle.

Run from anywhere:  python3 python/smoke_test.py
Exits nonzero if any check fails.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_extension() -> Path:
    """Compiles the cdylib and stages it under an importable name."""
    subprocess.run(
        ["cargo", "build", "-p", "fairknap-python", "--release"],
        cwd=REPO,
        check=True,
    )
    staging = REPO / "target" / "python"
    staging.mkdir(parents=True, exist_ok=True)
    module = staging / "fairknap_py.so"
    shutil.copy2(REPO / "target" / "release" / "libfairknap_py.so", module)
    return staging


def main() -> None:
    sys.path.insert(0, str(build_extension()))
    import fairknap_py as fk

    checks = []

    def check(name: str, ok: bool) -> None:
        checks.append((name, ok))
        print(f"{'PASS' if ok else 'FAIL'}  {name}")

    inst = fk.Instance.generate(10, 2, seed=7)
    check("generate: sizes line up", inst.n == 10 and inst.k == 2 and len(inst.weights) == 10)
    check("generate: validates clean", inst.validate() == [])
    check("repr names the shape", repr(inst).startswith("Instance(n=10, k=2"))

    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "instance.json")
        inst.save(path)
        check("save/load round-trips", fk.Instance.load(path).to_json() == inst.to_json())

    x = fk.greedy_point(inst, seed=1, steps=10, samples=200)
    check("greedy point lies in the polytope", inst.in_polytope(x))
    check(
        "greedy point is deterministic per seed",
        fk.greedy_point(inst, seed=1, steps=10, samples=200) == x,
    )

    y = fk.weighted_round(inst, x, seed=3)
    w_x = sum(w * v for w, v in zip(inst.weights, x))
    w_y = sum(w * v for w, v in zip(inst.weights, y))
    fractional = [v for v in y if 1e-9 < v < 1 - 1e-9]
    check("weighted rounding conserves the weighted sum", abs(w_x - w_y) <= 1e-9)
    check("weighted rounding leaves at most one fractional coordinate", len(fractional) <= 1)

    ids = fk.group_round(inst, x, seed=3)
    counts = inst.group_counts(ids)
    check(
        "group rounding respects every group interval",
        all(
            (lower is None or count > lower) and count <= upper
            for (_color, lower, upper), count in zip(inst.group_bounds(), counts)
        ),
    )

    corner = [1.0 if e in set(ids) else 0.0 for e in range(inst.n)]
    check(
        "multilinear at a corner equals the set value",
        abs(fk.multilinear(inst, corner) - inst.value(ids)) <= 1e-9,
    )
    estimate, stderr = fk.multilinear_estimate(inst, x, samples=2_000, seed=5)
    check(
        "sampled multilinear brackets the exact value",
        abs(estimate - fk.multilinear(inst, x)) <= 6 * stderr + 1e-9,
    )

    stats = fk.rounding_stats(inst, x, rounder="group", trials=500, seed=9)
    check("group rounder never breaks fairness", stats["fairness_violations"] == [0] * inst.k)
    check(
        "marginal means track x",
        all(
            abs(mean - xe) <= 6 * se + 1e-9
            for mean, se, xe in zip(stats["marginal_means"], stats["marginal_stderrs"], x)
        ),
    )

    opt = fk.brute_force(inst)
    check("oracle optimum is feasible", inst.is_feasible(opt["selected"]))

    report = fk.solve_truncating(inst, seed=2, steps=10, samples=200)
    check("truncating output is feasible", inst.is_feasible(report["selected"]))
    check(
        "truncating objective never beats the oracle",
        0.0 < report["objective"] <= opt["value"] + 1e-9,
    )

    fair = fk.solve_expected_fairness(inst, seed=2, steps=10, samples=200)
    check(
        "budget-exact run stays within budget",
        fair["total_weight"] <= inst.budget + fk.FEASIBILITY_TOL,
    )

    knap = fk.solve_expected_knapsack(inst, seed=2, steps=10, samples=200)
    check("fairness-exact run violates no group", knap["violated_groups"] == [])
    check(
        "fairness-exact output marginal is nonnegative",
        inst.marginal(knap["selected"], 0) >= -1e-9 if 0 not in knap["selected"] else True,
    )

    try:
        fk.Instance.generate(2, 3, seed=1)
        check("generator rejects k > n", False)
    except ValueError:
        check("generator rejects k > n", True)

    try:
        fk.group_round(inst, [2.0] * inst.n, seed=1)
        check("group rounding rejects points outside the polytope", False)
    except ValueError:
        check("group rounding rejects points outside the polytope", True)

    failed = [name for name, ok in checks if not ok]
    print(f"\n{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        sys.exit(1)


if __name__ == "__main__":
    main()
