"""Acceptance gate.

One test per shipped guarantee, each printing exactly one PASS/FAIL line
(run with ``pytest tests/test_acceptance.py -v -s`` to see them inline).
Tolerances are pinned at the top; a failure here means the package does not
meet its contract, not that a unit broke.
"""

import json
import subprocess
import sys
import time

import numpy as np

from edds.csolve import SolverConfig, gradient, solve_fixed_order
from edds.discrete import certificate_sweep, greedy_allocate, oracle_allocate
from edds.model import Instance, Order
from edds.order import spf_agreement_experiment, spf_order
from edds.verify import check_convexity, check_supermodular, di_as_set_function
from edds.discrete import DiscreteParams

from test_csolve import fd_gradient, random_interior_point

TOL_BHAT = 0.05  # bits, per reference value
TOL_GRAD = 1e-5  # relative, analytic vs finite differences
TOL_TIGHT = 1e-6  # energy slack, relative to the budget
TOL_MATCH = 1e-9  # greedy-vs-oracle exact-match tolerance
RATIO_BOUND = 2.0  # certified greedy/optimal factor
GRAD_BUDGET_S = 10.0
CONVEXITY_BUDGET_S = 30.0
CERTIFICATE_BUDGET_S = 300.0


def _verdict(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _run(*args: str) -> tuple[int, str]:
    proc = subprocess.run(
        [sys.executable, "-m", "edds.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc.returncode, proc.stdout


def _solve_cli(bits: str, energy: str) -> dict:
    code, out = _run("solve", "--bits", bits, "--energy", energy, "--search", "brute")
    assert code == 0, f"solve exited {code}"
    return json.loads(out)


def test_c01_reference_instance_one():
    doc = _solve_cli("15,20", "50")
    b1, b2 = doc["cost"]["bhat"]
    ok = (
        abs(b1 - 13.667) <= TOL_BHAT
        and abs(b2 - 19.1396) <= TOL_BHAT
        and doc["alloc"]["perm"] == [1, 2]
        and doc["converged"]
    )
    _verdict(
        "reference-instance-1",
        ok,
        f"bhat=({b1:.4f}, {b2:.4f}) target=(13.667, 19.1396) +/-{TOL_BHAT}, "
        f"perm={doc['alloc']['perm']} (shorter first), delay weights a_i = n - pi_i + 1",
    )


def test_c02_reference_instance_two():
    doc = _solve_cli("12,20", "20")
    b1, b2 = doc["cost"]["bhat"]
    ok = abs(b1 - 7.663) <= TOL_BHAT and abs(b2 - 15.8431) <= TOL_BHAT and doc["converged"]
    _verdict(
        "reference-instance-2",
        ok,
        f"bhat=({b1:.4f}, {b2:.4f}) target=(7.663, 15.8431) +/-{TOL_BHAT}",
    )


def test_c03_gradient_matches_finite_differences():
    start = time.perf_counter()
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        inst, alloc = random_interior_point(rng)
        g = gradient(inst, alloc)
        fd = fd_gradient(inst, alloc)
        rel = float(np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1e-8)))
        worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    ok = worst <= TOL_GRAD and elapsed < GRAD_BUDGET_S
    _verdict(
        "gradient-vs-fd",
        ok,
        f"100 points (n<=4), worst rel err {worst:.3e} <= {TOL_GRAD}, "
        f"{elapsed:.1f}s < {GRAD_BUDGET_S:.0f}s",
    )


def test_c04_convexity_certification():
    start = time.perf_counter()
    r1 = check_convexity(Instance((15.0, 20.0), 50.0), Order.identity(2), trials=5000, seed=11)
    r2 = check_convexity(Instance((12.0, 20.0), 20.0), Order.identity(2), trials=5000, seed=12)
    elapsed = time.perf_counter() - start
    violations = r1.violations + r2.violations
    margin = min(r1.margin, r2.margin)
    ok = violations == 0 and margin > 0.0 and elapsed < CONVEXITY_BUDGET_S
    _verdict(
        "convexity-certification",
        ok,
        f"10000 midpoint+curvature trials, {violations} violations, "
        f"min slack {margin:.3e} > 0, {elapsed:.1f}s < {CONVEXITY_BUDGET_S:.0f}s",
    )


def test_c05_energy_tightness():
    rng = np.random.default_rng(2026)
    worst = 0.0
    non_converged = 0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        bits = rng.uniform(1.0, 25.0, n)
        energy = float(rng.uniform(0.3, 3.0) * bits.sum())
        inst = Instance(tuple(bits), energy)
        report = solve_fixed_order(inst, spf_order(inst), SolverConfig())
        non_converged += not report.converged
        worst = max(worst, report.energy_slack / energy)
    ok = non_converged == 0 and worst <= TOL_TIGHT
    _verdict(
        "energy-tightness",
        ok,
        f"50 random instances, {non_converged} non-converged, "
        f"worst relative slack {worst:.3e} <= {TOL_TIGHT}",
    )


def test_c06_approximation_certificate():
    start = time.perf_counter()
    worst = 0.0
    worst_case = None
    exceptions = 0
    count = 0
    for inst, params in certificate_sweep():
        count += 1
        _, g_cost, _ = greedy_allocate(inst, params)
        _, o_cost = oracle_allocate(inst, params)
        ratio = g_cost.total / o_cost.total
        if ratio > worst:
            worst = ratio
            worst_case = (inst.bits, inst.energy, params.slot_len, params.quantum)
        if g_cost.total > RATIO_BOUND * o_cost.total * (1.0 + 1e-12):
            exceptions += 1
    elapsed = time.perf_counter() - start
    ok = exceptions == 0 and count >= 200 and elapsed < CERTIFICATE_BUDGET_S
    _verdict(
        "approximation-certificate",
        ok,
        f"{count} instances, worst greedy/oracle {worst:.4f} at {worst_case}, "
        f"{exceptions} above {RATIO_BOUND}x, {elapsed:.1f}s < {CERTIFICATE_BUDGET_S:.0f}s",
    )


def test_c07_greedy_sanity():
    bad_traces = 0
    mismatches = 0
    singles = 0
    worst_gap = 0.0
    witness = None
    for inst, params in certificate_sweep():
        _, g_cost, trace = greedy_allocate(inst, params)
        totals = [s.total_cost for s in trace]
        if any(b >= a for a, b in zip(totals, totals[1:])):
            bad_traces += 1
        if inst.n == 1:
            singles += 1
            _, o_cost = oracle_allocate(inst, params)
            gap = abs(g_cost.total - o_cost.total)
            if gap > TOL_MATCH:
                mismatches += 1
                if gap > worst_gap:
                    worst_gap = gap
                    witness = (inst.bits, inst.energy, params.slot_len, params.quantum)
    ok = bad_traces == 0 and mismatches == 0
    _verdict(
        "greedy-sanity",
        ok,
        f"{bad_traces} non-decreasing traces; n=1 exact match: "
        f"{mismatches}/{singles} mismatches (worst gap {worst_gap:.4f} at {witness}) "
        "- the stop-on-no-improvement rule parks on cost plateaus that the "
        "one-dimensional optimum crosses",
    )


def test_c08_supermodularity_distortion_only():
    inst = Instance((2.0,), 3.0)
    params = DiscreteParams(1.0, 1.0, 3, 3)
    ownership = {1: 1, 2: 1, 3: 1}
    clean = check_supermodular(
        di_as_set_function(inst, params, 1, ownership, distortion_only=True)
    )
    full = check_supermodular(di_as_set_function(inst, params, 1, ownership))
    ok = clean.violations == 0 and clean.trials > 0 and full.trials > 0
    _verdict(
        "supermodularity-distortion-only",
        ok,
        f"exhaustive on 9 cells: {clean.violations} violations in "
        f"{clean.trials} triples; full-cost probe (delay included, "
        f"informational): {full.violations} violations",
    )


def test_c09_spf_experiment(tmp_path):
    stats2 = spf_agreement_experiment(200, rng_seed=7, n=2)
    stats3 = spf_agreement_experiment(100, rng_seed=8, n=3)
    for stats, name in ((stats2, "spf_n2"), (stats3, "spf_n3")):
        (tmp_path / f"{name}.csv").write_text(stats.to_csv())
        (tmp_path / f"{name}.json").write_text(json.dumps(stats.to_doc(), indent=2))
    produced = all(
        (tmp_path / f).stat().st_size > 0
        for f in ("spf_n2.csv", "spf_n2.json", "spf_n3.csv", "spf_n3.json")
    )
    _verdict(
        "spf-experiment",
        produced,  # reporting only: no agreement threshold is asserted
        f"n=2 agreement {stats2.agreements}/200, n=3 agreement {stats3.agreements}/100, "
        f"worst gaps {stats2.worst_gap:.3e} / {stats3.worst_gap:.3e}, "
        f"artifacts in {tmp_path}",
    )


def test_c10_determinism():
    commands = [
        ("solve", "--bits", "15,20", "--energy", "50", "--search", "brute"),
        ("sweep", "--fix", "B1=15", "--vary", "B2=18:22:2", "--energy", "50"),
        ("discrete", "--bits", "2,3", "--energy", "4", "--slot-len", "1", "--quantum", "1"),
        ("check", "--bits", "2", "--energy", "2", "--slot-len", "1", "--quantum", "1",
         "--trials", "200", "--convexity-trials", "100", "--seed", "5"),
    ]
    diffs = []
    for argv in commands:
        code1, out1 = _run(*argv)
        code2, out2 = _run(*argv)
        if out1 != out2 or code1 != code2:
            diffs.append(argv[0])
    _verdict(
        "determinism",
        not diffs,
        f"{len(commands)} seeded commands run twice, byte-identical stdout"
        + (f"; differing: {diffs}" if diffs else ""),
    )
