"""
Acceptance sweep over sampled targets.

Runs each construction on many Haar / Hamiltonian samples and reports
success rates and worst residuals. The default sizes finish in about a
minute; --full uses the large sample counts.

Usage:
    python scripts/run_acceptance.py          # quick sweep
    python scripts/run_acceptance.py --full   # full sample counts
"""

import logging
import os
import sys
import time

import numpy as np

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from grassfactor.decompose import (
    decompose_so,
    decompose_su,
    decompose_su_kkkk2,
    decompose_su_minus,
    decompose_su_signature,
    product_of,
    solve_phase_system,
)
from grassfactor.errors import GrassfactorError, NonGeneric, NoSolutionFound
from grassfactor.grassmann import gr_sample, group_sample
from grassfactor.phi import PhiSignature, classify_phi4_complex, is_normalized, member_phi2, reflection_length
from grassfactor.symplectic import decompose_sp_four, sp_sample, spgr_from_conjugation, symplectic_residual

logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
logger = logging.getLogger("ACCEPTANCE")


def sweep(label, cases, run, tol_of):
    """Run every case; returns (successes, failures)."""
    ok, failed, worst = 0, [], 0.0
    for case in cases:
        try:
            f = run(case)
        except (NonGeneric, NoSolutionFound) as e:
            failed.append((case, str(e)))
            continue
        ratio = f.residual / tol_of(case)
        worst = max(worst, ratio)
        if ratio <= 1.0:
            ok += 1
        else:
            failed.append((case, f"residual {f.residual:.3e}"))
    status = "✅" if not failed else "❌"
    logger.info(f"{status} {label}: {ok}/{len(cases)} (worst residual/tol = {worst:.2e})")
    for case, why in failed[:5]:
        logger.info(f"     {case}: {why}")
    return ok, failed


def check_groups(full):
    logger.info("ORTHOGONAL AND UNITARY GROUPS [1/5]")
    so_ns = range(2, 201) if full else range(2, 41)
    su_ns = range(2, 101) if full else range(2, 25)
    reps = 10 if full else 2
    results = [
        sweep("SO(n) two factors",
              [(n, s) for n in so_ns for s in range(reps)],
              lambda c: decompose_so(group_sample("so", c[0], c[1])), lambda c: 1e-9 * c[0]),
        sweep("SU(n) four factors",
              [(n, s) for n in su_ns for s in range(reps)],
              lambda c: decompose_su(group_sample("su", c[0], c[1])), lambda c: 1e-9 * c[0]),
        sweep("SU⁻(n) four factors",
              [(n, s) for n in su_ns for s in range(reps)],
              lambda c: decompose_su_minus(group_sample("su-", c[0], c[1])), lambda c: 1e-9 * c[0]),
    ]
    return all(not failed for _, failed in results)


def check_membership(full):
    logger.info("MEMBERSHIP AND REFLECTION LENGTH [2/5]")
    per_sig = 500 if full else 40
    disagreements = 0
    for field in ("real", "complex"):
        for n in range(2, 7):
            for k in range(n + 1):
                for kp in range(min(k, n - k) + 1):
                    for seed in range(per_sig):
                        z = gr_sample(field, k, n, seed).m @ gr_sample(field, kp, n, seed + 100_000).m
                        if not member_phi2(z, k, kp, field):
                            disagreements += 1
    status = "✅" if disagreements == 0 else "❌"
    logger.info(f"{status} constructed products rejected: {disagreements}")

    too_long = 0
    for n in range(2, 31 if full else 12):
        for seed in range(10 if full else 3):
            k = seed % (n + 1)
            if reflection_length(gr_sample("complex", k, n, seed).m) != n - k:
                too_long += 1
            if reflection_length(group_sample("su", n, seed)) > 2 * n - 2:
                too_long += 1
    status = "✅" if too_long == 0 else "❌"
    logger.info(f"{status} reflection length violations: {too_long}")
    return disagreements == 0 and too_long == 0


def check_signatures(full):
    logger.info("PRESCRIBED SIGNATURES [3/5]")
    targets = 50 if full else 5
    ok = True
    for n in range(2, 13 if full else 9):
        k = n // 2
        for ks in dict.fromkeys([(k, k, k, k), (k, k, k, k - 1), (k, k, k - 1, k - 1), (k + 1, k, k, k)]):
            sig = PhiSignature(field="complex", n=n, ks=ks)
            if min(ks) < 0 or not is_normalized(sig) or ks[1] + ks[3] < n - 1:
                continue
            logger.info(f"  {ks} on ℂ^{n}: {classify_phi4_complex(sig).value}")
            group = "su-" if sum(ks) % 2 else "su"
            _, failed = sweep(f"Φ{ks} n={n}", list(range(targets)),
                              lambda s, n=n, ks=ks, group=group: decompose_su_signature(group_sample(group, n, s), ks),
                              lambda _s, n=n: 1e-9 * n)
            ok = ok and not failed
    for k in (3, 4):
        _, failed = sweep(f"Φ(k,k,k,k−2) k={k}", list(range(targets)),
              lambda s, k=k: decompose_su_kkkk2(group_sample("su", 2 * k, s)), lambda _s, k=k: 2e-9 * k)
        ok = ok and not failed

    rng = np.random.default_rng(0)
    misses = 0
    for _ in range(10_000 if full else 1_000):
        three = rng.uniform(-np.pi, np.pi, 3)
        try:
            solve_phase_system((*three, -three.sum()))
        except GrassfactorError:
            misses += 1
    status = "✅" if misses == 0 else "❌"
    logger.info(f"{status} phase system failures: {misses}")
    return ok and misses == 0


def check_symplectic(full):
    logger.info("SYMPLECTIC FOUR FACTORS [4/5]")
    samples = 100 if full else 20
    ok = True
    for n in range(2, 7):
        successes, _ = sweep(f"Sp({2 * n}, ℂ)", list(range(samples)),
                             lambda s, n=n: decompose_sp_four(sp_sample("complex", n, s)), lambda _s, n=n: 1e-7 * n)
        ok = ok and successes >= 0.95 * samples

    worst = 0.0
    for s in range(1000 if full else 100):
        n = 1 + s % 5
        points = [spgr_from_conjugation(sp_sample("complex", n, 4 * s + i), (s + i) % (n + 1)) for i in range(4)]
        worst = max(worst, symplectic_residual(product_of(points)) / (1e-9 * n))
    status = "✅" if worst <= 1.0 else "❌"
    logger.info(f"{status} products of four points stay symplectic (worst residual/tol = {worst:.2e})")
    return ok and worst <= 1.0


def report(results, started):
    logger.info("SUMMARY [5/5]")
    logger.info(f"Elapsed: {time.perf_counter() - started:.1f} s")
    if all(results):
        logger.info("\n🎉 All acceptance sweeps passed.")
        sys.exit(0)
    logger.error("\n💥 Some sweeps fell short; see the ❌ lines above.")
    sys.exit(1)


if __name__ == "__main__":
    full = "--full" in sys.argv
    started = time.perf_counter()
    results = [check_groups(full), check_membership(full), check_signatures(full), check_symplectic(full)]
    report(results, started)
