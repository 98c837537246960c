"""Validate every analytic loss gradient against finite differences.

Each loss ships a standard probe (random inputs at a fixed seed plus the
finite-difference step and tolerance appropriate for it); this runs all
of them across several seeds and prints the worst relative error seen.
"""

from ksplab import grad_check, make_grad_probe

PLAN = [
    ("fidelity", 8),
    ("ssim", 16),
    ("eagle", 20),
    ("vgg", 16),
    ("reg", 8),
]

print(f"{'loss':>10} {'size':>5} {'eps':>8} {'tol':>8} {'worst rel err':>14} {'result':>7}")
for name, size in PLAN:
    worst = 0.0
    ok = True
    for seed in range(5):
        fn, x0, eps, tol, exclude = make_grad_probe(name, size, seed)
        report = grad_check(fn, x0, epsilon=eps, tolerance=tol, rng=seed, exclude=exclude)
        worst = max(worst, report.max_rel_error)
        ok &= report.passed
    print(f"{name:>10} {size:>5} {eps:>8.0e} {tol:>8.0e} {worst:>14.3e} "
          f"{'PASS' if ok else 'FAIL':>7}")

print("\nsingle checks are also available from the command line:")
print("  ksplab gradcheck --loss eagle --size 20 --seed 3")
