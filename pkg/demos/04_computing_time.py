"""Why interpolate: wall-clock of the exact RSC against the spline version.

The exact RSC re-evaluates the statistic n times; the spline version only
n* times.  For the DER index each evaluation is itself quadratic in n, so
the gain grows quickly with the sample size.
"""
from rscreg import Functional, bench_timing

for f, sizes in ((Functional.gini(), [1000, 2000, 4000]),
                 (Functional.der(0.5, loo_bandwidth="recompute"), [400, 800, 1200])):
    print(f.label)
    for row in bench_timing(f, sizes, reps=1):
        print(f"  n={row.size:5d} n*={row.n_star:4d}  RSC {row.rsc_seconds:8.3f}s  "
              f"RSC(sp) {row.sp_seconds:7.3f}s  ratio {row.ratio:.3f}")
