"""A desk-scale Monte Carlo table for the variance effect.

Population effect by a forward difference on one million draws, then
bias / variance / MSE of the average partial effect across replications
for the analytic RIF, the exact RSC and the spline RSC.
"""
from rscreg import Functional, McConfig, run_mc

cfg = McConfig(
    model="locscale",
    functional=Functional.variance(),
    n=1000,
    reps=100,
    methods=("rif", "rsc", "rsc-sp"),
    n_star=200,
    base_seed=2024,
)
report = run_mc(cfg, progress=lambda r, total: print(f"\r{r}/{total}", end="", flush=True))
print()

header = ["", *(m.value for m in cfg.methods)]
print("".join(f"{h:>12}" for h in header))
for row in report.table():
    print(f"{row[0]:>12}" + "".join(f"{x:12.4f}" for x in row[1:]))
print("MC s.e. of the mean:", {m.value: round(report[m].mc_se, 4) for m in cfg.methods})
