"""Monte Carlo evaluation of RIF / RSC / RSC(sp) regressions and timing runs.

Population effects are forward differences ``(v(F_eps) - v(F_0)) / eps``
where F_eps is the outcome distribution with the covariate shifted by eps.
Both distributions are built from the same primitive draws, otherwise the
difference at eps = 1e-4 would be swamped by sampling noise.
"""
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import RscError
from .functionals import evaluate
from .influence import Method, rsc_full
from .regression import ModelSpec, rif_regress
from .sample import DgpKind, DgpModel, _primitives, dgp_draw, outcome_from, rng_for, substream
from .spline import default_n_star, fit_spline_rsc, interpolate

__all__ = [
    "McConfig",
    "MethodStats",
    "McReport",
    "ReplicationFailed",
    "population_effect",
    "run_mc",
    "BenchRow",
    "bench_timing",
]

STAT_ROWS = ("Population", "Mean", "Bias", "Var", "MSE")


class ReplicationFailed(RscError):
    pass


def population_effect(kind, functional, pop_n=10**6, epsilon=1e-4, seed=0):
    """Numerical derivative of v with respect to a shift of the covariate."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x, u, z, d = _primitives(rng_for(seed), int(pop_n))
    base = outcome_from(kind, x, u, z, d)
    moved = outcome_from(kind, x + epsilon, u, z, d)
    return (evaluate(functional, moved) - evaluate(functional, base)) / epsilon


@dataclass(frozen=True)
class McConfig:
    model: DgpKind
    functional: object
    n: int
    reps: int = 200
    methods: tuple = ("rif", "rsc")
    spec: ModelSpec = field(default_factory=ModelSpec)
    n_star: int = None
    K: int = 5
    base_seed: int = 0
    epsilon: float = 1e-4
    pop_n: int = 10**6
    population: float = None
    strategy: str = "auto"
    n_jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "model", DgpKind(self.model))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        if self.reps < 2:
            raise ValueError("reps must be >= 2 (variance across replications)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.population is None and self.pop_n < 10 * self.n:
            raise ValueError("pop_n must be at least 10 * n")


@dataclass
class MethodStats:
    method: Method
    population: float
    apes: np.ndarray
    seconds: float = 0.0

    @property
    def mean(self):
        return float(np.mean(self.apes))

    @property
    def bias(self):
        return self.mean - self.population

    @property
    def variance(self):
        return float(np.var(self.apes))

    @property
    def mse(self):
        return float(np.mean((self.apes - self.population) ** 2))

    @property
    def mc_se(self):
        """Monte Carlo standard error of the mean APE."""
        return float(np.std(self.apes, ddof=1) / np.sqrt(self.apes.size))

    def row(self, stat):
        return {
            "Population": self.population,
            "Mean": self.mean,
            "Bias": self.bias,
            "Var": self.variance,
            "MSE": self.mse,
        }[stat]


@dataclass
class McReport:
    config: McConfig
    stats: dict

    def __getitem__(self, method):
        return self.stats[Method(method)]

    def table(self, scale=1.0):
        """Rows Population/Mean/Bias/Var/MSE x methods; Var and MSE scale by scale^2."""
        out = []
        for stat in STAT_ROWS:
            f = scale * scale if stat in ("Var", "MSE") else scale
            out.append([stat] + [self.stats[m].row(stat) * f for m in self.config.methods])
        return out


def _one_rep(cfg, r):
    data = dgp_draw(DgpModel(cfg.model), cfg.n, substream(cfg.base_seed, r))
    spline_seed = np.random.SeedSequence(cfg.base_seed, spawn_key=(r, 1))
    apes, secs = [], []
    for m in cfg.methods:
        t0 = time.perf_counter()
        try:
            rep = rif_regress(data, cfg.functional, m, cfg.spec, n_star=cfg.n_star, K=cfg.K,
                              seed=spline_seed, strategy=cfg.strategy)
        except Exception as exc:
            raise ReplicationFailed(
                f"replication {r} (base_seed={cfg.base_seed}, method={m.value}) failed: {exc}"
            ) from exc
        secs.append(time.perf_counter() - t0)
        apes.append(float(rep.ape[0]))
    return apes, secs


def run_mc(config, progress=None):
    """Run ``config.reps`` replications; the result does not depend on n_jobs."""
    pop = config.population
    if pop is None:
        pop = population_effect(config.model, config.functional, config.pop_n, config.epsilon,
                                np.random.SeedSequence(config.base_seed))
    if config.n_jobs == 1:
        results = []
        for r in range(config.reps):
            results.append(_one_rep(config, r))
            if progress:
                progress(r + 1, config.reps)
    else:
        results = Parallel(n_jobs=config.n_jobs)(
            delayed(_one_rep)(config, r) for r in range(config.reps)
        )
    apes = np.array([a for a, _ in results])
    secs = np.array([s for _, s in results])
    stats = {
        m: MethodStats(m, float(pop), apes[:, k], float(secs[:, k].sum()))
        for k, m in enumerate(config.methods)
    }
    return McReport(config, stats)


@dataclass(frozen=True)
class BenchRow:
    size: int
    n_star: int
    rsc_seconds: float
    sp_seconds: float

    @property
    def ratio(self):
        return self.sp_seconds / self.rsc_seconds


def bench_timing(functional, sizes, n_star_fraction=0.1, reps=3, seed=0, K=5,
                 strategy="exact", n_star_rule="default"):
    """Wall-clock of the full leave-one-out RSC against the spline version.

    Samples come from the location-scale design.  A warm-up run at the
    smallest size is discarded.  ``n_star_rule="default"`` sizes the
    subsample with :func:`default_n_star` (fraction clipped to [200, 1000]);
    ``"fraction"`` uses ``round(fraction * n)`` as is.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    sizes = [int(s) for s in sizes]

    def n_star_for(n):
        if n_star_rule == "fraction":
            return max(K, int(round(n_star_fraction * n)))
        return default_n_star(n, n_star_fraction)

    def run(sample, n, sp_seed):
        t0 = time.perf_counter()
        rsc_full(functional, sample, strategy)
        t1 = time.perf_counter()
        model = fit_spline_rsc(functional, sample, n_star_for(n), K, sp_seed, strategy)
        interpolate(model, sample)
        t2 = time.perf_counter()
        return t1 - t0, t2 - t1

    warm = dgp_draw(DgpModel(DgpKind.LOCATION_SCALE), min(sizes), seed)
    run(warm.outcome, min(sizes), seed)
    rows = []
    for i, n in enumerate(sizes):
        full, sp = [], []
        for r in range(reps):
            ss = np.random.SeedSequence(seed, spawn_key=(i, r))
            data = dgp_draw(DgpModel(DgpKind.LOCATION_SCALE), n, ss)
            a, b = run(data.outcome, n, ss)
            full.append(a)
            sp.append(b)
        rows.append(BenchRow(n, n_star_for(n), float(np.mean(full)), float(np.mean(sp))))
    return rows
