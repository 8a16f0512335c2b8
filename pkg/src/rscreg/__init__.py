"""Regression of recentered sensitivity curves on covariates.

Estimates how covariates shift unconditional distributional statistics
(variance, Gini, quantiles, DER polarization) by regressing per-observation
influence values, analytic or leave-one-out, on the covariates.
"""
from .errors import (
    DataError,
    DegenerateBandwidth,
    DegenerateSample,
    EmptyAfterFiltering,
    IndexOutOfRange,
    MissingColumn,
    NoAnalyticForm,
    NumericError,
    RankDeficientDesign,
    RscError,
    SingularDesign,
    SpecMismatch,
    TooFewDistinctValues,
    TooFewObservations,
    UnparseableFile,
)
from .functionals import Functional, KdeConfig, der_alienation, der_index, evaluate, gini, kde_at
from .influence import InfluenceVector, Method, analytic_rif, loo_values, rsc_full, sc_at, sc_if_gap
from .montecarlo import McConfig, McReport, bench_timing, population_effect, run_mc
from .regression import EffectReport, ModelSpec, average_partial_effect, ols, rif_regress
from .sample import (
    Dataset,
    DgpKind,
    DgpModel,
    LeaveOneOutView,
    Sample,
    dgp_draw,
    leave_one_out,
    load_csv,
    write_csv,
)
from .spline import KnotSet, SplineModel, fit_rcs, fit_spline_rsc, interpolate, rcs_basis, select_knots

__version__ = "0.1.0"
