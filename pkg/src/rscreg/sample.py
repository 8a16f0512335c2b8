"""Empirical samples, leave-one-out views, CSV ingestion and the synthetic DGPs.

Random numbers come from numpy's counter-based Philox generator.  A
replication ``r`` of a run seeded with ``base_seed`` draws from the
substream ``SeedSequence(base_seed).spawn(r + 1)[r]`` (see
:func:`substream`), so replications can be run in any order or in
parallel and still reproduce bit for bit.
"""
import csv
import enum
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import (
    EmptyAfterFiltering,
    IndexOutOfRange,
    MissingColumn,
    TooFewObservations,
    UnparseableFile,
)

__all__ = [
    "Sample",
    "LeaveOneOutView",
    "Dataset",
    "DgpKind",
    "DgpModel",
    "load_csv",
    "write_csv",
    "dgp_draw",
    "leave_one_out",
    "rng_for",
    "substream",
]


class Sample:
    """An immutable real-valued sample (the empirical distribution F_n).

    Parameters
    ----------
    values : array_like
        Finite observations, at least two of them.
    """

    def __init__(self, values):
        arr = np.array(values, dtype=float).ravel()
        if arr.size < 2:
            raise TooFewObservations(f"a sample needs n >= 2, got {arr.size}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample values must be finite")
        arr.flags.writeable = False
        self._values = arr
        # stable: ties keep their original relative order
        order = np.argsort(arr, kind="stable")
        order.flags.writeable = False
        self._sort_index = order
        self.mean = float(np.mean(arr))
        self.variance = float(np.mean((arr - self.mean) ** 2))

    @property
    def values(self):
        return self._values

    @property
    def sort_index(self):
        """Permutation mapping sorted position -> original position."""
        return self._sort_index

    @property
    def n(self):
        return self._values.shape[0]

    def __len__(self):
        return self.n

    @cached_property
    def sorted_values(self):
        out = self._values[self._sort_index]
        out.flags.writeable = False
        return out

    @cached_property
    def rank(self):
        """Inverse of sort_index: original position -> sorted position."""
        r = np.empty(self.n, dtype=np.int64)
        r[self._sort_index] = np.arange(self.n)
        r.flags.writeable = False
        return r

    def scaled(self, c):
        return Sample(self._values * c)

    def __repr__(self):
        return f"Sample(n={self.n}, mean={self.mean:.6g})"


@dataclass(frozen=True)
class LeaveOneOutView:
    """The parent sample with observation ``excluded`` removed (F_n^(j)).

    Holds only a reference and an index; arrays are materialised on demand.
    """

    parent: Sample
    excluded: int

    @property
    def n(self):
        return self.parent.n - 1

    def __len__(self):
        return self.n

    def __iter__(self):
        vals = self.parent.values
        for i in range(self.parent.n):
            if i != self.excluded:
                yield float(vals[i])

    @property
    def values(self):
        return np.delete(self.parent.values, self.excluded)

    @property
    def sorted_values(self):
        return np.delete(self.parent.sorted_values, self.parent.rank[self.excluded])

    @property
    def mean(self):
        p = self.parent
        return (p.n * p.mean - p.values[self.excluded]) / (p.n - 1)


def leave_one_out(sample, j):
    """View of ``sample`` without observation ``j`` (0-based, original order)."""
    if not 0 <= j < sample.n:
        raise IndexOutOfRange(f"index {j} outside [0, {sample.n})")
    return LeaveOneOutView(sample, int(j))


@dataclass(frozen=True)
class Dataset:
    """Outcome sample plus a named covariate matrix."""

    outcome: Sample
    covariates: np.ndarray
    names: tuple
    outcome_name: str = "y"
    dropped: int = 0

    def __post_init__(self):
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[:, None]
        if cov.shape[0] != self.outcome.n:
            raise ValueError(
                f"covariate rows ({cov.shape[0]}) != outcome n ({self.outcome.n})"
            )
        if cov.shape[1] != len(self.names):
            raise ValueError("one name per covariate column required")
        cov.flags.writeable = False
        object.__setattr__(self, "covariates", cov)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self):
        return self.outcome.n

    @property
    def p(self):
        return self.covariates.shape[1]

    def column(self, name):
        return self.covariates[:, self.names.index(name)]


def _to_float(cell):
    try:
        x = float(cell)
    except (TypeError, ValueError):
        return None
    return x if math.isfinite(x) else None


def load_csv(path, outcome_col, covariate_cols):
    """Read an outcome and covariates from a headed CSV file.

    Rows where any requested cell is empty, non-numeric or non-finite are
    dropped (listwise deletion); the count is kept in ``Dataset.dropped``.

    Raises
    ------
    MissingColumn, EmptyAfterFiltering, UnparseableFile
    """
    covariate_cols = list(covariate_cols)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh, strict=True))
    except FileNotFoundError:
        raise
    except (UnicodeDecodeError, csv.Error) as exc:
        raise UnparseableFile(f"{path}: {exc}") from exc
    if not rows:
        raise UnparseableFile(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    wanted = [outcome_col] + covariate_cols
    missing = [c for c in wanted if c not in header]
    if missing:
        raise MissingColumn(f"columns not found in {path}: {', '.join(missing)}")
    idx = [header.index(c) for c in wanted]
    good = []
    dropped = 0
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise UnparseableFile(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
            )
        parsed = [_to_float(row[i]) for i in idx]
        if any(x is None for x in parsed):
            dropped += 1
            continue
        good.append(parsed)
    if len(good) < 2:
        raise EmptyAfterFiltering(
            f"{path}: {len(good)} usable rows after dropping {dropped}"
        )
    arr = np.array(good, dtype=float)
    return Dataset(
        outcome=Sample(arr[:, 0]),
        covariates=arr[:, 1:],
        names=tuple(covariate_cols),
        outcome_name=outcome_col,
        dropped=dropped,
    )


def write_csv(dataset, path):
    """Write ``dataset`` with full float precision (round-trips through load_csv)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([dataset.outcome_name, *dataset.names])
        for yi, row in zip(dataset.outcome.values, dataset.covariates):
            w.writerow([repr(float(yi))] + [repr(float(x)) for x in row])
    return path


class DgpKind(str, enum.Enum):
    LOCATION_SCALE = "locscale"
    LOCATION_BIMODAL = "bimodal"


@dataclass(frozen=True)
class DgpModel:
    """One of the two synthetic designs, Y = 20 + X' + W with X' = X + shift."""

    kind: DgpKind = DgpKind.LOCATION_SCALE
    shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DgpKind(self.kind))

    def with_shift(self, shift):
        return DgpModel(self.kind, shift)


def rng_for(seed):
    """Philox generator for an integer seed or an existing SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


def substream(base_seed, r):
    """Seed sequence of replication ``r``: the r-th child of SeedSequence(base_seed)."""
    return np.random.SeedSequence(base_seed, spawn_key=(int(r),))


def _primitives(rng, n):
    # fixed draw order so every shift sees the same (X, U, Z, D)
    x = rng.random(n)
    u = rng.standard_normal(n)
    z = rng.standard_normal(n)
    d = rng.random(n) < 0.5
    return x, u, z, d


def outcome_from(kind, x, u, z, d):
    """Outcome for given primitive draws; ``x`` already includes any shift."""
    kind = DgpKind(kind)
    if kind is DgpKind.LOCATION_SCALE:
        w = (1.0 + x) * u
    else:
        w = np.where(d, -4.0 + u * (2.0 - x), 4.0 + z * (2.0 - x)) / 5.0
    return 20.0 + x + w


def dgp_draw(model, n, seed):
    """Draw ``n`` observations (outcome Y, covariate X) from ``model``.

    Deterministic for a fixed seed; equal seeds with different shifts share
    the underlying (X, U, Z, D) draws.
    """
    if n < 2:
        raise TooFewObservations(f"n must be >= 2, got {n}")
    x, u, z, d = _primitives(rng_for(seed), n)
    xs = x + model.shift
    y = outcome_from(model.kind, xs, u, z, d)
    return Dataset(outcome=Sample(y), covariates=xs[:, None], names=("x",))
