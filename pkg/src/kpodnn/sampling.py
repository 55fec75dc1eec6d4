"""Parameter sampling, snapshot assembly, and regression-dataset construction.

Snapshot matrices collect full-order solution columns labeled by their
(time, parameter) origin, ordered parameter-major and time-minor. The
regression dataset pairs each label with the column's reduced
coefficients; inputs are min-max scaled with statistics frozen on the
building set so that test inputs go through the identical transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TooFewRows, ValidationError
from .wave import Trajectory


@dataclass(frozen=True)
class ParameterBox:
    """Axis-aligned box in parameter space with named axes."""

    names: tuple[str, ...]
    lows: tuple[float, ...]
    highs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(set(self.names)):
            raise ValidationError(f"duplicate parameter names in {self.names}")
        if not (len(self.names) == len(self.lows) == len(self.highs)):
            raise ValidationError("names, lows, highs must have equal lengths")
        for name, lo, hi in zip(self.names, self.lows, self.highs):
            if not lo < hi:
                raise ValidationError(f"empty range for {name}: [{lo}, {hi}]")

    @property
    def dim(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class SnapshotMatrix:
    """Dense N_h x N_s matrix of solution columns plus per-column (t, mu) labels."""

    data: np.ndarray
    times: np.ndarray
    mus: np.ndarray
    origin: str = "generated"

    def __post_init__(self) -> None:
        if self.data.ndim != 2:
            raise DimensionMismatch("snapshot data must be a 2-D array")
        n_s = self.data.shape[1]
        if self.times.shape != (n_s,):
            raise DimensionMismatch(
                f"{self.times.shape[0] if self.times.ndim == 1 else self.times.shape} "
                f"time labels for {n_s} columns"
            )
        if self.mus.ndim != 2 or self.mus.shape[0] != n_s:
            raise DimensionMismatch("one parameter vector per column is required")
        if not np.all(np.isfinite(self.data)):
            raise ValidationError("snapshot data contains non-finite values")

    @property
    def n_dofs(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    @property
    def n_params(self) -> int:
        return self.mus.shape[1]

    def input_rows(self) -> np.ndarray:
        """Raw (t; mu) label rows, one per column."""
        return np.column_stack([self.times, self.mus])


@dataclass(frozen=True)
class InputScaling:
    """Per-column affine map x -> (x - low) / span, invertible.

    Columns that are constant on the fitting set get span 1 so they map
    to 0 instead of dividing by zero.
    """

    lows: np.ndarray
    spans: np.ndarray
    enabled: bool = True

    @classmethod
    def fit(cls, rows: np.ndarray, enabled: bool = True) -> "InputScaling":
        """Record per-column min/span; with enabled=False the map is identity
        but the fitted bounds are still kept for range warnings."""
        lows = rows.min(axis=0)
        spans = rows.max(axis=0) - lows
        spans = np.where(spans > 0, spans, 1.0)
        return cls(lows=lows, spans=spans, enabled=enabled)

    @classmethod
    def identity(cls, n_cols: int) -> "InputScaling":
        return cls(lows=np.zeros(n_cols), spans=np.ones(n_cols), enabled=False)

    def apply(self, rows: np.ndarray) -> np.ndarray:
        if not self.enabled:
            return np.asarray(rows, dtype=float).copy()
        return (rows - self.lows) / self.spans

    def invert(self, rows: np.ndarray) -> np.ndarray:
        if not self.enabled:
            return np.asarray(rows, dtype=float).copy()
        return rows * self.spans + self.lows

    def covers(self, row: np.ndarray, slack: float = 1e-12) -> bool:
        """True when the row lies inside the fitted per-column ranges."""
        row = np.asarray(row, dtype=float)
        pad = slack * np.maximum(1.0, np.abs(self.spans))
        return bool(np.all(row >= self.lows - pad)
                    and np.all(row <= self.lows + self.spans + pad))


@dataclass(frozen=True)
class Dataset:
    """Input-output pairs: scaled (t; mu) rows -> reduced coefficient rows."""

    inputs: np.ndarray
    outputs: np.ndarray
    scaling: InputScaling

    def __post_init__(self) -> None:
        if self.inputs.shape[0] != self.outputs.shape[0]:
            raise DimensionMismatch(
                f"{self.inputs.shape[0]} input rows vs {self.outputs.shape[0]} output rows"
            )

    @property
    def n_rows(self) -> int:
        return self.inputs.shape[0]


@dataclass(frozen=True)
class FoldPlan:
    """Shuffled partition of rows into K folds whose sizes differ by at most 1."""

    K: int
    assignment: np.ndarray
    seed: int

    def validation_rows(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == k)

    def training_rows(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != k)


def latin_hypercube(box: ParameterBox, count: int, seed: int = 0) -> np.ndarray:
    """Stratified samples: one point per equal-width stratum per dimension.

    Returns a (count, dim) array. Strata are paired across dimensions by
    independent random permutations; deterministic given the seed.
    """
    if count < 1:
        raise ValidationError(f"sample count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    points = np.empty((count, box.dim))
    for d in range(box.dim):
        strata = rng.permutation(count)
        u = rng.random(count)
        unit = (strata + u) / count
        points[:, d] = box.lows[d] + unit * (box.highs[d] - box.lows[d])
    return points


def assemble_snapshots(trajectories: list[Trajectory], stride: int = 1) -> SnapshotMatrix:
    """Stack trajectory states as columns, parameter-major and time-minor.

    ``stride`` subsamples each trajectory's stored time levels (every
    stride-th state, starting at t=0).
    """
    if not trajectories:
        raise ValidationError("no trajectories to assemble")
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    n_dofs = trajectories[0].states.shape[1]
    cols, times, mus = [], [], []
    for traj in trajectories:
        if traj.states.shape[1] != n_dofs:
            raise DimensionMismatch(
                f"trajectory has {traj.states.shape[1]} nodes, expected {n_dofs}"
            )
        if traj.params is None:
            raise ValidationError("trajectory without parameters cannot be labeled")
        kept = slice(None, None, stride)
        cols.append(traj.states[kept].T)
        times.append(traj.times[kept])
        mu = traj.params.as_vector()
        mus.append(np.tile(mu, (traj.times[kept].shape[0], 1)))
    return SnapshotMatrix(
        data=np.hstack(cols),
        times=np.concatenate(times),
        mus=np.vstack(mus),
        origin="generated",
    )


def build_io_pairs(snaps: SnapshotMatrix, basis, scaling: InputScaling | None = None,
                   scale_inputs: bool = True) -> Dataset:
    """Project every column onto the basis and pair it with its scaled label row.

    With ``scaling=None`` the min-max transform is fitted on this set
    (building-set usage); pass the stored transform to reuse it on test
    labels. ``scale_inputs=False`` keeps raw labels.
    """
    V = basis.V
    if V.shape[0] != snaps.n_dofs:
        raise DimensionMismatch(
            f"basis has {V.shape[0]} rows but snapshots have {snaps.n_dofs} DOFs"
        )
    raw = snaps.input_rows()
    if scaling is None:
        scaling = InputScaling.fit(raw, enabled=scale_inputs)
    outputs = snaps.data.T @ V
    return Dataset(inputs=scaling.apply(raw), outputs=outputs, scaling=scaling)


def kfold_split(dataset: Dataset | int, K: int = 5, seed: int = 0) -> FoldPlan:
    """Shuffled K-fold assignment; deterministic given the seed."""
    n = dataset if isinstance(dataset, int) else dataset.n_rows
    if K < 2:
        raise ValidationError(f"fold count must be >= 2, got {K}")
    if n < K:
        raise TooFewRows(f"{n} rows cannot be split into {K} folds")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    assignment[rng.permutation(n)] = np.arange(n) % K
    return FoldPlan(K=K, assignment=assignment, seed=seed)
