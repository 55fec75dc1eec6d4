"""Latin hypercube design, snapshot assembly, scaling, and fold splits."""

import numpy as np
import pytest

from kpodnn.errors import DimensionMismatch, TooFewRows, ValidationError
from kpodnn.sampling import (
    InputScaling,
    ParameterBox,
    SnapshotMatrix,
    assemble_snapshots,
    build_io_pairs,
    kfold_split,
    latin_hypercube,
)
from kpodnn.wave import GridSpec, WaveParams, solve_wave

BOX = ParameterBox(("a0", "x0", "sigma"), (0.5, 4.19, 0.5), (1.0, 8.38, 1.0))


def test_box_validation():
    with pytest.raises(ValidationError):
        ParameterBox(("a", "a"), (0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValidationError):
        ParameterBox(("a",), (1.0,), (1.0,))


def test_lhs_stratification():
    # exactly one sample per axis stratum
    pts = latin_hypercube(BOX, 25, seed=11)
    assert pts.shape == (25, 3)
    for j in range(3):
        u = (pts[:, j] - BOX.lows[j]) / (BOX.highs[j] - BOX.lows[j])
        strata = np.floor(u * 25).astype(int)
        assert sorted(strata) == list(range(25))


def test_lhs_bounds_and_determinism():
    a = latin_hypercube(BOX, 40, seed=5)
    b = latin_hypercube(BOX, 40, seed=5)
    c = latin_hypercube(BOX, 40, seed=6)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all(a >= np.array(BOX.lows)) and np.all(a <= np.array(BOX.highs))


def test_lhs_single_point():
    pt = latin_hypercube(ParameterBox(("u",), (0.0,), (1.0,)), 1, seed=3)
    assert pt.shape == (1, 1)
    assert 0.0 <= pt[0, 0] <= 1.0
    with pytest.raises(ValidationError):
        latin_hypercube(BOX, 0)


def test_assemble_snapshots_stride_and_labels():
    grid = GridSpec(n_steps=48, L=4.0 * np.pi, T=2.0, N=16)
    params = [WaveParams(1.0, 4.0, 0.7, 1.0), WaveParams(0.5, 8.0, 0.9, 1.0)]
    trajs = [solve_wave(p, grid) for p in params]
    snaps = assemble_snapshots(trajs, stride=12)
    # 5 stored levels per trajectory, columns grouped by trajectory
    assert snaps.data.shape == (17, 10)
    assert snaps.n_dofs == 17 and snaps.n_snapshots == 10 and snaps.n_params == 3
    np.testing.assert_allclose(snaps.times[:5], grid.T * np.arange(5) / 4.0)
    np.testing.assert_array_equal(snaps.mus[0], [1.0, 4.0, 0.7])
    np.testing.assert_array_equal(snaps.mus[7], [0.5, 8.0, 0.9])
    np.testing.assert_array_equal(snaps.data[:, 6], trajs[1].states[12])


def test_assemble_validation():
    with pytest.raises(ValidationError):
        assemble_snapshots([])
    grid = GridSpec(n_steps=4, L=1.0, T=0.2, N=4)
    tr = solve_wave(WaveParams(1.0, 0.5, 0.2, 1.0), grid)
    with pytest.raises(ValidationError):
        assemble_snapshots([tr], stride=0)


def test_input_rows_layout():
    data = np.arange(6.0).reshape(2, 3)
    snaps = SnapshotMatrix(
        data, times=np.array([0.0, 1.0, 2.0]), mus=np.array([[5.0], [6.0], [7.0]])
    )
    np.testing.assert_array_equal(
        snaps.input_rows(), [[0.0, 5.0], [1.0, 6.0], [2.0, 7.0]]
    )


def test_snapshot_matrix_validation():
    with pytest.raises(DimensionMismatch):
        SnapshotMatrix(np.zeros((2, 3)), np.zeros(2), np.zeros((3, 1)))
    with pytest.raises(ValidationError):
        SnapshotMatrix(
            np.array([[np.nan, 0.0]]), np.zeros(2), np.zeros((2, 1))
        )


def test_input_scaling_round_trip():
    rng = np.random.default_rng(0)
    rows = rng.uniform(-3.0, 9.0, size=(30, 4))
    sc = InputScaling.fit(rows)
    unit = sc.apply(rows)
    assert unit.min() >= 0.0 and unit.max() <= 1.0 + 1e-15
    np.testing.assert_allclose(sc.invert(unit), rows, atol=1e-12)


def test_input_scaling_disabled_keeps_bounds():
    rows = np.array([[0.0, 10.0], [2.0, 30.0]])
    sc = InputScaling.fit(rows, enabled=False)
    np.testing.assert_array_equal(sc.apply(rows), rows)
    assert sc.covers(np.array([1.0, 20.0]))
    assert not sc.covers(np.array([3.0, 20.0]))


def test_input_scaling_covers():
    sc = InputScaling.fit(np.array([[0.0, 0.0], [1.0, 2.0]]))
    assert sc.covers(np.array([0.5, 1.0]))
    assert not sc.covers(np.array([0.5, 2.5]))


def test_kfold_split_balance_and_determinism():
    plan = kfold_split(100, K=5, seed=4)
    assert plan.K == 5 and plan.assignment.shape == (100,)
    counts = np.bincount(plan.assignment, minlength=5)
    np.testing.assert_array_equal(counts, [20] * 5)
    val = plan.validation_rows(2)
    trn = plan.training_rows(2)
    assert len(val) == 20 and len(trn) == 80
    assert set(val).isdisjoint(set(trn))
    np.testing.assert_array_equal(
        plan.assignment, kfold_split(100, K=5, seed=4).assignment
    )
    assert not np.array_equal(plan.assignment, kfold_split(100, K=5, seed=5).assignment)


def test_kfold_split_errors():
    with pytest.raises(ValidationError):
        kfold_split(10, K=1)
    with pytest.raises(TooFewRows):
        kfold_split(3, K=5)


def test_build_io_pairs_shapes(building_set, kpod_basis_smoke):
    ds = build_io_pairs(building_set, kpod_basis_smoke)
    n_s = building_set.n_snapshots
    assert ds.inputs.shape == (n_s, 4)
    assert ds.outputs.shape == (n_s, kpod_basis_smoke.n)
    # targets are the reduced coordinates of each column
    k = 137
    expected = kpod_basis_smoke.V.T @ building_set.data[:, k]
    np.testing.assert_allclose(ds.outputs[k], expected, atol=1e-12)
    assert ds.inputs.min() >= 0.0 and ds.inputs.max() <= 1.0 + 1e-15
