"""Binary artifact formats and CSV emission round trips."""

import csv
import hashlib
import json
from types import SimpleNamespace

import numpy as np
import pytest

from kpodnn.errors import ValidationError
from kpodnn.network import NetworkSpec, TrainConfig, forward, init_glorot
from kpodnn.reduction import KernelConfig, kpod_basis, pod_basis
from kpodnn.sampling import InputScaling, SnapshotMatrix
from kpodnn.storage import (
    basis_bytes,
    basis_from_bytes,
    load_basis,
    load_network,
    load_snapshots,
    network_bytes,
    network_from_bytes,
    read_csv,
    save_basis,
    save_network,
    save_snapshots,
    sha256_file,
    snapshots_bytes,
    snapshots_from_bytes,
    snapshots_to_csv,
    trajectory_to_csv,
    write_compare_csv,
    write_csv,
    write_eval_csv,
    write_gamma_csv,
    write_history_csv,
    write_spectrum_csv,
)


def sample_snaps():
    rng = np.random.default_rng(8)
    data = rng.standard_normal((7, 5))
    times = np.linspace(0.0, 2.0, 5)
    mus = rng.uniform(0.5, 1.5, size=(5, 2))
    return SnapshotMatrix(data=data, times=times, mus=mus, origin="generated")


def test_snapshots_round_trip(tmp_path):
    snaps = sample_snaps()
    raw = snapshots_bytes(snaps)
    assert raw.startswith(b"SNAP1\n")
    header = json.loads(raw.split(b"\n", 2)[1])
    assert header["N_h"] == 7 and header["N_s"] == 5 and header["m"] == 2
    back = snapshots_from_bytes(raw)
    np.testing.assert_array_equal(back.data, snaps.data)
    np.testing.assert_array_equal(back.times, snaps.times)
    np.testing.assert_array_equal(back.mus, snaps.mus)
    assert back.origin == "generated"
    assert snapshots_bytes(back) == raw
    path = tmp_path / "s.snap1"
    save_snapshots(path, snaps)
    np.testing.assert_array_equal(load_snapshots(path).data, snaps.data)


def test_snapshot_payload_is_column_major_float64_le():
    snaps = sample_snaps()
    raw = snapshots_bytes(snaps)
    payload = raw.split(b"\n", 2)[2]
    assert len(payload) == 7 * 5 * 8
    decoded = np.frombuffer(payload, dtype="<f8").reshape((7, 5), order="F")
    np.testing.assert_array_equal(decoded, snaps.data)


def test_bad_magic_and_truncation():
    snaps = sample_snaps()
    raw = snapshots_bytes(snaps)
    with pytest.raises(ValidationError):
        snapshots_from_bytes(b"XXXX1\n" + raw[6:])
    with pytest.raises(ValidationError):
        snapshots_from_bytes(raw[:-16])


def test_basis_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    S = np.tanh(rng.standard_normal((30, 10)))
    for basis in (
        kpod_basis(S, KernelConfig(gamma=0.01), eps_hat=1e-12),
        pod_basis(S, eps_hat=1e-12),
    ):
        raw = basis_bytes(basis)
        assert raw.startswith(b"RB1\n")
        back = basis_from_bytes(raw)
        np.testing.assert_array_equal(back.V, basis.V)
        np.testing.assert_array_equal(back.spectrum.sigmas, basis.spectrum.sigmas)
        assert back.spectrum.discarded_count == basis.spectrum.discarded_count
        assert back.method == basis.method
        assert back.eps_hat == basis.eps_hat
        assert back.gamma == basis.gamma
        path = tmp_path / f"{basis.method}.rb1"
        save_basis(path, basis)
        np.testing.assert_array_equal(load_basis(path).V, basis.V)


def test_network_round_trip(tmp_path):
    spec = NetworkSpec(3, 2, 6, 4)
    net = init_glorot(spec, seed=17)
    tcfg = TrainConfig(epochs=7, batch_size=4, lr=0.005, theta=1e-5, seed=17,
                       decay_every=3, decay_factor=0.5)
    scaling = InputScaling.fit(np.random.default_rng(1).uniform(size=(9, 3)))
    raw = network_bytes(net, 17, tcfg, scaling)
    assert raw.startswith(b"NN1\n")
    back, seed, tcfg2, sc2 = network_from_bytes(raw)
    assert seed == 17 and tcfg2 == tcfg
    assert back.spec == spec
    for a, b in zip(net.parameters(), back.parameters()):
        np.testing.assert_array_equal(a, b)
    X = np.random.default_rng(2).uniform(size=(5, 3))
    np.testing.assert_array_equal(forward(net, X), forward(back, X))
    np.testing.assert_array_equal(sc2.apply(X), scaling.apply(X))
    path = tmp_path / "m.nn1"
    save_network(path, net, 17, train_config=tcfg, scaling=scaling)
    back2, _, _, _ = load_network(path)
    np.testing.assert_array_equal(forward(net, X), forward(back2, X))


def test_network_round_trip_optional_fields():
    net = init_glorot(NetworkSpec(2, 1, 3, 2), seed=0)
    back, seed, tcfg, scaling = network_from_bytes(network_bytes(net, 0, None, None))
    assert tcfg is None and scaling is None and seed == 0


def test_write_csv_repr_floats(tmp_path):
    path = tmp_path / "t.csv"
    values = [0.1, 1.0 / 3.0, 1e-17, -2.5e300]
    write_csv(path, ["v"], [(v,) for v in values])
    raw = path.read_bytes()
    assert b"\r" not in raw
    header, rows = read_csv(path)
    assert header == ["v"]
    assert [float(r[0]) for r in rows] == values


def test_sha256_file(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"abc123")
    assert sha256_file(path) == hashlib.sha256(b"abc123").hexdigest()


def test_snapshots_to_csv(tmp_path):
    snaps = sample_snaps()
    path = tmp_path / "s.csv"
    snapshots_to_csv(path, snaps)
    header, rows = read_csv(path)
    assert len(header) == 5 and len(rows) == 7
    label = json.loads(header[3])
    assert label == [snaps.times[3], *snaps.mus[3]]
    assert float(rows[2][4]) == snaps.data[2, 4]


def test_trajectory_to_csv(tmp_path):
    states = np.arange(12.0).reshape(4, 3)  # 4 time levels, 3 nodes
    path = tmp_path / "tr.csv"
    trajectory_to_csv(path, states, times=np.array([0.0, 0.5, 1.0, 1.5]))
    header, rows = read_csv(path)
    assert len(header) == 4 and len(rows) == 3
    assert float(rows[1][2]) == states[2, 1]


def test_report_csv_writers(tmp_path):
    write_spectrum_csv(tmp_path / "sp.csv", [(1, 4.0, "pod", None), (1, 3.0, "kpod", 1e-10)])
    header, rows = read_csv(tmp_path / "sp.csv")
    assert header == ["k", "sigma_sq", "method", "gamma"]
    assert rows[0][3] == "" and float(rows[1][3]) == 1e-10

    report = SimpleNamespace(train_loss=[0.9, 0.5], val_loss=[], seconds=[0.1, 0.1])
    write_history_csv(tmp_path / "h.csv", report)
    header, rows = read_csv(tmp_path / "h.csv")
    assert header == ["epoch", "train_loss", "val_loss", "seconds"]
    assert [r[0] for r in rows] == ["1", "2"] and rows[0][2] == ""

    write_compare_csv(tmp_path / "c.csv", [("kpod", 15, 840, 100, 0.3)])
    header, rows = read_csv(tmp_path / "c.csv")
    assert header == ["method", "n", "parameter_count", "epochs", "mean_rel_error"]
    assert rows[0][0] == "kpod"

    ev = SimpleNamespace(
        inputs=np.array([[0.0, 1.0, 2.0], [0.5, 1.0, 2.0]]),
        errors=np.array([0.1, 0.2]),
    )
    write_eval_csv(tmp_path / "e.csv", ev)
    header, rows = read_csv(tmp_path / "e.csv")
    assert header == ["index", "t", "mu1", "mu2", "rel_error"]
    assert rows[1][0] == "1" and float(rows[1][3]) == 2.0

    write_gamma_csv(tmp_path / "g.csv", [(1e-10, 15, 0.3), (1.0, 257, 0.9)])
    header, rows = read_csv(tmp_path / "g.csv")
    assert header == ["gamma", "n", "mean_rel_error"]
    assert float(rows[0][0]) == 1e-10
