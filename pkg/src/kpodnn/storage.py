"""File formats for snapshots, bases, and trained networks, plus CSV reporting.

Binary layouts share one shape: an ASCII magic line, a one-line UTF-8 JSON
header, then raw 64-bit little-endian floats in column-major order. CSV
floats are written with repr() so values round-trip exactly and repeated
runs with the same seed produce byte-identical files.
"""

import csv
import hashlib
import io
import json
from dataclasses import asdict

import numpy as np

from .errors import ValidationError
from .network import Layer, Network, NetworkSpec, TrainConfig
from .reduction import ReducedBasis, Spectrum
from .sampling import InputScaling, SnapshotMatrix

SNAP_MAGIC = b"SNAP1\n"
BASIS_MAGIC = b"RB1\n"
NET_MAGIC = b"NN1\n"


def _fmt(value) -> str:
    """Render one CSV cell; floats use repr for exact round-tripping."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path):
    """Header plus rows of strings; numeric parsing is the caller's business."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValidationError(f"{path} is empty")
    return rows[0], rows[1:]


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _header_line(payload: dict) -> bytes:
    return json.dumps(payload).encode("utf-8") + b"\n"


def _read_headed(raw: bytes, magic: bytes, kind: str):
    """Split a magic-prefixed blob into its JSON header and payload bytes."""
    if not raw.startswith(magic):
        raise ValidationError(f"not a {kind} file: bad magic")
    body = raw[len(magic):]
    newline = body.find(b"\n")
    if newline < 0:
        raise ValidationError(f"truncated {kind} header")
    header = json.loads(body[:newline].decode("utf-8"))
    return header, body[newline + 1:]


def _matrix_bytes(M: np.ndarray) -> bytes:
    return np.asarray(M, dtype="<f8").tobytes(order="F")


def _matrix_from(payload: bytes, rows: int, cols: int, kind: str) -> np.ndarray:
    expected = rows * cols * 8
    if len(payload) != expected:
        raise ValidationError(
            f"{kind} payload holds {len(payload)} bytes, expected {expected}"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    # C-contiguous result: matmul summation order then matches freshly
    # built arrays, keeping loaded models bit-identical in use
    return np.ascontiguousarray(flat.reshape((rows, cols), order="F"))


# ---------------------------------------------------------------------------
# snapshots


def snapshots_bytes(snaps: SnapshotMatrix) -> bytes:
    labels = [[float(t)] + [float(v) for v in mu]
              for t, mu in zip(snaps.times, snaps.mus)]
    header = {
        "N_h": snaps.n_dofs,
        "N_s": snaps.n_snapshots,
        "m": snaps.n_params,
        "origin": snaps.origin,
        "column_labels": labels,
    }
    return SNAP_MAGIC + _header_line(header) + _matrix_bytes(snaps.data)


def snapshots_from_bytes(raw: bytes) -> SnapshotMatrix:
    header, payload = _read_headed(raw, SNAP_MAGIC, "snapshot")
    n_h, n_s, m = int(header["N_h"]), int(header["N_s"]), int(header["m"])
    labels = header["column_labels"]
    if len(labels) != n_s:
        raise ValidationError(f"header lists {len(labels)} labels for {n_s} columns")
    times = np.array([row[0] for row in labels], dtype=float)
    mus = np.array([row[1:] for row in labels], dtype=float).reshape(n_s, m)
    data = _matrix_from(payload, n_h, n_s, "snapshot")
    return SnapshotMatrix(data=data, times=times, mus=mus,
                          origin=str(header.get("origin", "ingested")))


def save_snapshots(path, snaps: SnapshotMatrix) -> None:
    with open(path, "wb") as fh:
        fh.write(snapshots_bytes(snaps))


def load_snapshots(path) -> SnapshotMatrix:
    with open(path, "rb") as fh:
        return snapshots_from_bytes(fh.read())


def snapshots_to_csv(path, snaps: SnapshotMatrix) -> None:
    """CSV export: one column per snapshot, headed by its (t, mu...) label."""
    header = [json.dumps([float(t)] + [float(v) for v in mu])
              for t, mu in zip(snaps.times, snaps.mus)]
    write_csv(path, header, (row for row in snaps.data))


def trajectory_to_csv(path, states: np.ndarray, times: np.ndarray) -> None:
    """Plain dump of one trajectory: rows are grid nodes, columns are times."""
    header = [_fmt(float(t)) for t in times]
    write_csv(path, header, (row for row in np.asarray(states).T))


# ---------------------------------------------------------------------------
# reduced bases


def basis_bytes(basis: ReducedBasis) -> bytes:
    header = {
        "N_h": basis.n_dofs,
        "n": basis.n,
        "method": basis.method,
        "eps_hat": float(basis.eps_hat),
        "sigmas": [float(s) for s in basis.spectrum.sigmas],
        "discarded": basis.spectrum.discarded_count,
    }
    if basis.gamma is not None:
        header["gamma"] = float(basis.gamma)
    return BASIS_MAGIC + _header_line(header) + _matrix_bytes(basis.V)


def basis_from_bytes(raw: bytes) -> ReducedBasis:
    header, payload = _read_headed(raw, BASIS_MAGIC, "basis")
    n_h, n = int(header["N_h"]), int(header["n"])
    V = _matrix_from(payload, n_h, n, "basis")
    spectrum = Spectrum(
        sigmas=np.array(header["sigmas"], dtype=float),
        discarded_count=int(header.get("discarded", 0)),
    )
    gamma = header.get("gamma")
    return ReducedBasis(
        V=V,
        spectrum=spectrum,
        method=str(header["method"]),
        eps_hat=float(header["eps_hat"]),
        gamma=None if gamma is None else float(gamma),
    )


def save_basis(path, basis: ReducedBasis) -> None:
    with open(path, "wb") as fh:
        fh.write(basis_bytes(basis))


def load_basis(path) -> ReducedBasis:
    with open(path, "rb") as fh:
        return basis_from_bytes(fh.read())


# ---------------------------------------------------------------------------
# networks


def _scaling_payload(scaling: InputScaling | None):
    if scaling is None:
        return None
    return {
        "lows": [float(v) for v in scaling.lows],
        "spans": [float(v) for v in scaling.spans],
        "enabled": bool(scaling.enabled),
    }


def _scaling_from(payload) -> InputScaling | None:
    if payload is None:
        return None
    return InputScaling(
        lows=np.array(payload["lows"], dtype=float),
        spans=np.array(payload["spans"], dtype=float),
        enabled=bool(payload["enabled"]),
    )


def network_bytes(net: Network, seed: int, train_config: TrainConfig | None,
                  scaling: InputScaling | None) -> bytes:
    header = {
        "spec": asdict(net.spec),
        "seed": int(seed),
        "train_config": None if train_config is None else asdict(train_config),
        "input_normalization": _scaling_payload(scaling),
    }
    buf = io.BytesIO()
    buf.write(NET_MAGIC)
    buf.write(_header_line(header))
    for layer in net.layers:
        buf.write(_matrix_bytes(layer.W))
        buf.write(np.asarray(layer.b, dtype="<f8").tobytes())
        if layer.alpha is not None:
            buf.write(np.asarray(layer.alpha, dtype="<f8").tobytes())
    return buf.getvalue()


def network_from_bytes(raw: bytes):
    """Returns (net, seed, train_config, input_scaling)."""
    header, payload = _read_headed(raw, NET_MAGIC, "network")
    spec = NetworkSpec(**header["spec"])
    cfg = header["train_config"]
    train_config = None if cfg is None else TrainConfig(**cfg)
    scaling = _scaling_from(header["input_normalization"])

    dims = spec.layer_dims()
    layers = []
    offset = 0

    def take(count):
        nonlocal offset
        end = offset + count * 8
        if end > len(payload):
            raise ValidationError("network payload shorter than the spec implies")
        block = np.frombuffer(payload[offset:end], dtype="<f8").astype(float)
        offset = end
        return block

    last = len(dims) - 1
    for i, (fan_in, fan_out) in enumerate(dims):
        # C-contiguous for the same matmul roundoff as a fresh network
        W = np.ascontiguousarray(
            take(fan_in * fan_out).reshape((fan_in, fan_out), order="F")
        )
        b = take(fan_out)
        alpha = take(fan_out) if i < last else None
        layers.append(Layer(W=W, b=b, alpha=alpha))
    if offset != len(payload):
        raise ValidationError("network payload longer than the spec implies")
    return Network(spec=spec, layers=layers), int(header["seed"]), train_config, scaling


def save_network(path, net: Network, seed: int,
                 train_config: TrainConfig | None = None,
                 scaling: InputScaling | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(network_bytes(net, seed, train_config, scaling))


def load_network(path):
    with open(path, "rb") as fh:
        return network_from_bytes(fh.read())


# ---------------------------------------------------------------------------
# report CSVs


def write_spectrum_csv(path, rows) -> None:
    """Rows of (k, sigma_sq, method, gamma-or-None) for decay plots."""
    formatted = [(k, s, method, "" if g is None else _fmt(g))
                 for k, s, method, g in rows]
    write_csv(path, ["k", "sigma_sq", "method", "gamma"], formatted)


def write_history_csv(path, report) -> None:
    rows = []
    for i, (tr, sec) in enumerate(zip(report.train_loss, report.seconds)):
        val = report.val_loss[i] if i < len(report.val_loss) else ""
        rows.append((i + 1, tr, "" if val == "" else val, sec))
    write_csv(path, ["epoch", "train_loss", "val_loss", "seconds"], rows)


def write_compare_csv(path, rows) -> None:
    """One row per method: (method, n, parameter_count, epochs, mean_rel_error)."""
    write_csv(path, ["method", "n", "parameter_count", "epochs", "mean_rel_error"], rows)


def write_curves_csv(path, curves) -> None:
    """curves: mapping method -> per-epoch training loss."""
    rows = []
    for method in curves:
        for epoch, value in enumerate(curves[method], start=1):
            rows.append((method, epoch, value))
    write_csv(path, ["method", "epoch", "train_loss"], rows)


def write_eval_csv(path, report) -> None:
    m = report.inputs.shape[1] - 1
    header = ["index", "t"] + [f"mu{i + 1}" for i in range(m)] + ["rel_error"]
    rows = []
    for i, (row, err) in enumerate(zip(report.inputs, report.errors)):
        rows.append((i, *row, err))
    write_csv(path, header, rows)


def write_gamma_csv(path, rows) -> None:
    """Rows of (gamma, n, mean_rel_error) from a width sweep."""
    write_csv(path, ["gamma", "n", "mean_rel_error"], rows)
