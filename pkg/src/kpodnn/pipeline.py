"""Offline build and online query of the reduced-order surrogate.

The offline stage turns a snapshot source into a persisted model: reduced
basis, trained coefficient regressor, and the input normalization, plus
provenance (snapshot hash, configuration, seeds, timestamps). The online
stage is a pure function V @ net(t, mu) whose cost does not depend on the
snapshot count; a model deliberately holds no snapshot data.
"""

import datetime
import hashlib
import json
import warnings
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, config_payload, grid_and_stride, parameter_box
from .errors import DimensionMismatch, ValidationError, ZeroNormSnapshot
from .network import (
    Network,
    TrainConfig,
    TrainReport,
    architecture_for,
    forward,
    init_glorot,
    train,
)
from .reduction import KernelConfig, ReducedBasis, kpod_basis, pod_basis
from .sampling import (
    InputScaling,
    SnapshotMatrix,
    assemble_snapshots,
    build_io_pairs,
    latin_hypercube,
)
from .seeds import fan_seed
from .storage import (
    basis_bytes,
    basis_from_bytes,
    network_bytes,
    network_from_bytes,
    snapshots_bytes,
    write_compare_csv,
    write_curves_csv,
    write_gamma_csv,
)
from .wave import WaveParams, solve_wave


@dataclass
class RomModel:
    """Everything the online stage needs: basis, regressor, input scaling."""

    basis: ReducedBasis
    net: Network
    scaling: InputScaling
    provenance: dict

    def __post_init__(self):
        if self.net.spec.output_dim != self.basis.n:
            raise DimensionMismatch(
                f"network emits {self.net.spec.output_dim} coefficients "
                f"but the basis holds {self.basis.n} modes"
            )
        if self.scaling.lows.shape != (self.net.spec.input_dim,):
            raise DimensionMismatch(
                f"scaling covers {self.scaling.lows.shape[0]} input columns, "
                f"network expects {self.net.spec.input_dim}"
            )

    @property
    def n_params(self) -> int:
        return self.net.spec.input_dim - 1


@dataclass
class EvalReport:
    """Per-snapshot relative errors against a test set, plus the aggregate."""

    errors: np.ndarray
    inputs: np.ndarray          # raw (t, mu) rows for the scored snapshots
    mean_rel_error: float
    excluded_count: int
    n: int
    method: str
    train_seconds: float | None
    parameter_count: int | None


def build_building_set(config: PipelineConfig) -> SnapshotMatrix:
    """Latin-hypercube parameter samples, one solve each, assembled columnwise."""
    box = parameter_box(config)
    count = config.sampling.samples_per_axis ** box.dim
    samples = latin_hypercube(box, count, seed=fan_seed(config.run.seed, "lhs"))
    grid, stride = grid_and_stride(config)
    c = config.fom.wave_speed
    trajectories = [
        solve_wave(WaveParams(a0=s[0], x0=s[1], sigma=s[2], c=c), grid)
        for s in samples
    ]
    return assemble_snapshots(trajectories, stride=stride)


def build_test_set(config: PipelineConfig) -> SnapshotMatrix:
    """Solve the configured test triples on the same space/time grid."""
    grid, stride = grid_and_stride(config)
    c = config.fom.wave_speed
    trajectories = [
        solve_wave(WaveParams(a0=pt[0], x0=pt[1], sigma=pt[2], c=c), grid)
        for pt in config.sampling.test_points
    ]
    return assemble_snapshots(trajectories, stride=stride)


def make_basis(snaps: SnapshotMatrix, config: PipelineConfig,
               method: str | None = None, gamma: float | None = None) -> ReducedBasis:
    chosen = (method or config.reduction.method).lower()
    eps_hat = config.reduction.eps_hat
    if chosen == "kpod":
        g = config.reduction.gamma if gamma is None else gamma
        return kpod_basis(snaps, KernelConfig(gamma=g), eps_hat=eps_hat)
    if chosen == "pod":
        return pod_basis(snaps, eps_hat=eps_hat)
    raise ValidationError(f"unknown reduction method '{chosen}'")


def train_config_for(config: PipelineConfig, seed: int) -> TrainConfig:
    nn = config.nn
    return TrainConfig(
        epochs=nn.epochs, batch_size=nn.batch_size, lr=nn.lr,
        beta1=nn.beta1, beta2=nn.beta2, amsgrad=nn.amsgrad,
        theta=nn.theta, seed=seed, kfolds=nn.kfolds,
        decay_every=nn.decay_every, decay_factor=nn.decay_factor,
    )


def snapshot_hash(snaps: SnapshotMatrix) -> str:
    return hashlib.sha256(snapshots_bytes(snaps)).hexdigest()


def offline_from_snapshots(config: PipelineConfig, snaps: SnapshotMatrix,
                           method: str | None = None, gamma: float | None = None,
                           source_hash: str | None = None):
    """Basis, io pairs, trained network; returns (RomModel, TrainReport)."""
    root = config.run.seed
    basis = make_basis(snaps, config, method=method, gamma=gamma)
    dataset = build_io_pairs(snaps, basis, scale_inputs=config.nn.scale_inputs)
    spec = architecture_for(snaps.n_params, basis.n, config.nn.depth_base)
    init_seed = fan_seed(root, "init")
    train_seed = fan_seed(root, "train")
    net = init_glorot(spec, seed=init_seed)
    tcfg = train_config_for(config, train_seed)
    report = train(net, dataset.inputs, dataset.outputs, tcfg)
    provenance = {
        "snapshot_sha256": source_hash or snapshot_hash(snaps),
        "snapshot_origin": snaps.origin,
        "config": config_payload(config),
        "method": basis.method,
        "gamma": basis.gamma,
        "n": basis.n,
        "seeds": {"root": root, "lhs": fan_seed(root, "lhs"),
                  "init": init_seed, "train": train_seed},
        "built_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "train_seconds": report.total_seconds,
        "parameter_count": report.parameter_count,
        "epochs": tcfg.epochs,
    }
    return RomModel(basis=basis, net=net, scaling=dataset.scaling,
                    provenance=provenance), report


def offline(config: PipelineConfig):
    """Full offline stage from configuration: generate snapshots, build, train."""
    snaps = build_building_set(config)
    return offline_from_snapshots(config, snaps)


def online(model: RomModel, t: float, mu) -> np.ndarray:
    """Evaluate the surrogate at one (t, mu) query; returns a full-order vector.

    Queries outside the range the normalization was fitted on warn but still
    evaluate (the regressor extrapolates there).
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    expected = model.net.spec.input_dim - 1
    if mu.shape != (expected,):
        raise DimensionMismatch(
            f"expected {expected} parameter values, got shape {mu.shape}"
        )
    row = np.concatenate(([float(t)], mu))
    if not model.scaling.covers(row):
        warnings.warn(
            f"query (t={t}, mu={mu.tolist()}) lies outside the training range",
            RuntimeWarning, stacklevel=2,
        )
    coeffs = forward(model.net, model.scaling.apply(row[None, :]))
    return model.basis.V @ coeffs[0]


def _reconstruct_batch(model: RomModel, raw_rows: np.ndarray) -> np.ndarray:
    coeffs = forward(model.net, model.scaling.apply(raw_rows))
    return model.basis.V @ coeffs.T


def evaluate(model: RomModel, test_snaps: SnapshotMatrix) -> EvalReport:
    """Relative error per test snapshot; zero-norm columns are excluded and counted."""
    if test_snaps.n_dofs != model.basis.n_dofs:
        raise DimensionMismatch(
            f"test snapshots have {test_snaps.n_dofs} DOFs, "
            f"basis has {model.basis.n_dofs}"
        )
    if test_snaps.n_params != model.n_params:
        raise DimensionMismatch(
            f"test snapshots carry {test_snaps.n_params} parameters, "
            f"model expects {model.n_params}"
        )
    raw = test_snaps.input_rows()
    recon = _reconstruct_batch(model, raw)
    norms = np.linalg.norm(test_snaps.data, axis=0)
    kept = norms > 0.0
    if not kept.any():
        raise ZeroNormSnapshot("all test snapshots have zero norm")
    residuals = np.linalg.norm(test_snaps.data[:, kept] - recon[:, kept], axis=0)
    errors = residuals / norms[kept]
    prov = model.provenance
    return EvalReport(
        errors=errors,
        inputs=raw[kept],
        mean_rel_error=float(errors.mean()),
        excluded_count=int((~kept).sum()),
        n=model.basis.n,
        method=model.basis.method,
        train_seconds=prov.get("train_seconds"),
        parameter_count=prov.get("parameter_count"),
    )


def compare(config: PipelineConfig, outdir=None) -> dict:
    """Build both bases from one snapshot set, train both regressors, evaluate both.

    Writes compare.csv, curves.csv, and a timing sidecar when ``outdir`` is
    given. Wall-clock times stay out of the CSVs so that repeated runs with
    one seed produce byte-identical CSV files; timings land in
    compare_timings.json instead.
    """
    building = build_building_set(config)
    test = build_test_set(config)
    source = snapshot_hash(building)
    results = {}
    for method in ("kpod", "pod"):
        model, report = offline_from_snapshots(config, building, method=method,
                                               source_hash=source)
        results[method] = {
            "model": model,
            "report": report,
            "eval": evaluate(model, test),
        }
    if outdir is not None:
        outdir = _ensure_dir(outdir)
        rows = []
        curves = {}
        timings = {}
        for method in ("kpod", "pod"):
            ev = results[method]["eval"]
            report = results[method]["report"]
            rows.append((method, ev.n, ev.parameter_count, config.nn.epochs,
                         ev.mean_rel_error))
            curves[method] = report.train_loss
            timings[method] = {
                "train_seconds": report.total_seconds,
                "seconds_per_epoch": report.total_seconds / config.nn.epochs,
            }
        write_compare_csv(outdir / "compare.csv", rows)
        write_curves_csv(outdir / "curves.csv", curves)
        with open(outdir / "compare_timings.json", "w", encoding="utf-8") as fh:
            json.dump(timings, fh, indent=2)
            fh.write("\n")
    return results


def gamma_sweep(config: PipelineConfig, gammas, outdir=None) -> list:
    """Full offline build and evaluation per kernel width; rows of (gamma, n, error)."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValidationError("gamma sweep needs at least one value")
    building = build_building_set(config)
    test = build_test_set(config)
    source = snapshot_hash(building)
    rows = []
    for g in gammas:
        model, _ = offline_from_snapshots(config, building, method="kpod",
                                          gamma=g, source_hash=source)
        ev = evaluate(model, test)
        rows.append((g, model.basis.n, ev.mean_rel_error))
    if outdir is not None:
        outdir = _ensure_dir(outdir)
        write_gamma_csv(outdir / "gamma_sweep.csv", rows)
    return rows


def _ensure_dir(outdir) -> Path:
    path = Path(outdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# model persistence: a zip container holding basis, network, and provenance


def _train_config_from_provenance(provenance: dict) -> TrainConfig | None:
    try:
        nn = provenance["config"]["nn"]
        seed = provenance["seeds"]["train"]
    except (KeyError, TypeError):
        return None
    return TrainConfig(
        epochs=nn["epochs"], batch_size=nn["batch_size"], lr=nn["lr"],
        beta1=nn["beta1"], beta2=nn["beta2"], amsgrad=nn["amsgrad"],
        theta=nn["theta"], seed=seed, kfolds=nn["kfolds"],
        decay_every=nn.get("decay_every", 0),
        decay_factor=nn.get("decay_factor", 1.0),
    )


def save_rom(path, model: RomModel) -> None:
    seeds = model.provenance.get("seeds", {})
    net_blob = network_bytes(
        model.net,
        seed=int(seeds.get("init", 0)),
        train_config=_train_config_from_provenance(model.provenance),
        scaling=model.scaling,
    )
    entries = (
        ("basis.rb1", basis_bytes(model.basis)),
        ("network.nn1", net_blob),
        ("meta.json", json.dumps(model.provenance, indent=2).encode("utf-8")),
    )
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, blob in entries:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            zf.writestr(info, blob)


def load_rom(path) -> RomModel:
    with zipfile.ZipFile(path, "r") as zf:
        basis = basis_from_bytes(zf.read("basis.rb1"))
        net, _, _, scaling = network_from_bytes(zf.read("network.nn1"))
        provenance = json.loads(zf.read("meta.json").decode("utf-8"))
    if scaling is None:
        scaling = InputScaling.identity(net.spec.input_dim)
    return RomModel(basis=basis, net=net, scaling=scaling, provenance=provenance)
