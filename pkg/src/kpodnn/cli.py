"""Command-line interface for building and querying the reduced-order surrogate.

Subcommands mirror the pipeline stages: generate wave snapshots, reduce them
to a basis, train the coefficient regressor, evaluate against a test set,
and run comparison or kernel-width studies. Exit codes: 0 success, 2 bad
inputs or configuration, 3 numerical failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import PipelineConfig, default_config, load_config
from .errors import NumericalError, ValidationError
from .network import architecture_for, cross_validate, init_glorot, train
from .pipeline import (
    RomModel,
    build_building_set,
    compare,
    evaluate,
    gamma_sweep,
    load_rom,
    make_basis,
    save_rom,
    snapshot_hash,
    train_config_for,
)
from .reduction import spectrum_table
from .sampling import build_io_pairs, kfold_split
from .seeds import fan_seed
from .storage import (
    load_basis,
    load_snapshots,
    save_basis,
    save_network,
    save_snapshots,
    snapshots_to_csv,
    trajectory_to_csv,
    write_eval_csv,
    write_history_csv,
    write_spectrum_csv,
)


def _apply_overrides(config: PipelineConfig, args) -> PipelineConfig:
    """Fold recognized CLI flags into the configuration, flags winning."""
    if getattr(args, "seed", None) is not None:
        config = replace(config, run=replace(config.run, seed=args.seed))
    red = {}
    for name in ("method", "gamma", "eps_hat"):
        value = getattr(args, name, None)
        if value is not None and not isinstance(value, list):
            red[name] = value
    if red:
        config = replace(config, reduction=replace(config.reduction, **red))
    nn = {}
    for flag, field in (("epochs", "epochs"), ("lr", "lr"),
                        ("batch_size", "batch_size"), ("kfold", "kfolds")):
        value = getattr(args, flag, None)
        if value is not None and not (flag == "kfold" and value == 0):
            nn[field] = value
    if getattr(args, "no_input_scaling", False):
        nn["scale_inputs"] = False
    if nn:
        config = replace(config, nn=replace(config.nn, **nn))
    return config


def _load_config(args) -> PipelineConfig:
    config = load_config(args.config) if args.config else default_config()
    return _apply_overrides(config, args)


def cmd_fom_generate(args, config: PipelineConfig) -> int:
    snaps = build_building_set(config)
    if args.format == "csv":
        snapshots_to_csv(args.output, snaps)
    else:
        save_snapshots(args.output, snaps)
    if args.csv:
        k = config.sampling.stored_times
        trajectory_to_csv(args.csv, snaps.data[:, :k].T, snaps.times[:k])
    print(f"wrote {snaps.n_snapshots} snapshots of {snaps.n_dofs} DOFs "
          f"to {args.output}")
    return 0


def cmd_reduce(args, config: PipelineConfig) -> int:
    snaps = load_snapshots(args.snapshots)
    basis = make_basis(snaps, config)
    save_basis(args.output, basis)
    spectrum_csv = args.spectrum_csv or _sibling(args.output, "_spectrum.csv")
    rows = [(k + 1, float(s * s), basis.method, basis.gamma)
            for k, s in enumerate(basis.spectrum.sigmas)]
    write_spectrum_csv(spectrum_csv, rows)
    print(f"{basis.method} basis: n={basis.n} of {snaps.n_snapshots} snapshots "
          f"(discarded {basis.spectrum.discarded_count} nonpositive eigenvalues)")
    return 0


def cmd_train(args, config: PipelineConfig) -> int:
    snaps = load_snapshots(args.snapshots)
    basis = load_basis(args.basis)
    dataset = build_io_pairs(snaps, basis, scale_inputs=config.nn.scale_inputs)
    spec = architecture_for(snaps.n_params, basis.n, config.nn.depth_base)
    root = config.run.seed
    tcfg = train_config_for(config, fan_seed(root, "train"))

    if args.kfold:
        plan = kfold_split(dataset.n_rows, K=config.nn.kfolds,
                           seed=fan_seed(root, "folds"))
        cv = cross_validate(dataset.inputs, dataset.outputs, [spec], tcfg,
                            plan.assignment)
        print(f"cross-validated E_gen = {cv.e_gen[0]!r} over {plan.K} folds")

    init_seed = fan_seed(root, "init")
    net = init_glorot(spec, seed=init_seed)
    report = train(net, dataset.inputs, dataset.outputs, tcfg)
    save_network(args.output, net, seed=init_seed, train_config=tcfg,
                 scaling=dataset.scaling)
    write_history_csv(args.history_csv or _sibling(args.output, "_history.csv"),
                      report)
    if args.rom:
        provenance = {
            "snapshot_sha256": snapshot_hash(snaps),
            "snapshot_origin": snaps.origin,
            "method": basis.method,
            "gamma": basis.gamma,
            "n": basis.n,
            "seeds": {"root": root, "init": init_seed, "train": tcfg.seed},
            "train_seconds": report.total_seconds,
            "parameter_count": report.parameter_count,
            "epochs": tcfg.epochs,
        }
        save_rom(args.rom, RomModel(basis=basis, net=net,
                                    scaling=dataset.scaling,
                                    provenance=provenance))
    print(f"trained {report.parameter_count} parameters for {tcfg.epochs} epochs; "
          f"final loss {report.train_loss[-1]!r}")
    return 0


def cmd_evaluate(args, config: PipelineConfig) -> int:
    model = load_rom(args.model)
    test = load_snapshots(args.snapshots)
    report = evaluate(model, test)
    write_eval_csv(args.csv, report)
    print(f"{report.method} n={report.n}: mean relative error "
          f"{report.mean_rel_error!r} over {report.errors.size} snapshots "
          f"({report.excluded_count} zero-norm excluded)")
    return 0


def cmd_compare(args, config: PipelineConfig) -> int:
    results = compare(config, outdir=args.outdir)
    for method in ("kpod", "pod"):
        ev = results[method]["eval"]
        print(f"{method}: n={ev.n} params={ev.parameter_count} "
              f"mean_rel_error={ev.mean_rel_error!r}")
    return 0


def cmd_gamma_sweep(args, config: PipelineConfig) -> int:
    gammas = args.gamma or [1e-10, 1e-5, 1.0]
    rows = gamma_sweep(config, gammas, outdir=args.outdir)
    for g, n, err in rows:
        print(f"gamma={g!r}: n={n} mean_rel_error={err!r}")
    return 0


def cmd_spectrum(args, config: PipelineConfig) -> int:
    snaps = load_snapshots(args.snapshots)
    gammas = args.gamma
    if args.method in ("kpod", "both") and not gammas:
        gammas = [config.reduction.gamma]
    rows = spectrum_table(
        snaps,
        include_pod=args.method in ("pod", "both"),
        gammas=gammas if args.method in ("kpod", "both") else (),
    )
    write_spectrum_csv(args.output, rows)
    print(f"wrote {len(rows)} spectrum rows to {args.output}")
    return 0


def _sibling(path, suffix: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + suffix))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kpodnn",
        description="Reduced-order modeling with kernel bases and a neural regressor",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML configuration file")
    common.add_argument("--seed", type=int, help="root seed for every random stage")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fom-generate", parents=[common],
                       help="solve the wave model over a sampled parameter box")
    p.add_argument("output", help="snapshot file to write")
    p.add_argument("--format", choices=("snap1", "csv"), default="snap1")
    p.add_argument("--csv", help="also dump the first trajectory as nodes-by-times CSV")
    p.set_defaults(func=cmd_fom_generate)

    p = sub.add_parser("reduce", parents=[common],
                       help="build a reduced basis from snapshots")
    p.add_argument("snapshots")
    p.add_argument("output", help="basis file to write")
    p.add_argument("--method", choices=("pod", "kpod"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--eps-hat", dest="eps_hat", type=float)
    p.add_argument("--spectrum-csv", dest="spectrum_csv")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("train", parents=[common],
                       help="fit the coefficient regressor for a basis")
    p.add_argument("snapshots")
    p.add_argument("basis")
    p.add_argument("output", help="network file to write")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--kfold", type=int, default=0,
                   help="also report K-fold cross-validated E_gen")
    p.add_argument("--history-csv", dest="history_csv")
    p.add_argument("--rom", help="also persist the complete model container")
    p.add_argument("--no-input-scaling", dest="no_input_scaling",
                   action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="score a model against test snapshots")
    p.add_argument("model", help="model container written by train --rom")
    p.add_argument("snapshots")
    p.add_argument("--csv", default="eval.csv", help="per-snapshot error CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", parents=[common],
                       help="kernel vs linear basis, end to end")
    p.add_argument("outdir")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gamma-sweep", parents=[common],
                       help="rebuild and evaluate across kernel widths")
    p.add_argument("outdir")
    p.add_argument("--gamma", type=float, action="append",
                   help="repeatable; default 1e-10, 1e-5, 1")
    p.set_defaults(func=cmd_gamma_sweep)

    p = sub.add_parser("spectrum", parents=[common],
                       help="export eigenvalue decay without building a basis")
    p.add_argument("snapshots")
    p.add_argument("output", help="CSV file to write")
    p.add_argument("--method", choices=("pod", "kpod", "both"), default="both")
    p.add_argument("--gamma", type=float, action="append")
    p.set_defaults(func=cmd_spectrum)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        return args.func(args, config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
