"""Command-line front end: convert / evaluate / sweep / info.

Every run writes a JSON run manifest recording the subcommand, the fully
resolved parameters, the seed, SHA-256 hashes of the input files, and the
output paths. Re-running with ``--config <run manifest>`` reproduces the
outputs byte for byte.

Exit codes: 0 success, 1 usage error, 2 data error, 3 target not reached.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import conversion, energy, engine, idx, weights_io
from .errors import SweepFailureError, TdsnnError
from .network import ann_forward
from .neurons import IdealIFParams, TimeDomainParams, VoltageDomainParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TARGET = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_run_manifest(path, subcommand: str, args: argparse.Namespace,
                        inputs: list, outputs: list) -> None:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "config", "run_manifest")}
    doc = {
        "subcommand": subcommand,
        "params": params,
        "seed": getattr(args, "seed", None),
        "input_hashes": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_bundle(args):
    return weights_io.load(args.manifest, args.blob)


def _load_images(images_path, labels_path, limit: Optional[int]):
    x, y = idx.load_dataset(images_path, labels_path, limit=limit)
    return x.reshape(len(x), -1), y


def _neuron_model(args):
    if args.model == "ideal":
        return IdealIFParams()
    if args.model == "voltage":
        return VoltageDomainParams(
            threshold_voltage=args.threshold_voltage,
            v_dd=args.v_dd,
            lambda_clm=getattr(args, "lambda_clm"),
            gain=args.gain,
            leak_rate=args.leak,
        )
    return TimeDomainParams(
        f_ref=args.f_ref_ratio * args.f_max,
        f_max=args.f_max,
        k_ico=1.0,
        f_min=0.0,
    )


def _sim_config(args) -> engine.SimConfig:
    encoding = (engine.InputEncoding.POISSON_RATE if args.encoding == "poisson"
                else engine.InputEncoding.CONSTANT_CURRENT)
    decision = (engine.DecisionRule.POTENTIAL_ARGMAX if args.decision == "potential"
                else engine.DecisionRule.SPIKE_COUNT_ARGMAX)
    if args.model == "time":
        cfg = engine.make_time_domain_config(
            args.f_max,
            f_ref_ratio=args.f_ref_ratio,
            steps_per_period=args.steps_per_period,
            max_steps=args.steps,
            input_encoding=encoding,
            decision_rule=decision,
            seed=args.seed,
        )
        return cfg
    return engine.SimConfig(
        dt=args.dt,
        max_steps=args.steps,
        neuron_model=_neuron_model(args),
        input_encoding=encoding,
        decision_rule=decision,
        seed=args.seed,
    )


def cmd_convert(args) -> int:
    images, _ = _load_images(args.images, args.labels, args.limit)
    spec, _ = _load_bundle(args)
    stats = conversion.collect_stats(spec, images, percentile=args.percentile)
    normalized = conversion.normalize(spec, stats)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_manifest = out_dir / "manifest.json"
    out_blob = out_dir / "weights.bin"
    weights_io.save(out_manifest, out_blob, normalized, stats)
    run_path = args.run_manifest or str(out_manifest) + ".run.json"
    _write_run_manifest(
        run_path, "convert", args,
        inputs=[args.manifest, args.blob, args.images, args.labels],
        outputs=[out_manifest, out_blob],
    )
    print(f"wrote {out_manifest} and {out_blob}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    spec, _ = _load_bundle(args)
    images, labels = _load_images(args.images, args.labels, args.limit)
    config = _sim_config(args)
    result = engine.evaluate(spec, (images, labels), config)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "time_s", "error_rate"])
        for k in range(len(result.error_vs_step)):
            w.writerow([k + 1, repr(float(result.times[k])),
                        repr(float(result.error_vs_step[k]))])
    run_path = args.run_manifest or args.out + ".run.json"
    _write_run_manifest(
        run_path, "evaluate", args,
        inputs=[args.manifest, args.blob, args.images, args.labels],
        outputs=[args.out],
    )
    print(f"final error rate: {result.error_rate:.4f} ({args.model}, "
          f"{config.max_steps} steps); wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, _ = _load_bundle(args)
    images, labels = _load_images(args.images, args.labels, args.limit)
    rates = [float(r) for r in args.rates.split(",")]

    if args.target_error is None:
        probe = engine.make_time_domain_config(
            max(rates), f_ref_ratio=args.f_ref_ratio,
            steps_per_period=args.steps_per_period,
            cycle_budget=args.cycle_budget, seed=args.seed)
        final = engine.evaluate(spec, (images, labels), probe).error_rate
        target = final + 0.02
    else:
        target = args.target_error

    points = engine.latency_sweep(
        spec, (images, labels), rates, target,
        f_ref_ratio=args.f_ref_ratio,
        steps_per_period=args.steps_per_period,
        cycle_budget=args.cycle_budget,
        seed=args.seed,
    )
    with open(args.latency_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frequency_hz", "dt_s", "steps_to_target",
                    "time_to_target_s", "final_error", "spikes_per_neuron",
                    "reached_target"])
        for p in points:
            w.writerow([
                repr(p.f_max), repr(p.dt),
                p.steps_to_target if p.reached else "",
                repr(p.time_to_target) if p.reached else "",
                repr(p.final_error), repr(p.spikes_per_neuron),
                "true" if p.reached else "false",
            ])

    params = energy.EnergyModelParams(
        p_static=args.p_static,
        e_edge=args.e_edge,
        e_spike=args.e_spike,
        ref_amortization=args.ref_amortization,
        latency_floor=args.latency_floor,
    )
    report = energy.energy_sweep(points, params)
    energy.write_energy_csv(args.energy_csv, report, spec.neuron_count)

    run_path = args.run_manifest or args.latency_csv + ".run.json"
    _write_run_manifest(
        run_path, "sweep", args,
        inputs=[args.manifest, args.blob, args.images, args.labels],
        outputs=[args.latency_csv, args.energy_csv],
    )
    if not report.target_reached:
        print(f"target error {target:.4f} not reached at any rate; "
              f"wrote {args.latency_csv}, {args.energy_csv}")
        return EXIT_TARGET
    row = report.argmin_row
    print(f"target error {target:.4f}; argmin {row.frequency_hz/1e6:.0f} MHz "
          f"({row.energy_per_neuron_j:.3e} J per neuron); "
          f"wrote {args.latency_csv}, {args.energy_csv}")
    return EXIT_OK


def cmd_info(args) -> int:
    spec, stats = _load_bundle(args)
    print(f"input shape: {spec.input_shape}, classes: {spec.class_count}, "
          f"neurons: {spec.neuron_count}")
    for i, layer in enumerate(spec.layers):
        if layer.has_weights:
            print(f"  layer {i}: {layer.kind.value} {layer.weights.shape} "
                  f"threshold={layer.threshold} {layer.activation.value}")
        else:
            print(f"  layer {i}: {layer.kind.value} pool={layer.pool}")
    if stats is not None:
        print(f"activation stats: {len(stats.values)} layers, "
              f"percentile={stats.percentile}")
    else:
        print("activation stats: none")
    return EXIT_OK


def _add_bundle_args(p):
    p.add_argument("--manifest", required=True, help="bundle manifest path")
    p.add_argument("--blob", required=True, help="bundle blob path")


def _add_dataset_args(p):
    p.add_argument("--images", required=True, help="IDX image file")
    p.add_argument("--labels", required=True, help="IDX label file")
    p.add_argument("--limit", type=int, default=None,
                   help="use only the first N images")


def _add_model_args(p):
    p.add_argument("--model", choices=["ideal", "voltage", "time"],
                   default="ideal")
    p.add_argument("--steps", type=int, default=None,
                   help="simulation steps (default 400, or derived for time)")
    p.add_argument("--dt", type=float, default=1.0,
                   help="step length in seconds (ideal/voltage)")
    p.add_argument("--threshold-voltage", type=float, default=1.0)
    p.add_argument("--v-dd", type=float, default=2.0)
    p.add_argument("--lambda", dest="lambda_clm", type=float, default=0.0,
                   help="channel-length-modulation coefficient (1/V)")
    p.add_argument("--gain", type=float, default=1.0)
    p.add_argument("--leak", type=float, default=0.0)
    p.add_argument("--f-max", type=float, default=100e6,
                   help="time-domain ICO ceiling in Hz")
    p.add_argument("--f-ref-ratio", type=float, default=0.5)
    p.add_argument("--steps-per-period", type=int, default=10)
    p.add_argument("--encoding", choices=["constant", "poisson"],
                   default="constant")
    p.add_argument("--decision", choices=["spike-count", "potential"],
                   default="spike-count")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="tdsnn", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", default=None,
                        help="JSON file (or a previous run manifest) "
                             "supplying defaults for any flag")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("convert", help="calibrate and normalize a bundle")
    _add_bundle_args(p)
    _add_dataset_args(p)
    p.add_argument("--percentile", type=float, default=0.999)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--run-manifest", default=None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("evaluate", help="error rate vs step on a dataset")
    _add_bundle_args(p)
    _add_dataset_args(p)
    _add_model_args(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--run-manifest", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="latency and energy across ICO rates")
    _add_bundle_args(p)
    _add_dataset_args(p)
    p.add_argument("--rates", default="3e6,6e6,15e6,30e6,60e6,100e6",
                   help="comma-separated f_max values in Hz")
    p.add_argument("--target-error", type=float, default=None,
                   help="absolute target (default: final error + 0.02)")
    p.add_argument("--cycle-budget", type=float, default=150.0)
    p.add_argument("--f-ref-ratio", type=float, default=0.5)
    p.add_argument("--steps-per-period", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-static", type=float, default=0.0)
    p.add_argument("--e-edge", type=float, default=1.15e-15)
    p.add_argument("--e-spike", type=float, default=0.0)
    p.add_argument("--ref-amortization", type=float, default=1.0)
    p.add_argument("--latency-floor", type=float, default=0.0)
    p.add_argument("--latency-csv", required=True)
    p.add_argument("--energy-csv", required=True)
    p.add_argument("--run-manifest", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("info", help="describe a bundle")
    _add_bundle_args(p)
    p.set_defaults(func=cmd_info)
    return parser


def _apply_config(parser: _Parser, argv: list) -> list:
    """Fold --config file values in as argument defaults."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        parser.error("--config needs a path")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config {path}: {exc}")
    params = doc.get("params", doc)
    extra = []
    for key, value in sorted(params.items()):
        if value is None or key in ("subcommand", "func"):
            continue
        flag = "--" + key.replace("_", "-")
        if flag == "--lambda-clm":
            flag = "--lambda"
        if flag not in argv:
            extra.extend([flag, str(value)])
    return argv[:i] + argv[i + 2:] + extra


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits; surface the code instead
        return int(exc.code or 0)
    if getattr(args, "steps", 0) is None and getattr(args, "model", "") != "time":
        args.steps = 400
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_DATA
    except SweepFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TARGET
    except TdsnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
