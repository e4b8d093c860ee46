import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import soundfile as sf
import tomli_w
from tabulate import tabulate

from vsl.absorption.app.config import DEFAULT_PROFILE, RunConfig, load_toml
from vsl.absorption.baselines import ClassicalMethod, classify_schroeder, estimate_alpha_classical
from vsl.absorption.dataset import Dataset, dataset_statistics, dataset_summary, generate_splits
from vsl.absorption.dsp import (SOURCE_RATE, TARGET_RATE, VECTOR_LENGTH, fit_length, normalize_peak, preprocess,
                                schroeder_curves)
from vsl.absorption.eval import ExperimentFamily, ExperimentRunner, resolve_methods
from vsl.absorption.model import (AbsorptionError, OCTAVE_BANDS, OctaveBands, RoomGeometry, RoomSpec, Rir,
                                  SampleRateError)
from vsl.absorption.nn import ModelSpec, OutputHead, TrainConfig, Trainer, load_model, predict, save_model
from vsl.absorption.sampler import SamplingStrategy
from vsl.absorption.sim import Simulator, render_rir
from vsl.absorption.utils import fn, make_dirs_for_file, set_file_logging_handler, setup_logger, write_text_synced

LOGGER_NAME = "vsl.absorption"


def read_wave(path) -> Rir:
    data, sample_rate = sf.read(str(path), dtype="float64", always_2d=True)
    if data.shape[1] != 1:
        raise AbsorptionError(f"{path}: expected a mono file, got {data.shape[1]} channels")
    return Rir(data[:, 0], sample_rate)


def write_wave(path, rir: Rir):
    sf.write(str(make_dirs_for_file(path)), rir.samples.astype(np.float32), rir.sample_rate, subtype="FLOAT")


def network_input(rir: Rir, snr_db: float) -> np.ndarray:
    """48 kHz files go through the full preprocessing; 16 kHz files are only cut and normalized."""
    match rir.sample_rate:
        case 48000:
            return preprocess(rir, snr_db, np.random.default_rng(0))
        case 16000:
            return normalize_peak(fit_length(rir, VECTOR_LENGTH)).samples.copy()
    raise SampleRateError(f"expected {SOURCE_RATE} or {TARGET_RATE} Hz input, got {rir.sample_rate} Hz")


def config_comment(run: RunConfig, **extra) -> str:
    return f"config: {run.to_dict() | extra}"


def cmd_simulate(args, run: RunConfig, logger: logging.Logger) -> int:
    doc = load_toml(args.room)
    spec = RoomSpec.from_dict(doc.get("room", doc))
    sim_config = run.sim.replace(diffuse_rain=False) if args.no_diffuse else run.sim
    simulator = Simulator(sim_config, logger)
    echogram = simulator.echogram(spec, run.seed)
    if args.echogram:
        echogram.dump(make_dirs_for_file(args.echogram), config_comment(run))
    rir = render_rir(echogram, sim_config)
    write_wave(args.output, rir)
    write_text_synced(f"{args.output}.toml", tomli_w.dumps({"config": run.to_dict(), "room": spec.to_dict()}))
    logger.info(f"{fn()}: wrote {rir} to {args.output}")
    print(f"{args.output}\t{rir.sample_rate}\t{len(rir)}")
    return 0


def cmd_dataset(args, run: RunConfig, logger: logging.Logger) -> int:
    if args.stats:
        dataset = Dataset.open(args.stats)
        print(f"# {dataset.manifest}")
        print(tabulate(dataset_summary(dataset).reset_index().values.tolist(),
                       headers=["band", "mean", "std", "min", "max"], floatfmt=".4f", tablefmt="psql"))
        df = dataset_statistics(dataset, args.bins)
        print(tabulate(df.values.tolist(), headers=list(df.columns), floatfmt=".2f", tablefmt="psql"))
        return 0
    if args.strategy is None:
        raise AbsorptionError("dataset needs --strategy (or --stats DIR)")
    strategy = SamplingStrategy.named(args.strategy)
    n_train = args.train if args.train is not None else run.dataset["n_train"]
    n_dev = args.dev if args.dev is not None else run.dataset["n_dev"]
    snr_db = args.snr if args.snr is not None else float(run.dataset["snr_db"])
    sim_config = run.sim.replace(diffuse_rain=False) if args.no_diffuse else run.sim
    train, dev = generate_splits(args.out, strategy, n_train, n_dev, run.seed, sim_config, snr_db,
                                 args.raw or bool(run.dataset["keep_raw"]), run.threads, run.to_dict(), logger)
    for manifest in (train, dev):
        print(manifest)
    return 0


def cmd_analyze(args, run: RunConfig, logger: logging.Logger) -> int:
    rir = read_wave(args.rir)
    geometry = RoomGeometry(args.lx, args.ly, args.lz)
    curves = schroeder_curves(rir)
    if args.curves:
        curves.to_csv(make_dirs_for_file(args.curves), config_comment(run, depth_db=args.depth))
    estimate = estimate_alpha_classical(rir, geometry, args.depth, ClassicalMethod.EYRING, curves)
    rows = []
    for b, band in enumerate(estimate.bands):
        rt = float("nan") if band.rt is None else band.rt.rt
        r2 = float("nan") if band.rt is None else band.rt.fit_quality
        rows.append([int(OCTAVE_BANDS.CENTERS[b]), rt, r2, band.alpha_sabine, band.alpha,
                     classify_schroeder(curves[b]).value, band.error or ""])
    print(f"# {config_comment(run, depth_db=args.depth, file=str(args.rir))}")
    print(tabulate(rows, headers=["band_hz", f"rt{int(args.depth)}_s", "r2", "sabine", "eyring", "class", "note"],
                   floatfmt=".4f", tablefmt="psql"))
    return 0


def cmd_train(args, run: RunConfig, logger: logging.Logger) -> int:
    train_set = Dataset.open(args.train)
    dev_set = Dataset.open(args.dev)
    overrides = {k: v for k, v in (("epochs", args.epochs), ("batch_size", args.batch_size),
                                   ("learning_rate", args.lr)) if v is not None}
    config = TrainConfig(run.train.to_dict(), **overrides)
    spec = ModelSpec.preset(args.arch, OutputHead(args.head), train_set.manifest.vector_length)
    trainer = Trainer(spec, config, logger)
    trainer.on_epoch += lambda report: logger.info(f"{fn()}: {report}")
    model = trainer.train(train_set, dev_set)
    save_model(model, args.out)
    curve = args.curve if args.curve else f"{args.out}.curve.csv"
    trainer.curve.to_csv(curve, config_comment(run, train=config.to_dict(), model=spec.to_dict()))
    print(f"{args.out}\tbest_epoch={model.provenance['best_epoch']}\tdev_loss={model.provenance['dev_loss']:.6g}")
    return 0


def cmd_eval(args, run: RunConfig, logger: logging.Logger) -> int:
    config = run.eval
    if args.n_rooms is not None:
        config.n_rooms = args.n_rooms
    if args.model_dir is not None:
        config.model_dir = args.model_dir
    if args.value is not None:
        config.fixed_values = [args.value]
    if args.rt_range is not None:
        config.rt_ranges = {"custom": (args.rt_range[0], args.rt_range[1])}
    methods = resolve_methods(args.methods, config.model_dir, config.depth_db, logger)
    sim_config = run.sim.replace(diffuse_rain=False) if args.no_diffuse else run.sim
    runner = ExperimentRunner(config, sim_config, methods, logger)
    report = runner.run(ExperimentFamily(args.family))
    for path in report.write(args.out):
        logger.info(f"{fn()}: wrote {path}")
    print(report.summary(), end="")
    return 0


def cmd_infer(args, run: RunConfig, logger: logging.Logger) -> int:
    model = load_model(args.model, VECTOR_LENGTH)
    vector = network_input(read_wave(args.rir), args.snr)
    label = predict(model, vector)
    headers = ["band_hz", "alpha"]
    columns = [[int(c) for c in OctaveBands.CENTERS], list(label.alpha_bar)]
    if label.s_bar is not None:
        headers.append("scattering")
        columns.append(list(label.s_bar))
    print(f"# {config_comment(run, model=str(args.model), head=model.head.value)}")
    print(tabulate(list(zip(*columns)), headers=headers, floatfmt=".4f", tablefmt="psql"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vsl-absorption",
        description="Room impulse response simulation and mean absorption estimation.")
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--threads", type=int, default=1, help="worker threads; 1 is bit-reproducible")
    profile = parser.add_mutually_exclusive_group()
    profile.add_argument("--paper", dest="profile", action="store_const", const="paper",
                         help="full-scale settings: 50000 rays, order 50, 500 rooms, 400 epochs")
    profile.add_argument("--fast", dest="profile", action="store_const", const="fast",
                         help="desk-scale settings (default)")
    parser.add_argument("--config", type=Path, help="TOML file with [sim], [train], [eval], [dataset] overrides")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", type=Path, help="also write the log to this file")
    parser.set_defaults(profile=DEFAULT_PROFILE)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a room description into a 48 kHz WAV file")
    p.add_argument("room", type=Path, help="room TOML (geometry, surfaces, source, receiver)")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--echogram", type=Path, help="also dump the arrival table")
    p.add_argument("--no-diffuse", action="store_true", help="image sources only")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("dataset", help="generate train and dev sets, or describe one with --stats")
    p.add_argument("--strategy", choices=["unif", "rb"])
    p.add_argument("--train", type=int, help="number of training rooms")
    p.add_argument("--dev", type=int, help="number of development rooms")
    p.add_argument("--out", type=Path, default=Path("datasets"))
    p.add_argument("--snr", type=float, help="SNR in dB of the added noise")
    p.add_argument("--raw", action="store_true", help="also archive the raw 48 kHz RIRs")
    p.add_argument("--no-diffuse", action="store_true", help="image sources only")
    p.add_argument("--stats", type=Path, help="print statistics of an existing dataset directory")
    p.add_argument("--bins", type=int, default=10)
    p.set_defaults(handler=cmd_dataset)

    p = sub.add_parser("analyze", help="classical RT / Sabine / Eyring analysis of a WAV file")
    p.add_argument("rir", type=Path)
    p.add_argument("--lx", type=float, required=True)
    p.add_argument("--ly", type=float, required=True)
    p.add_argument("--lz", type=float, required=True)
    p.add_argument("--depth", type=float, default=30.0, help="decay depth in dB used for the fit")
    p.add_argument("--curves", type=Path, help="write the Schroeder curves to this CSV")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("train", help="train a regressor on dataset directories")
    p.add_argument("--train", type=Path, required=True)
    p.add_argument("--dev", type=Path, required=True)
    p.add_argument("--arch", choices=["cnn", "mlp"], default="cnn")
    p.add_argument("--head", choices=[h.value for h in OutputHead], default=OutputHead.ALPHA.value)
    p.add_argument("--out", type=Path, required=True, help="model file")
    p.add_argument("--curve", type=Path, help="loss curve CSV (default <out>.curve.csv)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="run an experiment family and write report CSVs")
    p.add_argument("--family", choices=[f.value for f in ExperimentFamily], required=True)
    p.add_argument("--methods", nargs="+", default=["eyring", "sabine"],
                   help="eyring, sabine or model names looked up in --model-dir")
    p.add_argument("--out", type=Path, default=Path("reports"))
    p.add_argument("--n-rooms", type=int)
    p.add_argument("--model-dir", type=str)
    p.add_argument("--value", type=float, help="single constant for the fixed-value families")
    p.add_argument("--rt-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--no-diffuse", action="store_true", help="simulate test rooms with image sources only")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("infer", help="estimate the six-band mean absorption of a WAV file")
    p.add_argument("rir", type=Path)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--snr", type=float, default=float("inf"), help="noise added to 48 kHz input before inference")
    p.set_defaults(handler=cmd_infer)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logger = setup_logger(LOGGER_NAME, getattr(logging, args.log_level))
    if args.log_file:
        set_file_logging_handler(logger, make_dirs_for_file(args.log_file))
    try:
        run = RunConfig(args.profile, args.seed, args.threads, args.config)
        logger.info(f"{fn()}: {args.command} with {run}")
        return args.handler(args, run, logger)
    except (AbsorptionError, OSError) as e:
        logger.error(f"{fn()}: {args.command} failed: {e}")
        return 1
    except Exception as e:
        logger.exception(f"{fn()}: {args.command} failed unexpectedly: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
