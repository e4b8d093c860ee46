import copy
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, Final, List, Optional, Sequence, Tuple, Union

import eventkit as ev
import numpy as np
import pandas as pd
from tabulate import tabulate

from vsl.absorption.dsp import preprocess
from vsl.absorption.eval.methods import ClassicalEstimator, Estimator, LearnedEstimator, resolve_methods
from vsl.absorption.eval.metrics import ErrorRecord, ErrorRecords, absolute_errors, band_breakdown, box_stats
from vsl.absorption.model import AbsorptionError, mean_absorption
from vsl.absorption.sampler import (FIXED_VALUES, RT_RANGES, SNR_LEVELS, SamplingStrategy, TestRoom, TestSetKind,
                                    craft_test_set, sample_room)
from vsl.absorption.sim import SimConfig, Simulator
from vsl.absorption.utils import fn, make_dirs, ordered_map

DYNAMIC_RANGE_DEPTHS: Final = (10.0, 15.0, 20.0, 25.0, 30.0, 60.0)
CSV_FLOAT_FORMAT: Final = "%.9g"


class ExperimentFamily(str, Enum):
    REALISTIC = "realistic"
    CUBE_LIKE = "cube_like"
    FLAT = "flat"
    ELONGATED = "elongated"
    RT_CONSTRAINED = "rt_constrained"
    SNR_SWEEP = "snr_sweep"
    SCATTERING_FIXED = "scattering_fixed"
    ABSORPTION_FIXED = "absorption_fixed"
    SPECULAR_ABLATION = "specular_ablation"
    DYNAMIC_RANGE = "dynamic_range"
    HEADS = "heads"


def eval_default_config() -> dict:
    return {
        "n_rooms": 100,
        "seed": 0,
        "snr_db": 30.0,
        "depth_db": 30.0,
        "snr_levels": list(SNR_LEVELS),
        "fixed_values": list(FIXED_VALUES),
        "depths": list(DYNAMIC_RANGE_DEPTHS),
        "rt_ranges": {k: list(v) for k, v in RT_RANGES.items()},
        "threads": 1,
        "model_dir": "models",
    }


class ExperimentConfig(object):

    def __init__(self, config: Optional[dict] = None, **overrides):
        merged = eval_default_config()
        merged.update(config or {})
        merged.update(overrides)
        unknown = set(merged) - set(eval_default_config())
        if unknown:
            raise AbsorptionError(f"unknown evaluation settings {sorted(unknown)}")
        self.n_rooms = int(merged["n_rooms"])
        self.seed = int(merged["seed"])
        self.snr_db = float(merged["snr_db"])
        self.depth_db = float(merged["depth_db"])
        self.snr_levels = [float(v) for v in merged["snr_levels"]]
        self.fixed_values = [float(v) for v in merged["fixed_values"]]
        self.depths = [float(v) for v in merged["depths"]]
        self.rt_ranges = {k: (float(v[0]), float(v[1])) for k, v in merged["rt_ranges"].items()}
        self.threads = max(1, int(merged["threads"]))
        self.model_dir = str(merged["model_dir"])
        if self.n_rooms < 1:
            raise AbsorptionError(f"n_rooms must be positive, got {self.n_rooms}")

    def to_dict(self) -> dict:
        return {
            "n_rooms": self.n_rooms,
            "seed": self.seed,
            "snr_db": self.snr_db,
            "depth_db": self.depth_db,
            "snr_levels": list(self.snr_levels),
            "fixed_values": list(self.fixed_values),
            "depths": list(self.depths),
            "rt_ranges": {k: list(v) for k, v in self.rt_ranges.items()},
            "threads": self.threads,
            "model_dir": self.model_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(d)

    def __str__(self):
        return (f"ExperimentConfig["
                f"n_rooms={self.n_rooms}, "
                f"seed={self.seed}, "
                f"snr_db={self.snr_db}, "
                f"depth_db={self.depth_db}, "
                f"threads={self.threads}"
                f"]")


class Variant(object):
    """One test set of a family, evaluated at one or more SNR levels and analysis depths."""

    def __init__(self, name: str, kind: Optional[TestSetKind], craft_args: Optional[dict] = None,
                 snr_levels: Sequence[float] = (30.0,), depths: Sequence[float] = (30.0,)):
        self.name = name
        self.kind = kind
        self.craft_args = craft_args or {}
        self.snr_levels = list(snr_levels)
        self.depths = list(depths)

    def label(self, level: int, depth: int) -> str:
        parts = [self.name]
        if len(self.snr_levels) > 1:
            parts.append(f"snr_{self.snr_levels[level]:g}")
        if len(self.depths) > 1:
            parts.append(f"depth_{self.depths[depth]:g}")
        return "/".join(parts)

    def __str__(self):
        return (f"Variant["
                f"name={self.name}, "
                f"kind={None if self.kind is None else self.kind.value}, "
                f"args={self.craft_args}, "
                f"snr_levels={self.snr_levels}, "
                f"depths={self.depths}"
                f"]")


def family_variants(family: ExperimentFamily, config: ExperimentConfig) -> List[Variant]:
    snr, depth = [config.snr_db], [config.depth_db]
    match family:
        case ExperimentFamily.REALISTIC | ExperimentFamily.CUBE_LIKE | ExperimentFamily.FLAT | ExperimentFamily.ELONGATED:
            return [Variant(family.value, TestSetKind(family.value), snr_levels=snr, depths=depth)]
        case ExperimentFamily.SPECULAR_ABLATION:
            return [Variant("realistic", TestSetKind.REALISTIC, snr_levels=snr, depths=depth)]
        case ExperimentFamily.RT_CONSTRAINED:
            return [Variant(name, TestSetKind.RT_CONSTRAINED, {"rt_range": rt}, snr, depth)
                    for name, rt in config.rt_ranges.items()]
        case ExperimentFamily.SNR_SWEEP:
            return [Variant("snr_sweep", TestSetKind.SNR_SWEEP, {"snr_levels": config.snr_levels},
                            config.snr_levels, depth)]
        case ExperimentFamily.SCATTERING_FIXED | ExperimentFamily.ABSORPTION_FIXED:
            return [Variant(f"{family.value}_{v:g}", TestSetKind(family.value), {"value": v}, snr, depth)
                    for v in config.fixed_values]
        case ExperimentFamily.DYNAMIC_RANGE:
            return [Variant("rb", None, snr_levels=snr, depths=config.depths)]
        case ExperimentFamily.HEADS:
            return [Variant("rb", None, snr_levels=snr, depths=depth)]
    raise AbsorptionError(f"unknown experiment family {family}")


class RoomOutcome(object):
    """Labels and per-method estimates of one test room, keyed by (method, variant label)."""

    def __init__(self, variant: str, room: TestRoom, label: np.ndarray, estimates: Dict[Tuple[str, str], np.ndarray]):
        self.variant = variant
        self.room = room
        self.label = label
        self.estimates = estimates

    def __str__(self):
        return (f"RoomOutcome["
                f"variant={self.variant}, "
                f"room_id={self.room.room_id}, "
                f"label={np.array2string(self.label, precision=3)}"
                f"]")


class ExperimentReport(object):
    """Error records per (method, variant) with box statistics and CSV output."""

    def __init__(self, family: ExperimentFamily, header: dict):
        self.family = ExperimentFamily(family)
        self.header = header
        self.errors: Dict[Tuple[str, str], ErrorRecords] = {}

    @property
    def methods(self) -> List[str]:
        return list(dict.fromkeys(m for m, _ in self.errors))

    def add(self, method: str, variant: str, records: ErrorRecords):
        self.errors.setdefault((method, variant), ErrorRecords()).extend(records)

    def records_frame(self, method: str) -> pd.DataFrame:
        frames = []
        for (m, variant), records in self.errors.items():
            if m != method:
                continue
            df = records.to_df()
            df.insert(1, "variant", variant)
            frames.append(df)
        if not frames:
            return pd.DataFrame(columns=["method", "variant"] + ErrorRecord.FIELDS[1:])
        return pd.concat(frames, ignore_index=True)

    def boxstats_frame(self) -> pd.DataFrame:
        frames = []
        for (method, variant), records in self.errors.items():
            df = band_breakdown(records)
            df.insert(0, "method", method)
            df.insert(1, "variant", variant)
            df["unavailable"] = records.unavailable
            frames.append(df)
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()

    def pooled(self, method: str, variant: str):
        return box_stats(self.errors[(method, variant)])

    def summary(self) -> str:
        rows = []
        for (method, variant), records in self.errors.items():
            if len(records):
                s = box_stats(records)
                rows.append([method, variant, s.n, records.unavailable, s.median, s.q1, s.q3, s.mean])
            else:
                rows.append([method, variant, 0, records.unavailable] + [float("nan")] * 4)
        table = tabulate(rows, headers=["method", "variant", "n", "unavailable", "median", "q1", "q3", "mean"],
                         floatfmt=".4f", tablefmt="psql")
        return f"family: {self.family.value}\n{table}\n"

    def config_line(self) -> str:
        return f"# config: {self.header}\n"

    def write(self, out_dir: Union[str, Path]) -> List[Path]:
        out = make_dirs(out_dir)
        written = []
        for method in self.methods:
            path = out / f"{self.family.value}_{method}.csv"
            self._write_csv(path, self.records_frame(method))
            written.append(path)
        path = out / f"{self.family.value}_boxstats.csv"
        self._write_csv(path, self.boxstats_frame())
        written.append(path)
        path = out / f"{self.family.value}_summary.txt"
        path.write_text(self.config_line() + self.summary(), encoding="utf-8")
        written.append(path)
        return written

    def _write_csv(self, path: Path, df: pd.DataFrame):
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(self.config_line())
            df.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT)

    def __str__(self):
        return f"ExperimentReport[family={self.family.value}, groups={len(self.errors)}]"


class ExperimentRunner(object):
    """
    Generates the test rooms of a family, simulates them, runs every method and
    collects errors against the mean absorption labels. `on_room` emits a RoomOutcome
    per room, in room order.
    """

    def __init__(self, config: ExperimentConfig, sim_config: SimConfig, methods: Sequence[Estimator],
                 logger: Optional[logging.Logger] = None):
        self.config = config
        self.sim_config = sim_config
        self.methods = list(methods)
        self.logger = logger if logger is not None else logging.getLogger(__name__)
        self.simulator = Simulator(sim_config.replace(threads=1), self.logger)
        self.on_room = ev.Event()

    def rooms_for(self, variant: Variant, index: int) -> List[TestRoom]:
        rng = np.random.default_rng([self.config.seed, index])
        if variant.kind is None:
            strategy = SamplingStrategy.rb()
            return [TestRoom(i, sample_room(rng, strategy)) for i in range(self.config.n_rooms)]
        return craft_test_set(variant.kind, self.config.n_rooms, rng, sim_config=self.sim_config,
                              logger=self.logger, **variant.craft_args)

    def evaluate_room(self, variant: Variant, index: int, room: TestRoom) -> RoomOutcome:
        rng = np.random.default_rng([self.config.seed, index, room.room_id])
        rir = self.simulator.simulate(room.spec, int(rng.integers(0, 2 ** 31)))
        estimates = {}
        for li, snr in enumerate(variant.snr_levels):
            noise_rng = np.random.default_rng([self.config.seed, index, room.room_id, li])
            vector = preprocess(rir, snr, noise_rng)
            for method in self.methods:
                if isinstance(method, ClassicalEstimator):
                    for di, depth in enumerate(variant.depths):
                        est = method.with_depth(depth).estimate(vector, [room.spec.geometry])[0]
                        estimates[(method.name, variant.label(li, di))] = est
                elif len(variant.depths) == 1:
                    estimates[(method.name, variant.label(li, 0))] = method.estimate(vector)[0]
        return RoomOutcome(variant.name, room, np.array(mean_absorption(room.spec).alpha_bar), estimates)

    def run(self, family: ExperimentFamily) -> ExperimentReport:
        family = ExperimentFamily(family)
        header = {
            "family": family.value,
            "methods": [m.name for m in self.methods],
            "eval": self.config.to_dict(),
            "sim": self.sim_config.provenance(),
        }
        report = ExperimentReport(family, header)
        for index, variant in enumerate(family_variants(family, self.config)):
            if len(variant.depths) > 1 and any(isinstance(m, LearnedEstimator) for m in self.methods):
                self.logger.warning(f"{fn()}: depth sweep applies to classical methods only")
            self.logger.info(f"{fn()}: ====> {family.value} {variant}")
            rooms = self.rooms_for(variant, index)
            outcomes = ordered_map(lambda room: self.evaluate_room(variant, index, room), rooms, self.config.threads)
            for outcome in outcomes:
                self.on_room.emit(outcome)
            keys = list(dict.fromkeys(k for o in outcomes for k in o.estimates))
            for method, label in keys:
                est = np.array([o.estimates[(method, label)] for o in outcomes])
                labels = np.array([o.label for o in outcomes])
                ids = [o.room.room_id for o in outcomes]
                report.add(method, label, absolute_errors(est, labels, method, ids))
            self.logger.info(f"{fn()}: <==== {family.value} {variant.name}: {len(outcomes)} rooms")
        return report


def run_experiment(family: Union[ExperimentFamily, str], methods: Sequence[Union[str, Estimator]], n_rooms: int,
                   seed: int, config: Optional[ExperimentConfig] = None, sim_config: Optional[SimConfig] = None,
                   logger: Optional[logging.Logger] = None) -> ExperimentReport:
    config = copy.deepcopy(config) if config is not None else ExperimentConfig()
    config.n_rooms = n_rooms
    config.seed = seed
    names = [m for m in methods if isinstance(m, str)]
    resolved = resolve_methods(names, config.model_dir, config.depth_db, logger)
    estimators = [m for m in methods if isinstance(m, Estimator)] + resolved
    return ExperimentRunner(config, sim_config or SimConfig(), estimators, logger).run(ExperimentFamily(family))


def dynamic_range_study(vectors: np.ndarray, geometries, labels: np.ndarray,
                        depths: Sequence[float] = DYNAMIC_RANGE_DEPTHS) -> pd.DataFrame:
    """Eyring BoxStats on the same RIRs analysed at each decay depth."""
    rows = []
    for depth in depths:
        est = ClassicalEstimator("eyring", depth).estimate(vectors, geometries)
        records = absolute_errors(est, labels, "eyring")
        if len(records):
            rows.append({"depth_db": depth, "unavailable": records.unavailable} | box_stats(records).to_dict())
        else:
            rows.append({"depth_db": depth, "unavailable": records.unavailable, "n": 0})
    return pd.DataFrame(rows)
