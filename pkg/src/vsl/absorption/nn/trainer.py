import copy
import logging
import math
from pathlib import Path
from typing import List, Optional, Union

import eventkit as ev
import numpy as np
import pandas as pd

from vsl.absorption.dataset import ArrayDataset, batches, check_compatible, check_nonempty
from vsl.absorption.model import AbsorptionError, DivergenceError, ShapeMismatchError
from vsl.absorption.nn.architecture import ModelSpec
from vsl.absorption.nn.network import Model, mse_loss, targets_for_head
from vsl.absorption.nn.optim import Adam
from vsl.absorption.utils import StreamingMovingAverageByCount, fn, make_dirs_for_file


def train_default_config() -> dict:
    return {
        "batch_size": 1000,
        "learning_rate": 0.001,
        "epochs": 400,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "seed": 0,
        "dev_chunk": 1000,
        "moving_average_window": 10,
    }


class TrainConfig(object):

    def __init__(self, config: Optional[dict] = None, **overrides):
        merged = train_default_config()
        merged.update(config or {})
        merged.update(overrides)
        unknown = set(merged) - set(train_default_config())
        if unknown:
            raise AbsorptionError(f"unknown training settings {sorted(unknown)}")
        self.batch_size = int(merged["batch_size"])
        self.learning_rate = float(merged["learning_rate"])
        self.epochs = int(merged["epochs"])
        self.beta1 = float(merged["beta1"])
        self.beta2 = float(merged["beta2"])
        self.epsilon = float(merged["epsilon"])
        self.seed = int(merged["seed"])
        self.dev_chunk = int(merged["dev_chunk"])
        self.moving_average_window = int(merged["moving_average_window"])
        if self.batch_size < 1 or self.epochs < 1 or self.dev_chunk < 1:
            raise AbsorptionError(f"batch_size, epochs and dev_chunk must be positive: {self}")

    def to_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "dev_chunk": self.dev_chunk,
            "moving_average_window": self.moving_average_window,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(d)

    def __str__(self):
        return (f"TrainConfig["
                f"batch_size={self.batch_size}, "
                f"learning_rate={self.learning_rate}, "
                f"epochs={self.epochs}, "
                f"seed={self.seed}"
                f"]")


class EpochReport(object):

    COMPACT_FIELDS = ["epoch", "train_loss", "train_loss_ma", "dev_loss", "best"]

    def __init__(self, epoch: int, train_loss: float, train_loss_ma: float, dev_loss: float, best: bool):
        self.epoch = epoch
        self.train_loss = train_loss
        self.train_loss_ma = train_loss_ma
        self.dev_loss = dev_loss
        self.best = best

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.COMPACT_FIELDS}

    def __str__(self):
        return (f"EpochReport["
                f"epoch={self.epoch}, "
                f"train_loss={self.train_loss:.6g}, "
                f"dev_loss={self.dev_loss:.6g}, "
                f"best={self.best}"
                f"]")


class TrainingCurve(object):
    """Train and dev loss per epoch."""

    def __init__(self, reports: Optional[List[EpochReport]] = None):
        self.reports = list(reports or [])

    def append(self, report: EpochReport):
        self.reports.append(report)

    def to_df(self) -> pd.DataFrame:
        return pd.DataFrame([r.to_dict() for r in self.reports], columns=EpochReport.COMPACT_FIELDS)

    def to_csv(self, path: Union[str, Path], header: Optional[str] = None):
        with open(make_dirs_for_file(path), "w", encoding="utf-8", newline="") as f:
            if header:
                f.write(f"# {header}\n")
            self.to_df().to_csv(f, index=False, float_format="%.9g")

    def __len__(self):
        return len(self.reports)


def evaluate_loss(model: Model, dataset: ArrayDataset, chunk: int = 1000) -> float:
    """Mean squared error over a whole set, evaluated chunk by chunk."""
    total = 0.0
    count = 0
    for start in range(0, len(dataset), chunk):
        idx = np.arange(start, min(start + chunk, len(dataset)))
        x, y = dataset.take(idx)
        loss, _ = mse_loss(model.forward(x), targets_for_head(y, model.head), reduction="sum")
        total += loss
        count += idx.size * model.head.dim
    return total / count


class Trainer(object):
    """
    Adam training with seeded shuffling and dev-loss model selection.

    `on_epoch` emits an EpochReport after every epoch.
    """

    def __init__(self, spec: ModelSpec, config: TrainConfig, logger: Optional[logging.Logger] = None,
                 dtype=np.float32):
        self.spec = spec
        self.config = config
        self.logger = logger if logger is not None else logging.getLogger(__name__)
        self.dtype = dtype
        self.curve = TrainingCurve()
        self.on_epoch = ev.Event()

    def check_sets(self, train_set: ArrayDataset, dev_set: ArrayDataset):
        check_nonempty(train_set, "training")
        check_nonempty(dev_set, "development")
        for name, ds in (("training", train_set), ("development", dev_set)):
            if ds.inputs.shape[1] != self.spec.input_dim:
                raise ShapeMismatchError(f"{name} vectors have {ds.inputs.shape[1]} samples, "
                                         f"model expects {self.spec.input_dim}")
        if train_set.manifest is not None and dev_set.manifest is not None:
            check_compatible(train_set.manifest, dev_set.manifest, self.logger)

    def train(self, train_set: ArrayDataset, dev_set: ArrayDataset) -> Model:
        self.check_sets(train_set, dev_set)
        cfg = self.config
        model = Model(self.spec, seed=cfg.seed, dtype=self.dtype)
        optimizer = Adam(model.network.params, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)
        average = StreamingMovingAverageByCount(cfg.moving_average_window)
        self.curve = TrainingCurve()
        best_loss = math.inf
        best_epoch = -1
        best_params = model.network.copy_params()

        self.logger.info(f"{fn()}: ====> {self.spec} on {len(train_set)} train / {len(dev_set)} dev, {cfg}")
        for epoch in range(cfg.epochs):
            total = 0.0
            for x, y in batches(train_set, cfg.batch_size, cfg.seed, epoch):
                loss = model.backward(x, y)
                if not math.isfinite(loss):
                    raise DivergenceError(f"training loss became {loss} in epoch {epoch}")
                optimizer.step(model.network.grads)
                total += loss * x.shape[0]
            train_loss = total / len(train_set)
            dev_loss = evaluate_loss(model, dev_set, cfg.dev_chunk)
            if not math.isfinite(dev_loss):
                raise DivergenceError(f"dev loss became {dev_loss} in epoch {epoch}")
            improved = dev_loss < best_loss
            if improved:
                best_loss = dev_loss
                best_epoch = epoch
                best_params = model.network.copy_params()
            report = EpochReport(epoch, train_loss, average.append(train_loss), dev_loss, improved)
            self.curve.append(report)
            self.logger.debug(f"{fn()}: {report}")
            self.on_epoch.emit(report)

        model.network.set_params(best_params)
        model.provenance = {
            "train_config": copy.deepcopy(cfg.to_dict()),
            "train_fingerprint": train_set.fingerprint(),
            "dev_fingerprint": dev_set.fingerprint(),
            "best_epoch": best_epoch,
            "dev_loss": float(best_loss),
        }
        self.logger.info(f"{fn()}: <==== best epoch {best_epoch} with dev loss {best_loss:.6g}")
        return model


def train(spec: ModelSpec, train_set: ArrayDataset, dev_set: ArrayDataset, config: Optional[TrainConfig] = None,
          logger: Optional[logging.Logger] = None) -> Model:
    return Trainer(spec, config or TrainConfig(), logger).train(train_set, dev_set)
