import logging
from pathlib import Path
from typing import Final, Optional, Tuple, Union

import numpy as np
from more_itertools import chunked

from vsl.absorption.dataset.store import DatasetManifest, DatasetWriter, label_schema
from vsl.absorption.dsp import DEFAULT_SNR_DB, TARGET_RATE, VECTOR_LENGTH, preprocess
from vsl.absorption.model import mean_absorption
from vsl.absorption.sampler import SamplingStrategy, sample_room
from vsl.absorption.sim import SimConfig, Simulator
from vsl.absorption.utils import fn, ordered_map

TRAIN_STREAM: Final = 0
DEV_STREAM: Final = 1
ITEMS_PER_ROUND: Final = 64


def make_item(index: int, seed: int, stream: int, strategy: SamplingStrategy, simulator: Simulator, snr_db: float,
              keep_raw: bool):
    """Sample, simulate and preprocess one room; everything random derives from (seed, stream, index)."""
    rng = np.random.default_rng([seed, stream, index])
    spec = sample_room(rng, strategy)
    sim_seed = int(rng.integers(0, 2 ** 31))
    rir = simulator.simulate(spec, sim_seed)
    vector = preprocess(rir, snr_db, rng)
    raw = rir.samples if keep_raw else None
    return vector, mean_absorption(spec), spec, raw


def generate_dataset(
        path: Union[str, Path],
        name: str,
        strategy: SamplingStrategy,
        n: int,
        seed: int,
        sim_config: SimConfig,
        stream: int = TRAIN_STREAM,
        snr_db: float = DEFAULT_SNR_DB,
        keep_raw: bool = False,
        threads: int = 1,
        config: Optional[dict] = None,
        logger: Optional[logging.Logger] = None,
) -> DatasetManifest:
    logger = logger if logger is not None else logging.getLogger(__name__)
    simulator = Simulator(sim_config.replace(threads=1), logger)
    manifest = DatasetManifest(
        name=name,
        seed=seed,
        strategy=strategy.to_dict(),
        sim_config=sim_config.provenance(),
        sample_rate=TARGET_RATE,
        vector_length=VECTOR_LENGTH,
        schema=label_schema(with_scattering=True),
        snr_db=snr_db,
        raw_length=(sim_config.n_time_samples + sim_config.kernel_taps - 1) if keep_raw else 0,
        raw_sample_rate=sim_config.sample_rate if keep_raw else 0,
        config=config,
    )
    logger.info(f"{fn()}: ====> generating {n} {strategy.kind.value} rooms into {path}")

    def item(i):
        return make_item(i, seed, stream, strategy, simulator, snr_db, keep_raw)

    with DatasetWriter(path, manifest, logger) as writer:
        for chunk in chunked(range(n), ITEMS_PER_ROUND):
            for vector, label, spec, raw in ordered_map(item, chunk, threads):
                writer.append(vector, label, spec, raw)
            logger.info(f"{fn()}: {writer.manifest.count}/{n} rooms written")
    logger.info(f"{fn()}: <==== {path} complete")
    return writer.manifest


def generate_splits(
        root: Union[str, Path],
        strategy: SamplingStrategy,
        n_train: int,
        n_dev: int,
        seed: int,
        sim_config: SimConfig,
        snr_db: float = DEFAULT_SNR_DB,
        keep_raw: bool = False,
        threads: int = 1,
        config: Optional[dict] = None,
        logger: Optional[logging.Logger] = None,
) -> Tuple[DatasetManifest, DatasetManifest]:
    """Train and dev sets under root/<strategy>_train and root/<strategy>_dev, on disjoint random streams."""
    root = Path(root)
    kind = strategy.kind.value
    train = generate_dataset(root / f"{kind}_train", f"{kind}_train", strategy, n_train, seed, sim_config,
                             TRAIN_STREAM, snr_db, keep_raw, threads, config, logger)
    dev = generate_dataset(root / f"{kind}_dev", f"{kind}_dev", strategy, n_dev, seed, sim_config,
                           DEV_STREAM, snr_db, keep_raw, threads, config, logger)
    return train, dev
