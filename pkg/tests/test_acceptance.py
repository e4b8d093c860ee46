"""
Desk-scale end-to-end checks. They simulate thousands of rooms and train networks for
hours, so they only run with `pytest -m slow`.
"""
import numpy as np
import pytest

from vsl.absorption.baselines import ClassicalMethod
from vsl.absorption.dataset import Dataset, generate_splits
from vsl.absorption.dsp import preprocess
from vsl.absorption.eval import (ClassicalEstimator, ExperimentConfig, ExperimentFamily, ExperimentRunner,
                                 LearnedEstimator, absolute_errors, box_stats)
from vsl.absorption.model import RoomGeometry, mean_absorption
from vsl.absorption.nn import ModelSpec, TrainConfig, Trainer
from vsl.absorption.sampler import SamplingStrategy, sample_room
from vsl.absorption.sim import SimConfig, Simulator

pytestmark = pytest.mark.slow

THREADS = 4


@pytest.fixture(scope="module")
def desk_sim() -> SimConfig:
    return SimConfig(n_rays=10000, max_image_order=-1, threads=THREADS)


def train_cnn(root, sim_config: SimConfig, seed: int, logger) -> LearnedEstimator:
    train, dev = generate_splits(root, SamplingStrategy.rb(), 2000, 500, seed, sim_config, threads=THREADS,
                                 logger=logger)
    config = TrainConfig(epochs=100, seed=seed)
    model = Trainer(ModelSpec.cnn(), config, logger).train(Dataset.open(root / train.name),
                                                           Dataset.open(root / dev.name))
    return LearnedEstimator("cnn_rb", model)


@pytest.fixture(scope="module")
def cnn_rb(tmp_path_factory, desk_sim, logger) -> LearnedEstimator:
    return train_cnn(tmp_path_factory.mktemp("diffuse"), desk_sim, 11, logger)


@pytest.fixture(scope="module")
def cnn_rb_specular(tmp_path_factory, desk_sim, logger) -> LearnedEstimator:
    estimator = train_cnn(tmp_path_factory.mktemp("specular"), desk_sim.replace(diffuse_rain=False), 11, logger)
    estimator.name = "cnn_rb_specular"
    return estimator


def run_family(family, methods, sim_config, n_rooms, seed=101, **overrides):
    config = ExperimentConfig(n_rooms=n_rooms, seed=seed, threads=THREADS, **overrides)
    return ExperimentRunner(config, sim_config, methods).run(family)


def median_error(report, method, variant) -> float:
    return box_stats(report.errors[(method, variant)]).median


def test_eyring_in_diffuse_regime(desk_sim):
    rng = np.random.default_rng(5)
    simulator = Simulator(desk_sim)
    eyring = ClassicalEstimator(ClassicalMethod.EYRING)
    estimates, labels = [], []
    while len(labels) < 100:
        side = rng.uniform(4.0, 6.0)
        geometry = RoomGeometry(side, side * rng.uniform(0.9, 1.1), side * rng.uniform(0.6, 0.8))
        spec = sample_room(rng, SamplingStrategy.rb(), geometry)
        label = mean_absorption(spec)
        if np.any(label.alpha_bar >= 0.2) or np.any(label.s_bar <= 0.5):
            continue
        vector = preprocess(simulator.simulate(spec, len(labels)), float("inf"), rng)
        estimates.append(eyring.estimate(vector, [geometry])[0])
        labels.append(label.alpha_bar)
    records = absolute_errors(np.array(estimates), np.array(labels), "eyring")
    assert box_stats(records).median <= 0.05


def test_cnn_learns_rb_rooms(cnn_rb, desk_sim):
    report = run_family(ExperimentFamily.HEADS, [cnn_rb], desk_sim, 200)
    assert box_stats(report.errors[("cnn_rb", "rb")]).mean <= 0.08


def test_noise_ordering(cnn_rb, desk_sim):
    eyring = ClassicalEstimator(ClassicalMethod.EYRING)
    report = run_family(ExperimentFamily.SNR_SWEEP, [eyring, cnn_rb], desk_sim, 100, snr_levels=[20.0, 50.0])
    eyring_loss = median_error(report, "eyring", "snr_sweep/snr_20") - median_error(report, "eyring", "snr_sweep/snr_50")
    cnn_loss = median_error(report, "cnn_rb", "snr_sweep/snr_20") - median_error(report, "cnn_rb", "snr_sweep/snr_50")
    assert eyring_loss > 0
    assert cnn_loss < eyring_loss


def test_geometry_ordering(cnn_rb, desk_sim):
    eyring = ClassicalEstimator(ClassicalMethod.EYRING)
    cube = run_family(ExperimentFamily.CUBE_LIKE, [eyring, cnn_rb], desk_sim, 100)
    elongated = run_family(ExperimentFamily.ELONGATED, [eyring, cnn_rb], desk_sim, 100)
    assert median_error(elongated, "eyring", "elongated") > median_error(cube, "eyring", "cube_like")
    assert median_error(elongated, "cnn_rb", "elongated") < median_error(elongated, "eyring", "elongated")


def test_diffusion_ablation(cnn_rb, cnn_rb_specular, desk_sim):
    report = run_family(ExperimentFamily.SPECULAR_ABLATION, [cnn_rb, cnn_rb_specular], desk_sim, 100)
    assert median_error(report, "cnn_rb_specular", "realistic") >= 2.0 * median_error(report, "cnn_rb", "realistic")
