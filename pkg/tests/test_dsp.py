import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from vsl.absorption.dsp import (DecayCurve, add_noise_snr, backward_integrate, estimate_rt, export_schroeder, fit_length,
                                octave_filter_bank, preprocess, resample_48_to_16, schroeder_curves)
from vsl.absorption.model import InsufficientDecayError, Rir, SampleRateError, UndefinedCurveError, ZeroSignalError


def sine(freq, fs, duration=1.0, amplitude=1.0):
    t = np.arange(int(fs * duration)) / fs
    return amplitude * np.sin(2 * np.pi * freq * t)


def test_filter_bank_concentrates_sine():
    bands = octave_filter_bank(Rir(sine(1000.0, 16000), 16000))
    energy = (bands ** 2).sum(axis=1)
    assert np.argmax(energy) == 3
    assert energy[0] < 0.01 * energy.sum()
    assert energy[1] < 0.01 * energy.sum()


def test_filter_bank_zero_input():
    assert not np.any(octave_filter_bank(Rir(np.zeros(1000), 16000)))


def test_filter_bank_rate_rule():
    octave_filter_bank(Rir(np.ones(100), 16000))
    with pytest.raises(SampleRateError):
        octave_filter_bank(Rir(np.ones(100), 10000))


def test_backward_integrate_hand_sum():
    curve = backward_integrate(np.ones(4))
    assert list(curve.linear) == [4.0, 3.0, 2.0, 1.0]
    assert curve.db[0] == 0.0


def test_backward_integrate_zero_signal():
    with pytest.raises(UndefinedCurveError):
        backward_integrate(np.zeros(10))


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=200).filter(lambda x: any(x)))
def test_backward_integrate_non_increasing(x):
    curve = backward_integrate(np.asarray(x))
    assert np.all(np.diff(curve.linear) <= 1e-12)


def test_backward_integrate_exponential_is_straight_line():
    n = np.arange(400)
    curve = backward_integrate(np.exp(-n / 40.0))
    db = curve.db[:300]
    fit = stats.linregress(n[:300], db)
    assert fit.rvalue ** 2 > 1 - 1e-12


@pytest.mark.parametrize("tau", [0.02, 0.05, 0.2])
@pytest.mark.parametrize("depth", [10.0, 30.0])
def test_rt_recovers_closed_form(tau, depth):
    fs = 16000
    t = np.arange(int(12 * tau * fs)) / fs
    # energy decay curve of exp(-t/tau) pressure, sampled without noise
    curve = DecayCurve(np.exp(-2 * t / tau), fs)
    rt = estimate_rt(curve, depth)
    assert rt.rt == pytest.approx(60 * tau / (20 * math.log10(math.e)), rel=0.01)
    assert rt.start_db == -5.0 and rt.depth_db == depth


def test_rt_of_filtered_decaying_noise(decaying_noise):
    fs = 16000
    x = decaying_noise(0.05, fs)
    curves = schroeder_curves(Rir(x, fs))
    rt = estimate_rt(curves[3], 20.0)
    assert rt.rt == pytest.approx(0.3454, rel=0.1)


def test_rt_insufficient_decay():
    db = np.concatenate([np.linspace(0, -20, 100), np.full(100, -20.0)])
    with pytest.raises(InsufficientDecayError):
        estimate_rt(DecayCurve.from_db(db, 1000), 30.0)


def test_rt_fits_only_inside_window():
    fs = 1000
    t = np.arange(2000) / fs
    # knee at -20 dB: slope -100 dB/s then -20 dB/s
    db = np.where(t < 0.2, -100 * t, -20 - 20 * (t - 0.2))
    curve = DecayCurve.from_db(db, fs)
    rt = estimate_rt(curve, 10.0)
    i0, i1 = curve.first_crossing(-5), curve.first_crossing(-15)
    brute = stats.linregress(np.arange(i0, i1 + 1) / fs, db[i0:i1 + 1])
    assert rt.slope == pytest.approx(brute.slope)
    assert rt.rt == pytest.approx(0.6)


@given(st.floats(1e-3, 1e3))
def test_rt_invariant_to_scaling(scale):
    x = np.exp(-np.arange(16000) / 1600.0) * np.cos(np.arange(16000) * 0.4)
    a = estimate_rt(schroeder_curves(Rir(x, 16000))[3], 20.0).rt
    b = estimate_rt(schroeder_curves(Rir(scale * x, 16000))[3], 20.0).rt
    assert a == pytest.approx(b, rel=1e-6)


def test_resample_length_and_dc():
    y = resample_48_to_16(Rir(np.ones(48000), 48000))
    assert y.sample_rate == 16000
    assert len(y) == 16000
    assert np.allclose(y.samples[1000:-1000], 1.0, atol=1e-6)


def test_resample_passband_and_stopband():
    y = resample_48_to_16(Rir(sine(1000.0, 48000), 48000)).samples[2000:-2000]
    assert np.max(np.abs(y)) == pytest.approx(1.0, rel=0.01)
    z = resample_48_to_16(Rir(sine(7900.0, 48000), 48000)).samples[2000:-2000]
    assert 20 * np.log10(np.max(np.abs(z))) <= -60.0


def test_resample_wrong_rate():
    with pytest.raises(SampleRateError):
        resample_48_to_16(Rir(np.ones(100), 44100))


def test_resample_preserves_arrival_time():
    x = np.zeros(4800)
    x[3000] = 1.0
    y = resample_48_to_16(Rir(x, 48000)).samples
    assert np.argmax(np.abs(y)) == 1000


def test_noise_power_matches_snr():
    rng = np.random.default_rng(1)
    x = Rir(sine(500.0, 16000, 0.5), 16000)
    measured = []
    for seed in range(100):
        y = add_noise_snr(x, 30.0, np.random.default_rng(seed))
        noise = y.samples - x.samples
        measured.append(10 * np.log10(np.mean(x.samples ** 2) / np.mean(noise ** 2)))
    assert abs(np.mean(measured) - 30.0) < 0.5
    assert add_noise_snr(x, float("inf"), rng) is x


def test_noise_needs_signal():
    with pytest.raises(ZeroSignalError):
        add_noise_snr(Rir(np.zeros(10), 16000), 30.0, np.random.default_rng(0))


def test_preprocess_contract(decaying_noise):
    rir = Rir(decaying_noise(0.1, 48000, 0.6), 48000)
    v = preprocess(rir, 30.0, np.random.default_rng(3))
    assert v.shape == (8000,)
    assert np.max(np.abs(v)) == pytest.approx(1.0)


def test_preprocess_scale_invariant(decaying_noise):
    rir = Rir(decaying_noise(0.1, 48000, 0.6), 48000)
    a = preprocess(rir, 30.0, np.random.default_rng(5))
    b = preprocess(rir.scaled(10.0), 30.0, np.random.default_rng(5))
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_fit_length_pads_and_truncates():
    assert len(fit_length(Rir(np.ones(10), 16000), 20)) == 20
    assert len(fit_length(Rir(np.ones(30), 16000), 20)) == 20


def test_export_schroeder(tmp_path, decaying_noise):
    path = tmp_path / "curves.csv"
    export_schroeder(Rir(decaying_noise(0.05, 16000, 0.3), 16000), path, "config: test")
    with open(path) as f:
        assert f.readline().startswith("# config")
    df = pd.read_csv(path, comment="#")
    assert list(df.columns) == ["time_s", "db_125", "db_250", "db_500", "db_1000", "db_2000", "db_4000"]
    assert df["db_1000"].iloc[0] == pytest.approx(0.0)
