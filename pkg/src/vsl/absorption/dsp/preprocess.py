import math
from functools import lru_cache
from typing import Final

import numpy as np
from scipy import signal

from vsl.absorption.model import Rir, SampleRateError, ZeroSignalError

SOURCE_RATE: Final = 48000
TARGET_RATE: Final = 16000
VECTOR_LENGTH: Final = 8000
DEFAULT_SNR_DB: Final = 30.0

ANTI_ALIAS_CUTOFF_HZ: Final = 7200.0
ANTI_ALIAS_TRANSITION_HZ: Final = 1200.0
ANTI_ALIAS_STOPBAND_DB: Final = 80.0


@lru_cache(maxsize=1)
def anti_alias_taps() -> np.ndarray:
    """Linear-phase Kaiser low-pass for the 48 -> 16 kHz decimation."""
    nyq = SOURCE_RATE / 2.0
    numtaps, beta = signal.kaiserord(ANTI_ALIAS_STOPBAND_DB, ANTI_ALIAS_TRANSITION_HZ / nyq)
    # odd length keeps the group delay an integer number of samples
    numtaps |= 1
    return signal.firwin(numtaps, ANTI_ALIAS_CUTOFF_HZ, window=("kaiser", beta), fs=SOURCE_RATE)


def resample_48_to_16(rir: Rir) -> Rir:
    if rir.sample_rate != SOURCE_RATE:
        raise SampleRateError(f"expected a {SOURCE_RATE} Hz RIR, got {rir.sample_rate} Hz")
    down = SOURCE_RATE // TARGET_RATE
    # resample_poly removes the filter delay, so arrival times are kept
    y = signal.resample_poly(rir.samples, 1, down, window=anti_alias_taps(), padtype="line")
    return Rir(y, TARGET_RATE)


def fit_length(rir: Rir, length: int = VECTOR_LENGTH) -> Rir:
    x = rir.samples[:length]
    if len(x) < length:
        x = np.pad(x, (0, length - len(x)))
    return Rir(x, rir.sample_rate)


def add_noise_snr(rir: Rir, snr_db: float, rng: np.random.Generator) -> Rir:
    """White Gaussian noise at snr_db relative to the signal power; +inf leaves the signal unchanged."""
    if math.isinf(snr_db) and snr_db > 0:
        return rir
    power = float(np.mean(rir.samples ** 2)) if len(rir) else 0.0
    if power <= 0.0:
        raise ZeroSignalError("cannot set an SNR on a zero-power signal")
    sigma = math.sqrt(power / 10.0 ** (snr_db / 10.0))
    return Rir(rir.samples + sigma * rng.standard_normal(len(rir)), rir.sample_rate)


def normalize_peak(rir: Rir) -> Rir:
    peak = float(np.max(np.abs(rir.samples))) if len(rir) else 0.0
    if peak <= 0.0:
        raise ZeroSignalError("cannot peak-normalize an all-zero signal")
    return Rir(rir.samples / peak, rir.sample_rate)


def preprocess(rir: Rir, snr_db: float = DEFAULT_SNR_DB, rng: np.random.Generator = None) -> np.ndarray:
    """48 kHz RIR to the 8000-sample network input: resample, fit to 500 ms, add noise, peak-normalize."""
    if rng is None:
        rng = np.random.default_rng(0)
    x = fit_length(resample_48_to_16(rir))
    x = add_noise_snr(x, snr_db, rng)
    return normalize_peak(x).samples.copy()


def as_analysis_rir(vector: np.ndarray) -> Rir:
    """View a preprocessed input vector as a 16 kHz RIR for the classical pipeline."""
    return Rir(vector, TARGET_RATE)
