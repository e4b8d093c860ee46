from functools import lru_cache

import numpy as np
from scipy import signal

from vsl.absorption.model import OCTAVE_BANDS, Rir, SampleRateError

FILTER_ORDER = 3


@lru_cache(maxsize=16)
def octave_sos(sample_rate: int, band: int) -> np.ndarray:
    """Second-order sections of the Butterworth band-pass of one octave band."""
    lo = OCTAVE_BANDS.lower_edges[band]
    hi = OCTAVE_BANDS.upper_edges[band]
    return signal.butter(FILTER_ORDER, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")


def check_analysis_rate(sample_rate: int):
    top = OCTAVE_BANDS.upper_edges[-1]
    if sample_rate < 2.0 * top:
        raise SampleRateError(
            f"sample rate {sample_rate} Hz too low: the {int(OCTAVE_BANDS.CENTERS[-1])} Hz band needs "
            f"Nyquist above {top:.1f} Hz")


def octave_filter_bank(rir: Rir) -> np.ndarray:
    """
    Split an RIR into the six octave bands with zero-phase filtering.

    :return: array of shape (6, len(rir))
    """
    check_analysis_rate(rir.sample_rate)
    x = rir.samples
    out = np.zeros((len(OCTAVE_BANDS), len(x)))
    if not np.any(x):
        return out
    for b in range(len(OCTAVE_BANDS)):
        out[b] = signal.sosfiltfilt(octave_sos(rir.sample_rate, b), x)
    return out
