from functools import lru_cache

import numpy as np
from scipy import signal

from vsl.absorption.model import N_BANDS, OCTAVE_BANDS, Rir
from vsl.absorption.sim.config import SimConfig
from vsl.absorption.sim.echogram import Echogram

KERNEL_ORDER = 3
MAGNITUDE_FLOOR = 1e-8
FADE_FRACTION = 0.25


def minimum_phase(log_magnitude: np.ndarray) -> np.ndarray:
    """Minimum-phase impulse response of a full-circle log-magnitude spectrum, by cepstral folding."""
    n = len(log_magnitude)
    half = n // 2
    cepstrum = np.fft.ifft(log_magnitude).real
    folded = np.zeros(n)
    folded[0] = cepstrum[0]
    folded[1:half] = 2.0 * cepstrum[1:half]
    if n % 2 == 0:
        folded[half] = cepstrum[half]
    return np.fft.ifft(np.exp(np.fft.fft(folded))).real


@lru_cache(maxsize=8)
def band_kernels(sample_rate: int, taps: int = 512, fft_size: int = 4096) -> np.ndarray:
    """
    Minimum-phase octave band kernels, shape (6, taps), each scaled to unit energy.

    The magnitude follows a 3rd-order Butterworth band-pass; the tail is faded with a half Hann window.
    """
    kernels = np.zeros((N_BANDS, taps))
    fade_len = max(1, int(taps * FADE_FRACTION))
    fade = np.ones(taps)
    fade[taps - fade_len:] = np.hanning(2 * fade_len)[fade_len:]
    nyq = sample_rate / 2.0
    for b in range(N_BANDS):
        lo = OCTAVE_BANDS.lower_edges[b]
        hi = min(OCTAVE_BANDS.upper_edges[b], 0.999 * nyq)
        sos = signal.butter(KERNEL_ORDER, [lo, hi], btype="bandpass", fs=sample_rate, output="sos")
        _, h = signal.sosfreqz(sos, worN=fft_size, whole=True)
        mag = np.maximum(np.abs(h), MAGNITUDE_FLOOR)
        k = minimum_phase(np.log(mag))[:taps] * fade
        kernels[b] = k / np.sqrt(np.sum(k * k))
    kernels.setflags(write=False)
    return kernels


def band_amplitudes(echogram: Echogram, config: SimConfig) -> np.ndarray:
    """Per-band amplitude sequences, arrivals quantized to the nearest sample."""
    n = config.n_time_samples
    amp = np.zeros((N_BANDS, n))
    for stream in (echogram.specular, echogram.diffuse):
        if not len(stream):
            continue
        idx = np.rint(stream.times * config.sample_rate).astype(np.int64)
        keep = (idx >= 0) & (idx < n)
        idx = idx[keep]
        weights = np.sqrt(stream.energy[keep])
        for b in range(N_BANDS):
            amp[b] += np.bincount(idx, weights=weights[:, b], minlength=n)
    return amp


def render_rir(echogram: Echogram, config: SimConfig) -> Rir:
    kernels = band_kernels(config.sample_rate, config.kernel_taps, config.kernel_fft_size)
    amp = band_amplitudes(echogram, config)
    out = np.zeros(config.n_time_samples + config.kernel_taps - 1)
    for b in range(N_BANDS):
        if np.any(amp[b]):
            out += signal.oaconvolve(amp[b], kernels[b])
    return Rir(out, config.sample_rate)
