import math

import numpy as np

from vsl.absorption.model import OCTAVE_BANDS
from vsl.absorption.sim.config import SimConfig

T01 = 273.16
T0 = 293.15
P_REF = 101.325


def iso9613_db_per_m(freq_hz, temperature_c: float, relative_humidity: float, pressure_kpa: float = P_REF):
    """
    Pure-tone atmospheric attenuation in dB/m (ISO 9613-1).

    :param relative_humidity: fraction in (0, 1]
    """
    f = np.asarray(freq_hz, dtype=float)
    f2 = f * f
    tk = temperature_c + 273.15
    p = pressure_kpa / P_REF
    tr = tk / T0

    c_sat = -6.8346 * (T01 / tk) ** 1.261 + 4.6151
    # molar concentration of water vapour, percent
    h = 100.0 * relative_humidity * (10.0 ** c_sat) / p

    fr_o = p * (24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h))
    fr_n = p * tr ** -0.5 * (9.0 + 280.0 * h * math.exp(-4.17 * (tr ** (-1.0 / 3.0) - 1.0)))

    return 8.686 * f2 * (
        1.84e-11 * math.sqrt(tr) / p
        + tr ** -2.5 * (
            0.01275 * math.exp(-2239.1 / tk) / (fr_o + f2 / fr_o)
            + 0.1068 * math.exp(-3352.0 / tk) / (fr_n + f2 / fr_n)
        )
    )


def energy_attenuation_rates(config: SimConfig) -> np.ndarray:
    """Per-band energy decay rate m(b) in 1/m, zero when air absorption is off."""
    if not config.air_absorption:
        return np.zeros(len(OCTAVE_BANDS))
    db = iso9613_db_per_m(OCTAVE_BANDS.centers, config.temperature_c, config.relative_humidity, config.pressure_kpa)
    return db * math.log(10.0) / 10.0


def air_attenuation(band_hz, distance, config: SimConfig):
    """Energy factor exp(-m(b) d) for a path of `distance` meters."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    if not config.air_absorption:
        return np.ones(np.broadcast(np.asarray(band_hz), d).shape)
    m = iso9613_db_per_m(band_hz, config.temperature_c, config.relative_humidity, config.pressure_kpa)
    return np.exp(-m * math.log(10.0) / 10.0 * d)
