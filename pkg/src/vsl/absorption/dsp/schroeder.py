from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from vsl.absorption.model import InsufficientDecayError, OCTAVE_BANDS, Rir, UndefinedCurveError
from vsl.absorption.dsp.filters import octave_filter_bank

START_DB = -5.0


class DecayCurve(object):
    """Backward-integrated energy of one band, linear and in dB re the total energy."""

    def __init__(self, linear: np.ndarray, sample_rate: int, band: Optional[int] = None):
        self.linear = np.asarray(linear, dtype=float)
        self.sample_rate = sample_rate
        self.band = band
        with np.errstate(divide="ignore"):
            self.db = 10.0 * np.log10(self.linear / self.linear[0])

    @classmethod
    def from_db(cls, db: Sequence[float], sample_rate: int, band: Optional[int] = None) -> "DecayCurve":
        """Build a curve from a dB trace, mainly for synthetic fixtures."""
        return cls(np.power(10.0, np.asarray(db, dtype=float) / 10.0), sample_rate, band)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.linear)) / self.sample_rate

    def first_crossing(self, level_db: float) -> Optional[int]:
        idx = np.flatnonzero(self.db <= level_db)
        return int(idx[0]) if idx.size else None

    def reaches(self, level_db: float) -> bool:
        return self.first_crossing(level_db) is not None

    def __len__(self):
        return len(self.linear)

    def __str__(self):
        return (f"DecayCurve["
                f"band={self.band}, "
                f"n={len(self.linear)}, "
                f"sample_rate={self.sample_rate}, "
                f"floor_db={np.min(self.db[np.isfinite(self.db)]):.1f}"
                f"]")


class SchroederCurve(object):
    """Per-band Schroeder curves of one RIR."""

    def __init__(self, bands: List[DecayCurve], sample_rate: int):
        self.bands = bands
        self.sample_rate = sample_rate

    def __getitem__(self, band: int) -> DecayCurve:
        return self.bands[band]

    def __len__(self):
        return len(self.bands)

    def to_frame(self) -> pd.DataFrame:
        n = len(self.bands[0])
        df = pd.DataFrame({"time_s": np.arange(n) / self.sample_rate})
        for name, curve in zip(OCTAVE_BANDS.column_names("db_"), self.bands):
            df[name] = curve.db
        return df

    def to_csv(self, path: Union[str, Path], header_comment: Optional[str] = None):
        with open(path, "w", encoding="utf-8") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            self.to_frame().to_csv(f, index=False, float_format="%.6f")


class RtEstimate(object):

    def __init__(self, rt, start_db, depth_db, fit_quality, slope, intercept, window, band=None):
        self.rt = rt
        self.start_db = start_db
        self.depth_db = depth_db
        self.fit_quality = fit_quality
        self.slope = slope
        self.intercept = intercept
        self.window = window
        self.band = band

    def __str__(self):
        return (f"RtEstimate["
                f"band={self.band}, "
                f"rt={self.rt:.4f}s, "
                f"dynamic=[{self.start_db}, {self.start_db - self.depth_db}] dB, "
                f"r2={self.fit_quality:.5f}"
                f"]")


def backward_integrate(band_signal: np.ndarray, sample_rate: int = 1, band: Optional[int] = None) -> DecayCurve:
    x = np.asarray(band_signal, dtype=float)
    if not np.all(np.isfinite(x)):
        raise UndefinedCurveError("signal has non-finite samples")
    energy = np.cumsum((x * x)[::-1])[::-1]
    if x.size == 0 or energy[0] <= 0.0:
        raise UndefinedCurveError("Schroeder curve undefined for an all-zero signal")
    return DecayCurve(energy, sample_rate, band)


def schroeder_curves(rir: Rir) -> SchroederCurve:
    bands = octave_filter_bank(rir)
    return SchroederCurve([backward_integrate(x, rir.sample_rate, b) for b, x in enumerate(bands)], rir.sample_rate)


def estimate_rt(curve: DecayCurve, depth_db: float, start_db: float = START_DB) -> RtEstimate:
    """
    Reverberation time from a line fit between the first crossings of start_db and start_db - depth_db.
    """
    end_db = start_db - depth_db
    i0 = curve.first_crossing(start_db)
    i1 = curve.first_crossing(end_db)
    if i0 is None or i1 is None:
        raise InsufficientDecayError(
            f"band {curve.band}: curve never reaches {end_db:.1f} dB (floor "
            f"{np.min(curve.db[np.isfinite(curve.db)]):.1f} dB)")
    window = curve.db[i0:i1 + 1]
    finite = np.isfinite(window)
    if not finite.all():
        window = window[:np.argmin(finite)]
    if len(window) < 2:
        raise InsufficientDecayError(f"band {curve.band}: decay window [{start_db}, {end_db}] dB spans one sample")
    t = (i0 + np.arange(len(window))) / curve.sample_rate
    fit = stats.linregress(t, window)
    if not fit.slope < 0:
        raise InsufficientDecayError(f"band {curve.band}: non-decaying fit, slope {fit.slope}")
    return RtEstimate(
        rt=-60.0 / fit.slope,
        start_db=start_db,
        depth_db=depth_db,
        fit_quality=fit.rvalue ** 2,
        slope=fit.slope,
        intercept=fit.intercept,
        window=(i0, i0 + len(window) - 1),
        band=curve.band,
    )


def export_schroeder(rir: Rir, path: Union[str, Path], header_comment: Optional[str] = None) -> SchroederCurve:
    curves = schroeder_curves(rir)
    curves.to_csv(path, header_comment)
    return curves
