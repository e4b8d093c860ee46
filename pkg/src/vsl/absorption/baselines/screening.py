from enum import Enum
from typing import Final, List, Optional, Sequence

import numpy as np
import pandas as pd
from tabulate import tabulate

from vsl.absorption.dsp import DecayCurve, estimate_rt
from vsl.absorption.model import (EmptyReferenceError, InsufficientDecayError, MisalignedInputError, N_BANDS,
                                  OCTAVE_BANDS)
from vsl.absorption.baselines.reverberation import ClassicalEstimate

SCREEN_DEPTH_DB: Final = 10.0
SCREEN_MIN_R2: Final = 0.985


class ScreeningClass(str, Enum):
    A = "A"
    B = "B"


def classify_schroeder(curve: DecayCurve, min_r2: float = SCREEN_MIN_R2) -> ScreeningClass:
    """A when the curve decays linearly from -5 to -15 dB at least."""
    try:
        rt = estimate_rt(curve, SCREEN_DEPTH_DB)
    except InsufficientDecayError:
        return ScreeningClass.B
    return ScreeningClass.A if rt.fit_quality >= min_r2 else ScreeningClass.B


def screening_matrix(estimates: Sequence[ClassicalEstimate]) -> List[List[ScreeningClass]]:
    """Classify every band curve carried by the estimates."""
    return [[classify_schroeder(e.curves[b]) for b in range(N_BANDS)] for e in estimates]


class BandReference(object):

    def __init__(self, band: int, value: Optional[float], count: int, total: int):
        self.band = band
        self.value = value
        self.count = count
        self.total = total

    @property
    def available(self) -> bool:
        return self.count > 0

    def __str__(self):
        value = "n/a" if self.value is None else f"{self.value:.2f}"
        return f"{value} ({self.count})"


class ReferenceAbsorption(object):
    """Per-band median of Eyring estimates over class-A curves, with the number of curves used."""

    FIELDS = ["band_hz", "alpha_ref", "count", "total"]

    def __init__(self, bands: List[BandReference]):
        self.bands = bands

    @property
    def values(self) -> np.ndarray:
        return np.array([np.nan if b.value is None else b.value for b in self.bands])

    @property
    def counts(self) -> List[int]:
        return [b.count for b in self.bands]

    def check(self):
        empty = [int(OCTAVE_BANDS.CENTERS[b.band]) for b in self.bands if not b.available]
        if empty:
            raise EmptyReferenceError(f"no class-A curve for bands {empty} Hz")
        return self

    def rows(self) -> List[list]:
        return [[int(OCTAVE_BANDS.CENTERS[b.band]), b.value, b.count, b.total] for b in self.bands]

    def to_df(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows(), columns=self.FIELDS)

    def tabulate(self, float_fmt=".3f", table_fmt="psql") -> str:
        return tabulate(self.rows(), headers=self.FIELDS, floatfmt=float_fmt, tablefmt=table_fmt)

    def __str__(self):
        return f"ReferenceAbsorption[{', '.join(str(b) for b in self.bands)}]"


def _as_matrix(estimates) -> np.ndarray:
    rows = [e.alpha if isinstance(e, ClassicalEstimate) else np.asarray(e, dtype=float) for e in estimates]
    return np.atleast_2d(np.array(rows, dtype=float)) if rows else np.zeros((0, N_BANDS))


def aggregate_reference(estimates, screening, strict: bool = True) -> ReferenceAbsorption:
    """
    :param estimates: ClassicalEstimate objects or rows of per-band Eyring values (NaN = unavailable)
    :param screening: per estimate, per band A/B flags
    :param strict: raise EmptyReferenceError when a band has no class-A curve; pass False to keep
        such bands as n/a
    """
    values = _as_matrix(estimates)
    flags = np.array([[ScreeningClass(f) == ScreeningClass.A for f in row] for row in screening], dtype=bool)
    if flags.shape != values.shape:
        raise MisalignedInputError(f"{values.shape} estimates vs {flags.shape} screening flags")
    bands = []
    for b in range(values.shape[1]):
        selected = values[flags[:, b] & np.isfinite(values[:, b]), b]
        value = float(np.median(selected)) if selected.size else None
        bands.append(BandReference(b, value, int(selected.size), values.shape[0]))
    reference = ReferenceAbsorption(bands)
    return reference.check() if strict else reference


def reference_deviation(estimates, screening, reference: ReferenceAbsorption) -> pd.DataFrame:
    """Mean and std of |single estimate - reference| over class-A curves, per band."""
    values = _as_matrix(estimates)
    flags = np.array([[ScreeningClass(f) == ScreeningClass.A for f in row] for row in screening], dtype=bool)
    if flags.shape != values.shape:
        raise MisalignedInputError(f"{values.shape} estimates vs {flags.shape} screening flags")
    rows = []
    for b, ref in enumerate(reference.bands):
        selected = values[flags[:, b] & np.isfinite(values[:, b]), b]
        if ref.value is None or not selected.size:
            rows.append([int(OCTAVE_BANDS.CENTERS[b]), np.nan, np.nan, 0])
            continue
        dev = np.abs(selected - ref.value)
        rows.append([int(OCTAVE_BANDS.CENTERS[b]), float(dev.mean()), float(dev.std()), int(selected.size)])
    return pd.DataFrame(rows, columns=["band_hz", "mean_abs_dev", "std_abs_dev", "count"])
