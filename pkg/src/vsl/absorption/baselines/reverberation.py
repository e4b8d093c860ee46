import math
from enum import Enum
from typing import Final, List, Optional

import numpy as np
import pandas as pd
from tabulate import tabulate

from vsl.absorption.dsp import RtEstimate, SchroederCurve, estimate_rt, schroeder_curves
from vsl.absorption.model import (AbsorptionError, EyringDomainError, NonPositiveInputError, N_BANDS, OCTAVE_BANDS,
                                  RoomGeometry, Rir)

SABINE_CONSTANT: Final = 0.163


class ClassicalMethod(str, Enum):
    SABINE = "sabine"
    EYRING = "eyring"


def sabine(volume: float, surface: float, rt: float) -> float:
    if not (volume > 0 and surface > 0 and rt > 0):
        raise NonPositiveInputError(f"Sabine needs positive V, S, RT; got V={volume}, S={surface}, RT={rt}")
    return SABINE_CONSTANT * volume / (surface * rt)


def eyring(alpha_sabine: float) -> float:
    if alpha_sabine >= 1.0:
        raise EyringDomainError(f"Eyring undefined for a Sabine estimate of {alpha_sabine:.4f} >= 1")
    return -math.log1p(-alpha_sabine)


class BandEstimate(object):
    """Classical estimate of one band; alpha is NaN and error is set when unavailable."""

    def __init__(self, band: int, alpha: float, alpha_sabine: float, rt: Optional[RtEstimate], error: Optional[str] = None):
        self.band = band
        self.alpha = alpha
        self.alpha_sabine = alpha_sabine
        self.rt = rt
        self.error = error

    @property
    def available(self) -> bool:
        return self.error is None

    def __str__(self):
        return (f"BandEstimate["
                f"band={int(OCTAVE_BANDS.CENTERS[self.band])}, "
                f"alpha={self.alpha:.4f}, "
                f"rt={'n/a' if self.rt is None else f'{self.rt.rt:.4f}'}, "
                f"error={self.error}"
                f"]")


class ClassicalEstimate(object):

    COMPACT_FIELDS = ["band_hz", "rt_s", "r2", "alpha"]
    DETAILED_FIELDS = ["band_hz", "rt_s", "r2", "alpha_sabine", "alpha", "note"]

    def __init__(self, bands: List[BandEstimate], method: ClassicalMethod, depth_db: float, volume: float,
                 surface: float, curves: Optional[SchroederCurve] = None):
        self.bands = bands
        self.method = method
        self.depth_db = depth_db
        self.volume = volume
        self.surface = surface
        self.curves = curves

    @property
    def alpha(self) -> np.ndarray:
        return np.array([b.alpha for b in self.bands])

    @property
    def unavailable(self) -> List[int]:
        return [b.band for b in self.bands if not b.available]

    @classmethod
    def field_names(cls, compact=True) -> List[str]:
        return cls.COMPACT_FIELDS if compact else cls.DETAILED_FIELDS

    def rows(self, compact=True) -> List[list]:
        rows = []
        for b in self.bands:
            rt = float("nan") if b.rt is None else b.rt.rt
            r2 = float("nan") if b.rt is None else b.rt.fit_quality
            if compact:
                rows.append([int(OCTAVE_BANDS.CENTERS[b.band]), rt, r2, b.alpha])
            else:
                rows.append([int(OCTAVE_BANDS.CENTERS[b.band]), rt, r2, b.alpha_sabine, b.alpha, b.error or ""])
        return rows

    def to_df(self, compact=True) -> pd.DataFrame:
        return pd.DataFrame(self.rows(compact), columns=self.field_names(compact))

    def tabulate(self, compact=True, float_fmt=".4f", table_fmt="psql") -> str:
        return tabulate(self.rows(compact), headers=self.field_names(compact), floatfmt=float_fmt, tablefmt=table_fmt)

    def __str__(self):
        return (f"ClassicalEstimate["
                f"method={self.method.value}, "
                f"depth_db={self.depth_db}, "
                f"V={self.volume:.2f}, S={self.surface:.2f}, "
                f"alpha={np.array2string(self.alpha, precision=4)}"
                f"]")


def alpha_from_rt(rt: RtEstimate, geometry: RoomGeometry, method: ClassicalMethod, band: int) -> BandEstimate:
    alpha_sabine = sabine(geometry.volume, geometry.surface_area, rt.rt)
    if method == ClassicalMethod.SABINE:
        return BandEstimate(band, alpha_sabine, alpha_sabine, rt)
    try:
        return BandEstimate(band, eyring(alpha_sabine), alpha_sabine, rt)
    except EyringDomainError as e:
        return BandEstimate(band, float("nan"), alpha_sabine, rt, str(e))


def estimate_alpha_classical(
        rir: Rir,
        geometry: RoomGeometry,
        depth_db: float = 30.0,
        method: ClassicalMethod = ClassicalMethod.EYRING,
        curves: Optional[SchroederCurve] = None
) -> ClassicalEstimate:
    """
    Octave filtering, Schroeder integration, RT fit and Sabine (then Eyring) per band.

    Bands whose decay is too short or whose Eyring value is undefined are kept as NaN with the error message.
    """
    method = ClassicalMethod(method)
    curves = curves if curves is not None else schroeder_curves(rir)
    bands = []
    for b in range(N_BANDS):
        try:
            rt = estimate_rt(curves[b], depth_db)
        except AbsorptionError as e:
            bands.append(BandEstimate(b, float("nan"), float("nan"), None, str(e)))
            continue
        bands.append(alpha_from_rt(rt, geometry, method, b))
    return ClassicalEstimate(bands, method, depth_db, geometry.volume, geometry.surface_area, curves)
