from typing import Dict, Final, List, Optional, Sequence

import numpy as np
import pandas as pd
from tabulate import tabulate

from vsl.absorption.model import EmptyInputError, MisalignedInputError, N_BANDS, OCTAVE_BANDS

POOLED: Final = -1


class ErrorRecord(object):
    """Absolute error of one method on one room; band is POOLED for per-room means."""

    __slots__ = ("method", "room_id", "band", "absolute_error")

    FIELDS = ["method", "room_id", "band_hz", "absolute_error"]

    def __init__(self, method: str, room_id: int, band: int, absolute_error: float):
        self.method = method
        self.room_id = room_id
        self.band = band
        self.absolute_error = absolute_error

    @property
    def band_hz(self) -> int:
        return POOLED if self.band == POOLED else int(OCTAVE_BANDS.CENTERS[self.band])

    def row(self) -> list:
        return [self.method, self.room_id, self.band_hz, self.absolute_error]

    def __str__(self):
        return (f"ErrorRecord["
                f"method={self.method}, "
                f"room_id={self.room_id}, "
                f"band={self.band_hz}, "
                f"absolute_error={self.absolute_error:.4f}"
                f"]")


class ErrorRecords(object):
    """Error records plus the number of (room, band) pairs a method could not estimate."""

    def __init__(self, records: Optional[List[ErrorRecord]] = None, unavailable: int = 0):
        self.records = list(records or [])
        self.unavailable = unavailable

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def extend(self, other: "ErrorRecords"):
        self.records.extend(other.records)
        self.unavailable += other.unavailable

    def values(self, band: Optional[int] = None) -> np.ndarray:
        return np.array([r.absolute_error for r in self.records if band is None or r.band == band], dtype=float)

    def to_df(self) -> pd.DataFrame:
        return pd.DataFrame([r.row() for r in self.records], columns=ErrorRecord.FIELDS)


def absolute_errors(estimates, labels, method: str = "", room_ids: Optional[Sequence[int]] = None,
                    aggregate_over_bands: bool = True) -> ErrorRecords:
    """
    :param estimates: (n, 6) per-band estimates, NaN where a method gave none
    :param labels: (n, 6) mean absorption labels
    :param aggregate_over_bands: one record per (room, band) pooled over all bands when set,
        otherwise one record per room holding the mean error of its available bands
    """
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    lab = np.atleast_2d(np.asarray(labels, dtype=float))
    if est.shape != lab.shape or est.shape[1] != N_BANDS:
        raise MisalignedInputError(f"{est.shape} estimates vs {lab.shape} labels")
    ids = list(room_ids) if room_ids is not None else list(range(est.shape[0]))
    if len(ids) != est.shape[0]:
        raise MisalignedInputError(f"{len(ids)} room ids for {est.shape[0]} estimates")
    available = np.isfinite(est)
    err = np.abs(np.clip(est, 0.0, 1.0) - lab)
    records = []
    for i, room_id in enumerate(ids):
        if aggregate_over_bands:
            records.extend(ErrorRecord(method, room_id, b, float(err[i, b])) for b in range(N_BANDS) if available[i, b])
        elif available[i].any():
            records.append(ErrorRecord(method, room_id, POOLED, float(err[i, available[i]].mean())))
    return ErrorRecords(records, int((~available).sum()))


class BoxStats(object):

    FIELDS = ["n", "median", "q1", "q3", "whisker_low", "whisker_high", "mean", "std"]

    def __init__(self, n: int, median: float, q1: float, q3: float, whisker_low: float, whisker_high: float,
                 mean: float, std: float):
        self.n = n
        self.median = median
        self.q1 = q1
        self.q3 = q3
        self.whisker_low = whisker_low
        self.whisker_high = whisker_high
        self.mean = mean
        self.std = std

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.FIELDS}

    def __str__(self):
        return (f"BoxStats["
                f"n={self.n}, "
                f"median={self.median:.4f}, "
                f"q1={self.q1:.4f}, "
                f"q3={self.q3:.4f}, "
                f"whiskers=({self.whisker_low:.4f}, {self.whisker_high:.4f}), "
                f"mean={self.mean:.4f}, "
                f"std={self.std:.4f}"
                f"]")


def box_stats(errors) -> BoxStats:
    """Tukey box statistics; whiskers end at the furthest data point within 1.5 IQR of the box."""
    values = errors.values() if isinstance(errors, ErrorRecords) else np.asarray(errors, dtype=float).ravel()
    if values.size == 0:
        raise EmptyInputError("box statistics need at least one value")
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    inside_low = values[values >= q1 - 1.5 * iqr]
    inside_high = values[values <= q3 + 1.5 * iqr]
    return BoxStats(
        n=int(values.size),
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(min(inside_low.min(), q1)),
        whisker_high=float(max(inside_high.max(), q3)),
        mean=float(values.mean()),
        std=float(values.std()),
    )


def box_stats_frame(stats: Dict[str, BoxStats], key: str = "group") -> pd.DataFrame:
    return pd.DataFrame([{key: name} | s.to_dict() for name, s in stats.items()], columns=[key] + BoxStats.FIELDS)


def band_breakdown(records: ErrorRecords) -> pd.DataFrame:
    """BoxStats per octave band and pooled; empty bands are left out."""
    stats = {}
    for b in range(N_BANDS):
        values = records.values(b)
        if values.size:
            stats[str(int(OCTAVE_BANDS.CENTERS[b]))] = box_stats(values)
    if len(records):
        stats["all"] = box_stats(records.values())
    return box_stats_frame(stats, "band_hz")


def screening_errors(records: ErrorRecords, screening: Dict[int, Sequence]) -> pd.DataFrame:
    """
    Split per-band errors by the A/B screening class of the curve they were measured on.

    :param screening: room id -> six class flags ('A' or 'B')
    """
    groups: Dict[str, List[float]] = {}
    for r in records:
        if r.band == POOLED or r.room_id not in screening:
            continue
        flag = str(getattr(screening[r.room_id][r.band], "value", screening[r.room_id][r.band]))
        groups.setdefault(flag, []).append(r.absolute_error)
    return box_stats_frame({k: box_stats(v) for k, v in sorted(groups.items())}, "screening")


def tabulate_stats(df: pd.DataFrame, float_fmt=".4f", table_fmt="psql") -> str:
    return tabulate(df.values.tolist(), headers=list(df.columns), floatfmt=float_fmt, tablefmt=table_fmt)
