from typing import Final, Iterable, List, Sequence, Tuple

import numpy as np

from vsl.absorption.model.errors import InvalidRoomError


class OctaveBands(object):
    """
    The six analysis octave bands, 125 Hz to 4 kHz.

    Band edges are f_c/sqrt(2) and f_c*sqrt(2).
    """

    CENTERS: Final = (125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0)

    def __init__(self):
        self.centers = np.asarray(self.CENTERS, dtype=float)
        self.centers.setflags(write=False)

    def __len__(self):
        return len(self.CENTERS)

    def __iter__(self):
        return iter(self.CENTERS)

    @property
    def lower_edges(self) -> np.ndarray:
        return self.centers / np.sqrt(2.0)

    @property
    def upper_edges(self) -> np.ndarray:
        return self.centers * np.sqrt(2.0)

    def index_of(self, center_hz: float) -> int:
        for i, c in enumerate(self.CENTERS):
            if abs(c - center_hz) < 1e-9:
                return i
        raise KeyError(f"no octave band centred at {center_hz} Hz")

    @staticmethod
    def column_names(prefix="") -> List[str]:
        return [f"{prefix}{int(c)}" for c in OctaveBands.CENTERS]

    def __str__(self):
        return f"OctaveBands[centers={list(self.CENTERS)}]"


OCTAVE_BANDS: Final = OctaveBands()
N_BANDS: Final = len(OctaveBands.CENTERS)


class BandProfile(object):
    """Six per-band coefficients, immutable once built."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[float]):
        vals = tuple(float(v) for v in values)
        if len(vals) != N_BANDS:
            raise InvalidRoomError(f"a band profile needs {N_BANDS} values, got {len(vals)}")
        if not all(np.isfinite(vals)):
            raise InvalidRoomError(f"band profile values must be finite: {vals}")
        object.__setattr__(self, "_values", vals)

    def __setattr__(self, key, value):
        raise AttributeError("BandProfile is immutable")

    @classmethod
    def flat(cls, value: float) -> "BandProfile":
        return cls([value] * N_BANDS)

    @property
    def values(self) -> Tuple[float, ...]:
        return self._values

    def as_array(self) -> np.ndarray:
        return np.asarray(self._values, dtype=float)

    def is_coefficient(self) -> bool:
        return all(0.0 <= v <= 1.0 for v in self._values)

    def is_flat(self) -> bool:
        return all(v == self._values[0] for v in self._values)

    def __getitem__(self, band: int) -> float:
        return self._values[band]

    def __len__(self):
        return N_BANDS

    def __eq__(self, other):
        return isinstance(other, BandProfile) and self._values == other._values

    def __hash__(self):
        return hash(self._values)

    def __str__(self):
        return f"BandProfile[{', '.join(f'{v:.4f}' for v in self._values)}]"

    __repr__ = __str__


def as_profile(values: Sequence[float] | BandProfile) -> BandProfile:
    return values if isinstance(values, BandProfile) else BandProfile(values)
