from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from vsl.absorption.model import AbsorptionError, N_BANDS, OCTAVE_BANDS


def _empty_energy() -> np.ndarray:
    return np.zeros((0, N_BANDS))


class Arrivals(object):
    """
    One stream of arrivals: times in seconds and per-band energies.
    """

    def __init__(self, times=None, energy=None):
        self.times = np.zeros(0) if times is None else np.asarray(times, dtype=float)
        self.energy = _empty_energy() if energy is None else np.asarray(energy, dtype=float).reshape(-1, N_BANDS)
        if len(self.times) != len(self.energy):
            raise AbsorptionError("arrival arrays must have equal length")

    def __len__(self):
        return len(self.times)

    def sorted(self) -> "Arrivals":
        order = np.argsort(self.times, kind="stable")
        return Arrivals(self.times[order], self.energy[order])

    def scaled(self, factor: float) -> "Arrivals":
        return Arrivals(self.times, self.energy * factor)

    def total_energy(self) -> np.ndarray:
        return self.energy.sum(axis=0)

    @staticmethod
    def concat(parts) -> "Arrivals":
        parts = [p for p in parts if len(p)]
        if not parts:
            return Arrivals()
        return Arrivals(np.concatenate([p.times for p in parts]),
                        np.concatenate([p.energy for p in parts]))


class Echogram(object):
    """Specular and diffuse arrival streams of one simulation."""

    def __init__(self, specular: Optional[Arrivals] = None, diffuse: Optional[Arrivals] = None):
        self.specular = specular if specular is not None else Arrivals()
        self.diffuse = diffuse if diffuse is not None else Arrivals()

    def validate(self, max_time: float):
        for name, stream in (("specular", self.specular), ("diffuse", self.diffuse)):
            if len(stream) == 0:
                continue
            if np.any(stream.times < 0) or np.any(stream.times > max_time + 1e-12):
                raise AbsorptionError(f"{name} arrival outside [0, {max_time}] s")
            if np.any(stream.energy < 0):
                raise AbsorptionError(f"{name} arrival with negative energy")
        if np.any(np.diff(self.specular.times) < 0):
            raise AbsorptionError("specular arrivals not sorted by time")

    def scaled(self, factor: float) -> "Echogram":
        return Echogram(self.specular.scaled(factor), self.diffuse.scaled(factor))

    def to_frame(self) -> pd.DataFrame:
        frames = []
        for name, stream in (("specular", self.specular), ("diffuse", self.diffuse)):
            df = pd.DataFrame(stream.energy, columns=OCTAVE_BANDS.column_names("e"))
            df.insert(0, "time_s", stream.times)
            df.insert(0, "stream", name)
            frames.append(df)
        return pd.concat(frames, ignore_index=True)

    def dump(self, path: Union[str, Path], header_comment: Optional[str] = None):
        with open(path, "w", encoding="utf-8") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            self.to_frame().to_csv(f, sep="\t", index=False, float_format="%.9g")

    def __str__(self):
        return (f"Echogram["
                f"specular={len(self.specular)}, "
                f"diffuse={len(self.diffuse)}"
                f"]")
