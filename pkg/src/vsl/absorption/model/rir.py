import numpy as np

from vsl.absorption.model.errors import AbsorptionError


class Rir(object):
    """Sampled pressure waveform with its sample rate."""

    __slots__ = ("samples", "sample_rate")

    def __init__(self, samples, sample_rate: int):
        x = np.array(samples, dtype=np.float64)
        if x.ndim != 1:
            raise AbsorptionError(f"an RIR is a mono signal, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise AbsorptionError("RIR samples must be finite")
        if sample_rate <= 0:
            raise AbsorptionError(f"sample rate must be positive, got {sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(sample_rate))

    def __setattr__(self, key, value):
        raise AttributeError("Rir is immutable")

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def scaled(self, factor: float) -> "Rir":
        return Rir(self.samples * factor, self.sample_rate)

    def __str__(self):
        peak = float(np.max(np.abs(self.samples))) if len(self.samples) else 0.0
        return (f"Rir["
                f"n={len(self.samples)}, "
                f"sample_rate={self.sample_rate}, "
                f"duration={self.duration:.4f}s, "
                f"peak={peak:.4g}"
                f"]")
