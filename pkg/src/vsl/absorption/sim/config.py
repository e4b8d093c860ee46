import copy
from typing import Optional

from vsl.absorption.model import AbsorptionError


def sim_default_config() -> dict:
    """
    Simulation defaults, full fidelity.
    """
    return {
        "sample_rate": 48000,
        "n_rays": 50000,
        "max_image_order": 50,
        "max_time": 0.5,
        "temperature_c": 20.0,
        "relative_humidity": 0.42,
        "pressure_kpa": 101.325,
        "air_absorption": True,
        "receiver_radius": 0.1,
        "speed_of_sound": 343.0,
        "diffuse_rain": True,
        "kernel_taps": 512,
        "kernel_fft_size": 4096,
        "ray_block_size": 1024,
        "threads": 1,
    }


class SimConfig(object):

    def __init__(self, config: Optional[dict] = None, **overrides):
        merged = sim_default_config()
        merged.update(config or {})
        merged.update(overrides)
        unknown = set(merged) - set(sim_default_config())
        if unknown:
            raise AbsorptionError(f"unknown simulation settings {sorted(unknown)}")
        self.sample_rate = int(merged["sample_rate"])
        self.n_rays = int(merged["n_rays"])
        order = merged["max_image_order"]
        # negative or missing order means the lattice is pruned by path length only
        self.max_image_order = None if order is None or int(order) < 0 else int(order)
        self.max_time = float(merged["max_time"])
        self.temperature_c = float(merged["temperature_c"])
        self.relative_humidity = float(merged["relative_humidity"])
        self.pressure_kpa = float(merged["pressure_kpa"])
        self.air_absorption = bool(merged["air_absorption"])
        self.receiver_radius = float(merged["receiver_radius"])
        self.speed_of_sound = float(merged["speed_of_sound"])
        self.diffuse_rain = bool(merged["diffuse_rain"])
        self.kernel_taps = int(merged["kernel_taps"])
        self.kernel_fft_size = int(merged["kernel_fft_size"])
        self.ray_block_size = int(merged["ray_block_size"])
        self.threads = max(1, int(merged["threads"]))
        self.validate()

    def validate(self):
        if self.sample_rate <= 0:
            raise AbsorptionError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.n_rays < 0:
            raise AbsorptionError(f"n_rays must be non-negative, got {self.n_rays}")
        if self.max_time <= 0:
            raise AbsorptionError(f"max_time must be positive, got {self.max_time}")
        if self.receiver_radius <= 0 or self.speed_of_sound <= 0:
            raise AbsorptionError("receiver_radius and speed_of_sound must be positive")
        if not 0.0 < self.relative_humidity <= 1.0:
            raise AbsorptionError(f"relative_humidity is a fraction in (0, 1], got {self.relative_humidity}")
        if self.kernel_taps > self.kernel_fft_size:
            raise AbsorptionError("kernel_taps cannot exceed kernel_fft_size")
        if self.ray_block_size < 1:
            raise AbsorptionError("ray_block_size must be positive")

    @property
    def max_distance(self) -> float:
        return self.speed_of_sound * self.max_time

    @property
    def n_time_samples(self) -> int:
        return int(round(self.max_time * self.sample_rate)) + 1

    def replace(self, **overrides) -> "SimConfig":
        return SimConfig(self.to_dict(), **overrides)

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "n_rays": self.n_rays,
            "max_image_order": -1 if self.max_image_order is None else self.max_image_order,
            "max_time": self.max_time,
            "temperature_c": self.temperature_c,
            "relative_humidity": self.relative_humidity,
            "pressure_kpa": self.pressure_kpa,
            "air_absorption": self.air_absorption,
            "receiver_radius": self.receiver_radius,
            "speed_of_sound": self.speed_of_sound,
            "diffuse_rain": self.diffuse_rain,
            "kernel_taps": self.kernel_taps,
            "kernel_fft_size": self.kernel_fft_size,
            "ray_block_size": self.ray_block_size,
            "threads": self.threads,
        }

    def provenance(self) -> dict:
        """Settings that determine simulation output; the worker count does not."""
        d = copy.deepcopy(self.to_dict())
        d.pop("threads")
        return d

    def __eq__(self, other):
        return isinstance(other, SimConfig) and self.provenance() == other.provenance()

    def __str__(self):
        order = "distance-pruned" if self.max_image_order is None else self.max_image_order
        return (f"SimConfig["
                f"sample_rate={self.sample_rate}, "
                f"n_rays={self.n_rays}, "
                f"max_image_order={order}, "
                f"max_time={self.max_time}, "
                f"air={self.temperature_c}C/{self.relative_humidity:.0%}/{self.pressure_kpa}kPa"
                f"{'' if self.air_absorption else ' (off)'}, "
                f"receiver_radius={self.receiver_radius}, "
                f"diffuse_rain={self.diffuse_rain}, "
                f"threads={self.threads}"
                f"]")
