import logging
from enum import Enum
from typing import Dict, Final, List, Optional, Sequence, Tuple

import numpy as np

from vsl.absorption.dsp import estimate_rt, schroeder_curves
from vsl.absorption.model import (AbsorptionError, InsufficientDecayError, IterationCapError, RoomGeometry, RoomSpec,
                                  SURFACE_ORDER, SurfaceClass, UndefinedCurveError, N_BANDS)
from vsl.absorption.sampler.materials import MaterialTable, load_material_table
from vsl.absorption.sampler.strategy import (SamplingStrategy, assemble_room, draw_scattering, sample_acoustics,
                                             sample_geometry, sample_positions, sample_room)
from vsl.absorption.sim import SimConfig, Simulator
from vsl.absorption.utils import fn

REALISTIC_GEOMETRIES: Final = ((4.0, 5.0, 3.0), (10.0, 2.0, 3.0), (10.0, 5.0, 3.0), (5.0, 8.0, 2.5), (10.0, 10.0, 5.0))
FIXED_HEIGHT: Final = 2.5
CUBE_LIKE_RANGE: Final = (2.0, 4.0)
FLAT_RANGE: Final = (8.0, 10.0)
ELONGATED_RANGES: Final = ((2.0, 4.0), (8.0, 10.0))

RT_RANGES: Final = {
    "slightly_reverberant": (0.1, 0.3),
    "semi_reverberant": (0.3, 0.8),
    "reverberant": (0.8, 2.0),
}
SNR_LEVELS: Final = (10.0, 20.0, 30.0, 40.0, 50.0, float("inf"))
FIXED_VALUES: Final = (0.1, 0.3, 0.5, 0.7, 0.9)
RT_DEPTH_DB: Final = 30.0
MAX_REJECTION_FACTOR: Final = 200


class TestSetKind(str, Enum):
    __test__ = False

    REALISTIC = "realistic"
    CUBE_LIKE = "cube_like"
    FLAT = "flat"
    ELONGATED = "elongated"
    RT_CONSTRAINED = "rt_constrained"
    SNR_SWEEP = "snr_sweep"
    SCATTERING_FIXED = "scattering_fixed"
    ABSORPTION_FIXED = "absorption_fixed"


class TestRoom(object):
    """A test room with per-set overrides such as SNR levels."""

    __test__ = False

    def __init__(self, room_id: int, spec: RoomSpec, overrides: Optional[dict] = None):
        self.room_id = room_id
        self.spec = spec
        self.overrides = overrides or {}

    def __str__(self):
        return (f"TestRoom["
                f"room_id={self.room_id}, "
                f"geometry={self.spec.geometry}, "
                f"overrides={self.overrides}"
                f"]")


def realistic_room(rng: np.random.Generator, table: MaterialTable, strategy: SamplingStrategy) -> RoomSpec:
    geometry = RoomGeometry(*REALISTIC_GEOMETRIES[rng.integers(len(REALISTIC_GEOMETRIES))])
    source, receiver = sample_positions(rng, geometry)
    absorption = np.zeros((len(SURFACE_ORDER), N_BANDS))
    names = []
    for row, surface in enumerate(SURFACE_ORDER):
        candidates = table.of_class(SurfaceClass.of(surface), SurfaceClass.REFLECTIVE)
        if not candidates:
            raise AbsorptionError(f"materials table has no entry usable on the {surface.value}")
        material = candidates[rng.integers(len(candidates))]
        absorption[row] = material.absorption.as_array()
        names.append(material.name)
    scattering = np.tile(draw_scattering(rng, strategy), (len(SURFACE_ORDER), 1))
    return assemble_room(geometry, absorption, scattering, source, receiver, names)


def ranged_geometry(rng: np.random.Generator, x_range: Tuple[float, float], y_range: Tuple[float, float]) -> RoomGeometry:
    return RoomGeometry(rng.uniform(*x_range), rng.uniform(*y_range), FIXED_HEIGHT)


def rt30_per_band(spec: RoomSpec, simulator: Simulator, seed: int) -> np.ndarray:
    """RT30 per band of a simulated RIR; NaN where the decay is too short."""
    curves = schroeder_curves(simulator.simulate(spec, seed))
    out = np.full(N_BANDS, np.nan)
    for b in range(N_BANDS):
        try:
            out[b] = estimate_rt(curves[b], RT_DEPTH_DB).rt
        except (InsufficientDecayError, UndefinedCurveError):
            pass
    return out


def screening_config(sim_config: SimConfig, rt_range: Tuple[float, float]) -> SimConfig:
    # -35 dB is reached after 35/60 of the reverberation time
    duration = max(sim_config.max_time, 0.6 * rt_range[1] + 0.1)
    order = sim_config.max_image_order
    order = 50 if order is None or order < 0 else min(order, 50)
    return sim_config.replace(max_time=duration, max_image_order=order)


def craft_test_set(
        kind: TestSetKind,
        n: int,
        rng: np.random.Generator,
        sim_config: Optional[SimConfig] = None,
        rt_range: Optional[Tuple[float, float]] = None,
        snr_levels: Optional[Sequence[float]] = None,
        value: Optional[float] = None,
        materials: Optional[MaterialTable] = None,
        max_rejection_factor: int = MAX_REJECTION_FACTOR,
        logger: Optional[logging.Logger] = None
) -> List[TestRoom]:
    """
    Build one evaluation test set. Acoustics follow the RB strategy unless the kind says otherwise.
    """
    kind = TestSetKind(kind)
    logger = logger if logger is not None else logging.getLogger(__name__)
    table = materials if materials is not None else load_material_table()
    strategy = SamplingStrategy.rb(table.ranges)
    rooms: List[TestRoom] = []

    match kind:
        case TestSetKind.REALISTIC:
            for i in range(n):
                rooms.append(TestRoom(i, realistic_room(rng, table, strategy)))
        case TestSetKind.CUBE_LIKE | TestSetKind.FLAT | TestSetKind.ELONGATED:
            x_range, y_range = {
                TestSetKind.CUBE_LIKE: (CUBE_LIKE_RANGE, CUBE_LIKE_RANGE),
                TestSetKind.FLAT: (FLAT_RANGE, FLAT_RANGE),
                TestSetKind.ELONGATED: ELONGATED_RANGES,
            }[kind]
            for i in range(n):
                rooms.append(TestRoom(i, sample_room(rng, strategy, ranged_geometry(rng, x_range, y_range))))
        case TestSetKind.SNR_SWEEP:
            levels = [float(v) for v in (snr_levels if snr_levels is not None else SNR_LEVELS)]
            for i in range(n):
                rooms.append(TestRoom(i, sample_room(rng, strategy), {"snr_levels": levels}))
        case TestSetKind.SCATTERING_FIXED | TestSetKind.ABSORPTION_FIXED:
            if value is None or not 0.0 <= value <= 1.0:
                raise AbsorptionError(f"{kind.value} needs a constant in [0,1], got {value}")
            for i in range(n):
                geometry = sample_geometry(rng)
                source, receiver = sample_positions(rng, geometry)
                absorption, scattering = sample_acoustics(rng, strategy)
                if kind == TestSetKind.SCATTERING_FIXED:
                    scattering = np.full_like(scattering, value)
                else:
                    absorption = np.full_like(absorption, value)
                spec = assemble_room(geometry, absorption, scattering, source, receiver)
                rooms.append(TestRoom(i, spec, {kind.value: value}))
        case TestSetKind.RT_CONSTRAINED:
            if rt_range is None or not 0.0 < rt_range[0] < rt_range[1]:
                raise AbsorptionError(f"rt_constrained needs a range (lo, hi) with 0 < lo < hi, got {rt_range}")
            simulator = Simulator(screening_config(sim_config or SimConfig(), rt_range), logger)
            attempts, cap = 0, max(1, n * max_rejection_factor)
            while len(rooms) < n:
                if attempts >= cap:
                    raise IterationCapError(
                        f"rt_constrained {rt_range}: only {len(rooms)}/{n} rooms after {attempts} candidates")
                attempts += 1
                spec = sample_room(rng, strategy)
                seed = int(rng.integers(2 ** 31))
                rt = rt30_per_band(spec, simulator, seed)
                if np.all((rt >= rt_range[0]) & (rt <= rt_range[1])):
                    overrides = {"rt_range": list(rt_range), "screen_seed": seed, "rt30": rt.tolist()}
                    rooms.append(TestRoom(len(rooms), spec, overrides))
            logger.info(f"{fn()}: rt_constrained {rt_range} accepted {n} of {attempts} candidates")
    return rooms
