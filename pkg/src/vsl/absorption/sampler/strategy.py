from enum import Enum
from typing import Final, Optional, Tuple

import numpy as np

from vsl.absorption.model import (BandProfile, InfeasibleGeometryError, IterationCapError, N_BANDS, RoomGeometry,
                                  RoomSpec, SURFACE_ORDER, SurfaceAcoustics, SurfaceClass, WALLS)
from vsl.absorption.sampler.materials import MaterialRanges, load_material_table

HEIGHT_RANGE: Final = (2.5, 4.0)
WIDTH_RANGE: Final = (1.5, 10.0)
WALL_MARGIN: Final = 0.5
MIN_SEPARATION: Final = 1.0
MAX_POSITION_TRIES: Final = 10000

UNIF_SCATTERING: Final = (BandProfile.flat(0.0), BandProfile.flat(1.0))
RB_SCATTERING: Final = (BandProfile([0.0, 0.0, 0.0, 0.2, 0.2, 0.2]), BandProfile([0.3, 0.3, 0.3, 1.0, 1.0, 1.0]))


class StrategyKind(str, Enum):
    UNIF = "unif"
    RB = "rb"


class SamplingStrategy(object):
    """How absorption and scattering profiles are drawn for a random room."""

    def __init__(
            self,
            kind: StrategyKind,
            material_ranges: Optional[MaterialRanges] = None,
            scattering_ranges: Optional[Tuple[BandProfile, BandProfile]] = None
    ):
        self.kind = StrategyKind(kind)
        if self.kind == StrategyKind.RB and material_ranges is None:
            material_ranges = load_material_table().ranges
        self.material_ranges = material_ranges
        if scattering_ranges is None:
            scattering_ranges = RB_SCATTERING if self.kind == StrategyKind.RB else UNIF_SCATTERING
        self.scattering_ranges = scattering_ranges

    @classmethod
    def unif(cls) -> "SamplingStrategy":
        return cls(StrategyKind.UNIF)

    @classmethod
    def rb(cls, material_ranges: Optional[MaterialRanges] = None) -> "SamplingStrategy":
        return cls(StrategyKind.RB, material_ranges)

    @classmethod
    def named(cls, name: str) -> "SamplingStrategy":
        return cls(StrategyKind(name.lower()))

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "scattering_lower": list(self.scattering_ranges[0].values),
            "scattering_upper": list(self.scattering_ranges[1].values),
        }
        if self.material_ranges is not None:
            d["material_ranges"] = self.material_ranges.to_dict()
        return d

    def __str__(self):
        return (f"SamplingStrategy["
                f"kind={self.kind.value}, "
                f"scattering={self.scattering_ranges[0]}..{self.scattering_ranges[1]}"
                f"]")


def sample_geometry(rng: np.random.Generator) -> RoomGeometry:
    lx, ly = rng.uniform(*WIDTH_RANGE, size=2)
    lz = rng.uniform(*HEIGHT_RANGE)
    return RoomGeometry(lx, ly, lz)


def sample_positions(
        rng: np.random.Generator,
        geometry: RoomGeometry,
        margin: float = WALL_MARGIN,
        min_separation: float = MIN_SEPARATION,
        max_tries: int = MAX_POSITION_TRIES
) -> Tuple[np.ndarray, np.ndarray]:
    """Source and receiver at least `margin` from every face and `min_separation` apart, by rejection."""
    lo = np.full(3, margin)
    hi = geometry.dims - margin
    if np.any(hi <= lo):
        raise InfeasibleGeometryError(f"{geometry} leaves no room for a {margin} m wall margin")
    if np.linalg.norm(hi - lo) < min_separation:
        raise InfeasibleGeometryError(f"{geometry}: no two points of the margin box are {min_separation} m apart")
    for _ in range(max_tries):
        src = rng.uniform(lo, hi)
        rcv = rng.uniform(lo, hi)
        if np.linalg.norm(src - rcv) >= min_separation:
            return src, rcv
    raise IterationCapError(f"{geometry}: no valid source/receiver pair after {max_tries} draws")


def draw_scattering(rng: np.random.Generator, strategy: SamplingStrategy) -> np.ndarray:
    lower, upper = strategy.scattering_ranges
    return rng.uniform(lower.as_array(), upper.as_array())


def sample_acoustics(rng: np.random.Generator, strategy: SamplingStrategy) -> Tuple[np.ndarray, np.ndarray]:
    """
    Absorption and scattering of the six surfaces, each of shape (6 surfaces, 6 bands).

    One scattering profile is drawn per room and shared by all surfaces.
    """
    n_surfaces = len(SURFACE_ORDER)
    if strategy.kind == StrategyKind.UNIF:
        absorption = rng.uniform(0.0, 1.0, size=(n_surfaces, N_BANDS))
    else:
        ranges = strategy.material_ranges
        absorption = np.zeros((n_surfaces, N_BANDS))
        groups = (
            (SurfaceClass.WALL, [SURFACE_ORDER.index(w) for w in WALLS]),
            (SurfaceClass.FLOOR, [0]),
            (SurfaceClass.CEILING, [1]),
        )
        for surface_class, rows in groups:
            reflective = rng.uniform() < 0.5
            for row in rows:
                if reflective:
                    absorption[row] = rng.uniform(*ranges.reflective)
                else:
                    lower, upper = ranges.envelope(surface_class)
                    absorption[row] = rng.uniform(lower.as_array(), upper.as_array())
    scattering = np.tile(draw_scattering(rng, strategy), (n_surfaces, 1))
    return absorption, scattering


def assemble_room(geometry: RoomGeometry, absorption: np.ndarray, scattering: np.ndarray, source, receiver,
                  materials=None) -> RoomSpec:
    materials = materials or [None] * len(SURFACE_ORDER)
    surfaces = [SurfaceAcoustics(a, s, m) for a, s, m in zip(absorption, scattering, materials)]
    return RoomSpec(geometry, surfaces, source, receiver)


def sample_room(rng: np.random.Generator, strategy: SamplingStrategy, geometry: Optional[RoomGeometry] = None) -> RoomSpec:
    geometry = geometry if geometry is not None else sample_geometry(rng)
    source, receiver = sample_positions(rng, geometry)
    absorption, scattering = sample_acoustics(rng, strategy)
    return assemble_room(geometry, absorption, scattering, source, receiver)
