from enum import Enum
from typing import Dict, Final, List, Optional, Sequence, Tuple

import numpy as np

from vsl.absorption.model.bands import BandProfile, N_BANDS, as_profile
from vsl.absorption.model.errors import InvalidRoomError


class Surface(str, Enum):
    """Faces of a shoebox room in their fixed serialization order."""
    FLOOR = "floor"
    CEILING = "ceiling"
    WEST = "west"
    SOUTH = "south"
    EAST = "east"
    NORTH = "north"


SURFACE_ORDER: Final = (Surface.FLOOR, Surface.CEILING, Surface.WEST, Surface.SOUTH, Surface.EAST, Surface.NORTH)
WALLS: Final = (Surface.WEST, Surface.SOUTH, Surface.EAST, Surface.NORTH)

# (axis, coordinate is the upper face) per surface, x=0 west, y=0 south, z=0 floor
SURFACE_PLANES: Final = {
    Surface.FLOOR: (2, False),
    Surface.CEILING: (2, True),
    Surface.WEST: (0, False),
    Surface.SOUTH: (1, False),
    Surface.EAST: (0, True),
    Surface.NORTH: (1, True),
}


class SurfaceClass(str, Enum):
    REFLECTIVE = "reflective"
    WALL = "wall"
    FLOOR = "floor"
    CEILING = "ceiling"

    @staticmethod
    def of(surface: Surface) -> "SurfaceClass":
        if surface == Surface.FLOOR:
            return SurfaceClass.FLOOR
        if surface == Surface.CEILING:
            return SurfaceClass.CEILING
        return SurfaceClass.WALL


def surface_index(axis: int, upper: bool) -> int:
    for i, s in enumerate(SURFACE_ORDER):
        if SURFACE_PLANES[s] == (axis, upper):
            return i
    raise KeyError((axis, upper))


class RoomGeometry(object):

    __slots__ = ("lx", "ly", "lz")

    def __init__(self, lx: float, ly: float, lz: float):
        dims = (float(lx), float(ly), float(lz))
        if not all(np.isfinite(d) and d > 0 for d in dims):
            raise InvalidRoomError(f"room dimensions must be positive, got {dims}")
        object.__setattr__(self, "lx", dims[0])
        object.__setattr__(self, "ly", dims[1])
        object.__setattr__(self, "lz", dims[2])

    def __setattr__(self, key, value):
        raise AttributeError("RoomGeometry is immutable")

    @property
    def dims(self) -> np.ndarray:
        return np.array([self.lx, self.ly, self.lz], dtype=float)

    @property
    def volume(self) -> float:
        return self.lx * self.ly * self.lz

    @property
    def surface_area(self) -> float:
        return 2.0 * (self.lx * self.ly + self.lx * self.lz + self.ly * self.lz)

    def face_area(self, surface: Surface) -> float:
        match surface:
            case Surface.FLOOR | Surface.CEILING:
                return self.lx * self.ly
            case Surface.WEST | Surface.EAST:
                return self.ly * self.lz
            case Surface.SOUTH | Surface.NORTH:
                return self.lx * self.lz
        raise KeyError(surface)

    def face_areas(self) -> np.ndarray:
        return np.array([self.face_area(s) for s in SURFACE_ORDER], dtype=float)

    def contains(self, point: Sequence[float], margin: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p > margin) and np.all(p < self.dims - margin))

    def __eq__(self, other):
        return isinstance(other, RoomGeometry) and (self.lx, self.ly, self.lz) == (other.lx, other.ly, other.lz)

    def __hash__(self):
        return hash((self.lx, self.ly, self.lz))

    def __str__(self):
        return f"RoomGeometry[lx={self.lx:.3f}, ly={self.ly:.3f}, lz={self.lz:.3f}]"

    __repr__ = __str__


class SurfaceAcoustics(object):

    __slots__ = ("absorption", "scattering", "material")

    def __init__(self, absorption, scattering, material: Optional[str] = None):
        absorption = as_profile(absorption)
        scattering = as_profile(scattering)
        if not absorption.is_coefficient():
            raise InvalidRoomError(f"absorption outside [0,1]: {absorption}")
        if not scattering.is_coefficient():
            raise InvalidRoomError(f"scattering outside [0,1]: {scattering}")
        object.__setattr__(self, "absorption", absorption)
        object.__setattr__(self, "scattering", scattering)
        object.__setattr__(self, "material", material)

    def __setattr__(self, key, value):
        raise AttributeError("SurfaceAcoustics is immutable")

    def __eq__(self, other):
        return (isinstance(other, SurfaceAcoustics) and self.absorption == other.absorption
                and self.scattering == other.scattering)

    def __str__(self):
        return (f"SurfaceAcoustics["
                f"absorption={self.absorption}, "
                f"scattering={self.scattering}, "
                f"material={self.material}"
                f"]")


class AbsorptionLabel(object):

    __slots__ = ("alpha_bar", "s_bar")

    def __init__(self, alpha_bar: Sequence[float], s_bar: Optional[Sequence[float]] = None):
        a = np.asarray(alpha_bar, dtype=float).copy()
        if a.shape != (N_BANDS,) or np.any(a < 0) or np.any(a > 1):
            raise InvalidRoomError(f"mean absorption must be {N_BANDS} values in [0,1], got {a}")
        a.setflags(write=False)
        s = None
        if s_bar is not None:
            s = np.asarray(s_bar, dtype=float).copy()
            if s.shape != (N_BANDS,) or np.any(s < 0) or np.any(s > 1):
                raise InvalidRoomError(f"mean scattering must be {N_BANDS} values in [0,1], got {s}")
            s.setflags(write=False)
        object.__setattr__(self, "alpha_bar", a)
        object.__setattr__(self, "s_bar", s)

    def __setattr__(self, key, value):
        raise AttributeError("AbsorptionLabel is immutable")

    def as_vector(self, with_scattering: bool = False) -> np.ndarray:
        if not with_scattering:
            return np.array(self.alpha_bar)
        s = self.s_bar if self.s_bar is not None else np.zeros(N_BANDS)
        return np.concatenate([self.alpha_bar, s])

    def __str__(self):
        s = "None" if self.s_bar is None else np.array2string(self.s_bar, precision=4)
        return (f"AbsorptionLabel["
                f"alpha_bar={np.array2string(self.alpha_bar, precision=4)}, "
                f"s_bar={s}"
                f"]")


class RoomSpec(object):
    """
    Full input of one simulation: geometry, per-surface acoustics in SURFACE_ORDER,
    source and receiver positions in meters.
    """

    __slots__ = ("geometry", "surfaces", "source", "receiver")

    def __init__(
            self,
            geometry: RoomGeometry,
            surfaces: Sequence[SurfaceAcoustics],
            source: Sequence[float],
            receiver: Sequence[float]
    ):
        surfaces = tuple(surfaces)
        if len(surfaces) != len(SURFACE_ORDER):
            raise InvalidRoomError(f"expected {len(SURFACE_ORDER)} surfaces, got {len(surfaces)}")
        src = np.asarray(source, dtype=np.float64).copy()
        rcv = np.asarray(receiver, dtype=np.float64).copy()
        if src.shape != (3,) or rcv.shape != (3,):
            raise InvalidRoomError("source and receiver must be 3-D points")
        if not geometry.contains(src):
            raise InvalidRoomError(f"source {src} outside {geometry}")
        if not geometry.contains(rcv):
            raise InvalidRoomError(f"receiver {rcv} outside {geometry}")
        src.setflags(write=False)
        rcv.setflags(write=False)
        object.__setattr__(self, "geometry", geometry)
        object.__setattr__(self, "surfaces", surfaces)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "receiver", rcv)

    def __setattr__(self, key, value):
        raise AttributeError("RoomSpec is immutable")

    @classmethod
    def uniform(cls, geometry: RoomGeometry, absorption: float, scattering: float, source, receiver) -> "RoomSpec":
        surf = SurfaceAcoustics(BandProfile.flat(absorption), BandProfile.flat(scattering))
        return cls(geometry, [surf] * len(SURFACE_ORDER), source, receiver)

    def surface(self, which: Surface) -> SurfaceAcoustics:
        return self.surfaces[SURFACE_ORDER.index(which)]

    def absorption_matrix(self) -> np.ndarray:
        """(6 surfaces, 6 bands) absorption coefficients."""
        return np.stack([s.absorption.as_array() for s in self.surfaces])

    def scattering_matrix(self) -> np.ndarray:
        return np.stack([s.scattering.as_array() for s in self.surfaces])

    def with_acoustics(self, absorption: np.ndarray, scattering: np.ndarray) -> "RoomSpec":
        surfaces = [SurfaceAcoustics(a, s) for a, s in zip(absorption, scattering)]
        return RoomSpec(self.geometry, surfaces, self.source, self.receiver)

    def to_dict(self) -> dict:
        d = {
            "geometry": {"lx": self.geometry.lx, "ly": self.geometry.ly, "lz": self.geometry.lz},
            "source": [float(v) for v in self.source],
            "receiver": [float(v) for v in self.receiver],
            "surfaces": {},
        }
        for name, surf in zip(SURFACE_ORDER, self.surfaces):
            entry = {
                "absorption": list(surf.absorption.values),
                "scattering": list(surf.scattering.values),
            }
            if surf.material is not None:
                entry["material"] = surf.material
            d["surfaces"][name.value] = entry
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RoomSpec":
        try:
            g = d["geometry"]
            geometry = RoomGeometry(g["lx"], g["ly"], g["lz"])
            surfaces = []
            for name in SURFACE_ORDER:
                entry = d["surfaces"][name.value]
                surfaces.append(SurfaceAcoustics(entry["absorption"], entry["scattering"], entry.get("material")))
            return cls(geometry, surfaces, d["source"], d["receiver"])
        except KeyError as e:
            raise InvalidRoomError(f"room document misses key {e}") from e

    def __eq__(self, other):
        return (isinstance(other, RoomSpec) and self.geometry == other.geometry
                and self.surfaces == other.surfaces
                and np.array_equal(self.source, other.source)
                and np.array_equal(self.receiver, other.receiver))

    def __str__(self):
        return (f"RoomSpec["
                f"geometry={self.geometry}, "
                f"source={self.source.tolist()}, "
                f"receiver={self.receiver.tolist()}, "
                f"surfaces={[str(s) for s in self.surfaces]}"
                f"]")


def mean_absorption(spec: RoomSpec) -> AbsorptionLabel:
    """Face-area weighted mean absorption and scattering per band."""
    areas = spec.geometry.face_areas()
    weights = areas / areas.sum()
    alpha_bar = weights @ spec.absorption_matrix()
    s_bar = weights @ spec.scattering_matrix()
    # weighted means of values in [0,1] may overshoot by an ulp
    return AbsorptionLabel(np.clip(alpha_bar, 0.0, 1.0), np.clip(s_bar, 0.0, 1.0))
