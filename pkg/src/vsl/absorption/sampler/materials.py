from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import tomli

from vsl.absorption.model import AbsorptionError, BandProfile, SurfaceClass

DEFAULT_MATERIALS_FILE = Path(__file__).parent.resolve() / "data" / "materials.toml"


class Material(object):

    def __init__(self, name: str, surface_class: SurfaceClass, absorption: BandProfile):
        self.name = name
        self.surface_class = surface_class
        self.absorption = absorption

    def __str__(self):
        return (f"Material["
                f"name={self.name}, "
                f"class={self.surface_class.value}, "
                f"absorption={self.absorption}"
                f"]")


class MaterialRanges(object):
    """
    Absorption ranges of the reflectivity-biased strategy: a scalar range for reflective
    surfaces and per-band lower/upper envelopes for walls, floors and ceilings.
    """

    def __init__(self, reflective: Tuple[float, float], envelopes: Dict[SurfaceClass, Tuple[BandProfile, BandProfile]]):
        self.reflective = (float(reflective[0]), float(reflective[1]))
        self.envelopes = envelopes
        self.validate()

    def validate(self):
        lo, hi = self.reflective
        if not 0.0 <= lo <= hi <= 1.0:
            raise AbsorptionError(f"invalid reflective range {self.reflective}")
        for cls in (SurfaceClass.WALL, SurfaceClass.FLOOR, SurfaceClass.CEILING):
            if cls not in self.envelopes:
                raise AbsorptionError(f"missing {cls.value} envelope")
            lower, upper = self.envelopes[cls]
            for b in range(len(lower)):
                if not 0.0 <= lower[b] <= upper[b] <= 1.0:
                    raise AbsorptionError(f"{cls.value} envelope band {b}: need 0 <= {lower[b]} <= {upper[b]} <= 1")

    def envelope(self, surface_class: SurfaceClass) -> Tuple[BandProfile, BandProfile]:
        return self.envelopes[surface_class]

    def to_dict(self) -> dict:
        return {
            "reflective": list(self.reflective),
            "envelopes": {cls.value: {"lower": list(lo.values), "upper": list(hi.values)}
                          for cls, (lo, hi) in self.envelopes.items()},
        }

    def __str__(self):
        env = ", ".join(f"{cls.value}={lo}..{hi}" for cls, (lo, hi) in self.envelopes.items())
        return f"MaterialRanges[reflective={self.reflective}, {env}]"


class MaterialTable(object):

    def __init__(self, ranges: MaterialRanges, materials: List[Material], source: Optional[str] = None):
        self.ranges = ranges
        self.materials = materials
        self.source = source

    def of_class(self, *classes: SurfaceClass) -> List[Material]:
        return [m for m in self.materials if m.surface_class in classes]

    def __len__(self):
        return len(self.materials)

    def __str__(self):
        return f"MaterialTable[source={self.source}, materials={len(self.materials)}, ranges={self.ranges}]"


def parse_material_table(config: dict, source: Optional[str] = None) -> MaterialTable:
    try:
        envelopes = {}
        for name, env in config["envelopes"].items():
            envelopes[SurfaceClass(name)] = (BandProfile(env["lower"]), BandProfile(env["upper"]))
        ranges = MaterialRanges(tuple(config["reflective"]["level"]), envelopes)
        materials = []
        for entry in config.get("materials", []):
            absorption = BandProfile(entry["absorption"])
            if not absorption.is_coefficient():
                raise AbsorptionError(f"material {entry['name']} has absorption outside [0,1]")
            materials.append(Material(entry["name"], SurfaceClass(entry["class"]), absorption))
    except (KeyError, ValueError) as e:
        raise AbsorptionError(f"malformed materials table {source}: {e}") from e
    return MaterialTable(ranges, materials, source)


def load_material_table(file_name: Union[str, Path, None] = None) -> MaterialTable:
    path = Path(file_name) if file_name is not None else DEFAULT_MATERIALS_FILE
    with open(path, mode="rb") as fp:
        config = tomli.load(fp)
    return parse_material_table(config, str(path))
