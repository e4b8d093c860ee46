import logging
from typing import Optional

from vsl.absorption.model import RoomSpec, Rir
from vsl.absorption.sim.config import SimConfig
from vsl.absorption.sim.diffuse_rain import DiffuseRainTracer, EnergyLedger
from vsl.absorption.sim.echogram import Arrivals, Echogram
from vsl.absorption.sim.image_source import enumerate_image_sources
from vsl.absorption.sim.synthesis import render_rir
from vsl.absorption.utils import fn


class Simulator(object):
    """
    Hybrid RIR engine: image sources for the specular stream, diffuse rain for the scattered one.
    """

    def __init__(self, config: SimConfig, logger: Optional[logging.Logger] = None):
        self.config = config
        self.logger = logger if logger is not None else logging.getLogger(__name__)
        self.last_ledger: Optional[EnergyLedger] = None

    def echogram(self, spec: RoomSpec, seed: int) -> Echogram:
        specular = enumerate_image_sources(spec, self.config, self.logger)
        diffuse = Arrivals()
        self.last_ledger = None
        if self.config.diffuse_rain and self.config.n_rays > 0:
            diffuse, self.last_ledger = DiffuseRainTracer(spec, self.config, self.logger).trace(seed)
        echogram = Echogram(specular, diffuse)
        echogram.validate(self.config.max_time)
        return echogram

    def simulate(self, spec: RoomSpec, seed: int) -> Rir:
        echogram = self.echogram(spec, seed)
        rir = render_rir(echogram, self.config)
        self.logger.debug(f"{fn()}: seed={seed} {echogram} -> {rir}")
        return rir

    def __str__(self):
        return f"Simulator[config={self.config}]"


def simulate(spec: RoomSpec, config: SimConfig, seed: int, logger: Optional[logging.Logger] = None) -> Rir:
    return Simulator(config, logger).simulate(spec, seed)
