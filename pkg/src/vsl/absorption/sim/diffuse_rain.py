import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from vsl.absorption.model import N_BANDS, RoomSpec, surface_index
from vsl.absorption.sim.air import energy_attenuation_rates
from vsl.absorption.sim.config import SimConfig
from vsl.absorption.sim.echogram import Arrivals
from vsl.absorption.utils import fn, ordered_map

EXTINCTION_RATIO = 1e-6

# FACE_OF[axis, upper] -> surface index
FACE_OF = np.array([[surface_index(a, False), surface_index(a, True)] for a in range(3)])


class EnergyLedger(object):
    """
    Per-band energy bookkeeping of the ray tracer.

    emitted = absorbed + air_loss + scattered + expired + extinguished holds up to rounding.
    scattered is the energy leaving the rays diffusely; received is the part of it the
    receiver collected, after the hit-to-receiver air loss.
    """

    def __init__(self):
        self.emitted = np.zeros(N_BANDS)
        self.absorbed = np.zeros(N_BANDS)
        self.air_loss = np.zeros(N_BANDS)
        self.scattered = np.zeros(N_BANDS)
        self.expired = np.zeros(N_BANDS)
        self.extinguished = np.zeros(N_BANDS)
        self.received = np.zeros(N_BANDS)

    def merge(self, other: "EnergyLedger"):
        self.emitted += other.emitted
        self.absorbed += other.absorbed
        self.air_loss += other.air_loss
        self.scattered += other.scattered
        self.expired += other.expired
        self.extinguished += other.extinguished
        self.received += other.received
        return self

    def accounted(self) -> np.ndarray:
        return self.absorbed + self.air_loss + self.scattered + self.expired + self.extinguished

    def imbalance(self) -> float:
        """Largest relative gap between emitted and accounted energy over the bands."""
        denom = np.where(self.emitted > 0, self.emitted, 1.0)
        return float(np.max(np.abs(self.emitted - self.accounted()) / denom))

    def __str__(self):
        return (f"EnergyLedger["
                f"emitted={self.emitted.sum():.6g}, "
                f"absorbed={self.absorbed.sum():.6g}, "
                f"air_loss={self.air_loss.sum():.6g}, "
                f"scattered={self.scattered.sum():.6g}, "
                f"expired={self.expired.sum():.6g}, "
                f"extinguished={self.extinguished.sum():.6g}, "
                f"received={self.received.sum():.6g}"
                f"]")


def isotropic_directions(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    r = np.sqrt(1.0 - u * u)
    return np.stack([r * np.cos(phi), r * np.sin(phi), u], axis=1)


class DiffuseRainTracer(object):
    """
    Stochastic ray tracer depositing scattered energy on a receiver sphere at every wall hit.

    At a hit the receiver gets E(b)(1 - alpha)s(cos(theta)/pi)Omega air(b, d); the ray then
    continues specularly with E(b)(1 - alpha)(1 - s), air absorption applied along each segment.
    """

    def __init__(self, spec: RoomSpec, config: SimConfig, logger: Optional[logging.Logger] = None):
        self.spec = spec
        self.config = config
        self.logger = logger
        self.dims = spec.geometry.dims
        self.absorption = spec.absorption_matrix()
        self.scattering = spec.scattering_matrix()
        self.rates = energy_attenuation_rates(config)

    def blocks(self) -> List[Tuple[int, int]]:
        size = self.config.ray_block_size
        n = self.config.n_rays
        return [(k, min(size, n - k * size)) for k in range((n + size - 1) // size)]

    def receiver_solid_angle(self, d: np.ndarray) -> np.ndarray:
        r = self.config.receiver_radius
        ratio = np.clip(r / np.maximum(d, 1e-300), 0.0, 1.0)
        omega = 2.0 * math.pi * (1.0 - np.sqrt(1.0 - ratio * ratio))
        return np.where(d <= r, 2.0 * math.pi, omega)

    def trace_block(self, seed: int, block: int, n: int) -> Tuple[Arrivals, EnergyLedger]:
        cfg = self.config
        rng = np.random.default_rng([seed, block])
        ledger = EnergyLedger()

        e0 = 1.0 / cfg.n_rays
        threshold = EXTINCTION_RATIO * e0
        pos = np.tile(self.spec.source, (n, 1))
        direction = isotropic_directions(rng, n)
        energy = np.full((n, N_BANDS), e0)
        travelled = np.zeros(n)
        ledger.emitted += energy.sum(axis=0)

        receiver = self.spec.receiver
        d_max = cfg.max_distance
        times, energies = [], []

        while len(pos):
            with np.errstate(divide="ignore", invalid="ignore"):
                t_axis = np.where(direction > 0, (self.dims - pos) / direction,
                                  np.where(direction < 0, -pos / direction, np.inf))
            axis = np.argmin(t_axis, axis=1)
            rows = np.arange(len(pos))
            seg = t_axis[rows, axis]
            upper = direction[rows, axis] > 0
            new_travel = travelled + seg

            expired = new_travel > d_max
            if expired.any():
                ledger.expired += energy[expired].sum(axis=0)
                keep = ~expired
                pos, direction, energy, travelled = pos[keep], direction[keep], energy[keep], travelled[keep]
                axis, seg, upper, new_travel = axis[keep], seg[keep], upper[keep], new_travel[keep]
                rows = np.arange(len(pos))
                if not len(pos):
                    break

            hit = pos + seg[:, None] * direction
            hit = np.clip(hit, 0.0, self.dims)
            hit[rows, axis] = np.where(upper, self.dims[axis], 0.0)
            face = FACE_OF[axis, upper.astype(int)]
            inward = np.where(upper, -1.0, 1.0)

            incoming = energy * np.exp(-np.outer(seg, self.rates))
            ledger.air_loss += (energy - incoming).sum(axis=0)
            alpha = self.absorption[face]
            ledger.absorbed += (incoming * alpha).sum(axis=0)
            reflected = incoming * (1.0 - alpha)
            scattered = reflected * self.scattering[face]
            ledger.scattered += scattered.sum(axis=0)
            specular = reflected - scattered

            to_rcv = receiver - hit
            d_r = np.linalg.norm(to_rcv, axis=1)
            cos_theta = np.clip(to_rcv[rows, axis] * inward / np.maximum(d_r, 1e-300), 0.0, 1.0)
            weight = cos_theta / math.pi * self.receiver_solid_angle(d_r)
            rain = scattered * weight[:, None] * np.exp(-np.outer(d_r, self.rates))
            arrival = (new_travel + d_r) / cfg.speed_of_sound
            record = (arrival <= cfg.max_time) & np.any(rain > 0.0, axis=1)
            if record.any():
                times.append(arrival[record])
                energies.append(rain[record])
                ledger.received += rain[record].sum(axis=0)

            new_dir = direction.copy()
            new_dir[rows, axis] = -new_dir[rows, axis]

            alive = np.any(specular >= threshold, axis=1)
            if not alive.all():
                ledger.extinguished += specular[~alive].sum(axis=0)
            pos, direction, energy, travelled = hit[alive], new_dir[alive], specular[alive], new_travel[alive]

        if times:
            arrivals = Arrivals(np.concatenate(times), np.concatenate(energies))
        else:
            arrivals = Arrivals()
        return arrivals, ledger

    def trace(self, seed: int) -> Tuple[Arrivals, EnergyLedger]:
        ledger = EnergyLedger()
        if self.config.n_rays == 0:
            return Arrivals(), ledger
        results = ordered_map(lambda blk: self.trace_block(seed, blk[0], blk[1]), self.blocks(), self.config.threads)
        for _, block_ledger in results:
            ledger.merge(block_ledger)
        arrivals = Arrivals.concat([r[0] for r in results]).sorted()
        if self.logger is not None:
            self.logger.debug(f"{fn()}: {self.config.n_rays} rays, {len(arrivals)} diffuse arrivals, {ledger}")
        return arrivals, ledger


def trace_diffuse_rain(spec: RoomSpec, config: SimConfig, seed: int, logger: Optional[logging.Logger] = None,
                       with_ledger: bool = False):
    arrivals, ledger = DiffuseRainTracer(spec, config, logger).trace(seed)
    return (arrivals, ledger) if with_ledger else arrivals
