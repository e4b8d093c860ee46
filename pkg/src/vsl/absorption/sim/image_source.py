import logging
import math
from typing import Optional, Tuple

import numpy as np

from vsl.absorption.model import InvalidRoomError, RoomSpec, surface_index
from vsl.absorption.sim.air import energy_attenuation_rates
from vsl.absorption.sim.config import SimConfig
from vsl.absorption.sim.echogram import Arrivals
from vsl.absorption.utils import fn, ordered_map


def axis_lattice(source: float, length: float, max_index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Mirror images of a source along one axis of a box [0, length].

    Image i sits at i*L + s for even i and i*L + L - s for odd i, and is reached after |i|
    reflections split between the lower and the upper face.

    :return: indices, image coordinates, lower-face counts, upper-face counts
    """
    idx = np.arange(-max_index, max_index + 1)
    odd = (idx % 2) != 0
    coords = idx * length + np.where(odd, length - source, source)
    n = np.abs(idx)
    half_up = (n + 1) // 2
    half_down = n // 2
    upper = np.where(idx > 0, half_up, half_down)
    lower = np.where(idx > 0, half_down, half_up)
    return idx, coords, lower, upper


def reflection_factors(spec: RoomSpec) -> np.ndarray:
    """(6 surfaces, 6 bands) specular energy factor (1 - alpha)(1 - s) per reflection."""
    return (1.0 - spec.absorption_matrix()) * (1.0 - spec.scattering_matrix())


def axis_factors(refl: np.ndarray, axis: int, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    r_lo = refl[surface_index(axis, False)]
    r_hi = refl[surface_index(axis, True)]
    # 0**0 == 1 keeps unreflected paths intact on fully absorbing faces
    return np.power(r_lo[None, :], lower[:, None]) * np.power(r_hi[None, :], upper[:, None])


def enumerate_image_sources(spec: RoomSpec, config: SimConfig, logger: Optional[logging.Logger] = None) -> Arrivals:
    """
    Specular arrivals of the shoebox image lattice, up to config.max_image_order and pruned to
    path lengths of at most speed_of_sound * max_time. Sorted by arrival time.
    """
    c = config.speed_of_sound
    d_max = config.max_distance
    max_order = config.max_image_order
    dims = spec.geometry.dims
    rcv = spec.receiver

    if np.linalg.norm(spec.source - rcv) <= 0.0:
        raise InvalidRoomError("source and receiver coincide")

    refl = reflection_factors(spec)
    rates = energy_attenuation_rates(config)

    per_axis = []
    for axis in range(3):
        n_idx = int(math.ceil(d_max / dims[axis])) + 1
        if max_order is not None:
            n_idx = min(n_idx, max_order)
        idx, coords, lower, upper = axis_lattice(spec.source[axis], dims[axis], n_idx)
        per_axis.append((idx, coords - rcv[axis], axis_factors(refl, axis, lower, upper)))

    (ix, dx, fx), (iy, dy, fy), (iz, dz, fz) = per_axis
    dyz2 = dy[:, None] ** 2 + dz[None, :] ** 2
    order_yz = np.abs(iy)[:, None] + np.abs(iz)[None, :]
    d_max2 = d_max * d_max

    def slab(k: int) -> Tuple[np.ndarray, np.ndarray]:
        d2 = dx[k] ** 2 + dyz2
        mask = d2 <= d_max2
        if max_order is not None:
            mask &= (abs(ix[k]) + order_yz) <= max_order
        jj, kk = np.nonzero(mask)
        if jj.size == 0:
            return np.zeros(0), np.zeros((0, refl.shape[1]))
        dist = np.sqrt(d2[jj, kk])
        energy = fx[k][None, :] * fy[jj] * fz[kk] / (dist * dist)[:, None]
        energy *= np.exp(-np.outer(dist, rates))
        return dist / c, energy

    slabs = ordered_map(slab, [k for k in range(len(ix)) if dx[k] ** 2 <= d_max2], config.threads)
    times = np.concatenate([s[0] for s in slabs]) if slabs else np.zeros(0)
    energy = np.concatenate([s[1] for s in slabs]) if slabs else np.zeros((0, refl.shape[1]))
    arrivals = Arrivals(times, energy).sorted()
    if logger is not None:
        logger.debug(f"{fn()}: {len(arrivals)} image sources within {d_max:.1f} m, order cap {max_order}")
    return arrivals
