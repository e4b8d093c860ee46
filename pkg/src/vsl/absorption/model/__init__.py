from .errors import *
from .bands import OctaveBands, OCTAVE_BANDS, N_BANDS, BandProfile, as_profile
from .room import (Surface, SurfaceClass, SURFACE_ORDER, SURFACE_PLANES, WALLS, surface_index, RoomGeometry,
                   SurfaceAcoustics, AbsorptionLabel, RoomSpec, mean_absorption)
from .rir import Rir
