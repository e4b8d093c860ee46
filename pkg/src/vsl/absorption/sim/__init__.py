from .config import SimConfig, sim_default_config
from .air import air_attenuation, energy_attenuation_rates, iso9613_db_per_m
from .echogram import Arrivals, Echogram
from .image_source import enumerate_image_sources, axis_lattice, reflection_factors
from .diffuse_rain import DiffuseRainTracer, EnergyLedger, trace_diffuse_rain
from .synthesis import band_kernels, band_amplitudes, minimum_phase, render_rir
from .simulator import Simulator, simulate
