from .materials import Material, MaterialRanges, MaterialTable, load_material_table, parse_material_table
from .strategy import (StrategyKind, SamplingStrategy, sample_geometry, sample_positions, sample_acoustics, sample_room,
                       assemble_room, HEIGHT_RANGE, WIDTH_RANGE, WALL_MARGIN, MIN_SEPARATION, RB_SCATTERING)
from .test_sets import (TestSetKind, TestRoom, craft_test_set, REALISTIC_GEOMETRIES, RT_RANGES, SNR_LEVELS,
                        FIXED_VALUES)
