from .reverberation import (ClassicalMethod, BandEstimate, ClassicalEstimate, sabine, eyring, estimate_alpha_classical,
                            SABINE_CONSTANT)
from .screening import (ScreeningClass, BandReference, ReferenceAbsorption, classify_schroeder, screening_matrix,
                        aggregate_reference, reference_deviation, SCREEN_MIN_R2)
