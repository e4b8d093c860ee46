from .filters import octave_filter_bank, octave_sos, check_analysis_rate
from .schroeder import (DecayCurve, SchroederCurve, RtEstimate, backward_integrate, schroeder_curves, estimate_rt,
                        export_schroeder, START_DB)
from .preprocess import (resample_48_to_16, add_noise_snr, normalize_peak, fit_length, preprocess, as_analysis_rir,
                         anti_alias_taps, SOURCE_RATE, TARGET_RATE, VECTOR_LENGTH, DEFAULT_SNR_DB)
