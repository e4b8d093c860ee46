from .metrics import (ErrorRecord, ErrorRecords, BoxStats, absolute_errors, box_stats, box_stats_frame, band_breakdown,
                      screening_errors, tabulate_stats, POOLED)
from .methods import Estimator, ClassicalEstimator, LearnedEstimator, resolve_methods, model_path, MODEL_SUFFIX
from .experiments import (ExperimentFamily, ExperimentConfig, ExperimentReport, ExperimentRunner, RoomOutcome, Variant,
                          eval_default_config, family_variants, run_experiment, dynamic_range_study,
                          DYNAMIC_RANGE_DEPTHS)
