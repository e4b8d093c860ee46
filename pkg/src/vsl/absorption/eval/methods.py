import logging
from pathlib import Path
from typing import Dict, Final, List, Optional, Sequence, Union

import numpy as np

from vsl.absorption.baselines import ClassicalMethod, estimate_alpha_classical
from vsl.absorption.dsp import VECTOR_LENGTH, as_analysis_rir
from vsl.absorption.model import MissingModelError, RoomGeometry
from vsl.absorption.nn import Model, load_model, raw_to_alpha
from vsl.absorption.utils import fn

MODEL_SUFFIX: Final = ".absk"


class Estimator(object):
    """Per-band absorption from a preprocessed 16 kHz vector; NaN marks an unavailable band."""

    name: str = ""

    def estimate(self, vectors: np.ndarray, geometries: Sequence[RoomGeometry]) -> np.ndarray:
        raise NotImplementedError

    def __str__(self):
        return f"{type(self).__name__}[name={self.name}]"


class ClassicalEstimator(Estimator):

    def __init__(self, method: ClassicalMethod, depth_db: float = 30.0):
        self.method = ClassicalMethod(method)
        self.depth_db = depth_db
        self.name = self.method.value

    def with_depth(self, depth_db: float) -> "ClassicalEstimator":
        return ClassicalEstimator(self.method, depth_db)

    def estimate(self, vectors, geometries):
        vectors = np.atleast_2d(vectors)
        return np.array([
            estimate_alpha_classical(as_analysis_rir(v), g, self.depth_db, self.method).alpha
            for v, g in zip(vectors, geometries)
        ])


class LearnedEstimator(Estimator):

    def __init__(self, name: str, model: Model):
        self.name = name
        self.model = model

    def estimate(self, vectors, geometries=None):
        out = self.model.forward(np.atleast_2d(vectors)).astype(float)
        return raw_to_alpha(out, self.model.head)


def model_path(model_dir: Union[str, Path], name: str) -> Path:
    return Path(model_dir) / f"{name}{MODEL_SUFFIX}"


def resolve_methods(names: Sequence[str], model_dir: Union[str, Path] = "models", depth_db: float = 30.0,
                    logger: Optional[logging.Logger] = None) -> List[Estimator]:
    """
    Classical methods by name; anything else is a learned model looked up as
    <model_dir>/<name>.absk.
    """
    logger = logger if logger is not None else logging.getLogger(__name__)
    methods: List[Estimator] = []
    loaded: Dict[str, Model] = {}
    for name in names:
        key = name.lower()
        if key in (m.value for m in ClassicalMethod):
            methods.append(ClassicalEstimator(ClassicalMethod(key), depth_db))
            continue
        path = model_path(model_dir, key)
        if not path.is_file():
            raise MissingModelError(f"no model file for method {name} at {path}")
        if key not in loaded:
            loaded[key] = load_model(path, VECTOR_LENGTH)
            logger.info(f"{fn()}: loaded {loaded[key]} from {path}")
        methods.append(LearnedEstimator(key, loaded[key]))
    return methods
