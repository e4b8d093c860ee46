import copy
from pathlib import Path
from typing import Final, Optional, Union

import tomli

from vsl.absorption.eval import ExperimentConfig
from vsl.absorption.model import AbsorptionError
from vsl.absorption.nn import TrainConfig
from vsl.absorption.sim import SimConfig

DEFAULT_PROFILE: Final = "fast"
SECTIONS: Final = ("sim", "train", "eval", "dataset")


def dataset_default_config() -> dict:
    return {
        "n_train": 2000,
        "n_dev": 500,
        "snr_db": 30.0,
        "keep_raw": False,
    }


def load_toml(file: Union[str, Path]) -> dict:
    try:
        with open(file, mode="rb") as fp:
            return tomli.load(fp)
    except tomli.TOMLDecodeError as e:
        raise AbsorptionError(f"invalid TOML in {file}: {e}") from e


def load_profiles(file: Optional[Union[str, Path]] = None) -> dict:
    return load_toml(file if file is not None else Path(__file__).parent / "data" / "profiles.toml")


def merge_sections(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for section, values in override.items():
        if section not in SECTIONS:
            raise AbsorptionError(f"unknown config table [{section}], expected one of {SECTIONS}")
        merged.setdefault(section, {}).update(values)
    return merged


class RunConfig(object):
    """
    Resolved settings of one CLI run: profile values, then the user TOML file, then flags.
    """

    def __init__(self, profile: str = DEFAULT_PROFILE, seed: int = 0, threads: int = 1,
                 user_config: Optional[Union[str, Path]] = None, profiles: Optional[dict] = None):
        profiles = profiles if profiles is not None else load_profiles()
        if profile not in profiles:
            raise AbsorptionError(f"unknown profile {profile}, expected one of {sorted(profiles)}")
        sections = merge_sections({}, profiles[profile])
        if user_config is not None:
            sections = merge_sections(sections, load_toml(user_config))
        self.profile = profile
        self.seed = int(seed)
        self.threads = max(1, int(threads))
        self.sim = SimConfig(sections.get("sim"), threads=self.threads)
        self.train = TrainConfig(sections.get("train"), seed=self.seed)
        self.eval = ExperimentConfig(sections.get("eval"), seed=self.seed, threads=self.threads)
        self.dataset = dataset_default_config() | sections.get("dataset", {})
        unknown = set(self.dataset) - set(dataset_default_config())
        if unknown:
            raise AbsorptionError(f"unknown dataset settings {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "seed": self.seed,
            "threads": self.threads,
            "sim": self.sim.to_dict(),
            "train": self.train.to_dict(),
            "eval": self.eval.to_dict(),
            "dataset": dict(self.dataset),
        }

    def __str__(self):
        return (f"RunConfig["
                f"profile={self.profile}, "
                f"seed={self.seed}, "
                f"threads={self.threads}, "
                f"sim={self.sim}, "
                f"train={self.train}, "
                f"eval={self.eval}"
                f"]")
