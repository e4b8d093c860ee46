from .config import RunConfig, load_profiles, load_toml, dataset_default_config, DEFAULT_PROFILE
from .cli import main, build_parser
