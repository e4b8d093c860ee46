from .file import make_dirs, make_dirs_for_file, write_text_synced, write_bytes_synced
from .logger import fn, setup_logger, set_file_logging_handler
from .stats import StreamingMovingAverageByCount
from .workers import ordered_map
