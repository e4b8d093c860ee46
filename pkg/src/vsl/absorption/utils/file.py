import os
from pathlib import Path
from typing import Union


def make_dirs(path_to_make):
    if os.path.exists(path_to_make):
        if not os.path.isdir(path_to_make):
            raise OSError(f"cannot create a directory where a file already exists: {path_to_make}")
    else:
        os.makedirs(path_to_make)
    return Path(path_to_make)


def make_dirs_for_file(filename):
    path_to_make = os.path.dirname(str(filename))
    if path_to_make:
        make_dirs(path_to_make)
    return filename


def write_text_synced(filename: Union[str, Path], text: str):
    """Write text and fsync it before returning."""
    with open(make_dirs_for_file(filename), "w", encoding="utf-8") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())


def write_bytes_synced(filename: Union[str, Path], data: bytes):
    with open(make_dirs_for_file(filename), "wb") as f:
        f.write(data)
        f.flush()
        os.fsync(f.fileno())
