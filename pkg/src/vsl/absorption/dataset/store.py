import hashlib
import logging
import os
from pathlib import Path
from typing import Final, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import tomli
import tomli_w
from deepdiff import DeepDiff
from more_itertools import chunked

from vsl.absorption.model import (
    N_BANDS, OctaveBands, AbsorptionLabel, RoomSpec, DatasetIOError, EmptyDatasetError, ShapeMismatchError
)
from vsl.absorption.utils import fn, make_dirs, write_text_synced

FORMAT_VERSION: Final = 1
RECORD_DTYPE: Final = np.dtype("<f4")
ROOMS_PER_PAGE: Final = 1000
MANIFEST_FILE: Final = "manifest"
DATA_FILE: Final = "data.f32"
RAW_FILE: Final = "raw.f32"
ROOMS_DIR: Final = "rooms"

# manifest keys allowed to differ between a train and a dev set
PER_SET_KEYS: Final = ("name", "seed", "count", "fingerprint", "config")


def label_schema(with_scattering: bool = True) -> List[str]:
    schema = OctaveBands.column_names("alpha_")
    if with_scattering:
        schema += OctaveBands.column_names("s_")
    return schema


def rooms_page_file(page: int) -> str:
    return f"rooms_{page:05d}.toml"


class DatasetManifest(object):

    def __init__(
            self,
            name: str,
            seed: int,
            count: int = 0,
            strategy: Optional[dict] = None,
            sim_config: Optional[dict] = None,
            sample_rate: int = 16000,
            vector_length: int = 8000,
            schema: Optional[List[str]] = None,
            snr_db: Optional[float] = None,
            raw_length: int = 0,
            raw_sample_rate: int = 0,
            config: Optional[dict] = None,
            version: int = FORMAT_VERSION,
    ):
        self.name = name
        self.seed = int(seed)
        self.count = int(count)
        self.strategy = dict(strategy or {})
        self.sim_config = dict(sim_config or {})
        self.sample_rate = int(sample_rate)
        self.vector_length = int(vector_length)
        self.schema = list(schema) if schema is not None else label_schema()
        self.snr_db = snr_db
        self.raw_length = int(raw_length)
        self.raw_sample_rate = int(raw_sample_rate)
        self.config = dict(config or {})
        self.version = int(version)

    @property
    def label_dim(self) -> int:
        return len(self.schema)

    @property
    def record_dim(self) -> int:
        return self.vector_length + self.label_dim

    @property
    def record_bytes(self) -> int:
        return self.record_dim * RECORD_DTYPE.itemsize

    @property
    def has_raw(self) -> bool:
        return self.raw_length > 0

    def to_dict(self) -> dict:
        d = {
            "version": self.version,
            "name": self.name,
            "seed": self.seed,
            "count": self.count,
            "sample_rate": self.sample_rate,
            "vector_length": self.vector_length,
            "schema": self.schema,
            "raw_length": self.raw_length,
            "raw_sample_rate": self.raw_sample_rate,
            "rooms_per_page": ROOMS_PER_PAGE,
            "strategy": self.strategy,
            "sim_config": self.sim_config,
            "config": self.config,
        }
        if self.snr_db is not None:
            d["snr_db"] = float(self.snr_db)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        snr = d.get("snr_db")
        return cls(
            name=d["name"],
            seed=d["seed"],
            count=d["count"],
            strategy=d.get("strategy"),
            sim_config=d.get("sim_config"),
            sample_rate=d["sample_rate"],
            vector_length=d["vector_length"],
            schema=d["schema"],
            snr_db=None if snr is None else float(snr),
            raw_length=d.get("raw_length", 0),
            raw_sample_rate=d.get("raw_sample_rate", 0),
            config=d.get("config"),
            version=d.get("version", FORMAT_VERSION),
        )

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def read(cls, path: Union[str, Path]) -> "DatasetManifest":
        file = Path(path) / MANIFEST_FILE
        try:
            with open(file, "rb") as f:
                return cls.from_dict(tomli.load(f))
        except (tomli.TOMLDecodeError, KeyError) as e:
            raise DatasetIOError(f"unreadable manifest: {e}", file) from e

    def __eq__(self, other):
        return isinstance(other, DatasetManifest) and self.to_dict() == other.to_dict()

    def __str__(self):
        return (f"DatasetManifest["
                f"name={self.name}, "
                f"count={self.count}, "
                f"seed={self.seed}, "
                f"vector_length={self.vector_length}, "
                f"labels={self.label_dim}, "
                f"strategy={self.strategy.get('kind')}"
                f"]")


class DatasetWriter(object):
    """
    Single writer of a dataset directory. Records go to the blob as they arrive;
    room sidecars and the manifest are written on close, manifest last.
    """

    def __init__(self, path: Union[str, Path], manifest: DatasetManifest, logger: Optional[logging.Logger] = None):
        self.path = Path(path)
        self.manifest = manifest
        self.logger = logger if logger is not None else logging.getLogger(__name__)
        self.rooms: List[dict] = []
        self._data = None
        self._raw = None
        self._offset = 0

    def __enter__(self) -> "DatasetWriter":
        self.open()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is None:
            self.close()
        else:
            self._close_files(sync=False)

    def open(self):
        make_dirs(self.path)
        try:
            self._data = open(self.path / DATA_FILE, "wb")
            if self.manifest.has_raw:
                self._raw = open(self.path / RAW_FILE, "wb")
        except OSError as e:
            raise DatasetIOError(f"cannot create dataset files: {e}", self.path) from e
        self.manifest.count = 0
        self._offset = 0

    def append(self, vector: np.ndarray, label: AbsorptionLabel, spec: Optional[RoomSpec] = None,
               raw: Optional[np.ndarray] = None):
        vector = np.asarray(vector)
        if vector.shape != (self.manifest.vector_length,):
            raise ShapeMismatchError(f"expected vector of length {self.manifest.vector_length}, got {vector.shape}")
        labels = label.as_vector(with_scattering=self.manifest.label_dim > N_BANDS)
        if labels.size != self.manifest.label_dim:
            raise ShapeMismatchError(f"label schema has {self.manifest.label_dim} entries, got {labels.size}")
        if self._raw is not None and (raw is None or len(raw) != self.manifest.raw_length):
            raise ShapeMismatchError(f"raw archive expects {self.manifest.raw_length} samples per item")
        record = np.concatenate([vector, labels]).astype(RECORD_DTYPE)
        self._write(self._data, record.tobytes(), self.path / DATA_FILE)
        if self._raw is not None:
            self._write(self._raw, np.asarray(raw, dtype=RECORD_DTYPE).tobytes(), self.path / RAW_FILE)
        self.rooms.append({"index": self.manifest.count} | (spec.to_dict() if spec is not None else {}))
        self.manifest.count += 1
        self._offset += len(record.tobytes())

    def _write(self, f, data: bytes, file: Path):
        try:
            f.write(data)
        except OSError as e:
            raise DatasetIOError(f"write failed: {e}", file, f.tell()) from e

    def _close_files(self, sync: bool):
        for f in (self._data, self._raw):
            if f is None or f.closed:
                continue
            if sync:
                f.flush()
                os.fsync(f.fileno())
            f.close()

    def close(self) -> DatasetManifest:
        self._close_files(sync=True)
        rooms_dir = make_dirs(self.path / ROOMS_DIR)
        for page, rooms in enumerate(chunked(self.rooms, ROOMS_PER_PAGE)):
            write_text_synced(rooms_dir / rooms_page_file(page), tomli_w.dumps({"rooms": list(rooms)}))
        write_text_synced(self.path / MANIFEST_FILE, self.manifest.dumps())
        self.logger.info(f"{fn()}: wrote {self.manifest.count} records to {self.path}")
        return self.manifest


def write_dataset(items, path: Union[str, Path], manifest: DatasetManifest,
                  logger: Optional[logging.Logger] = None) -> DatasetManifest:
    """
    Write a stream of (vector, AbsorptionLabel, RoomSpec) or (vector, label, spec, raw) tuples.
    """
    with DatasetWriter(path, manifest, logger) as writer:
        for item in items:
            writer.append(*item)
    return writer.manifest


class ArrayDataset(object):
    """In-memory dataset with the same read interface as an opened directory."""

    def __init__(self, inputs: np.ndarray, labels: np.ndarray, manifest: Optional[DatasetManifest] = None):
        inputs = np.atleast_2d(inputs)
        labels = np.atleast_2d(labels)
        if inputs.shape[0] != labels.shape[0]:
            raise ShapeMismatchError(f"{inputs.shape[0]} inputs but {labels.shape[0]} labels")
        self.inputs = inputs
        self.labels = labels
        self.manifest = manifest

    def __len__(self):
        return self.inputs.shape[0]

    def __getitem__(self, i) -> Tuple[np.ndarray, np.ndarray]:
        return self.inputs[i], self.labels[i]

    def take(self, indices) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.inputs[indices]), np.asarray(self.labels[indices])

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.inputs, dtype=RECORD_DTYPE).tobytes())
        h.update(np.ascontiguousarray(self.labels, dtype=RECORD_DTYPE).tobytes())
        return h.hexdigest()

    def __str__(self):
        return f"ArrayDataset[n={len(self)}, input_dim={self.inputs.shape[1]}, label_dim={self.labels.shape[1]}]"


class Dataset(ArrayDataset):
    """A dataset directory opened read-only through a memory map."""

    def __init__(self, path: Path, manifest: DatasetManifest, records: np.ndarray):
        d = manifest.vector_length
        super().__init__(records[:, :d], records[:, d:], manifest)
        self.path = path
        self._records = records
        self._pages = {}

    @classmethod
    def open(cls, path: Union[str, Path]) -> "Dataset":
        path = Path(path)
        manifest = DatasetManifest.read(path)
        file = path / DATA_FILE
        try:
            size = file.stat().st_size
        except OSError as e:
            raise DatasetIOError(f"missing data blob: {e}", file) from e
        expected = manifest.count * manifest.record_bytes
        if size != expected:
            # report where the first incomplete record starts
            offset = min(size, expected) // manifest.record_bytes * manifest.record_bytes
            raise DatasetIOError(f"blob holds {size} bytes, manifest promises {expected}", file, offset)
        if manifest.count == 0:
            records = np.zeros((0, manifest.record_dim), dtype=RECORD_DTYPE)
        else:
            records = np.memmap(file, dtype=RECORD_DTYPE, mode="r", shape=(manifest.count, manifest.record_dim))
        return cls(path, manifest, records)

    def room(self, i: int) -> Optional[RoomSpec]:
        if not 0 <= i < len(self):
            raise IndexError(f"room index {i} out of range")
        page = i // ROOMS_PER_PAGE
        if page not in self._pages:
            file = self.path / ROOMS_DIR / rooms_page_file(page)
            try:
                with open(file, "rb") as f:
                    self._pages[page] = tomli.load(f)["rooms"]
            except (OSError, tomli.TOMLDecodeError, KeyError) as e:
                raise DatasetIOError(f"unreadable room sidecar: {e}", file) from e
        entry = dict(self._pages[page][i % ROOMS_PER_PAGE])
        entry.pop("index", None)
        return RoomSpec.from_dict(entry) if entry else None

    def raw(self, i: int) -> np.ndarray:
        if not self.manifest.has_raw:
            raise DatasetIOError("dataset has no raw archive", self.path)
        n = self.manifest.raw_length
        raw = np.memmap(self.path / RAW_FILE, dtype=RECORD_DTYPE, mode="r", shape=(len(self), n))
        return np.array(raw[i])

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        with open(self.path / DATA_FILE, "rb") as f:
            for block in iter(lambda: f.read(1 << 22), b""):
                h.update(block)
        return h.hexdigest()

    def __str__(self):
        return f"Dataset[path={self.path}, manifest={self.manifest}]"


def batch_indices(n: int, batch_size: int, seed: int, epoch: int) -> List[np.ndarray]:
    """Permutation of range(n) fixed by (seed, epoch), cut in order; the last batch may be short."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    perm = np.random.default_rng([seed, epoch]).permutation(n)
    return [np.asarray(chunk) for chunk in chunked(perm, batch_size)]


def batches(dataset: ArrayDataset, batch_size: int, seed: int, epoch: int) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    for idx in batch_indices(len(dataset), batch_size, seed, epoch):
        yield dataset.take(idx)


def check_nonempty(dataset: ArrayDataset, what: str):
    if dataset is None or len(dataset) == 0:
        raise EmptyDatasetError(f"{what} set is empty")


def manifest_differences(a: DatasetManifest, b: DatasetManifest) -> dict:
    """Differences between two manifests beyond the keys expected to vary per set."""
    excluded = [f"root['{k}']" for k in PER_SET_KEYS]
    return DeepDiff(a.to_dict(), b.to_dict(), exclude_paths=excluded).to_dict()


def check_compatible(a: DatasetManifest, b: DatasetManifest, logger: Optional[logging.Logger] = None) -> dict:
    logger = logger if logger is not None else logging.getLogger(__name__)
    if a.vector_length != b.vector_length or a.schema != b.schema:
        raise ShapeMismatchError(f"incompatible datasets: {a} vs {b}")
    diff = manifest_differences(a, b)
    if diff:
        logger.warning(f"{fn()}: {a.name} and {b.name} differ in {list(diff)}")
    return diff


def dataset_statistics(dataset: ArrayDataset, bins: int = 10) -> pd.DataFrame:
    """Histogram of the mean absorption per band over [0,1], one column per band."""
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot describe an empty dataset")
    edges = np.linspace(0.0, 1.0, bins + 1)
    alpha = np.asarray(dataset.labels[:, :N_BANDS], dtype=float)
    df = pd.DataFrame({"bin_low": edges[:-1], "bin_high": edges[1:]})
    for j, name in enumerate(OctaveBands.column_names("alpha_")):
        df[name] = np.histogram(alpha[:, j], bins=edges)[0]
    return df


def dataset_summary(dataset: ArrayDataset) -> pd.DataFrame:
    alpha = np.asarray(dataset.labels[:, :N_BANDS], dtype=float)
    return pd.DataFrame(
        {"mean": alpha.mean(axis=0), "std": alpha.std(axis=0), "min": alpha.min(axis=0), "max": alpha.max(axis=0)},
        index=OctaveBands.column_names("alpha_"),
    )
