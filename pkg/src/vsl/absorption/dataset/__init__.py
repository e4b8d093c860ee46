from .store import (DatasetManifest, DatasetWriter, ArrayDataset, Dataset, write_dataset, batches, batch_indices,
                    check_nonempty, check_compatible, manifest_differences, dataset_statistics, dataset_summary,
                    label_schema, ROOMS_PER_PAGE)
from .generate import generate_dataset, generate_splits, make_item, TRAIN_STREAM, DEV_STREAM
