from .cache import read_feature_cache, write_feature_cache
from .cifar import parse_cifar10
from .config import ExperimentConfig
from .dataset import RawDataset
from .idx import parse_idx, parse_idx_images, parse_idx_labels
from .split import subset, train_test_split

__all__ = [
    "ExperimentConfig",
    "RawDataset",
    "parse_cifar10",
    "parse_idx",
    "parse_idx_images",
    "parse_idx_labels",
    "read_feature_cache",
    "subset",
    "train_test_split",
    "write_feature_cache",
]
