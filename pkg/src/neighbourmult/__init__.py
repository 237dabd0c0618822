"""Predictive multiplicity across neighbouring datasets.

Rashomon sets under a shared loss threshold, the ambiguity metric, class
overlap estimates, an exhaustive theorem checker, and multiplicity-aware
active learning and imputation.
"""

from .dataset import Dataset, SyntheticSpec, diff, generate_gaussian, inject_missing, load_csv, split
from .errors import MultiplicityError
from .models import ModelFamily, train
from .rashomon import RashomonConfig, ambiguity, build_pool, filter_pool, select_epsilon

__all__ = [
    "Dataset",
    "ModelFamily",
    "MultiplicityError",
    "RashomonConfig",
    "SyntheticSpec",
    "ambiguity",
    "build_pool",
    "diff",
    "filter_pool",
    "generate_gaussian",
    "inject_missing",
    "load_csv",
    "select_epsilon",
    "split",
    "train",
]
