"""Experiment configuration files: a JSON schema plus a typed view of it."""

import json
from dataclasses import dataclass, field

import jsonschema

from . import active, imputation, models, rashomon, theory
from .dataset import SyntheticSpec
from .errors import ConfigError

ACTIVE = "Active"
IMPUTE = "Impute"
THEORY = "Theory"
SYNTHETIC = "Synthetic"
TASKS = (ACTIVE, IMPUTE, THEORY, SYNTHETIC)

DEFAULT_N = [500, 1000, 2000]
DEFAULT_R = [0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 0.15, 0.20, 0.25]
DEFAULT_SEEDS = list(range(10))

_num_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_int_list = {"type": "array", "items": {"type": "integer"}, "minItems": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["task"],
    "properties": {
        "task": {"enum": list(TASKS)},
        "data_source": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "label_column": {"type": "string"},
                "missing_token": {"type": "string"},
                "categorical": {"type": "array", "items": {"type": "string"}},
                "synthetic": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["n_per_class", "mean_0", "mean_1"],
                    "properties": {
                        "n_per_class": {"type": "integer", "minimum": 1},
                        "mean_0": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                        "mean_1": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                        "covariance_scale": {"type": "number", "exclusiveMinimum": 0},
                        "dimension": {"type": "integer", "minimum": 1},
                        "correlation": {"type": "number"},
                        "grid_step": {"type": "number", "exclusiveMinimum": 0},
                        "seed": {"type": "integer"},
                    },
                },
            },
            "oneOf": [{"required": ["csv", "label_column"]}, {"required": ["synthetic"]}],
        },
        "family": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(models.MODEL_KINDS)},
                "learning_rate": {"type": "number", "exclusiveMinimum": 0},
                "epochs": {"type": "integer", "minimum": 1},
                "l2": {"type": "number", "minimum": 0},
                "hidden": {"type": "integer", "minimum": 1},
                "n_trees": {"type": "integer", "minimum": 1},
                "max_depth": {"type": "integer", "minimum": 0},
                "min_leaf": {"type": "integer", "minimum": 1},
                "max_features": {"type": ["integer", "null"], "minimum": 1},
                "bootstrap": {"type": "boolean"},
            },
        },
        "grids": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": _int_list,
                "q": {"type": "integer", "minimum": 1},
                "T": {"type": "integer", "minimum": 0},
                "r": _num_list,
            },
        },
        "strategies": {"type": "array", "items": {"enum": list(active.STRATEGIES)}, "minItems": 1},
        "committee_size": {"type": "integer", "minimum": 2},
        "methods": {"type": "array", "items": {"enum": list(imputation.KINDS)}, "minItems": 1},
        "knn_k": {"type": "integer", "minimum": 1},
        "mice_iterations": {"type": "integer", "minimum": 1},
        "pool_size": {"type": "integer", "minimum": 1},
        "min_members": {"type": "integer", "minimum": 1},
        "epsilon_scope": {"enum": list(rashomon.EPSILON_SCOPES)},
        "ovl_method": {"enum": ["ExactDiscrete", "Histogram", "ProjectedHistogram", None]},
        "ovl_bins": {"type": "integer", "minimum": 1},
        "seeds": _int_list,
        "test_fraction": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "split_seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "theory": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "instances": {"type": "integer", "minimum": 1},
                "chains": {"type": "integer", "minimum": 0},
                "classes": {"type": "array", "items": {"enum": list(theory.CLASS_KINDS)}, "minItems": 1},
                "epsilons": {"type": "array", "items": {"type": "string"}},
                "seed": {"type": "integer"},
            },
        },
    },
}


def validate(raw):
    """Raise :class:`ConfigError` naming the first offending path, if any."""
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, tuple(e.absolute_path))


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    data_source: dict = None
    family: models.ModelFamily = field(default_factory=models.ModelFamily.logistic)
    grids: dict = field(default_factory=dict)
    strategies: tuple = active.STRATEGIES
    committee_size: int = 100
    methods: tuple = imputation.KINDS
    knn_k: int = 5
    mice_iterations: int = 10
    pool_size: int = 100
    min_members: int = 50
    epsilon_scope: str = "step"
    ovl_method: str = None
    ovl_bins: int = 64
    seeds: tuple = tuple(DEFAULT_SEEDS)
    test_fraction: float = 0.2
    split_seed: int = 0
    output_dir: str = "results"
    theory: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw):
        validate(raw)
        kw = dict(raw)
        if "family" in kw:
            kw["family"] = models.ModelFamily.from_dict(kw["family"])
        for key in ("strategies", "methods", "seeds"):
            if key in kw:
                kw[key] = tuple(kw[key])
        cfg = cls(**kw)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path} ({exc})") from exc
        return cls.from_dict(raw)

    def check(self):
        if self.pool_size < self.min_members:
            raise ConfigError(f"{self.pool_size} is smaller than min_members {self.min_members}", ("pool_size",))
        if self.task in (ACTIVE, IMPUTE, SYNTHETIC) and self.data_source is None:
            raise ConfigError(f"required for task {self.task}", ("data_source",))
        syn = (self.data_source or {}).get("synthetic")
        if syn and len(syn["mean_0"]) != len(syn["mean_1"]):
            raise ConfigError("length differs from mean_0", ("data_source", "synthetic", "mean_1"))

    @property
    def rashomon(self):
        return rashomon.RashomonConfig(
            self.pool_size, self.min_members, self.epsilon_scope, self.ovl_method, self.ovl_bins
        )

    @property
    def n_grid(self):
        return list(self.grids.get("n", DEFAULT_N))

    @property
    def q(self):
        return self.grids.get("q", 100)

    @property
    def T(self):
        return self.grids.get("T", 5)

    @property
    def r_grid(self):
        return list(self.grids.get("r", DEFAULT_R))

    def synthetic_spec(self):
        syn = dict(self.data_source["synthetic"])
        return SyntheticSpec(**syn)

    def strategy_objects(self):
        return [active.AcquisitionStrategy(k, self.committee_size) for k in self.strategies]

    def method_objects(self):
        return [imputation.ImputationMethod(k, self.knn_k, self.mice_iterations) for k in self.methods]

    def with_overrides(self, seed=None, output_dir=None):
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if seed is not None:
            kw["seeds"] = (seed,)
        if output_dir is not None:
            kw["output_dir"] = output_dir
        return ExperimentConfig(**kw)
