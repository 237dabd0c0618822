"""Row type shared by every experiment."""

from dataclasses import asdict, dataclass, fields

RESULT_COLUMNS = (
    "task",
    "seed",
    "n",
    "t",
    "r",
    "algorithm",
    "epsilon",
    "rashomon_size",
    "accuracy",
    "ambiguity",
    "ovl",
)


@dataclass
class ResultRecord:
    """Metrics of one algorithm in one (seed, setting) cell.

    ``runtime_seconds`` is wall-clock and therefore kept out of
    :data:`RESULT_COLUMNS`, so result files stay reproducible.
    """

    task: str
    seed: int
    algorithm: str
    epsilon: float
    rashomon_size: int
    accuracy: float
    ambiguity: float
    ovl: float
    n: int = None
    t: int = None
    r: float = None
    runtime_seconds: float = 0.0

    def as_row(self):
        d = asdict(self)
        return {k: d[k] for k in RESULT_COLUMNS}

    @classmethod
    def from_row(cls, row):
        names = {f.name: f.type for f in fields(cls)}
        out = {}
        for k, v in row.items():
            if k not in names:
                continue
            if v in ("", None):
                out[k] = None
            elif k in ("seed", "n", "t", "rashomon_size"):
                out[k] = int(v)
            elif k in ("epsilon", "accuracy", "ambiguity", "ovl", "r", "runtime_seconds"):
                out[k] = float(v)
            else:
                out[k] = v
        return cls(**out)

    def setting(self):
        return (self.task, self.seed, self.n, self.t, self.r)
