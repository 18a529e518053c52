"""Configuration, experiment grids, metrics persistence and analysis.

Config files are JSON. A file with a top-level "sweep" object is a grid
(cartesian product over the listed axes applied to the base run config);
otherwise it describes a single run. Unknown keys are rejected so typos fail
loudly instead of silently using a default.
"""

import concurrent.futures
import csv
import dataclasses
import itertools
import json

import time
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Dict, List, Optional

from .aggregators import AggregatorConfig
from .attacks import AttackSpec
from .engine import RunConfig, run_training
from .tasks import TaskSpec

SWEEP_AXES = ("B", "delta", "eta0", "aggregator.kind", "attack.kind", "algorithm", "seed")

RESULT_COLUMNS = [
    "task", "algorithm", "aggregator", "attack", "m", "delta", "B", "T",
    "eta0", "beta", "schedule", "seed", "final_loss", "best_accuracy",
    "mean_grad_norm_tail", "min_grad_norm", "budget", "wall_time", "error",
]

@dataclass
class GridSpec:
    base: RunConfig
    sweep: Dict[str, list] = field(default_factory=dict)
    cap: int = 512

@dataclass
class ResultRow:
    task: str
    algorithm: str
    aggregator: str
    attack: str
    m: int
    delta: float
    B: int
    T: int
    eta0: float
    beta: float
    schedule: str
    seed: int
    final_loss: Optional[float] = None
    best_accuracy: Optional[float] = None
    mean_grad_norm_tail: Optional[float] = None
    min_grad_norm: Optional[float] = None
    budget: Optional[int] = None
    wall_time: float = 0.0
    error: str = ""

    def sort_key(self):
        return (self.task, self.algorithm, self.aggregator, self.attack,
                self.B, self.delta, self.eta0, self.seed)

class ConfigError(ValueError):
    pass

def _build(cls, data: dict, context: str):
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {context}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {context}: {exc}") from exc

def parse_config(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return config_from_dict(data)

def config_from_dict(data: dict):
    data = dict(data)
    sweep = data.pop("sweep", None)
    cap = data.pop("cap", 512)
    for key, cls in (("task", TaskSpec), ("aggregator", AggregatorConfig),
                     ("attack", AttackSpec)):
        if key in data:
            data[key] = _build(cls, data[key], f"{key} section")
    base = _build(RunConfig, data, "run config")
    if base.delta >= 0.5:
        raise ConfigError("delta must be < 0.5")
    if sweep is None:
        return base
    unknown = set(sweep) - set(SWEEP_AXES)
    if unknown:
        raise ConfigError(f"unknown sweep axis(es) {sorted(unknown)}")
    grid = GridSpec(base=base, sweep=sweep, cap=cap)
    n = len(enumerate_runs(grid, check_cap=False))
    if n > cap:
        raise ConfigError(f"grid size {n} exceeds cap {cap}")
    return grid

def config_to_dict(config: RunConfig) -> dict:
    return dataclasses.asdict(config)

def _with_axis(config: RunConfig, axis: str, value) -> RunConfig:
    if axis == "aggregator.kind":
        return replace(config, aggregator=replace(config.aggregator, kind=value))
    if axis == "attack.kind":
        return replace(config, attack=replace(config.attack, kind=value))
    return replace(config, **{axis: value})

def enumerate_runs(grid: GridSpec, check_cap: bool = True) -> List[RunConfig]:
    """Cartesian product over sweep axes, in the documented fixed axis order."""
    axes = [(a, grid.sweep[a]) for a in SWEEP_AXES if a in grid.sweep]
    runs = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        cfg = grid.base
        for (axis, _), value in zip(axes, combo):
            cfg = _with_axis(cfg, axis, value)
        runs.append(cfg)
    if check_cap and len(runs) > grid.cap:
        raise ConfigError(f"grid size {len(runs)} exceeds cap {grid.cap}")
    return runs

def run_single(config: RunConfig) -> ResultRow:
    from .tasks import make_task

    task = make_task(config.task)
    dataset_size = len(task.y) if hasattr(task, "y") else None
    row = ResultRow(
        task=config.task.kind, algorithm=config.algorithm,
        aggregator=config.aggregator.kind, attack=config.attack.kind,
        m=config.m, delta=config.delta, B=config.B,
        T=config.total_rounds(dataset_size), eta0=config.eta0,
        beta=config.beta, schedule=config.schedule, seed=config.seed,
        budget=config.budget(dataset_size),
    )
    started = time.perf_counter()
    try:
        records = run_training(config)
    except Exception as exc:  # grid keeps going; the row records the failure
        row.error = f"{type(exc).__name__}: {exc}"
        row.wall_time = time.perf_counter() - started
        return row
    row.wall_time = time.perf_counter() - started
    row.final_loss = records[-1].loss
    accs = [r.accuracy for r in records if r.accuracy is not None]
    row.best_accuracy = max(accs) if accs else None
    tail = records[-max(1, len(records) // 10):]
    row.mean_grad_norm_tail = sum(r.grad_norm for r in tail) / len(tail)
    row.min_grad_norm = min(r.grad_norm for r in records)
    return row

def run_grid(grid: GridSpec, parallelism: int = 1) -> List[ResultRow]:
    runs = enumerate_runs(grid)
    if parallelism <= 1:
        rows = [run_single(cfg) for cfg in runs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(run_single, runs))
    return sorted(rows, key=ResultRow.sort_key)

def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)

def emit_results(rows: List[ResultRow], fmt: str, path) -> None:
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RESULT_COLUMNS)
            for row in rows:
                writer.writerow([_render(getattr(row, col)) for col in RESULT_COLUMNS])
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([dataclasses.asdict(row) for row in rows], fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format: {fmt!r}")

def load_results(path) -> List[dict]:
    """Load an emitted CSV/JSON back into typed dicts."""
    text = str(path)
    if text.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)
    with open(path, newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            row = {}
            for key, val in raw.items():
                if val == "" or val is None:
                    row[key] = None if key != "error" else ""
                elif key in ("m", "B", "T", "seed", "budget"):
                    row[key] = int(val)
                elif key in ("delta", "eta0", "beta", "final_loss", "best_accuracy",
                             "mean_grad_norm_tail", "min_grad_norm", "wall_time",
                             "accuracy"):
                    row[key] = float(val)
                else:
                    row[key] = val
            rows.append(row)
        return rows

def _row_get(row, key):
    if isinstance(row, dict):
        return row.get(key)
    return getattr(row, key, None)

def best_batch_curve(rows, group_keys=("aggregator",)) -> Dict[tuple, int]:
    """Per (group, delta): the batch size maximizing accuracy, ties to smaller B.

    Accepts ResultRows (uses best_accuracy) or plain dicts with an
    'accuracy' or 'best_accuracy' column, e.g. transcribed table fixtures.
    Raises if any (group, delta) cell has no usable accuracy.
    """
    cells: Dict[tuple, list] = {}
    for row in rows:
        acc = _row_get(row, "best_accuracy")
        if acc is None:
            acc = _row_get(row, "accuracy")
        key = tuple(_row_get(row, k) for k in group_keys) + (_row_get(row, "delta"),)
        cells.setdefault(key, []).append((acc, int(_row_get(row, "B"))))
    curve = {}
    for key, entries in sorted(cells.items()):
        if any(acc is None for acc, _ in entries):
            raise ValueError(f"missing accuracy in cell {key}")
        best_acc = max(acc for acc, _ in entries)
        curve[key] = min(b for acc, b in entries if acc == best_acc)
    return curve

def load_table1_fixture() -> List[dict]:
    """Transcribed published results (final accuracy per aggregator/delta/batch)."""
    ref = resources.files("byzbatch") / "fixtures" / "table1_alie.csv"
    with ref.open(newline="") as fh:
        return [
            {"aggregator": r["aggregator"], "delta": float(r["delta"]),
             "B": int(r["B"]), "accuracy": float(r["accuracy"])}
            for r in csv.DictReader(fh)
        ]
