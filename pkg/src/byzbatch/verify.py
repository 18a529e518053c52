"""Built-in oracle and property self-checks, used by the `verify` CLI command.

Each check recomputes its expected value through an independent route
(brute force, grid search, finite differences or closed-form re-derivation)
rather than trusting the code path under test.
"""


import numpy as np

from . import planner
from .aggregators import (AggregatorConfig, aggregate_cm, aggregate_geomed,
                          aggregate_krum, geomed_objective)
from .attacks import AttackSpec
from .engine import RunConfig, run_training
from .tasks import TaskSpec, make_task
from .vecmath import RngStream


def check_planner_closed_forms(draws: int = 10, seed: int = 0) -> bool:
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(draws):
        p = planner.BoundParams(
            L=float(rng.uniform(0.1, 10)), sigma=float(rng.uniform(0.1, 10)),
            F0=float(rng.uniform(0.1, 10)), c=float(rng.uniform(0.1, 4)),
            delta=float(rng.uniform(0.01, 0.45)), m=int(rng.integers(4, 65)),
            C=float(rng.uniform(1e4, 1e9)))
        bstar, _, ok = planner.optimal_batch_byzsgdm(p)
        if not ok:
            return False
        num = planner.numeric_optimal_batch_byzsgdm(p)
        if abs(bstar - num) > 1e-6 * bstar:
            return False
        btil, _ = planner.optimal_batch_byzsgdnm(p)
        num2 = planner.numeric_optimal_batch_byzsgdnm(p)
        if abs(btil - num2) > 1e-6 * btil:
            return False
    return True


def brute_force_krum(xs, f: int) -> np.ndarray:
    m = len(xs)
    scores = []
    for i in range(m):
        d2 = sorted(float(np.sum((xs[i] - xs[j]) ** 2)) for j in range(m) if j != i)
        scores.append(sum(d2[: m - f - 2]))
    return xs[int(np.argmin(scores))]


def check_krum_oracle(instances: int = 50, seed: int = 1) -> bool:
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(instances):
        m = int(rng.integers(4, 7))
        f = int(rng.integers(0, m - 2))
        xs = [rng.standard_normal(3) for _ in range(m)]
        if not np.array_equal(aggregate_krum(xs, f), brute_force_krum(xs, f)):
            return False
    return True


def grid_search_geomed_2d(xs, span: float = 12.0, coarse: int = 101,
                          rounds: int = 6) -> np.ndarray:
    """2-D grid search with successive refinement; independent of Weiszfeld."""
    X = np.stack(xs)
    lo, width = X.mean(axis=0) - span / 2, span
    best = None
    for _ in range(rounds):  # each round shrinks the cell by (coarse-1)/4
        g0 = np.linspace(lo[0], lo[0] + width, coarse)
        g1 = np.linspace(lo[1], lo[1] + width, coarse)
        A, B = np.meshgrid(g0, g1, indexing="ij")
        pts = np.stack([A.ravel(), B.ravel()], axis=1)
        vals = np.linalg.norm(pts[:, None, :] - X[None, :, :], axis=2).sum(axis=1)
        best = pts[int(np.argmin(vals))]
        cell = width / (coarse - 1)
        lo, width = best - 2 * cell, 4 * cell
    return best


def check_geomed_oracle(instances: int = 5, seed: int = 2, tol: float = 1e-3) -> bool:
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(instances):
        xs = [rng.standard_normal(2) * 2 for _ in range(int(rng.integers(3, 8)))]
        v, _ = aggregate_geomed(xs, tol=1e-12, max_iters=2000)
        ref = grid_search_geomed_2d(xs)
        if geomed_objective(xs, v) > geomed_objective(xs, ref) + tol:
            return False
        if np.linalg.norm(v - ref) > tol:
            return False
    return True


def check_cm_oracle(instances: int = 50, seed: int = 3) -> bool:
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(instances):
        xs = [rng.standard_normal(4) for _ in range(5)]
        stacked = np.stack(xs)
        expected = np.sort(stacked, axis=0)[2]  # odd count: middle order statistic
        if not np.array_equal(aggregate_cm(xs), expected):
            return False
    return True


def check_gradients(rel_tol: float = 1e-5, points: int = 10) -> bool:
    step = 1e-6
    for kind in ("quadratic", "logistic", "mlp"):
        task = make_task(TaskSpec(kind=kind, dim=5, n_samples=200, noise_scale=0.1))
        stream = RngStream(11, worker=0, iteration=0)
        for _ in range(points):
            w = task.initial_point() + stream.gaussian(task.dim)
            g = task.full_gradient(w)
            fd = np.empty_like(g)
            for i in range(len(w)):
                e = np.zeros_like(w)
                e[i] = step
                fd[i] = (task.loss(w + e) - task.loss(w - e)) / (2 * step)
            denom = max(np.linalg.norm(g), 1e-8)
            if np.linalg.norm(g - fd) / denom > rel_tol:
                return False
    return True


def check_determinism() -> bool:
    cfg = RunConfig(task=TaskSpec(kind="quadratic", dim=6, noise_scale=0.3),
                    m=4, delta=0.25, B=4, T=20, attack=AttackSpec(kind="bitflip"),
                    aggregator=AggregatorConfig(kind="cm"), eta0=0.05)
    a = run_training(cfg)
    b = run_training(cfg)
    return all(ra == rb for ra, rb in zip(a, b)) and len(a) == len(b)


def check_weiszfeld_descent(seed: int = 4) -> bool:
    rng = np.random.Generator(np.random.Philox(seed))
    xs = [rng.standard_normal(3) for _ in range(7)]
    X = np.stack(xs)
    v = X.mean(axis=0)
    prev = geomed_objective(xs, v)
    for _ in range(50):
        d = np.linalg.norm(X - v, axis=1)
        if d.min() < 1e-12:
            break
        w = 1.0 / d
        v = (w[:, None] * X).sum(axis=0) / w.sum()
        cur = geomed_objective(xs, v)
        if cur > prev + 1e-12:
            return False
        prev = cur
    return True


ALL_CHECKS = [
    ("planner closed forms vs numeric argmin", check_planner_closed_forms),
    ("krum vs brute-force scores", check_krum_oracle),
    ("geometric median vs grid search", check_geomed_oracle),
    ("coordinate median vs sort oracle", check_cm_oracle),
    ("weiszfeld objective non-increasing", check_weiszfeld_descent),
    ("analytic gradients vs finite differences", check_gradients),
    ("training determinism", check_determinism),
]


def run_all(out=print) -> bool:
    ok = True
    for name, fn in ALL_CHECKS:
        passed = fn()
        out(f"{'PASS' if passed else 'FAIL'}  {name}")
        ok = ok and passed
    return ok
