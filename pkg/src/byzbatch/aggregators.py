"""Server-side robust aggregation rules and an empirical robustness estimator."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .vecmath import RngStream, as_vector, check_same_dim, coordinate_median

AGGREGATOR_KINDS = ("mean", "krum", "geomed", "cm", "cc")


@dataclass
class AggregatorConfig:
    kind: str = "cc"
    krum_f: Optional[int] = None  # default: ceil(delta * m), set by the engine
    cc_radius: float = 0.1
    cc_iters: int = 1
    cc_warm_start: bool = True
    weiszfeld_tol: float = 1e-10
    weiszfeld_max_iters: int = 2000

    def __post_init__(self):
        if self.kind not in AGGREGATOR_KINDS:
            raise ValueError(f"unknown aggregator kind: {self.kind!r}")
        if self.cc_radius <= 0:
            raise ValueError("cc_radius must be > 0")
        if self.weiszfeld_tol <= 0:
            raise ValueError("weiszfeld_tol must be > 0")


@dataclass
class AggregationOutcome:
    aggregate: np.ndarray
    honest_mean: Optional[np.ndarray] = None
    error_sq: Optional[float] = None


def _stack(xs) -> np.ndarray:
    if len(xs) == 0:
        raise ValueError("cannot aggregate an empty list")
    vs = [as_vector(x) for x in xs]
    check_same_dim(*vs)
    return np.stack(vs)


def aggregate_mean(xs) -> np.ndarray:
    return _stack(xs).mean(axis=0)


def krum_scores(xs, f: int) -> np.ndarray:
    """Sum of squared distances to the m-f-2 nearest other inputs, per input."""
    X = _stack(xs)
    m = len(X)
    if m < f + 3:
        raise ValueError(f"krum needs m >= f+3, got m={m}, f={f}")
    diffs = X[:, None, :] - X[None, :, :]
    d2 = np.sum(diffs**2, axis=2)
    np.fill_diagonal(d2, np.inf)
    nearest = np.sort(d2, axis=1)[:, : m - f - 2]
    return nearest.sum(axis=1)


def aggregate_krum(xs, f: int) -> np.ndarray:
    scores = krum_scores(xs, f)
    return as_vector(xs[int(np.argmin(scores))])  # argmin ties break to lowest index


def aggregate_geomed(xs, tol: float = 1e-10, max_iters: int = 2000):
    """Weiszfeld iteration for the geometric median.

    Returns (point, converged). When the iterate lands on an input point it
    is returned if the subgradient optimality condition holds there, else the
    iterate is nudged by 1e-10 in a fixed direction and iteration continues.
    """
    X = _stack(xs)
    v = X.mean(axis=0)
    converged = False
    for _ in range(max_iters):
        dists = np.linalg.norm(X - v, axis=1)
        at_point = dists < 1e-12
        if at_point.any():
            # optimality at an input point x_j: ||sum_{i != j} (x_i-x_j)/d_i|| <= 1
            j = int(np.argmax(at_point))
            others = ~at_point
            if not others.any():
                return X[j].copy(), True
            r = np.sum((X[others] - v) / dists[others, None], axis=0)
            if np.linalg.norm(r) <= 1.0 + 1e-12:
                return X[j].copy(), True
            v = v + 1e-10 * np.ones_like(v) / np.sqrt(len(v))
            continue
        w = 1.0 / dists
        v_new = (w[:, None] * X).sum(axis=0) / w.sum()
        step = np.linalg.norm(v_new - v)
        v = v_new
        if step < tol:
            converged = True
            break
    return v, converged


def geomed_objective(xs, v) -> float:
    X = _stack(xs)
    return float(np.linalg.norm(X - as_vector(v), axis=1).sum())


def aggregate_cm(xs) -> np.ndarray:
    return coordinate_median(xs)


def aggregate_cc(xs, radius: float, iters: int = 1, center=None) -> np.ndarray:
    """Centered clipping: move the center by the mean of radius-clipped residuals."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    X = _stack(xs)
    v = np.zeros(X.shape[1]) if center is None else as_vector(center).copy()
    for _ in range(iters):
        resid = X - v
        norms = np.linalg.norm(resid, axis=1)
        scale = np.minimum(1.0, radius / np.maximum(norms, 1e-300))
        v = v + (scale[:, None] * resid).mean(axis=0)
    return v


def apply_aggregator(cfg: AggregatorConfig, xs, f: int = 0, cc_center=None) -> np.ndarray:
    """Dispatch on cfg.kind. `f` is the assumed Byzantine count (krum only)."""
    if cfg.kind == "mean":
        return aggregate_mean(xs)
    if cfg.kind == "krum":
        krum_f = cfg.krum_f if cfg.krum_f is not None else f
        return aggregate_krum(xs, krum_f)
    if cfg.kind == "geomed":
        v, _ = aggregate_geomed(xs, cfg.weiszfeld_tol, cfg.weiszfeld_max_iters)
        return v
    if cfg.kind == "cm":
        return aggregate_cm(xs)
    return aggregate_cc(xs, cfg.cc_radius, cfg.cc_iters, center=cc_center)


def estimate_robustness(cfg: AggregatorConfig, m: int, delta: float, rho: float,
                        attack, trials: int, dim: int = 5, seed: int = 0):
    """Monte-Carlo estimate of the aggregation-error constant.

    Honest vectors are drawn i.i.d. Gaussian with pairwise E||x_k - x_k'||^2
    = rho^2; the attack overwrites the last floor(delta*m) slots. Returns
    (mean_error_sq, c_hat) with c_hat = E||e||^2 / (delta * rho^2). c_hat is
    an empirical diagnostic, not a certified worst-case constant.
    """
    from .attacks import apply_attack, byzantine_slots

    if trials < 1:
        raise ValueError("trials must be >= 1")
    byz = byzantine_slots(m, delta)
    n_byz = len(byz)
    coord_scale = rho / np.sqrt(2.0 * dim)  # per-coordinate std giving E||xk-xk'||^2 = rho^2
    errors = np.empty(trials)
    for t in range(trials):
        stream = RngStream(seed, worker=0, iteration=t)
        honest = [coord_scale * stream.gaussian(dim) for _ in range(m - n_byz)]
        byz_true = [coord_scale * stream.gaussian(dim) for _ in range(n_byz)]
        submissions = honest + apply_attack(attack, honest, n_byz, stream, byz_true=byz_true)
        agg = apply_aggregator(cfg, submissions, f=n_byz)
        honest_mean = np.mean(honest, axis=0)
        errors[t] = float(np.sum((agg - honest_mean) ** 2))
    mean_error_sq = float(errors.mean())
    if delta == 0:
        c_hat = 0.0 if mean_error_sq == 0 else float("inf")
    else:
        c_hat = mean_error_sq / (delta * rho**2)
    return mean_error_sq, c_hat
