"""Parameter-server training loop with robust aggregation and attacks.

One run is a deterministic sequence of rounds: every worker computes its
local momentum from a lane-keyed random stream, Byzantine slots are
overwritten by the attack, and the server aggregates and steps (plain or
normalized). Determinism is independent of worker evaluation order because
each (worker, round) pair owns its own stream lane.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .aggregators import AggregatorConfig, aggregate_mean, apply_aggregator
from .attacks import AttackSpec, apply_attack, byzantine_slots
from .tasks import TaskSpec, make_task
from .vecmath import RngStream, as_vector, l2_norm


@dataclass
class WorkerState:
    momentum: Optional[np.ndarray] = None
    role: str = "honest"  # honest | byzantine
    sample_count: int = 0  # per-sample gradient evaluations so far


@dataclass
class RunConfig:
    task: TaskSpec = field(default_factory=TaskSpec)
    algorithm: str = "byzsgdm"  # byzsgdm | byzsgdnm
    aggregator: AggregatorConfig = field(default_factory=AggregatorConfig)
    attack: AttackSpec = field(default_factory=AttackSpec)
    m: int = 8
    delta: float = 0.0
    B: int = 32
    T: Optional[int] = None  # explicit round count, or derive from epochs
    epochs: Optional[int] = None
    beta: float = 0.9
    schedule: str = "cosine"  # cosine | constant
    eta0: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("byzsgdm", "byzsgdnm"):
            raise ValueError(f"unknown algorithm: {self.algorithm!r}")
        if self.schedule not in ("cosine", "constant"):
            raise ValueError(f"unknown schedule: {self.schedule!r}")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must be in [0, 1)")
        if not 0 <= self.delta < 0.5:
            raise ValueError("delta must be < 0.5")
        if self.B < 1 or self.m < 1:
            raise ValueError("B and m must be >= 1")
        if self.T is None and self.epochs is None:
            raise ValueError("one of T or epochs must be set")

    def rounds_per_epoch(self, dataset_size: Optional[int]) -> int:
        if dataset_size is None:
            return 1
        return max(1, math.ceil(dataset_size / (self.B * self.m)))

    def total_rounds(self, dataset_size: Optional[int]) -> int:
        if self.T is not None:
            return self.T
        return self.epochs * self.rounds_per_epoch(dataset_size)

    def budget(self, dataset_size: Optional[int]) -> int:
        """Honest per-sample gradient evaluations: T * B * (m - floor(delta*m))."""
        n_byz = len(byzantine_slots(self.m, self.delta))
        return self.total_rounds(dataset_size) * self.B * (self.m - n_byz)


@dataclass
class MetricsRecord:
    t: int
    eta: float
    loss: float
    grad_norm: float
    agg_error_sq: float
    accuracy: Optional[float] = None
    skipped: bool = False


def cosine_lr(eta0: float, p: int, P: int) -> float:
    if not 0 <= p < P:
        raise ValueError("epoch index must satisfy 0 <= p < P")
    return 0.5 * eta0 * (1.0 + math.cos(p * math.pi / P))


def worker_round(state: WorkerState, task, w, B: int, beta: float, t: int,
                 stream: RngStream) -> np.ndarray:
    """Minibatch gradient then the local momentum recursion; returns u_t."""
    g = task.stochastic_gradient(w, B, stream)
    state.sample_count += B
    if t == 0 or state.momentum is None:
        state.momentum = g
    else:
        state.momentum = beta * state.momentum + (1.0 - beta) * g
    return state.momentum


def server_step_byzsgdm(w, aggregate, eta: float) -> np.ndarray:
    return as_vector(w) - eta * as_vector(aggregate)


def server_step_byzsgdnm(w, aggregate, eta: float):
    """Normalized step of length exactly eta; returns (w_next, skipped)."""
    u = as_vector(aggregate)
    n = l2_norm(u)
    if n <= 1e-12:
        return as_vector(w).copy(), True
    return as_vector(w) - eta * (u / n), False


def run_training(config: RunConfig) -> List[MetricsRecord]:
    task = make_task(config.task)
    dataset_size = len(task.y) if hasattr(task, "y") else None
    T = config.total_rounds(dataset_size)
    rpe = config.rounds_per_epoch(dataset_size)
    total_epochs = config.epochs if config.epochs is not None else max(1, math.ceil(T / rpe))

    byz = set(byzantine_slots(config.m, config.delta))
    workers = [WorkerState(role="byzantine" if k in byz else "honest")
               for k in range(config.m)]
    base = RngStream(config.seed)

    w = task.initial_point()
    cc_center = np.zeros(task.dim)  # warm-start state for centered clipping
    records: List[MetricsRecord] = []

    for t in range(T):
        epoch = min(t // rpe, total_epochs - 1)
        eta = config.eta0 if config.schedule == "constant" else cosine_lr(
            config.eta0, epoch, total_epochs)

        # bitflip corrupts each faulty worker's own momentum, so those workers
        # still run the honest computation; colluding attacks craft from the
        # honest submissions alone and skip it
        byz_computes = config.attack.kind in ("none", "bitflip")
        submissions: List[Optional[np.ndarray]] = [None] * config.m
        honest_momenta = []
        byz_true = []
        for k in range(config.m):
            if workers[k].role == "byzantine" and not byz_computes:
                continue
            u = worker_round(workers[k], task, w, config.B, config.beta, t,
                             base.lane(worker=k, iteration=t))
            if workers[k].role == "honest":
                submissions[k] = u
                honest_momenta.append(u)
            else:
                byz_true.append(u)
        crafted = apply_attack(config.attack, honest_momenta, len(byz),
                               base.lane(worker=config.m, iteration=t),
                               byz_true=byz_true)
        if crafted:
            for k, v in zip(sorted(byz), crafted):
                submissions[k] = v
        else:
            # no behavioral attack: Byzantine slots submit their true momenta
            for k, v in zip(sorted(byz), byz_true):
                submissions[k] = v

        center = cc_center if config.aggregator.cc_warm_start else np.zeros(task.dim)
        aggregate = apply_aggregator(config.aggregator, submissions,
                                     f=len(byz), cc_center=center)
        cc_center = aggregate

        skipped = False
        if config.algorithm == "byzsgdm":
            w = server_step_byzsgdm(w, aggregate, eta)
        else:
            w, skipped = server_step_byzsgdnm(w, aggregate, eta)

        honest_mean = aggregate_mean(honest_momenta)
        err_sq = float(np.sum((aggregate - honest_mean) ** 2))
        grad_norm = l2_norm(task.full_gradient(w))
        accuracy = None
        if (t + 1) % rpe == 0 or t == T - 1:
            loss, accuracy = task.evaluate(w)
        else:
            loss = task.loss(w)
        records.append(MetricsRecord(t=t, eta=eta, loss=loss, grad_norm=grad_norm,
                                     agg_error_sq=err_sq, accuracy=accuracy,
                                     skipped=skipped))

    honest_samples = sum(s.sample_count for s in workers if s.role == "honest")
    assert honest_samples == config.budget(dataset_size), "budget identity violated"
    return records
