"""Byzantine-robust distributed SGD simulator and batch-size planner."""

from .aggregators import (AggregatorConfig, aggregate_cc, aggregate_cm,
                          aggregate_geomed, aggregate_krum, aggregate_mean,
                          estimate_robustness)
from .attacks import AttackSpec, apply_attack, byzantine_slots
from .engine import (MetricsRecord, RunConfig, WorkerState, cosine_lr,
                     run_training, server_step_byzsgdm, server_step_byzsgdnm,
                     worker_round)
from .harness import (GridSpec, ResultRow, best_batch_curve, emit_results,
                      enumerate_runs, load_results, load_table1_fixture,
                      parse_config, run_grid, run_single)
from .planner import (BoundParams, bound_byzsgdm_U, bound_byzsgdnm,
                      bound_byzsgdnm_generic, convexity_check,
                      hyperparams_byzsgdm, hyperparams_byzsgdnm, integer_batch,
                      optimal_batch_byzsgdm, optimal_batch_byzsgdnm)
from .tasks import TaskConstants, TaskSpec, estimate_constants, make_task
from .vecmath import (RngStream, ZeroNormError, coordinate_median,
                      gaussian_draw, l2_norm, normalize)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
