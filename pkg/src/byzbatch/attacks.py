"""Byzantine behavior generators.

Bit-flipping is a per-worker failure (each faulty worker scales its own true
momentum); ALIE and FoE are collusion attacks where every Byzantine worker
submits the same crafted vector computed from the honest submissions of the
current round.
"""

import math
from dataclasses import dataclass

import numpy as np

from .vecmath import RngStream, as_vector

ATTACK_KINDS = ("none", "bitflip", "alie", "foe", "gauss")


@dataclass
class AttackSpec:
    kind: str = "none"
    bitflip_factor: float = -10.0
    foe_eps: float = 1.0
    gauss_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind: {self.kind!r}")


def byzantine_slots(m: int, delta: float):
    """The last floor(delta*m) worker indices are Byzantine."""
    if not 0 <= delta < 0.5:
        raise ValueError("delta must satisfy 0 <= delta < 1/2")
    n_byz = int(math.floor(delta * m + 1e-12))
    return list(range(m - n_byz, m))


def normal_quantile(p: float, tol: float = 1e-10) -> float:
    """Inverse standard normal CDF by bisection on the erf-based CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def alie_z(m: int, byz_count: int) -> float:
    """Supporters-quantile multiplier: z = Phi^{-1}((m - s)/m), s = floor(m/2 + 1) - byz_count."""
    s = math.floor(m / 2 + 1) - byz_count
    return normal_quantile((m - s) / m)


def apply_attack(spec: AttackSpec, honest, byz_count: int, stream: RngStream,
                 byz_true=None):
    """Vectors the Byzantine workers submit this round.

    `honest` are the non-Byzantine workers' true momenta; `byz_true` the
    faithfully computed momenta of the Byzantine workers themselves (needed
    for bit-flipping, which corrupts each worker's own value).
    """
    if byz_count == 0 or spec.kind == "none":
        return []
    if spec.kind == "gauss":
        return [spec.gauss_scale * stream.gaussian(len(as_vector(honest[0])))
                for _ in range(byz_count)]
    if len(honest) == 0:
        raise ValueError("attack requires at least one honest vector")
    if spec.kind == "bitflip":
        if byz_true is None or len(byz_true) != byz_count:
            raise ValueError("bitflip needs the Byzantine workers' true momenta")
        return [spec.bitflip_factor * as_vector(v) for v in byz_true]
    H = np.stack([as_vector(v) for v in honest])
    mu = H.mean(axis=0)
    if spec.kind == "foe":
        crafted = -spec.foe_eps * mu
    else:  # alie
        m = len(honest) + byz_count
        z = alie_z(m, byz_count)
        crafted = mu - z * H.std(axis=0)
    return [crafted.copy() for _ in range(byz_count)]
