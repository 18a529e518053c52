"""Synthetic learning tasks with unbiased stochastic gradient oracles.

Each task exposes the same surface: an exact full gradient, a minibatch
stochastic gradient (sampling with replacement), an evaluation metric and
estimable smoothness/variance constants. The quadratic task has all constants
in closed form, so bound formulas can be checked without estimation error.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .vecmath import RngStream, as_vector, check_same_dim


@dataclass
class TaskSpec:
    kind: str = "quadratic"  # quadratic | logistic | mlp
    dim: int = 10
    noise_scale: float = 0.0  # per-sample gradient noise (quadratic only)
    condition_number: float = 10.0  # quadratic Hessian spectrum [L/cond, L]
    smoothness: float = 1.0  # quadratic L
    n_samples: int = 1000  # dataset size (logistic/mlp)
    class_separation: float = 2.0
    hidden_units: int = 8  # mlp only
    data_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("quadratic", "logistic", "mlp"):
            raise ValueError(f"unknown task kind: {self.kind!r}")


@dataclass
class TaskConstants:
    L: float
    sigma2: float
    F0: float
    Fstar: float
    exact: bool = False  # True when all constants are closed-form

    def __post_init__(self):
        if self.L <= 0 or self.sigma2 < 0 or self.F0 < 0:
            raise ValueError("invalid task constants")


class QuadraticTask:
    """F(w) = 0.5 w^T H w with diagonal H, eigenvalues in [L/cond, L].

    Per-sample gradients are Hw + s*z with z standard normal, so the
    per-sample variance bound is sigma^2 = s^2 * d exactly.
    """

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        L, cond, d = spec.smoothness, spec.condition_number, spec.dim
        self.mu = L / cond
        self.hessian_diag = np.linspace(self.mu, L, d) if d > 1 else np.array([L])
        self.dim = d
        self.Fstar = 0.0

    def initial_point(self) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.spec.data_seed)))
        w0 = rng.standard_normal(self.dim)
        return w0 / np.linalg.norm(w0) * np.sqrt(self.dim)

    def loss(self, w) -> float:
        w = as_vector(w)
        return float(0.5 * np.dot(self.hessian_diag * w, w))

    def full_gradient(self, w) -> np.ndarray:
        w = as_vector(w)
        if len(w) != self.dim:
            raise ValueError("dimension mismatch")
        return self.hessian_diag * w

    def per_sample_gradients(self, w, n: int, stream: RngStream) -> np.ndarray:
        g = self.full_gradient(w)
        noise = self.spec.noise_scale * stream.gaussian_matrix(n, self.dim)
        return g[None, :] + noise

    def stochastic_gradient(self, w, batch_size: int, stream: RngStream) -> np.ndarray:
        if batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.spec.noise_scale == 0.0:
            return self.full_gradient(w)
        return self.per_sample_gradients(w, batch_size, stream).mean(axis=0)

    def evaluate(self, w):
        return self.loss(w), None

    def constants(self, w0=None) -> TaskConstants:
        w0 = self.initial_point() if w0 is None else as_vector(w0)
        sigma2 = self.spec.noise_scale**2 * self.dim
        return TaskConstants(
            L=float(self.hessian_diag.max()),
            sigma2=sigma2,
            F0=self.loss(w0) - self.Fstar,
            Fstar=self.Fstar,
            exact=True,
        )


class _FiniteDatasetTask:
    """Shared machinery for tasks over a fixed seeded dataset.

    Minibatches are drawn with replacement so per-sample gradients stay
    i.i.d. and the variance is stationary in B.
    """

    X: np.ndarray
    y: np.ndarray
    dim: int
    Fstar = 0.0

    def stochastic_gradient(self, w, batch_size: int, stream: RngStream) -> np.ndarray:
        if batch_size < 1:
            raise ValueError("batch size must be >= 1")
        idx = stream.integers(0, len(self.y), batch_size)
        return self._gradient_on(w, idx)

    def full_gradient(self, w) -> np.ndarray:
        return self._gradient_on(w, np.arange(len(self.y)))

    def per_sample_variance(self, w) -> float:
        """Exact E||grad_i - full_gradient||^2 over the dataset."""
        grads = self._per_sample_gradients(w, np.arange(len(self.y)))
        g = grads.mean(axis=0)
        return float(np.mean(np.sum((grads - g) ** 2, axis=1)))

    def _gradient_on(self, w, idx) -> np.ndarray:
        return self._per_sample_gradients(w, idx).mean(axis=0)

    def _per_sample_gradients(self, w, idx) -> np.ndarray:
        raise NotImplementedError

    def constants(self, w0=None, probes: int = 20, stream: Optional[RngStream] = None) -> TaskConstants:
        return estimate_constants(self, probes, stream or RngStream(0), w0=w0)


def _two_cluster_data(spec: TaskSpec):
    """Two Gaussian clusters separated along the first axis, labels in {-1,+1}."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.data_seed)))
    n, d = spec.n_samples, spec.dim
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    X = rng.standard_normal((n, d))
    X[:, 0] += y * spec.class_separation / 2.0
    return X, y


class LogisticTask(_FiniteDatasetTask):
    """Binary logistic regression on a seeded two-cluster dataset.

    The weight vector carries an intercept as its last coordinate, so the
    parameter dimension is spec.dim + 1.
    """

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        X, self.y = _two_cluster_data(spec)
        self.X = np.hstack([X, np.ones((len(self.y), 1))])
        self.dim = spec.dim + 1

    def initial_point(self) -> np.ndarray:
        return np.zeros(self.dim)

    def _margins(self, w, idx):
        w = as_vector(w)
        if len(w) != self.dim:
            raise ValueError("dimension mismatch")
        return self.y[idx] * (self.X[idx] @ w)

    def loss(self, w) -> float:
        m = self._margins(w, np.arange(len(self.y)))
        return float(np.mean(np.logaddexp(0.0, -m)))

    def _per_sample_gradients(self, w, idx) -> np.ndarray:
        m = self._margins(w, idx)
        # d/dw log(1+exp(-m)) = -sigmoid(-m) * y * x
        coef = -self.y[idx] / (1.0 + np.exp(m))
        return coef[:, None] * self.X[idx]

    def evaluate(self, w):
        m = self._margins(w, np.arange(len(self.y)))
        return float(np.mean(np.logaddexp(0.0, -m))), float(np.mean(m > 0))


class MlpTask(_FiniteDatasetTask):
    """One-hidden-layer tanh network with logistic loss, hand-written backprop.

    Parameters are flattened as [W1 (h x in), b1 (h), w2 (h), b2 (1)].
    """

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self.X, self.y = _two_cluster_data(spec)
        self.n_in = spec.dim
        self.h = spec.hidden_units
        self.dim = self.h * self.n_in + self.h + self.h + 1

    def initial_point(self) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.spec.data_seed + 1)))
        return 0.5 * rng.standard_normal(self.dim) / np.sqrt(self.n_in)

    def _unpack(self, w):
        w = as_vector(w)
        if len(w) != self.dim:
            raise ValueError("dimension mismatch")
        h, n_in = self.h, self.n_in
        W1 = w[: h * n_in].reshape(h, n_in)
        b1 = w[h * n_in : h * n_in + h]
        w2 = w[h * n_in + h : h * n_in + 2 * h]
        b2 = w[-1]
        return W1, b1, w2, b2

    def _forward(self, w, idx):
        W1, b1, w2, b2 = self._unpack(w)
        z = self.X[idx] @ W1.T + b1  # (n, h)
        a = np.tanh(z)
        out = a @ w2 + b2  # (n,)
        return a, out

    def loss(self, w) -> float:
        _, out = self._forward(w, np.arange(len(self.y)))
        return float(np.mean(np.logaddexp(0.0, -self.y * out)))

    def _per_sample_gradients(self, w, idx) -> np.ndarray:
        W1, b1, w2, b2 = self._unpack(w)
        a, out = self._forward(w, idx)
        yb = self.y[idx]
        dout = -yb / (1.0 + np.exp(yb * out))  # (n,)
        dw2 = dout[:, None] * a
        db2 = dout
        da = dout[:, None] * w2[None, :]
        dz = da * (1.0 - a**2)
        dW1 = dz[:, :, None] * self.X[idx][:, None, :]  # (n, h, in)
        db1 = dz
        n = len(idx)
        return np.hstack([dW1.reshape(n, -1), db1, dw2, db2[:, None]])

    def evaluate(self, w):
        _, out = self._forward(w, np.arange(len(self.y)))
        return float(np.mean(np.logaddexp(0.0, -self.y * out))), float(np.mean(self.y * out > 0))


def make_task(spec: TaskSpec):
    return {"quadratic": QuadraticTask, "logistic": LogisticTask, "mlp": MlpTask}[spec.kind](spec)


def full_gradient(task, w) -> np.ndarray:
    return task.full_gradient(w)


def stochastic_gradient(task, w, batch_size: int, stream: RngStream) -> np.ndarray:
    return task.stochastic_gradient(w, batch_size, stream)


def evaluate(task, w):
    return task.evaluate(w)


def estimate_constants(task, probes: int, stream: RngStream, w0=None) -> TaskConstants:
    """Probe-based constants for non-quadratic tasks; exact for quadratic.

    The smoothness estimate is the max Lipschitz ratio over probe pairs and
    the variance the max per-sample variance over probe points, so both are
    lower bounds on the global constants of the assumptions they stand in
    for. Reports flag them as approximate.
    """
    if isinstance(task, QuadraticTask):
        return task.constants(w0)
    if probes < 2:
        raise ValueError("need at least 2 probe points")
    w_ref = task.initial_point() if w0 is None else as_vector(w0)
    check_same_dim(w_ref, np.zeros(task.dim))
    points = [w_ref] + [w_ref + stream.gaussian(task.dim) for _ in range(probes - 1)]
    grads = [task.full_gradient(p) for p in points]
    L = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            dw = np.linalg.norm(points[i] - points[j])
            if dw > 1e-12:
                L = max(L, float(np.linalg.norm(grads[i] - grads[j]) / dw))
    sigma2 = max(task.per_sample_variance(p) for p in points)
    F0 = task.loss(w_ref) - task.Fstar
    return TaskConstants(L=L, sigma2=sigma2, F0=F0, Fstar=task.Fstar, exact=False)
