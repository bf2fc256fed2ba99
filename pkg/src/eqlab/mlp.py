"""Two-layer bias-free ReLU MLP with gamma-scaled richness.

The network is f(x) = pref * sum_i a_i relu(w_i . x), where the
prefactor is 1/(gamma sqrt(d)) with d = D/2 (vector tasks) or 1/gamma
(vision tasks, where the input norm does not grow with dimension).
Every prediction is centered by subtracting the frozen initial logit,
so the model outputs exactly 0 before the first update.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .rand import spawn_rng
from .sdtask import Batch

OUTPUT_SCALES = ("inv_sqrt_d", "unit")


@dataclass
class MlpParams:
    a: np.ndarray  # readouts, shape (m,)
    W: np.ndarray  # hidden weights, shape (m, D)
    gamma: float
    output_scale: str = "inv_sqrt_d"

    def __post_init__(self):
        if self.output_scale not in OUTPUT_SCALES:
            raise ValueError(f"unknown output_scale {self.output_scale!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def D(self):
        return self.W.shape[1]

    @property
    def prefactor(self):
        if self.output_scale == "inv_sqrt_d":
            return 1.0 / (self.gamma * math.sqrt(self.D / 2))
        return 1.0 / self.gamma

    def copy(self):
        return MlpParams(self.a.copy(), self.W.copy(), self.gamma, self.output_scale)


@dataclass(frozen=True)
class InitSnapshot:
    """Frozen copy of the parameters at step 0, used for centering."""

    a0: np.ndarray
    W0: np.ndarray


@dataclass
class TrainConfig:
    gamma: float
    m: int = 1024
    alpha0: float = 0.1
    batch: int = 128
    steps: int = 20000
    eval_every: int = 250
    test_size: int = 6000
    seed: int = 0
    output_scale: str = "inv_sqrt_d"

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.batch % 2 != 0:
            raise ValueError("batch must be even")
        if self.alpha0 <= 0:
            raise ValueError("alpha0 must be positive")


@dataclass
class TrainResult:
    history: list  # (step, train_acc, test_acc)
    best_test_acc: float
    params_final: MlpParams
    snapshot: InitSnapshot
    params_init: MlpParams = field(default=None, repr=False)


def init_params(m, D, gamma, output_scale="inv_sqrt_d", seed=0):
    """a_i ~ N(0, 1/m), w_i ~ N(0, I/m); returns params plus init snapshot."""
    if m < 1 or D < 1:
        raise ValueError(f"width and dimension must be positive, got m={m}, D={D}")
    rng = spawn_rng(seed, "init")
    a = rng.normal(0.0, 1.0 / math.sqrt(m), size=m)
    W = rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, D))
    params = MlpParams(a=a, W=W, gamma=gamma, output_scale=output_scale)
    snap = InitSnapshot(a0=a.copy(), W0=W.copy())
    return params, snap


def zero_snapshot(params):
    """Snapshot whose logit is identically zero, for evaluating a
    constructed network (e.g. the hand-crafted solution) uncentered."""
    return InitSnapshot(a0=np.zeros(params.m), W0=np.zeros((params.m, params.D)))


def forward_centered(params, snap, x):
    """Centered logit(s) f(x; theta) - f(x; theta(0)).

    Accepts a single input vector or a (N, D) batch.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    X = np.ascontiguousarray(x[None, :] if single else x)
    if X.shape[1] != params.D:
        raise ValueError(f"input dimension {X.shape[1]} != D={params.D}")
    f = backend.forward_centered_batch(
        params.a, params.W, snap.a0, snap.W0, X, params.prefactor
    )
    return float(f[0]) if single else f


def sgd_step(params, snap, batch, lr):
    """One gradient step of batch-mean BCE on the centered logit; mutates params."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    if lr < 0:
        raise ValueError(f"learning rate must be nonnegative, got {lr}")
    X = np.ascontiguousarray(batch.x, dtype=np.float64)
    if X.shape[1] != params.D:
        raise ValueError(f"batch dimension {X.shape[1]} != D={params.D}")
    y = np.ascontiguousarray(batch.y, dtype=np.float64)
    backend.sgd_step_inplace(
        params.a, params.W, snap.a0, snap.W0, X, y, params.prefactor, lr
    )
    return params


def learning_rate(gamma, d, alpha0, output_scale="inv_sqrt_d"):
    """Richness-stable learning rate.

    With the 1/sqrt(d) output prefactor: gamma^2 d alpha0 below gamma=1,
    gamma sqrt(d) alpha0 above.  Without it the d factors drop out.
    """
    if gamma <= 0 or d <= 0 or alpha0 <= 0:
        raise ValueError("gamma, d, alpha0 must all be positive")
    if output_scale == "inv_sqrt_d":
        return gamma**2 * d * alpha0 if gamma <= 1 else gamma * math.sqrt(d) * alpha0
    if output_scale == "unit":
        return gamma**2 * alpha0 if gamma <= 1 else gamma * alpha0
    raise ValueError(f"unknown output_scale {output_scale!r}")


def evaluate_accuracy(params, snap, batch):
    """Fraction of examples with predicted class equal to the label.

    Predicts 1 iff the centered logit is strictly positive; an exact
    zero (the state at init) counts as class 0.
    """
    if len(batch) == 0:
        raise ValueError("empty batch")
    f = forward_centered(params, snap, batch.x)
    return float(np.mean((f > 0).astype(np.int64) == batch.y))


def train(config, train_source, test_source):
    """SGD on fresh training batches with periodic held-out evaluation.

    `train_source(rng, N)` must yield a Batch per call; `test_source(rng, N)`
    is called once to build the fixed test set.  Three independent
    Philox substreams (init / batches / test) make the result a pure
    function of the config and sources.
    """
    test_rng = spawn_rng(config.seed, "test")
    test_batch = test_source(test_rng, config.test_size)
    D = test_batch.x.shape[1]

    params, snap = init_params(
        config.m, D, config.gamma, config.output_scale, seed=config.seed
    )
    params_init = params.copy()
    lr = learning_rate(config.gamma, D / 2, config.alpha0, config.output_scale)

    batch_rng = spawn_rng(config.seed, "batches")
    history = []
    best = evaluate_accuracy(params, snap, test_batch)
    history.append((0, 0.5, best))

    for step in range(1, config.steps + 1):
        batch = train_source(batch_rng, config.batch)
        if batch.x.shape[1] != D:
            raise ValueError(
                f"train batch dimension {batch.x.shape[1]} != test dimension {D}"
            )
        sgd_step(params, snap, batch, lr)
        if step % config.eval_every == 0 or step == config.steps:
            train_acc = evaluate_accuracy(params, snap, batch)
            test_acc = evaluate_accuracy(params, snap, test_batch)
            history.append((step, train_acc, test_acc))
            best = max(best, test_acc)

    return TrainResult(
        history=history,
        best_test_acc=best,
        params_final=params,
        snapshot=snap,
        params_init=params_init,
    )
