"""Pure-NumPy training kernels, the fallback when the compiled extension
is unavailable.  Signatures mirror eqlab._ckernels exactly."""

import numpy as np

BACKEND = "python"


def forward_centered_batch(a, W, a0, W0, X, pref):
    """Centered logits pref * (a . relu(W x) - a0 . relu(W0 x)) for each row of X."""
    live = np.maximum(X @ W.T, 0.0) @ a
    init = np.maximum(X @ W0.T, 0.0) @ a0
    return pref * (live - init)


def sgd_step_inplace(a, W, a0, W0, X, y, pref, lr):
    """One batch-gradient step of BCE on the centered logit; mutates a and W.

    ReLU subgradient at exactly 0 is taken as 0, so only strictly
    positive preactivations propagate gradient.
    """
    n = X.shape[0]
    H = X @ W.T
    R = np.maximum(H, 0.0)
    f = pref * (R @ a - np.maximum(X @ W0.T, 0.0) @ a0)
    # dL/df for BCE through the logistic link, stable at large |f|
    g = _sigmoid(f) - y
    da = (pref / n) * (R.T @ g)
    G = (g[:, None] * (H > 0.0)) * a[None, :]
    dW = (pref / n) * (G.T @ X)
    a -= lr * da
    W -= lr * dW


def _sigmoid(f):
    out = np.empty_like(f)
    pos = f >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-f[pos]))
    ef = np.exp(f[~pos])
    out[~pos] = ef / (1.0 + ef)
    return out
