"""Closed-form and constructive theory for the same-different task.

Covers the four-unit hand-crafted network, the rich-regime accuracy
prediction, the max-average-margin matrix and its ideal circulant
eigensystem, the two-layer ReLU NTK, the restricted dual classifier
behind the lazy generalization bound, and the L-vs-d scaling fit.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .mlp import MlpParams
from .rand import spawn_rng
from .sdtask import sample_symbol_pool


def build_handcrafted(d, rho):
    """Four-unit solution: parallel (+-1;+-1) rows on readout +1, antiparallel
    (+-1;-+1) rows on readout -rho.

    On a same input the antiparallel units cancel exactly and the logit
    is 2|1.z| (up to the positive output prefactor); on different inputs
    the sign is decided by the readout magnitude rho.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    ones = np.ones(d)
    W = np.stack(
        [
            np.concatenate([ones, ones]),
            np.concatenate([-ones, -ones]),
            np.concatenate([ones, -ones]),
            np.concatenate([-ones, ones]),
        ]
    )
    a = np.array([1.0, 1.0, -rho, -rho])
    return MlpParams(a=a, W=W, gamma=1.0, output_scale="inv_sqrt_d")


def handcrafted_diff_accuracy(rho):
    """Probability the hand-crafted net classifies a fresh different pair
    correctly: (2/pi) atan(rho)."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    return (2.0 / math.pi) * math.atan(rho)


def _phi(x):
    """Standard normal CDF."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def rich_accuracy_prediction(L, rho=1.5):
    """Predicted rich-regime test accuracy as a function of pool size L.

    L = 2 is the special case 3/4 (the trained readout ratio collapses
    to 1 there); for L >= 3 the prediction is
    1/2 + 1/2 Phi(sqrt(2(L^2-L)(rho-1)^2 / ((pi-2)(rho^2+1)))),
    with the default rho = 1.5 measured on trained networks.
    """
    if L < 2:
        raise ValueError(f"need L >= 2, got {L}")
    if L == 2:
        return 0.75
    arg = math.sqrt(
        2.0 * (L**2 - L) * (rho - 1.0) ** 2 / ((math.pi - 2.0) * (rho**2 + 1.0))
    )
    return 0.5 + 0.5 * _phi(arg)


@dataclass
class MarginMatrix:
    X: np.ndarray  # (2d, 2d), symmetric
    normalization: float = 1.0  # multiplier already applied (2d or 1)

    def normalized(self):
        """Copy with the 2d normalization applied (quadrant diagonals -> 1)."""
        if self.normalization != 1.0:
            return self
        two_d = self.X.shape[0]
        return MarginMatrix(X=self.X * two_d, normalization=float(two_d))


def empirical_margin_matrix(batch, normalize=False):
    """Difference of class Gram matrices (1/P)[X+^T X+ - X-^T X-].

    Requires a balanced, noiseless batch (same examples must repeat the
    symbol bit-exactly in both slots).
    """
    P = len(batch)
    same = batch.y == 1
    if same.sum() * 2 != P:
        raise ValueError(f"batch must be balanced, got {same.sum()} same of {P}")
    d = batch.d
    xs = batch.x[same]
    if not np.array_equal(xs[:, :d], xs[:, d:]):
        raise ValueError("same examples are noisy; margin matrix needs sigma2 = 0")
    Xp = xs
    Xm = batch.x[~same]
    X = (Xp.T @ Xp - Xm.T @ Xm) / P
    mm = MarginMatrix(X=X)
    return mm.normalized() if normalize else mm


def ideal_circulant_eigensystem(d):
    """Eigensystem of the infinite-data margin matrix (2d-normalized).

    That matrix swaps the two input halves, so eigenvalues alternate
    (-1)^l over the real Fourier basis: cosine modes for l = 0..d,
    sine modes for l = d+1..2d-1 (frequency 2d - l).  Even-l modes have
    parallel halves, odd-l modes antiparallel halves.

    Returns (eigenvalues shape (2d,), eigenvectors shape (2d, 2d)) with
    eigenvectors in columns, unit norm.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    n = 2 * d
    k = np.arange(n)
    vecs = np.empty((n, n))
    for ell in range(n):
        if ell <= d:
            col = np.cos(math.pi * ell * k / d)
        else:
            col = np.sin(math.pi * (n - ell) * k / d)
        vecs[:, ell] = col / np.linalg.norm(col)
    vals = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return vals, vecs


def ntk_kernel(u):
    """Two-layer ReLU NTK on the unit sphere:
    K(u) = u (1 - arccos(u)/pi) + sqrt(1-u^2) / (2 pi).

    Accepts scalars or arrays; values within 1e-12 of +-1 are clamped,
    anything further outside raises.
    """
    arr = np.asarray(u, dtype=np.float64)
    if np.any(np.abs(arr) > 1.0 + 1e-12):
        raise ValueError("kernel argument outside [-1, 1]")
    c = np.clip(arr, -1.0, 1.0)
    val = c * (1.0 - np.arccos(c) / math.pi) + np.sqrt(1.0 - c**2) / (2.0 * math.pi)
    return float(val) if np.isscalar(u) or arr.ndim == 0 else val


def taylor_kernel_expectation(Eu, Eu2):
    """Second-order expansion of E[K(u)]: 1/(2 pi) + E[u]/2 + 3 E[u^2]/(4 pi)."""
    if Eu2 < Eu**2 - 1e-9:
        raise ValueError(f"E[u^2]={Eu2} below E[u]^2={Eu**2}")
    return 1.0 / (2.0 * math.pi) + Eu / 2.0 + 3.0 * Eu2 / (4.0 * math.pi)


@dataclass
class DualClassifier:
    """Kernel classifier f(x) = sum_j b_j K(x . x_j) over sparse anchors.

    Same anchors carry +bplus, different anchors -bminus.  Anchor inputs
    and queries are normalized to the unit sphere before the kernel.
    """

    anchors: np.ndarray  # (P, 2d), unit rows
    coefficients: np.ndarray  # (P,), signed
    bplus: float
    bminus: float
    same_symbols: tuple = field(default=())
    diff_pairs: tuple = field(default=())

    def logits(self, X):
        Xn = X / np.linalg.norm(X, axis=1, keepdims=True)
        G = np.clip(Xn @ self.anchors.T, -1.0, 1.0)
        return ntk_kernel(G) @ self.coefficients

    def predict(self, X):
        return (self.logits(X) > 0).astype(np.int64)


def build_restricted_dual_classifier(pool, bplus, bminus):
    """Sparse dual solution used in the lazy-regime error bound.

    The first L/3 symbols anchor same examples; the remaining 2L/3
    anchor non-overlapping adjacent different pairs (odd first index,
    1-based).  Proof constraints: |bminus/bplus| < 2 and
    |bminus| > |bplus|.
    """
    L = pool.L
    if L % 3 != 0:
        raise ValueError(f"pool size must be divisible by 3, got L={L}")
    if bplus <= 0:
        raise ValueError(f"bplus must be positive, got {bplus}")
    if abs(bminus / bplus) >= 2:
        raise ValueError(f"|bminus/bplus| must be < 2, got {abs(bminus / bplus)}")
    if abs(bminus) <= abs(bplus):
        raise ValueError("|bminus| must exceed |bplus|")

    third = L // 3
    same_symbols = tuple(range(third))
    # 1-based first index l1 odd <=> 0-based even; both pair members in S2
    diff_pairs = tuple((i, i + 1) for i in range(third, L - 1) if i % 2 == 0)

    rows = []
    coeffs = []
    for i in same_symbols:
        rows.append(np.concatenate([pool.symbols[i], pool.symbols[i]]))
        coeffs.append(bplus)
    for i, j in diff_pairs:
        rows.append(np.concatenate([pool.symbols[i], pool.symbols[j]]))
        coeffs.append(-abs(bminus))

    anchors = np.stack(rows)
    anchors = anchors / np.linalg.norm(anchors, axis=1, keepdims=True)
    return DualClassifier(
        anchors=anchors,
        coefficients=np.array(coeffs),
        bplus=float(bplus),
        bminus=float(bminus),
        same_symbols=same_symbols,
        diff_pairs=diff_pairs,
    )


def balanced_dual_coefficients(d):
    """(bplus, bminus) whose same/different mean margins balance at
    second order: the gap must shrink like 1/d or the constant kernel
    term swamps the O(1/d) moment gap between the classes."""
    return 1.0, 1.0 + 3.0 / (8.0 * d + 6.0)


def restricted_dual_error_runner(n_test=2000, n_pools=3, gap_coef=0.75, seed=0):
    """Callback for lazy_scaling_curve: (L, d) -> Monte-Carlo test error
    of the restricted dual classifier, averaged over `n_pools` pools.

    L is rounded up to a multiple of 6 so same and different anchors
    count exactly equal (an odd L/3 leaves a stray same anchor whose
    constant kernel term drowns the class margins).  The coefficient
    gap scales as gap_coef * d^-1.5, which keeps the same-class mean
    margin positive at every d while the different-class margin-to-
    fluctuation ratio scales as sqrt(L/d^2), the rate of the
    lazy-regime error bound.  Deterministic in (seed, L, d).
    """

    def runner(L, d):
        L6 = max(6, 6 * math.ceil(L / 6))
        bminus = 1.0 + gap_coef * d**-1.5
        errs = []
        for rep in range(n_pools):
            rng = spawn_rng(seed, "dual-runner", L6, d, rep)
            pool = sample_symbol_pool(L6, d, seed=int(rng.integers(2**63)))
            clf = build_restricted_dual_classifier(pool, 1.0, bminus)
            half = n_test // 2
            scale = 1.0 / math.sqrt(d)
            zs = rng.normal(0.0, scale, size=(half, d))
            za = rng.normal(0.0, scale, size=(half, d))
            zb = rng.normal(0.0, scale, size=(half, d))
            X = np.concatenate(
                [np.concatenate([zs, zs], axis=1), np.concatenate([za, zb], axis=1)]
            )
            y = np.concatenate([np.ones(half), np.zeros(half)])
            errs.append(float(np.mean(clf.predict(X) != y)))
        return float(np.mean(errs))

    return runner


@dataclass
class LazyScalingFit:
    exponent: float
    points: list  # (d, L_star) for points that reached the target
    censored: list  # d values where the budget was exhausted


def lazy_scaling_curve(d_values, target_error, runner, budget_factor=4):
    """Smallest L reaching the target error for each d, plus the fitted
    log-log slope.

    Bisects runner(L, d) over L in [1, budget_factor * d^2] assuming the
    error shrinks with L; if even the budget never reaches the target
    the point is reported censored and excluded from the fit.
    """
    ds = sorted(set(int(d) for d in d_values))
    if len(ds) < 3:
        raise ValueError(f"need at least 3 distinct d values, got {len(ds)}")

    points, censored = [], []
    for d in ds:
        budget = budget_factor * d * d
        if runner(budget, d) > target_error:
            censored.append(d)
            continue
        lo, hi = 0, budget
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if runner(mid, d) <= target_error:
                hi = mid
            else:
                lo = mid
        points.append((d, hi))

    if len(points) < 2:
        raise ValueError("too few uncensored points to fit a slope")
    logd = np.log([p[0] for p in points])
    logl = np.log([p[1] for p in points])
    slope = float(np.polyfit(logd, logl, 1)[0])
    return LazyScalingFit(exponent=slope, points=points, censored=censored)
