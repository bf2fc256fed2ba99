"""Weight-structure diagnostics for trained networks.

Splits every hidden weight row into its two input halves and measures
their alignment, the negative/positive readout magnitude ratio, and
how much hidden activations moved relative to initialization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedRatioError


@dataclass
class AlignmentReport:
    a: np.ndarray  # readouts
    cos_align: np.ndarray  # v1.v2 / (|v1||v2|), nan for dead units
    norm1: np.ndarray
    norm2: np.ndarray
    valid: np.ndarray  # False where either half has zero norm
    mean_pos_align: float  # over valid units with a > 0
    mean_neg_align: float
    sign_match_rate: float  # top-decile |a| units whose alignment sign matches sign(a)


def alignment_report(params, top_fraction=0.1):
    """Per-unit half-alignments plus summary statistics.

    The sign-match rate is computed over the `top_fraction` of units by
    |a| (default the top decile): a unit matches when a > 0 pairs with
    positive alignment or a < 0 with negative alignment.
    """
    if params.D % 2 != 0:
        raise ValueError(f"input dimension must be even to split, got D={params.D}")
    d = params.D // 2
    v1 = params.W[:, :d]
    v2 = params.W[:, d:]
    norm1 = np.linalg.norm(v1, axis=1)
    norm2 = np.linalg.norm(v2, axis=1)
    valid = (norm1 > 0) & (norm2 > 0)

    cos = np.full(params.m, np.nan)
    cos[valid] = np.sum(v1[valid] * v2[valid], axis=1) / (norm1[valid] * norm2[valid])

    a = params.a
    pos = valid & (a > 0)
    neg = valid & (a < 0)
    mean_pos = float(cos[pos].mean()) if pos.any() else float("nan")
    mean_neg = float(cos[neg].mean()) if neg.any() else float("nan")

    k = max(1, int(round(top_fraction * params.m)))
    top = np.argsort(np.abs(a))[-k:]
    top = top[valid[top]]
    if top.size:
        match = np.sign(cos[top]) == np.sign(a[top])
        rate = float(match.mean())
    else:
        rate = float("nan")

    return AlignmentReport(
        a=a.copy(),
        cos_align=cos,
        norm1=norm1,
        norm2=norm2,
        valid=valid,
        mean_pos_align=mean_pos,
        mean_neg_align=mean_neg,
        sign_match_rate=rate,
    )


def readout_ratio(params):
    """|mean negative readout| / |mean positive readout|."""
    a = params.a
    pos = a[a > 0]
    neg = a[a < 0]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedRatioError("readout ratio needs both readout signs present")
    return float(abs(neg.mean()) / abs(pos.mean()))


def richness_metric(params0, paramsT, test_inputs):
    """Mean relative activation change |w(T).x - w(0).x| / |w(0).x|.

    Averaged over units and inputs; terms where the initial activation
    is below 1e-12 in magnitude are excluded.
    """
    X = np.asarray(test_inputs, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("test_inputs must be a nonempty (N, D) array")
    if params0.W.shape != paramsT.W.shape:
        raise ValueError("parameter shapes do not match")
    if X.shape[1] != params0.D:
        raise ValueError(f"input dimension {X.shape[1]} != D={params0.D}")
    H0 = X @ params0.W.T
    HT = X @ paramsT.W.T
    denom = np.abs(H0)
    mask = denom >= 1e-12
    return float((np.abs(HT - H0)[mask] / denom[mask]).mean())
