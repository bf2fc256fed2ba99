"""Random-walker approximation of rich training dynamics.

Each training symbol k owns integer coordinates omega[k] = (omega^1,
omega^2), the overlaps of a representative hidden weight's two halves
with that symbol.  Micro-steps sample a same/different pair, gate on
the overlap rho = omega_u^1 + omega_v^2 (coin flip at exactly zero),
and add +-1 to both touched coordinates depending on whether the pair
matches the unit's readout sign.  Updates accumulate in a batch buffer
and commit at batch boundaries.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, UndefinedAlignmentError
from .rand import spawn_rng

READOUT_SIGNS = ("positive", "negative")


@dataclass
class WalkerEnsemble:
    omega: np.ndarray  # (L, 2) int64 coordinates
    readout_sign: str
    t: int
    batch_size: int

    @property
    def positions(self):
        """Walker positions s_k = omega_k^1 + omega_k^2."""
        return self.omega.sum(axis=1)


@dataclass
class WalkerStats:
    mu_hat: float
    mu_ci95: float
    mu_events: int
    n_plus_trace: np.ndarray  # walkers with s > 0 after each batch
    drift_hat: tuple  # measured (positive-walker, negative-walker) drift per event
    s_history: np.ndarray  # (steps + 1, L) walker positions at batch boundaries


@dataclass
class _RunTrace:
    readout_sign: str
    mu_eligible: int
    mu_passed: int
    s_history: np.ndarray
    pos_delta_sum: float
    pos_events: int
    neg_delta_sum: float
    neg_events: int


def run_markov(L, batch, steps, readout_sign="positive", seed=0):
    """Simulate `steps` batch updates of the walker ensemble.

    Micro-steps inside one batch all see the batch-start state.  The
    mu statistic counts, for a positive-readout unit, different pairs
    whose u walker is positive and v walker negative; for a
    negative-readout unit, every different pair.  In both cases the
    "passed" fraction is how often the overlap gate let the update
    through.
    """
    if L < 2:
        raise ValueError(f"need L >= 2 walkers, got {L}")
    if batch < 1:
        raise ValueError(f"batch size must be positive, got {batch}")
    if readout_sign not in READOUT_SIGNS:
        raise ValueError(f"readout_sign must be one of {READOUT_SIGNS}")

    rng = spawn_rng(seed, "markov", readout_sign)
    omega = np.zeros((L, 2), dtype=np.int64)
    positive = readout_sign == "positive"

    s_history = np.zeros((steps + 1, L), dtype=np.int64)
    mu_eligible = 0
    mu_passed = 0
    pos_delta = 0.0
    pos_events = 0
    neg_delta = 0.0
    neg_events = 0

    for t in range(steps):
        s = omega.sum(axis=1)
        u = rng.integers(0, L, size=batch)
        same = rng.random(batch) < 0.5
        v = np.where(same, u, (u + rng.integers(1, L, size=batch)) % L)

        rho = omega[u, 0] + omega[v, 1]
        coin = rng.random(batch) < 0.5
        apply = (rho > 0) | ((rho == 0) & coin)

        # +1 when the example type matches the readout sign
        if positive:
            sign = np.where(same, 1, -1)
        else:
            sign = np.where(same, -1, 1)
        upd = np.where(apply, sign, 0)

        b1 = np.zeros(L, dtype=np.int64)
        b2 = np.zeros(L, dtype=np.int64)
        np.add.at(b1, u, upd)
        np.add.at(b2, v, upd)

        diff = ~same
        if positive:
            eligible = diff & (s[u] > 0) & (s[v] < 0)
        else:
            eligible = diff
        mu_eligible += int(eligible.sum())
        mu_passed += int((eligible & apply).sum())

        # drift bookkeeping: position change per touching event, keyed by
        # the walker's sign at batch start.  A same pair is one event on
        # u moving both coordinates; a different pair is one event each
        # on u and v.
        fupd = upd.astype(np.float64)
        events = (
            (u[same], 2.0 * fupd[same]),
            (u[diff], fupd[diff]),
            (v[diff], fupd[diff]),
        )
        for walkers, deltas in events:
            ws = s[walkers]
            wpos = ws > 0
            wneg = ws < 0
            pos_delta += float(deltas[wpos].sum())
            pos_events += int(wpos.sum())
            neg_delta += float(deltas[wneg].sum())
            neg_events += int(wneg.sum())

        omega[:, 0] += b1
        omega[:, 1] += b2
        s_history[t + 1] = omega.sum(axis=1)

    ensemble = WalkerEnsemble(
        omega=omega, readout_sign=readout_sign, t=steps, batch_size=batch
    )
    trace = _RunTrace(
        readout_sign=readout_sign,
        mu_eligible=mu_eligible,
        mu_passed=mu_passed,
        s_history=s_history,
        pos_delta_sum=pos_delta,
        pos_events=pos_events,
        neg_delta_sum=neg_delta,
        neg_events=neg_events,
    )
    return ensemble, estimate_mu(trace, strict=False)


def estimate_mu(trace, strict=True):
    """WalkerStats from a run trace; needs at least 1000 eligible events.

    With strict=False a short trace yields nan mu fields instead of
    raising (run_markov uses this so tiny runs still return stats).
    """
    if trace.mu_eligible < 1000:
        if strict:
            raise InsufficientDataError(
                f"only {trace.mu_eligible} eligible events, need >= 1000"
            )
        p = float("nan")
    else:
        p = trace.mu_passed / trace.mu_eligible
    ci = (
        1.96 * np.sqrt(p * (1 - p) / trace.mu_eligible)
        if trace.mu_eligible
        else float("nan")
    )
    drift_pos = trace.pos_delta_sum / trace.pos_events if trace.pos_events else 0.0
    drift_neg = trace.neg_delta_sum / trace.neg_events if trace.neg_events else 0.0
    return WalkerStats(
        mu_hat=float(p),
        mu_ci95=float(ci),
        mu_events=trace.mu_eligible,
        n_plus_trace=(trace.s_history > 0).sum(axis=1),
        drift_hat=(drift_pos, drift_neg),
        s_history=trace.s_history,
    )


def expected_drift(n_plus, n_minus, mu, case):
    """Mean-field drift rates (positive-walker, negative-walker).

    Same-favoring units: Delta s+ = 2 n+ n- (1 - mu) / (3 n (n - 1)),
    Delta s- = -2 n- n+ mu / (3 n (n - 1)).  Different-favoring units:
    Delta s+ = 2 n+ (mu - 1) / (3 n), Delta s- = 2 n- mu / (3 n).
    """
    n = n_plus + n_minus
    if n < 2:
        raise ValueError(f"need n+ + n- >= 2, got {n}")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must be in [0, 1], got {mu}")
    if case == "same":
        pos = 2.0 * n_plus * n_minus * (1.0 - mu) / (3.0 * n * (n - 1))
        neg = -2.0 * n_minus * n_plus * mu / (3.0 * n * (n - 1))
    elif case == "different":
        pos = 2.0 * n_plus * (mu - 1.0) / (3.0 * n)
        neg = 2.0 * n_minus * mu / (3.0 * n)
    else:
        raise ValueError(f"case must be 'same' or 'different', got {case!r}")
    return pos, neg


def limiting_alignment(ensemble):
    """Cosine similarity between the two coordinate columns of the state."""
    c1 = ensemble.omega[:, 0].astype(np.float64)
    c2 = ensemble.omega[:, 1].astype(np.float64)
    norm = np.linalg.norm(c1) * np.linalg.norm(c2)
    if norm == 0.0:
        raise UndefinedAlignmentError("alignment undefined on all-zero state")
    return float(c1 @ c2 / norm)
