"""Vector same-different task.

Training draws pairs from a fixed pool of L Gaussian symbols; testing
draws fresh symbols for every example.  Labels are defined on the
underlying symbols, so additive observation noise never flips a label.
"""

from dataclasses import dataclass, field

import numpy as np

from .rand import make_rng


@dataclass(frozen=True)
class NoiseSpec:
    """Observation noise: eta ~ N(0, sigma2 * I / d) added to each symbol slot."""

    sigma2: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be nonnegative, got {self.sigma2}")


@dataclass(frozen=True)
class SymbolPool:
    """The L fixed training symbols, rows of an (L, d) matrix."""

    symbols: np.ndarray
    L: int
    d: int
    seed: int


@dataclass(frozen=True)
class SDExample:
    x: np.ndarray  # concatenated (z1; z2), length 2d
    y: int


@dataclass
class Batch:
    """A batch of same-different examples: x is (N, 2d), y is (N,) in {0, 1}."""

    x: np.ndarray
    y: np.ndarray
    d: int = field(default=0)

    def __post_init__(self):
        if self.d == 0:
            self.d = self.x.shape[1] // 2

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, i):
        return SDExample(self.x[i], int(self.y[i]))


def sample_symbol_pool(L, d, seed):
    """Draw L i.i.d. N(0, I/d) symbols; deterministic in the seed."""
    if L < 2:
        raise ValueError(f"need at least 2 symbols for a different pair, got L={L}")
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    rng = make_rng(seed)
    symbols = rng.normal(0.0, 1.0 / np.sqrt(d), size=(L, d))
    return SymbolPool(symbols=symbols, L=L, d=d, seed=int(seed))


def label(pool, i, j):
    """1 iff the two pool indices name the same symbol."""
    for idx in (i, j):
        if not 0 <= idx < pool.L:
            raise ValueError(f"symbol index {idx} out of range for L={pool.L}")
    return 1 if i == j else 0


def _sample_different_pairs(L, n, rng):
    # u uniform over [L], then v uniform over [L] \ {u} via a cyclic shift.
    u = rng.integers(0, L, size=n)
    v = (u + rng.integers(1, L, size=n)) % L
    return u, v


def _noisy(z, sigma2, rng):
    if sigma2 == 0.0:
        return z
    d = z.shape[-1]
    return z + rng.normal(0.0, np.sqrt(sigma2 / d), size=z.shape)


def make_train_batch(pool, N, noise, rng):
    """Balanced batch from the pool: N/2 same pairs, N/2 different pairs.

    Noise is redrawn for every symbol occurrence, including both slots
    of a same pair.
    """
    if N % 2 != 0:
        raise ValueError(f"batch size must be even, got {N}")
    half = N // 2
    u_same = rng.integers(0, pool.L, size=half)
    u_diff, v_diff = _sample_different_pairs(pool.L, half, rng)

    s1 = np.concatenate([pool.symbols[u_same], pool.symbols[u_diff]])
    s2 = np.concatenate([pool.symbols[u_same], pool.symbols[v_diff]])
    z1 = _noisy(s1, noise.sigma2, rng)
    z2 = _noisy(s2, noise.sigma2, rng)

    x = np.concatenate([z1, z2], axis=1)
    y = np.concatenate([np.ones(half, dtype=np.int64), np.zeros(half, dtype=np.int64)])
    return Batch(x=x, y=y, d=pool.d)


def make_test_batch(N, d, noise, rng):
    """Balanced batch with symbols sampled afresh for every example."""
    if N % 2 != 0:
        raise ValueError(f"batch size must be even, got {N}")
    half = N // 2
    scale = 1.0 / np.sqrt(d)
    s_same = rng.normal(0.0, scale, size=(half, d))
    s_a = rng.normal(0.0, scale, size=(half, d))
    s_b = rng.normal(0.0, scale, size=(half, d))

    s1 = np.concatenate([s_same, s_a])
    s2 = np.concatenate([s_same, s_b])
    z1 = _noisy(s1, noise.sigma2, rng)
    z2 = _noisy(s2, noise.sigma2, rng)

    x = np.concatenate([z1, z2], axis=1)
    y = np.concatenate([np.ones(half, dtype=np.int64), np.zeros(half, dtype=np.int64)])
    return Batch(x=x, y=y, d=d)
