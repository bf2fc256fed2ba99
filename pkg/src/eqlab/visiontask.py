"""Patch-aligned visual same-different generators.

PSVRT boards hold two random bit-pattern patches; Pentomino boards hold
two five-cell shapes with equality defined up to rotation (never
reflection).  Both keep exactly two objects per board no matter the
board size, so the input norm does not grow with dimension and these
tasks run the MLP with the unit output scale.  A generic
precomputed-feature reader stands in for pretrained-backbone pipelines.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .rand import spawn_rng
from .sdtask import Batch

# ---------------------------------------------------------------------------
# pentomino shapes

# The 12 free pentominoes in standard lettering; chiral mates are derived.
_FREE_PENTOMINOES = {
    "F": ((0, 1), (0, 2), (1, 0), (1, 1), (2, 1)),
    "I": ((0, 0), (1, 0), (2, 0), (3, 0), (4, 0)),
    "L": ((0, 0), (1, 0), (2, 0), (3, 0), (3, 1)),
    "N": ((0, 0), (0, 1), (1, 1), (1, 2), (1, 3)),
    "P": ((0, 0), (0, 1), (1, 0), (1, 1), (2, 0)),
    "T": ((0, 0), (0, 1), (0, 2), (1, 1), (2, 1)),
    "U": ((0, 0), (0, 2), (1, 0), (1, 1), (1, 2)),
    "V": ((0, 0), (1, 0), (2, 0), (2, 1), (2, 2)),
    "W": ((0, 0), (1, 0), (1, 1), (2, 1), (2, 2)),
    "X": ((0, 1), (1, 0), (1, 1), (1, 2), (2, 1)),
    "Y": ((0, 0), (0, 1), (0, 2), (0, 3), (1, 2)),
    "Z": ((0, 0), (0, 1), (1, 1), (2, 1), (2, 2)),
}


def _normalize(cells):
    r0 = min(r for r, _ in cells)
    c0 = min(c for _, c in cells)
    return tuple(sorted((r - r0, c - c0) for r, c in cells))


def _rotate(cells):
    # quarter turn: (r, c) -> (c, -r), then shift back to the origin
    return _normalize(tuple((c, -r) for r, c in cells))


def _mirror(cells):
    return _normalize(tuple((r, -c) for r, c in cells))


def _rotation_orbit(cells):
    orbit = []
    cur = _normalize(cells)
    for _ in range(4):
        if cur not in orbit:
            orbit.append(cur)
        cur = _rotate(cur)
    return tuple(orbit)


@dataclass(frozen=True)
class PentominoShape:
    name: str
    cells: tuple  # normalized cell tuple
    rotations: tuple  # distinct normalized rotations (1, 2 or 4 of them)


def pentomino_shapes():
    """The 18 one-sided pentominoes (rotations identified, reflections not).

    Built from the 12 free shapes plus the six chiral mates whose mirror
    image cannot be rotated back onto the original.
    """
    shapes = []
    for name, cells in _FREE_PENTOMINOES.items():
        orbit = _rotation_orbit(cells)
        shapes.append(PentominoShape(name=name, cells=orbit[0], rotations=orbit))
        mirrored = _mirror(cells)
        if _normalize(mirrored) not in orbit:
            m_orbit = _rotation_orbit(mirrored)
            shapes.append(
                PentominoShape(name=name + "'", cells=m_orbit[0], rotations=m_orbit)
            )
    return shapes


# ---------------------------------------------------------------------------
# configs

@dataclass(frozen=True)
class PsvrtConfig:
    """Bit-pattern boards.

    `signed` renders pattern bits as +-1 on a zero background (default);
    `signed=False` gives plain {0, 1} pixels.  The signed encoding keeps
    random patterns zero-mean, which the bias-free MLP needs: with 0/1
    pixels every occupied patch carries the same positive offset and the
    network memorizes the training patterns instead of generalizing.
    """

    n_train_patterns: int
    patch_px: int = 5
    patches_per_side: int = 5
    signed: bool = True
    seed: int = 0

    def __post_init__(self):
        bits = self.patch_px * self.patch_px
        if not 1 <= self.n_train_patterns < 2**bits - 1:
            raise ValueError(
                f"n_train_patterns must be in [1, {2**bits - 2}], "
                f"got {self.n_train_patterns}"
            )
        if self.patches_per_side**2 < 2:
            raise ValueError("board must hold at least 2 patches")


@dataclass(frozen=True)
class PentominoConfig:
    train_shapes: tuple  # indices into pentomino_shapes()
    patch_px: int = 7
    patches_per_side: int = 2
    blur_sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.patches_per_side**2 < 2:
            raise ValueError("board must hold at least 2 patches")
        idx = set(self.train_shapes)
        if not idx or not idx.issubset(range(18)):
            raise ValueError("train_shapes must be a nonempty subset of range(18)")
        if self.patch_px < 7:
            raise ValueError("patches below 7 px cannot border every pentomino")


def random_shape_split(n_train, seed=0):
    """Seeded partition of the 18 shape indices into (train, test)."""
    if not 1 <= n_train <= 17:
        raise ValueError(f"n_train must leave both splits nonempty, got {n_train}")
    order = spawn_rng(seed, "shape-split").permutation(18)
    return tuple(sorted(order[:n_train])), tuple(sorted(order[n_train:]))


@dataclass(frozen=True)
class ImageExample:
    pixels: np.ndarray  # flattened grayscale; [0, 1], or [-1, 1] when signed
    y: int


def image_examples(batch):
    return [ImageExample(batch.x[i], int(batch.y[i])) for i in range(len(batch))]


# ---------------------------------------------------------------------------
# PSVRT

def _psvrt_train_pool(cfg):
    bits = cfg.patch_px * cfg.patch_px
    rng = spawn_rng(cfg.seed, "psvrt-pool")
    pool = []
    seen = set()
    while len(pool) < cfg.n_train_patterns:
        p = int(rng.integers(1, 2**bits))  # exclude the all-zero pattern
        if p not in seen:
            seen.add(p)
            pool.append(p)
    return np.array(pool, dtype=np.int64), seen


def _pattern_to_patch(pattern, px, signed):
    bits = np.array([(pattern >> i) & 1 for i in range(px * px)], dtype=np.float64)
    if signed:
        bits = 2.0 * bits - 1.0
    return bits.reshape(px, px)


def _fresh_pattern(banned, bits, rng):
    while True:
        p = int(rng.integers(1, 2**bits))
        if p not in banned:
            return p


def _place_two(board, patch_a, patch_b, pps, px, rng):
    spots = rng.choice(pps * pps, size=2, replace=False)
    for spot, patch in zip(spots, (patch_a, patch_b)):
        r, c = divmod(int(spot), pps)
        board[r * px : (r + 1) * px, c * px : (c + 1) * px] = patch


def generate_psvrt_batch(cfg, split, N, rng):
    """Balanced PSVRT batch; the train and test pattern pools are disjoint."""
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    if N % 2 != 0:
        raise ValueError(f"batch size must be even, got {N}")
    pool, pool_set = _psvrt_train_pool(cfg)
    px, pps = cfg.patch_px, cfg.patches_per_side
    bits = px * px
    side = px * pps

    if split == "train" and cfg.n_train_patterns < 2:
        raise ValueError("need at least 2 training patterns for different pairs")

    x = np.zeros((N, side * side))
    y = np.empty(N, dtype=np.int64)
    for i in range(N):
        same = i < N // 2
        if split == "train":
            if same:
                p1 = p2 = int(pool[rng.integers(0, len(pool))])
            else:
                u = rng.integers(0, len(pool))
                v = (u + rng.integers(1, len(pool))) % len(pool)
                p1, p2 = int(pool[u]), int(pool[v])
        else:
            p1 = _fresh_pattern(pool_set, bits, rng)
            if same:
                p2 = p1
            else:
                p2 = _fresh_pattern(pool_set | {p1}, bits, rng)
        board = np.zeros((side, side))
        _place_two(
            board,
            _pattern_to_patch(p1, px, cfg.signed),
            _pattern_to_patch(p2, px, cfg.signed),
            pps,
            px,
            rng,
        )
        x[i] = board.ravel()
        y[i] = 1 if same else 0
    return Batch(x=x, y=y)


# ---------------------------------------------------------------------------
# pentomino

def _shape_patch(cells, px):
    patch = np.zeros((px, px))
    h = max(r for r, _ in cells) + 1
    w = max(c for _, c in cells) + 1
    r0 = (px - h) // 2
    c0 = (px - w) // 2
    for r, c in cells:
        patch[r0 + r, c0 + c] = 1.0
    return patch


def generate_pentomino_batch(cfg, split, N, rng):
    """Balanced pentomino batch; same means same shape up to rotation.

    Train images are blurred (sigma = cfg.blur_sigma) with probability
    1/2; test images never are.
    """
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    if N % 2 != 0:
        raise ValueError(f"batch size must be even, got {N}")
    shapes = pentomino_shapes()
    if split == "train":
        active = list(cfg.train_shapes)
    else:
        if len(cfg.train_shapes) >= 18:
            raise ValueError("train_shapes must leave shapes for the test split")
        active = [i for i in range(18) if i not in set(cfg.train_shapes)]
    if len(active) < 2:
        raise ValueError(f"split holds {len(active)} shapes; need >= 2")

    px, pps = cfg.patch_px, cfg.patches_per_side
    side = px * pps
    x = np.zeros((N, side * side))
    y = np.empty(N, dtype=np.int64)
    for i in range(N):
        same = i < N // 2
        if same:
            s1 = s2 = active[rng.integers(0, len(active))]
        else:
            u = rng.integers(0, len(active))
            v = (u + rng.integers(1, len(active))) % len(active)
            s1, s2 = active[u], active[v]
        rot1 = shapes[s1].rotations[rng.integers(0, len(shapes[s1].rotations))]
        rot2 = shapes[s2].rotations[rng.integers(0, len(shapes[s2].rotations))]
        board = np.zeros((side, side))
        _place_two(board, _shape_patch(rot1, px), _shape_patch(rot2, px), pps, px, rng)
        if split == "train" and rng.random() < 0.5:
            board = gaussian_filter(board, cfg.blur_sigma)
        x[i] = board.ravel()
        y[i] = 1 if same else 0
    return Batch(x=x, y=y)


# ---------------------------------------------------------------------------
# precomputed-feature ingestion

@dataclass
class FeatureDataset:
    """Class-labelled feature vectors paired into same/different inputs."""

    features: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) int class indices
    n_classes: int
    normalized: bool = False
    _by_class: list = field(default=None, repr=False)

    def __post_init__(self):
        if self._by_class is None:
            self._by_class = [
                np.flatnonzero(self.labels == c) for c in range(self.n_classes)
            ]
            if any(len(ix) == 0 for ix in self._by_class):
                raise ValueError("every class index below n_classes needs a vector")

    @property
    def d(self):
        return self.features.shape[1]

    def make_batch(self, N, rng):
        """Balanced batch: same pairs draw two vectors of one class
        (distinct rows when the class has them), different pairs one
        vector from each of two classes."""
        if N % 2 != 0:
            raise ValueError(f"batch size must be even, got {N}")
        x = np.empty((N, 2 * self.d))
        y = np.empty(N, dtype=np.int64)
        for i in range(N):
            same = i < N // 2
            if same:
                c = int(rng.integers(0, self.n_classes))
                rows = self._by_class[c]
                if len(rows) >= 2:
                    pick = rng.choice(len(rows), size=2, replace=False)
                    i1, i2 = rows[pick[0]], rows[pick[1]]
                else:
                    i1 = i2 = rows[0]
            else:
                c1 = int(rng.integers(0, self.n_classes))
                c2 = int((c1 + rng.integers(1, self.n_classes)) % self.n_classes)
                i1 = self._by_class[c1][rng.integers(0, len(self._by_class[c1]))]
                i2 = self._by_class[c2][rng.integers(0, len(self._by_class[c2]))]
            x[i, : self.d] = self.features[i1]
            x[i, self.d :] = self.features[i2]
            y[i] = 1 if same else 0
        return Batch(x=x, y=y, d=self.d)


def load_feature_dataset(path, normalize=False):
    """Read the documented binary feature file; optionally scale vectors
    by 1/sqrt(d) (for features with O(1) coordinates)."""
    from .io import read_feature_file

    features, labels, n_classes = read_feature_file(path)
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    if normalize:
        features = features / math.sqrt(features.shape[1])
    return FeatureDataset(
        features=features,
        labels=labels,
        n_classes=n_classes,
        normalized=normalize,
    )
