"""Binary file formats.

All integers and floats are little-endian.  Layouts:

  pool      EQPL | u32 version | u64 L | u64 d | f64 sigma2 | i64 seed
            | L*d f64 symbols (row-major)
  batch     EQBT | u32 version | u64 N | u64 d | f64 sigma2 | i64 seed
            | N*2d f64 inputs (row-major) | N u8 labels
  weights   EQCK | u32 version | u64 m | u64 D | f64 gamma | u8 scale
            (0 = inv_sqrt_d, 1 = unit) | m f64 a | m*D f64 W
            | m f64 a0 | m*D f64 W0
  features  EQFT | u32 version | u64 n | u64 d | u64 n_classes
            | n*d f64 vectors (row-major) | n i32 class labels
"""

import struct

import numpy as np

from .errors import ParseError
from .mlp import OUTPUT_SCALES, InitSnapshot, MlpParams
from .sdtask import Batch, SymbolPool

_VERSION = 1


def _read_exact(fh, nbytes, what):
    buf = fh.read(nbytes)
    if len(buf) != nbytes:
        raise ParseError(f"truncated file while reading {what}")
    return buf


def _read_header(fh, magic):
    got = _read_exact(fh, 4, "magic")
    if got != magic:
        raise ParseError(f"bad magic {got!r}, expected {magic!r}")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != _VERSION:
        raise ParseError(f"unsupported version {version}")


def _read_floats(fh, count, what):
    buf = _read_exact(fh, 8 * count, what)
    return np.frombuffer(buf, dtype="<f8").astype(np.float64)


def write_pool(path, pool, sigma2=0.0):
    with open(path, "wb") as fh:
        fh.write(b"EQPL")
        fh.write(struct.pack("<IQQdq", _VERSION, pool.L, pool.d, sigma2, pool.seed))
        fh.write(np.ascontiguousarray(pool.symbols, dtype="<f8").tobytes())


def read_pool(path):
    with open(path, "rb") as fh:
        _read_header(fh, b"EQPL")
        L, d, sigma2, seed = struct.unpack("<QQdq", _read_exact(fh, 32, "pool header"))
        symbols = _read_floats(fh, L * d, "symbols").reshape(L, d)
    return SymbolPool(symbols=symbols, L=int(L), d=int(d), seed=int(seed)), sigma2


def write_batch(path, batch, sigma2=0.0, seed=0):
    n = len(batch)
    with open(path, "wb") as fh:
        fh.write(b"EQBT")
        fh.write(struct.pack("<IQQdq", _VERSION, n, batch.d, sigma2, seed))
        fh.write(np.ascontiguousarray(batch.x, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(batch.y, dtype=np.uint8).tobytes())


def read_batch(path):
    with open(path, "rb") as fh:
        _read_header(fh, b"EQBT")
        n, d, sigma2, seed = struct.unpack("<QQdq", _read_exact(fh, 32, "batch header"))
        x = _read_floats(fh, n * 2 * d, "inputs").reshape(n, 2 * d)
        y = np.frombuffer(_read_exact(fh, n, "labels"), dtype=np.uint8).astype(np.int64)
    return Batch(x=x, y=y, d=int(d)), sigma2, int(seed)


def save_weights(path, params, snap):
    scale_code = OUTPUT_SCALES.index(params.output_scale)
    with open(path, "wb") as fh:
        fh.write(b"EQCK")
        fh.write(
            struct.pack("<IQQdB", _VERSION, params.m, params.D, params.gamma, scale_code)
        )
        for arr in (params.a, params.W, snap.a0, snap.W0):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_weights(path):
    with open(path, "rb") as fh:
        _read_header(fh, b"EQCK")
        m, D, gamma, scale_code = struct.unpack(
            "<QQdB", _read_exact(fh, 25, "weight header")
        )
        if scale_code >= len(OUTPUT_SCALES):
            raise ParseError(f"unknown output scale code {scale_code}")
        a = _read_floats(fh, m, "a")
        W = _read_floats(fh, m * D, "W").reshape(m, D)
        a0 = _read_floats(fh, m, "a0")
        W0 = _read_floats(fh, m * D, "W0").reshape(m, D)
    params = MlpParams(a=a, W=W, gamma=gamma, output_scale=OUTPUT_SCALES[scale_code])
    return params, InitSnapshot(a0=a0, W0=W0)


def write_feature_file(path, features, labels, n_classes):
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int32)
    if features.ndim != 2 or labels.shape != (features.shape[0],):
        raise ValueError("features must be (n, d) with one label per row")
    with open(path, "wb") as fh:
        fh.write(b"EQFT")
        fh.write(
            struct.pack(
                "<IQQQ", _VERSION, features.shape[0], features.shape[1], n_classes
            )
        )
        fh.write(np.ascontiguousarray(features, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(labels, dtype="<i4").tobytes())


def read_feature_file(path):
    with open(path, "rb") as fh:
        _read_header(fh, b"EQFT")
        n, d, n_classes = struct.unpack("<QQQ", _read_exact(fh, 24, "feature header"))
        features = _read_floats(fh, n * d, "features").reshape(n, d)
        labels = np.frombuffer(
            _read_exact(fh, 4 * n, "labels"), dtype="<i4"
        ).astype(np.int64)
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ParseError("class labels outside [0, n_classes)")
    return features, labels, int(n_classes)


def write_pgm(path, image):
    """Binary PGM (P5) of a 2-D grayscale image with values in [0, 1]."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("PGM dump needs a 2-D image")
    data = np.clip(np.round(img * 255), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())
