import numpy as np
import pytest

from eqlab import io, mlp, sdtask
from eqlab.errors import ParseError
from eqlab.rand import make_rng


def test_pool_roundtrip(tmp_path):
    pool = sdtask.sample_symbol_pool(6, 12, seed=42)
    path = tmp_path / "pool.bin"
    io.write_pool(path, pool, sigma2=0.25)
    loaded, sigma2 = io.read_pool(path)
    assert sigma2 == 0.25
    assert loaded.L == 6 and loaded.d == 12 and loaded.seed == 42
    np.testing.assert_array_equal(loaded.symbols, pool.symbols)


def test_batch_roundtrip(tmp_path):
    pool = sdtask.sample_symbol_pool(4, 8, seed=0)
    batch = sdtask.make_train_batch(pool, 10, sdtask.NoiseSpec(0.1), make_rng(1))
    path = tmp_path / "batch.bin"
    io.write_batch(path, batch, sigma2=0.1, seed=7)
    loaded, sigma2, seed = io.read_batch(path)
    assert (sigma2, seed) == (0.1, 7)
    np.testing.assert_array_equal(loaded.x, batch.x)
    np.testing.assert_array_equal(loaded.y, batch.y)


def test_weights_roundtrip(tmp_path):
    params, snap = mlp.init_params(5, 8, 0.7, output_scale="unit", seed=3)
    path = tmp_path / "weights.bin"
    io.save_weights(path, params, snap)
    loaded, lsnap = io.load_weights(path)
    assert loaded.gamma == 0.7
    assert loaded.output_scale == "unit"
    np.testing.assert_array_equal(loaded.a, params.a)
    np.testing.assert_array_equal(loaded.W, params.W)
    np.testing.assert_array_equal(lsnap.a0, snap.a0)
    np.testing.assert_array_equal(lsnap.W0, snap.W0)


def test_truncated_and_corrupt_files(tmp_path):
    params, snap = mlp.init_params(5, 8, 0.7, seed=3)
    path = tmp_path / "weights.bin"
    io.save_weights(path, params, snap)
    raw = path.read_bytes()

    short = tmp_path / "short.bin"
    short.write_bytes(raw[:40])
    with pytest.raises(ParseError):
        io.load_weights(short)

    bad_magic = tmp_path / "magic.bin"
    bad_magic.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ParseError):
        io.load_weights(bad_magic)

    bad_version = tmp_path / "version.bin"
    bad_version.write_bytes(raw[:4] + b"\x09\x00\x00\x00" + raw[8:])
    with pytest.raises(ParseError):
        io.load_weights(bad_version)


def test_feature_file_label_validation(tmp_path):
    path = tmp_path / "feat.bin"
    io.write_feature_file(path, np.zeros((3, 2)), np.array([0, 1, 5]), 2)
    with pytest.raises(ParseError):
        io.read_feature_file(path)


def test_pgm_dump(tmp_path):
    img = np.linspace(0, 1, 12).reshape(3, 4)
    path = tmp_path / "img.pgm"
    io.write_pgm(path, img)
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n4 3\n255\n")
    assert len(raw) == len(b"P5\n4 3\n255\n") + 12
    with pytest.raises(ValueError):
        io.write_pgm(tmp_path / "bad.pgm", np.zeros(5))
