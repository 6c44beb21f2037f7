import struct

import numpy as np
import pytest

from magscatter import make_grid
from magscatter.io import (HEADER_SIZE, MAGIC, atomic_write, csv_text, decode_field, encode_field, plot_text,
                           read_csv, read_field, slice_text, write_csv, write_field)


def test_field_binary_layout():
    g = make_grid(2, 1.5, 8)
    f = np.arange(64).reshape(8, 8) * (1 + 2j)
    data = encode_field(f, g)
    assert data[:16] == MAGIC and len(MAGIC) == 16 and HEADER_SIZE == 40
    assert struct.unpack_from("<IIdII", data, 16) == (2, 8, 1.5, 1, 0)
    # interleaved little-endian re/im pairs in row-major order
    assert struct.unpack_from("<dddd", data, HEADER_SIZE) == (0.0, 0.0, 1.0, 2.0)
    assert len(data) == HEADER_SIZE + 64 * 16


@pytest.mark.parametrize("dtype", [float, complex])
def test_field_roundtrip(tmp_path, dtype):
    g = make_grid(3, 2.0, 8)
    rng = np.random.default_rng(0)
    f = rng.normal(size=g.shape).astype(dtype)
    if dtype is complex:
        f = f + 1j * rng.normal(size=g.shape)
    path = write_field(tmp_path / "f.bin", f, g)
    back, g2 = read_field(path)
    assert g2 == g and back.dtype == f.dtype
    np.testing.assert_array_equal(back, f)


def test_field_rejects_garbage():
    with pytest.raises(ValueError):
        decode_field(b"not a field")
    g = make_grid(2, 1.0, 8)
    with pytest.raises(ValueError):
        decode_field(encode_field(np.zeros(g.shape), g)[:-8])
    with pytest.raises(ValueError):
        encode_field(np.zeros((3, 3)), g)


def test_csv_format(tmp_path):
    text = csv_text(["a", "b"], [[0.1, "x"], [2, 1e-20]])
    assert text == "a,b\n0.1,x\n2,1e-20\n"
    write_csv(tmp_path / "t.csv", ["a", "b"], [[1.5, 2.5]])
    header, rows = read_csv(tmp_path / "t.csv")
    assert header == ["a", "b"] and rows == [["1.5", "2.5"]]


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write(tmp_path / "sub" / "x.txt", "hello")
    assert (tmp_path / "sub" / "x.txt").read_text() == "hello"
    assert [p.name for p in (tmp_path / "sub").iterdir()] == ["x.txt"]


def test_plot_text_loadable(tmp_path):
    text = plot_text(["x", "y"], [[0, 1], [1, 0.5]], "demo")
    p = tmp_path / "p.dat"
    p.write_text(text)
    data = np.loadtxt(p)
    np.testing.assert_array_equal(data, [[0, 1], [1, 0.5]])
    assert text.startswith("# demo\n# x\ty\n")


def test_slice_matches_field(tmp_path):
    g = make_grid(3, 2.0, 8)
    f = np.random.default_rng(1).normal(size=g.shape) + 0j
    p = tmp_path / "s.dat"
    p.write_text(slice_text(f, g, "re"))
    np.testing.assert_allclose(np.loadtxt(p), f[:, :, 4].real, rtol=1e-15)
    with pytest.raises(ValueError):
        slice_text(f, g, "phase")
