import struct

import numpy as np
import pytest

from lcdd.data import add_noise, image_to_model, model_to_image, rho_from_8bit, sample_prior
from lcdd.formats import (ParseError, decode_pnm, decode_tensor, encode_pnm, encode_tensor, read_any,
                          read_image, read_tensor, write_image, write_tensor)
from lcdd.numerics import RngStream
from lcdd.oracle import GaussianMixturePrior


def test_add_noise_zero_rho_bitwise():
    x = np.random.default_rng(0).normal(size=20)
    y = add_noise(x, 0.0, RngStream(1))
    assert np.array_equal(x, y) and y is not x


def test_add_noise_std_and_determinism():
    y = add_noise(np.zeros(1_000_000), 1.0, RngStream(2))
    assert abs(y.std() - 1) <= 0.01
    assert np.array_equal(add_noise(np.zeros(5), 0.3, RngStream(9)), add_noise(np.zeros(5), 0.3, RngStream(9)))
    with pytest.raises(ValueError):
        add_noise(np.zeros(3), -0.1, RngStream(0))


def test_sample_prior():
    p = GaussianMixturePrior(np.ones(1), np.zeros((1, 1)), np.ones(1))
    d = sample_prior(p, 100_000, RngStream(3))
    assert abs(d.samples.mean()) <= 3 / np.sqrt(1e5)
    assert abs(d.samples.var() - 1) <= 0.02
    assert d.seed == 3 and len(d) == 100_000
    two = GaussianMixturePrior(np.array([1.0, 0.0]), np.array([[-5.0], [5.0]]), np.array([0.01, 0.01]))
    assert np.all(sample_prior(two, 1000, RngStream(4)).samples < 0)
    a, b = sample_prior(two, 10, RngStream(5)), sample_prior(two, 10, RngStream(5))
    assert np.array_equal(a.samples, b.samples)
    with pytest.raises(ValueError):
        sample_prior(p, 0, RngStream(0))


def test_pixel_mapping():
    assert image_to_model(0) == -1.0 and image_to_model(255) == 1.0
    assert image_to_model(127) == pytest.approx(-0.00392156862745097, abs=1e-16)
    p = np.arange(256, dtype=np.uint8)
    assert np.array_equal(model_to_image(image_to_model(p)), p)
    assert np.array_equal(model_to_image([-3.0, 3.0]), [0, 255])
    assert rho_from_8bit(75) == 75 / 127.5


@pytest.mark.parametrize("shape", [(5, 7), (4, 3, 3)])
def test_pnm_round_trip(tmp_path, shape):
    img = np.random.default_rng(6).integers(0, 256, shape, dtype=np.uint8)
    path = tmp_path / "a.pnm"
    write_image(path, img)
    back = read_image(path)
    assert back.dtype == np.uint8 and np.array_equal(back, img)


def test_pnm_header_comments():
    data = b"P5\n# made by hand\n2 1\n# another\n255\n\x00\xff"
    assert np.array_equal(decode_pnm(data), [[0, 255]])


@pytest.mark.parametrize("data, offset", [
    (b"P3\n2 1\n255\n", 0),
    (b"P5\n2 1\n65535\n" + b"\x00" * 4, 7),
    (b"P5\nx 1\n255\n", 3),
    (b"P5\n2 1\n255\n\x00", 11),
    (b"P5\n2", None),
])
def test_pnm_parse_errors(data, offset):
    with pytest.raises(ParseError) as e:
        decode_pnm(data)
    if offset is not None:
        assert e.value.offset == offset
    assert "offset" in str(e.value)


def test_tensor_format_example():
    data = b"LCDDT1" + struct.pack("<3I", 2, 2, 2) + struct.pack("<4d", 1.0, -2.5, 0.125, 3e-300)
    x = decode_tensor(data)
    assert x.shape == (2, 2) and np.array_equal(x, [[1.0, -2.5], [0.125, 3e-300]])
    assert encode_tensor(x) == data


def test_tensor_round_trip(tmp_path):
    x = np.random.default_rng(7).normal(size=(3, 4, 5))
    write_tensor(tmp_path / "t.lcddt", x)
    assert np.array_equal(read_tensor(tmp_path / "t.lcddt"), x)
    sig, is_image = read_any(tmp_path / "t.lcddt")
    assert not is_image and np.array_equal(sig, x)


def test_tensor_parse_errors():
    good = encode_tensor(np.zeros((2, 2)))
    for bad, off in ((b"LCDDT2" + good[6:], 0), (good[:8], 6), (good[:12], 10), (good[:-1], 18)):
        with pytest.raises(ParseError) as e:
            decode_tensor(bad)
        assert e.value.offset == off
