from pathlib import Path

import numpy as np
import pytest

from oracles import rule90_row
from selfish_ca.core import (
    Configuration,
    MixedAssignment,
    compose,
    decode_elementary,
    evolve,
    sample_mixed_assignment,
    standard_initial,
)
from selfish_ca.render import ImageSpec, render_ppm
from selfish_ca.rng import SplitMix64, derive_seed

GOLDEN = Path(__file__).parent / "golden"


def parse_ppm(data):
    magic, dims, maxval, rest = data.split(b"\n", 3)
    assert magic == b"P6" and maxval == b"255"
    width, height = map(int, dims.split())
    return np.frombuffer(rest, dtype=np.uint8).reshape(height, width, 3)


def solo90(steps):
    rule = compose(decode_elementary(90), decode_elementary(110), MixedAssignment.constant(0))
    return evolve(standard_initial("solo-black"), rule, steps)


def test_smallest_image():
    rule = compose(decode_elementary(0), decode_elementary(0), MixedAssignment.constant(0))
    image = render_ppm(evolve(Configuration(), rule, 0), ImageSpec(window=(0, 1)))
    assert image.data == b"P6\n1 1\n255\n" + bytes([255, 255, 255])
    assert not image.clipped


def test_rule90_is_sierpinski():
    image = render_ppm(solo90(16))
    pixels = parse_ppm(image.data)
    assert pixels.shape == (17, 33, 3)
    for t in range(17):
        black = {x - 16 for x in range(33) if (pixels[t, x] == 0).all()}
        white = {x - 16 for x in range(33) if (pixels[t, x] == 255).all()}
        assert black == rule90_row(t)
        assert len(black) + len(white) == 33


def test_rule90_golden_file():
    data = render_ppm(solo90(16)).data
    assert data == (GOLDEN / "rule90_solo_16.ppm").read_bytes()


def test_interaction_golden_file():
    seed = derive_seed(1, 110, 90, 0)
    rule = compose(decode_elementary(110), decode_elementary(90), sample_mixed_assignment(SplitMix64(seed)))
    diagram = evolve(standard_initial("interaction", 6), rule, 32)
    data = render_ppm(diagram, ImageSpec(scale=2)).data
    assert data == (GOLDEN / "interaction_110_90_s1.ppm").read_bytes()
    # grey appears as 128 and each cell is a 2x2 block
    pixels = parse_ppm(data)
    assert (pixels == 128).all(axis=2).any()
    assert np.array_equal(pixels[::2, ::2], pixels[1::2, 1::2])


def test_render_deterministic():
    diagram = solo90(20)
    assert render_ppm(diagram).data == render_ppm(diagram).data


@pytest.mark.parametrize("scale", [1, 3])
def test_pixels_follow_cells(scale):
    rule = compose(decode_elementary(110), decode_elementary(90), MixedAssignment.constant(1))
    diagram = evolve(standard_initial("interaction", 4), rule, 10)
    spec = ImageSpec(scale=scale, window=(-12, 18), rows=(2, 9))
    image = render_ppm(diagram, spec)
    header = f"P6\n{30 * scale} {7 * scale}\n255\n".encode()
    assert len(image.data) == len(header) + 3 * image.width * image.height
    assert image.data.startswith(header)
    pixels = parse_ppm(image.data)
    palette = {0: (255, 255, 255), 1: (128, 128, 128), 2: (0, 0, 0)}
    for r in range(image.height):
        for c in range(image.width):
            cell = diagram.rows[2 + r // scale][-12 + c // scale]
            assert tuple(pixels[r, c]) == palette[cell]


def test_clipped_window_still_renders():
    image = render_ppm(solo90(10), ImageSpec(window=(0, 5)))
    assert image.clipped
    assert image.width == 5 and image.height == 11
    assert not render_ppm(solo90(10)).clipped


@pytest.mark.parametrize("kwargs", [{"scale": 0}, {"window": (3, 3)}, {"rows": (2, 1)}])
def test_bad_image_spec(kwargs):
    with pytest.raises(ValueError):
        ImageSpec(**kwargs)
