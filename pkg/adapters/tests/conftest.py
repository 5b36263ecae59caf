from __future__ import annotations

import pytest
from PIL import Image

COLOR_A = (255, 0, 0)
COLOR_B = (0, 0, 255)

PALETTE = {"255,0,0": "colorA", "0,0,255": "colorB"}


def write_split_image(path, pixels_a: int, pixels_b: int, width: int = 10):
    """A width x height image whose first pixels_a pixels (row-major) are
    color A and the rest color B."""
    total = pixels_a + pixels_b
    assert total % width == 0
    height = total // width
    img = Image.new("RGB", (width, height))
    img.putdata([COLOR_A] * pixels_a + [COLOR_B] * pixels_b)
    img.save(path)


@pytest.fixture
def image_dir(tmp_path):
    d = tmp_path / "images"
    d.mkdir()
    return d
