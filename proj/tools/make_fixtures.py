#!/usr/bin/env python3
# Copyright 2026 The CCID Workbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerate the grayscale fixture set under tests/data/fixtures.

The images come from scikit-image's bundled sample data (public domain / CC0).
They are reduced to desk scale so the full test suite runs in seconds.
"""
import pathlib
import sys

import numpy as np
from PIL import Image
from skimage import data

OUT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else
                   pathlib.Path(__file__).resolve().parent.parent / "tests/data/fixtures")


def half(img):
    h, w = img.shape[0] // 2 * 2, img.shape[1] // 2 * 2
    img = img[:h, :w].astype(np.float64)
    out = (img[0::2, 0::2] + img[1::2, 0::2] + img[0::2, 1::2] + img[1::2, 1::2]) / 4.0
    return np.floor(out + 0.5).astype(np.uint8)


def luma(rgb):
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.floor(y + 0.5).astype(np.uint8)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    images = {
        "camera.png": half(data.camera()),
        "moon.pgm": half(data.moon()),
        "brick.pgm": half(data.brick()),
        "coins.pgm": data.coins()[40:237, 90:293],
        "astronaut.png": half(luma(data.astronaut())),
        "clock.pgm": data.clock()[50:250, 80:320],
    }
    for name, img in images.items():
        Image.fromarray(img, mode="L").save(OUT / name)
        print(name, img.shape)
    # 16-bit grayscale PNG, used to check that deep images are rejected.
    gray16 = (np.arange(64, dtype=np.uint16).reshape(8, 8) * 1000)
    Image.fromarray(gray16).save(OUT.parent / "gray16.png")


if __name__ == "__main__":
    main()
