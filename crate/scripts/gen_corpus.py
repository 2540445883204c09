#!/usr/bin/env python3
"""Regenerate the bundled handwritten-digit corpus under data/.

Source: the UCI ML handwritten digits dataset shipped with scikit-learn
(1797 samples, 8x8, intensities 0..16), upscaled to 28x28 with bilinear
interpolation and packaged as big-endian IDX files. A fixed seed shuffles
the samples before the train/test split, so the output is reproducible.
"""

import struct
from pathlib import Path

import numpy as np
from scipy.ndimage import zoom
from sklearn.datasets import load_digits

OUT = Path(__file__).resolve().parent.parent / "data"
TEST_COUNT = 500
SEED = 20240601


def write_idx_images(path: Path, images: np.ndarray) -> None:
    n, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path: Path, labels: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    digits = load_digits()
    images = digits.images  # (1797, 8, 8), values 0..16
    labels = digits.target.astype(np.uint8)

    rng = np.random.RandomState(SEED)
    order = rng.permutation(len(images))
    images, labels = images[order], labels[order]

    upscaled = np.stack(
        [zoom(img, 28 / 8, order=1, grid_mode=True, mode="grid-constant") for img in images]
    )
    upscaled = np.clip(upscaled * (255.0 / 16.0), 0, 255).round().astype(np.uint8)

    OUT.mkdir(exist_ok=True)
    split = len(upscaled) - TEST_COUNT
    write_idx_images(OUT / "train-images-idx3-ubyte", upscaled[:split])
    write_idx_labels(OUT / "train-labels-idx1-ubyte", labels[:split])
    write_idx_images(OUT / "t10k-images-idx3-ubyte", upscaled[split:])
    write_idx_labels(OUT / "t10k-labels-idx1-ubyte", labels[split:])
    print(f"wrote {split} train / {TEST_COUNT} test images to {OUT}")


if __name__ == "__main__":
    main()
