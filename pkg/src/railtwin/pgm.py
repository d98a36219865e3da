"""Binary PGM (P5) reading and writing.

Format is pinned so files round-trip bit-exactly in any language:
header "P5\\n{w} {h}\\n255\\n", then one byte per pixel, row-major,
byte = floor(p * 255 + 0.5). Reading maps byte b to b / 255, so the
round-trip error per pixel is at most 1/510.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import PgmError


def write_pgm(image: np.ndarray, path: str | os.PathLike) -> None:
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise PgmError(f"expected a 2-D image, got shape {tuple(img.shape)}")
    h, w = img.shape
    payload = np.floor(img * 255.0 + 0.5).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(payload.tobytes())


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P5\n"):
        raise PgmError(f"{path}: malformed header, expected magic 'P5'")
    rest = data[3:]
    dims_end = rest.find(b"\n")
    if dims_end < 0:
        raise PgmError(f"{path}: malformed header, missing dimensions line")
    parts = rest[:dims_end].split()
    if len(parts) != 2:
        raise PgmError(f"{path}: malformed header, expected 'width height'")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise PgmError(f"{path}: bad dimensions {rest[:dims_end]!r}") from None
    if w < 1 or h < 1:
        raise PgmError(f"{path}: bad dimensions {w}x{h}")
    rest = rest[dims_end + 1 :]
    maxval_end = rest.find(b"\n")
    if maxval_end < 0 or rest[:maxval_end] != b"255":
        raise PgmError(f"{path}: malformed header, expected maxval 255")
    payload = rest[maxval_end + 1 :]
    if len(payload) < w * h:
        raise PgmError(
            f"{path}: truncated payload, expected {w * h} bytes, got {len(payload)}"
        )
    if len(payload) > w * h:
        raise PgmError(
            f"{path}: {len(payload) - w * h} trailing bytes after pixel payload"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return pixels.reshape(h, w)


def read_corpus_dir(directory: str | os.PathLike) -> list[np.ndarray]:
    """Read every img_*.pgm in a flat corpus directory, in filename order."""
    names = sorted(
        n for n in os.listdir(directory) if n.startswith("img_") and n.endswith(".pgm")
    )
    if not names:
        raise PgmError(f"no img_*.pgm files in {directory}")
    return [read_pgm(os.path.join(directory, n)) for n in names]


def write_corpus_dir(images: list[np.ndarray], directory: str | os.PathLike) -> None:
    """Write images as img_%05d.pgm into a directory, creating it if needed."""
    os.makedirs(directory, exist_ok=True)
    for i, img in enumerate(images):
        write_pgm(img, os.path.join(directory, f"img_{i:05d}.pgm"))
