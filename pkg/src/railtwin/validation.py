"""Input validation helpers for the public API surfaces."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError

FRAME_SIZE = 64


def check_image(image, name: str = "image") -> np.ndarray:
    """Validate one 64x64 grayscale image: float64, finite, values in [0, 1]."""
    img = np.asarray(image, dtype=np.float64)
    if img.shape != (FRAME_SIZE, FRAME_SIZE):
        raise ShapeError(
            f"{name} must be {FRAME_SIZE}x{FRAME_SIZE}, got shape {tuple(img.shape)}"
        )
    if not np.isfinite(img).all():
        raise ValueError(f"{name} contains non-finite pixels")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError(f"{name} pixels must lie in [0, 1]")
    return img


def check_image_stack(X, name: str = "X") -> np.ndarray:
    """Validate a batch of images: (n, 64, 64), (n, 4096), or a sequence of
    2-D images. Returns a float64 (n, 64, 64) array."""
    if isinstance(X, (list, tuple)):
        if not X:
            raise ValueError(f"{name} is empty")
        return np.stack([check_image(img, f"{name}[{i}]") for i, img in enumerate(X)])
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == FRAME_SIZE * FRAME_SIZE:
        arr = arr.reshape(-1, FRAME_SIZE, FRAME_SIZE)
    if arr.ndim != 3 or arr.shape[1:] != (FRAME_SIZE, FRAME_SIZE):
        raise ShapeError(
            f"{name} must be (n, {FRAME_SIZE}, {FRAME_SIZE}) or"
            f" (n, {FRAME_SIZE * FRAME_SIZE}), got shape {tuple(arr.shape)}"
        )
    if arr.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite pixels")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} pixels must lie in [0, 1]")
    return arr


def check_labels(y, n: int, name: str = "y") -> np.ndarray:
    """Validate 0/1 labels aligned with a batch of n images."""
    labels = np.asarray(y)
    if labels.shape != (n,):
        raise ShapeError(f"{name} must have shape ({n},), got {tuple(labels.shape)}")
    values = set(np.unique(labels).tolist())
    if not values <= {0, 1}:
        raise ValueError(f"{name} must contain only 0 and 1, got values {sorted(values)}")
    return labels.astype(int)


def check_roi(roi, frame_shape: tuple[int, int]) -> tuple[int, int, int, int]:
    """Validate an (x, y, w, h) region against a frame's (height, width)."""
    try:
        x, y, w, h = (int(v) for v in roi)
    except (TypeError, ValueError):
        raise ValueError(f"roi must be four integers (x, y, w, h), got {roi!r}") from None
    frame_h, frame_w = frame_shape
    if w < 1 or h < 1:
        raise ValueError(f"roi must have w >= 1 and h >= 1, got w={w}, h={h}")
    if x < 0 or y < 0 or x + w > frame_w or y + h > frame_h:
        raise ValueError(
            f"roi ({x},{y},{w},{h}) is not fully inside a {frame_w}x{frame_h} frame"
        )
    return x, y, w, h


def crop_resize_roi(frame: np.ndarray, roi) -> np.ndarray:
    """Crop a region and nearest-neighbor resample it to 64x64. The source
    pixel for target (ty, tx) is (y + floor(ty*h/64), x + floor(tx*w/64))."""
    img = np.asarray(frame, dtype=np.float64)
    if img.ndim != 2:
        raise ShapeError(f"frame must be 2-D, got shape {tuple(img.shape)}")
    x, y, w, h = check_roi(roi, img.shape)
    rows = y + (np.arange(FRAME_SIZE) * h) // FRAME_SIZE
    cols = x + (np.arange(FRAME_SIZE) * w) // FRAME_SIZE
    return img[np.ix_(rows, cols)].copy()
