"""Deterministic synthetic scene generator.

Stands in for real locomotive footage: seeded procedural images of plain
track, non-track scenes, and switches, with known ground truth (the rail
mask) recorded alongside each rendered image. A (kind, seed) pair fully
determines the image, bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .rng import Rng

SIZE = 64
KINDS = ("track", "negative", "switch")


@dataclass
class SceneParams:
    kind: str
    seed: int
    base_intensity: float = 0.25
    ballast_noise_amplitude: float = 0.1
    rail_intensity: float = 0.9
    rail_width_px: int = 2
    gauge_px: int = 20
    sleeper_period_rows: int = 8
    sleeper_intensity_boost: float = 0.15
    switch_branch_row: int | None = None  # None: drawn from the seed in [16, 40]
    branch_divergence: float = 0.5  # branch drift in px per row

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.gauge_px + 2 * self.rail_width_px >= SIZE:
            raise ValueError(
                f"gauge {self.gauge_px} + 2*rail width {self.rail_width_px} must fit in {SIZE} columns"
            )
        if self.rail_width_px < 1 or self.sleeper_period_rows < 2:
            raise ValueError("rail_width_px must be >= 1 and sleeper_period_rows >= 2")
        if self.switch_branch_row is not None and not 16 <= self.switch_branch_row <= 40:
            raise ValueError(
                f"switch_branch_row must be in [16, 40], got {self.switch_branch_row}"
            )


@dataclass
class Scene:
    """A rendered image plus the ground truth used to make it."""

    image: np.ndarray  # (64, 64) float64 in [0, 1]
    rail_mask: np.ndarray | None  # bool (64, 64); None for negatives
    centerline: np.ndarray | None  # per-row main-track center column
    branch_row: int | None  # switch kind only


def _background(params: SceneParams, rng: Rng) -> np.ndarray:
    amp = params.ballast_noise_amplitude
    noise = rng.uniform_block(SIZE * SIZE, -amp, amp).reshape(SIZE, SIZE)
    return params.base_intensity + noise


def _centerline(rng: Rng) -> np.ndarray:
    # bounded random walk: start at 32, step in {-1, 0, 1}, clamp to [24, 40]
    line = np.empty(SIZE, dtype=np.int64)
    line[0] = 32
    for r in range(1, SIZE):
        step = rng.below(3) - 1
        line[r] = min(40, max(24, line[r - 1] + step))
    return line


def _draw_rail_pair(img, mask, row: int, center: int, params: SceneParams) -> None:
    half = params.gauge_px // 2
    for start in (center - half, center + half):
        lo = max(0, start)
        hi = min(SIZE, start + params.rail_width_px)
        if lo < hi:
            img[row, lo:hi] = params.rail_intensity
            mask[row, lo:hi] = True


def _add_sleepers(img: np.ndarray, params: SceneParams) -> None:
    for r in range(0, SIZE, params.sleeper_period_rows):
        img[r : min(r + 2, SIZE), :] += params.sleeper_intensity_boost


def generate_scene(params: SceneParams) -> Scene:
    rng = Rng(params.seed)
    img = _background(params, rng)

    if params.kind == "negative":
        _add_streaks_and_blobs(img, rng)
        return Scene(np.clip(img, 0.0, 1.0), None, None, None)

    centerline = _centerline(rng)
    branch_row = None
    if params.kind == "switch":
        branch_row = (
            params.switch_branch_row
            if params.switch_branch_row is not None
            else 16 + rng.below(25)
        )

    _add_sleepers(img, params)
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    for r in range(SIZE):
        _draw_rail_pair(img, mask, r, int(centerline[r]), params)
    if branch_row is not None:
        for r in range(branch_row, SIZE):
            offset = int((r - branch_row) * params.branch_divergence)
            _draw_rail_pair(img, mask, r, int(centerline[r]) + offset, params)

    return Scene(np.clip(img, 0.0, 1.0), mask, centerline, branch_row)


def _add_streaks_and_blobs(img: np.ndarray, rng: Rng) -> None:
    # sleeper-free clutter: diagonal streaks, then soft blobs
    for _ in range(3 + rng.below(3)):
        start = rng.below(SIZE)
        direction = 1 if rng.below(2) else -1
        intensity = rng.uniform(0.5, 0.8)
        thickness = 1 + rng.below(2)
        for r in range(SIZE):
            col = start + direction * r
            lo = max(0, col)
            hi = min(SIZE, col + thickness)
            if lo < hi:
                img[r, lo:hi] = intensity
    for _ in range(2 + rng.below(3)):
        cy = rng.below(SIZE)
        cx = rng.below(SIZE)
        radius = 2 + rng.below(4)
        intensity = rng.uniform(0.4, 0.7)
        r0, r1 = max(0, cy - radius), min(SIZE, cy + radius + 1)
        c0, c1 = max(0, cx - radius), min(SIZE, cx + radius + 1)
        for r in range(r0, r1):
            for c in range(c0, c1):
                if (r - cy) ** 2 + (c - cx) ** 2 <= radius * radius:
                    img[r, c] = intensity


def generate(params: SceneParams) -> np.ndarray:
    """Render just the image for a parameter set."""
    return generate_scene(params).image


def generate_corpus(
    kind: str,
    count: int,
    base_seed: int,
    params: SceneParams | None = None,
) -> list[np.ndarray]:
    """Render `count` images; image i uses seed `base_seed + i`. `params`
    supplies non-default scene settings (its kind/seed fields are ignored)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    template = params if params is not None else SceneParams(kind=kind, seed=0)
    return [
        generate(replace(template, kind=kind, seed=base_seed + i)) for i in range(count)
    ]
