"""Streaming detection: subsample a frame stream, score each sampled frame
against the benchmark gallery, and merge flagged frames into review events."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import PgmError, StreamError
from .model import SiameseModel, distance, embed, score
from .pgm import read_pgm
from .validation import crop_resize_roi

DEFAULT_THRESHOLD = 0.5

_FRAME_RE = re.compile(r"^frame_(\d{6})\.pgm$")


@dataclass
class SamplerConfig:
    """Capture rate vs analysis rate; frames are analyzed every `stride`
    frames (30 fps captured, 10 fps analyzed -> every 3rd frame)."""

    input_fps: float = 30.0
    analyze_fps: float = 10.0

    def __post_init__(self):
        if not self.analyze_fps > 0 or self.input_fps < self.analyze_fps:
            raise ValueError(
                f"need input_fps >= analyze_fps > 0, got "
                f"{self.input_fps} and {self.analyze_fps}"
            )

    @property
    def stride(self) -> int:
        return max(1, round(self.input_fps / self.analyze_fps))


@dataclass
class AnomalyRecord:
    frame_index: int
    timestamp_s: float
    score: float
    anomalous: bool
    nearest_benchmark: int


@dataclass
class AnomalyEvent:
    first_frame: int
    last_frame: int
    peak_score: float
    record_count: int


@dataclass
class BenchmarkGallery:
    """Benchmark images with their embeddings precomputed once at load."""

    images: list[np.ndarray]
    embeddings: list[np.ndarray]


def make_gallery(model: SiameseModel, images: list[np.ndarray]) -> BenchmarkGallery:
    if not images:
        raise ValueError("gallery needs at least one benchmark image")
    return BenchmarkGallery(list(images), [embed(model, img) for img in images])


def sample_indices(frame_count: int, cfg: SamplerConfig) -> list[int]:
    if frame_count < 0:
        raise ValueError(f"frame_count must be >= 0, got {frame_count}")
    return list(range(0, frame_count, cfg.stride))


def score_frame(
    model: SiameseModel,
    gallery: BenchmarkGallery,
    frame: np.ndarray,
    roi=None,
    threshold: float = DEFAULT_THRESHOLD,
    frame_index: int = 0,
    input_fps: float = 30.0,
) -> AnomalyRecord:
    """Crop/resample the frame, embed it once, and score it against every
    benchmark. The minimum over the gallery governs: a frame is normal if it
    resembles any good-track benchmark. Ties go to the lowest index."""
    if roi is None:
        h, w = np.asarray(frame).shape[:2]
        roi = (0, 0, w, h)
    patch = crop_resize_roi(frame, roi)
    emb = embed(model, patch)
    scores = [score(distance(emb, bench), model.margin) for bench in gallery.embeddings]
    nearest = min(range(len(scores)), key=scores.__getitem__)
    best = scores[nearest]
    return AnomalyRecord(
        frame_index=frame_index,
        timestamp_s=frame_index / input_fps,
        score=best,
        anomalous=best >= threshold,
        nearest_benchmark=nearest,
    )


def merge_events(records: list[AnomalyRecord], stride: int) -> list[AnomalyEvent]:
    """Group anomalous records: two join the same event iff their frame
    indices differ by at most 2*stride (tolerates one missed sampled frame)."""
    events: list[AnomalyEvent] = []
    current: AnomalyEvent | None = None
    for rec in records:
        if not rec.anomalous:
            continue
        if current is not None and rec.frame_index - current.last_frame <= 2 * stride:
            current.last_frame = rec.frame_index
            current.peak_score = max(current.peak_score, rec.score)
            current.record_count += 1
        else:
            current = AnomalyEvent(rec.frame_index, rec.frame_index, rec.score, 1)
            events.append(current)
    return events


def _frame_files(frames_dir) -> list[str]:
    indexed = {}
    for name in os.listdir(frames_dir):
        match = _FRAME_RE.match(name)
        if match:
            indexed[int(match.group(1))] = name
    if not indexed:
        raise StreamError(f"no frame_NNNNNN.pgm files in {frames_dir}")
    count = len(indexed)
    missing = [i for i in range(count) if i not in indexed]
    if missing:
        raise StreamError(
            f"{frames_dir}: frame numbering is not contiguous from 0, "
            f"first missing index {missing[0]}"
        )
    return [indexed[i] for i in range(count)]


def detect_stream(
    model: SiameseModel,
    gallery: BenchmarkGallery,
    frames_dir,
    cfg: SamplerConfig,
    roi=None,
    threshold: float = DEFAULT_THRESHOLD,
):
    """Score the sampled frames of a stream directory in ascending order.

    Returns (records, events): one record per sampled frame, and the merged
    anomaly events."""
    names = _frame_files(frames_dir)
    records = []
    for idx in sample_indices(len(names), cfg):
        path = os.path.join(frames_dir, names[idx])
        try:
            frame = read_pgm(path)
        except (OSError, PgmError) as err:
            raise StreamError(f"frame {idx}: unreadable ({err})") from err
        records.append(
            score_frame(
                model,
                gallery,
                frame,
                roi=roi,
                threshold=threshold,
                frame_index=idx,
                input_fps=cfg.input_fps,
            )
        )
    return records, merge_events(records, cfg.stride)


def _fmt(x: float) -> str:
    # fixed 17-digit scientific notation: >= 9 significant digits and exact
    # float round-trip, with byte-stable output across runs
    return f"{x:.17e}"


def write_report(records: list[AnomalyRecord], events: list[AnomalyEvent], path) -> None:
    """Line-delimited JSON: one object per record, then one per event."""
    for prev, rec in zip(records, records[1:]):
        if rec.frame_index <= prev.frame_index:
            raise ValueError("records must be in ascending frame order")
    lines = []
    for r in records:
        lines.append(
            f'{{"frame":{r.frame_index},"t":{_fmt(r.timestamp_s)},'
            f'"score":{_fmt(r.score)},'
            f'"anomalous":{"true" if r.anomalous else "false"},'
            f'"nearest_benchmark":{r.nearest_benchmark}}}'
        )
    for e in events:
        lines.append(
            f'{{"event":{{"first":{e.first_frame},"last":{e.last_frame},'
            f'"peak":{_fmt(e.peak_score)},"count":{e.record_count}}}}}'
        )
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line + "\n")
