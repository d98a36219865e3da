"""Bit-exact binary model files.

Fixed little-endian layout so a trained model moves between runs and machines
reproducibly:

    "STW1" | u32 version=1 | u32 h | u32 w | u32 c | u32 embedding_dim
    | f64 margin | u32 layer_count | layers...

    layer: u8 kind (1=conv 2=relu 3=maxpool 4=flatten 5=dense)
      conv:  u32 out_ch,in_ch,kh,kw | f64 weights (out,in,kh,kw) row-major | f64 bias
      dense: u32 out,in             | f64 weights (out,in) row-major       | f64 bias
      relu/maxpool/flatten: no payload
"""

from __future__ import annotations

import math
import os
import struct

import numpy as np

from .errors import ModelFileError, ShapeError
from .layers import LayerParams, shape_after
from .model import SiameseModel

MAGIC = b"STW1"
VERSION = 1
_TAG_BY_KIND = {"conv": 1, "relu": 2, "maxpool": 3, "flatten": 4, "dense": 5}
_KIND_BY_TAG = {tag: kind for kind, tag in _TAG_BY_KIND.items()}


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_model(model: SiameseModel, path: str | os.PathLike) -> None:
    c, h, w = model.input_shape
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<IIIII", VERSION, h, w, c, model.embedding_dim)
    buf += struct.pack("<d", model.margin)
    buf += struct.pack("<I", len(model.layers))
    for layer in model.layers:
        buf += struct.pack("<B", _TAG_BY_KIND[layer.kind])
        if layer.kind == "conv":
            out_ch, in_ch, kh, kw = layer.weights.shape
            buf += struct.pack("<IIII", out_ch, in_ch, kh, kw)
            buf += _f64_bytes(layer.weights)
            buf += _f64_bytes(layer.bias)
        elif layer.kind == "dense":
            out_dim, in_dim = layer.weights.shape
            buf += struct.pack("<II", out_dim, in_dim)
            buf += _f64_bytes(layer.weights)
            buf += _f64_bytes(layer.bias)
    with open(path, "wb") as f:
        f.write(bytes(buf))


class _Reader:
    def __init__(self, data: bytes, path):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise ModelFileError(f"{self.path}: truncated file while reading {what}")
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def f64(self, what: str) -> float:
        return struct.unpack("<d", self.take(8, what))[0]

    def f64_array(self, shape: tuple[int, ...], what: str) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def load_model(path: str | os.PathLike) -> SiameseModel:
    """Load and validate a model file: magic, version, kind tags, shape
    chaining, and exact file length are all checked before returning."""
    with open(path, "rb") as f:
        data = f.read()
    r = _Reader(data, path)

    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise ModelFileError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = r.u32("version")
    if version != VERSION:
        raise ModelFileError(f"{path}: unsupported version {version}, expected {VERSION}")
    h = r.u32("input height")
    w = r.u32("input width")
    c = r.u32("input channels")
    embedding_dim = r.u32("embedding dim")
    margin = r.f64("margin")
    if not (math.isfinite(margin) and margin > 0):
        raise ModelFileError(f"{path}: margin must be positive and finite, got {margin}")
    layer_count = r.u32("layer count")

    layers: list[LayerParams] = []
    for i in range(layer_count):
        tag = r.u8(f"layer {i} kind tag")
        kind = _KIND_BY_TAG.get(tag)
        if kind is None:
            raise ModelFileError(f"{path}: layer {i} has unknown kind tag {tag}")
        if kind == "conv":
            out_ch = r.u32(f"layer {i} conv out_ch")
            in_ch = r.u32(f"layer {i} conv in_ch")
            kh = r.u32(f"layer {i} conv kh")
            kw = r.u32(f"layer {i} conv kw")
            if (kh, kw) != (3, 3):
                raise ModelFileError(
                    f"{path}: layer {i} conv kernel must be 3x3, got {kh}x{kw}"
                )
            weights = r.f64_array((out_ch, in_ch, 3, 3), f"layer {i} conv weights")
            bias = r.f64_array((out_ch,), f"layer {i} conv bias")
            layers.append(LayerParams("conv", weights, bias))
        elif kind == "dense":
            out_dim = r.u32(f"layer {i} dense out")
            in_dim = r.u32(f"layer {i} dense in")
            weights = r.f64_array((out_dim, in_dim), f"layer {i} dense weights")
            bias = r.f64_array((out_dim,), f"layer {i} dense bias")
            layers.append(LayerParams("dense", weights, bias))
        else:
            layers.append(LayerParams(kind))

    if r.offset != len(data):
        raise ModelFileError(
            f"{path}: file length mismatch, {len(data) - r.offset} trailing bytes"
        )

    shape: tuple[int, ...] = (c, h, w)
    for i, layer in enumerate(layers):
        try:
            shape = shape_after(layer, shape)
        except ShapeError as err:
            raise ModelFileError(f"{path}: shape chain violation at layer {i}: {err}") from None
    if shape != (embedding_dim,):
        raise ModelFileError(
            f"{path}: shape chain violation: layers end at {shape}, "
            f"header declares embedding dim {embedding_dim}"
        )

    return SiameseModel(
        layers=layers,
        margin=margin,
        input_shape=(c, h, w),
        embedding_dim=embedding_dim,
    )
