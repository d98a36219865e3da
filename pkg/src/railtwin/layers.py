"""Forward and backward passes for the five layer kinds the network uses.

Everything is float64 on C-contiguous numpy arrays (the row-major tensor
substrate). Backward passes are exact analytic gradients, written by hand and
checked against central finite differences in the test suite; there is no
autodiff graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .rng import Rng

KINDS = ("conv", "relu", "maxpool", "flatten", "dense")


@dataclass
class LayerParams:
    """One layer's parameters. conv weights are (out_ch, in_ch, 3, 3);
    dense weights are (out_dim, in_dim); relu/maxpool/flatten carry none."""

    kind: str
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    @property
    def has_params(self) -> bool:
        return self.kind in ("conv", "dense")


def conv_layer(out_ch: int, in_ch: int) -> LayerParams:
    return LayerParams(
        "conv",
        np.zeros((out_ch, in_ch, 3, 3), dtype=np.float64),
        np.zeros(out_ch, dtype=np.float64),
    )


def dense_layer(out_dim: int, in_dim: int) -> LayerParams:
    return LayerParams(
        "dense",
        np.zeros((out_dim, in_dim), dtype=np.float64),
        np.zeros(out_dim, dtype=np.float64),
    )


def he_init(layer: LayerParams, rng: Rng) -> LayerParams:
    """Fill weights with U(-L, L), L = sqrt(6 / fan_in), biases with zero.

    Draws happen in row-major storage order so a seed pins the exact bytes.
    """
    if layer.kind == "conv":
        fan_in = layer.weights.shape[1] * 9
    elif layer.kind == "dense":
        fan_in = layer.weights.shape[1]
    else:
        raise ValueError(f"he_init applies to conv/dense layers, not {layer.kind!r}")
    limit = math.sqrt(6.0 / fan_in)
    flat = layer.weights.reshape(-1)
    flat[:] = rng.uniform_block(flat.size, -limit, limit)
    layer.bias[:] = 0.0
    return layer


# -- conv (3x3, stride 1, zero-padded "same") --------------------------------

def _im2col3(x: np.ndarray) -> np.ndarray:
    """(C, H, W) -> (C*9, H*W): column k = c*9 + dy*3 + dx holds the
    zero-padded input tap at offset (dy-1, dx-1), matching the row-major
    layout of a (out, in, 3, 3) kernel."""
    c, h, w = x.shape
    padded = np.zeros((c, h + 2, w + 2), dtype=np.float64)
    padded[:, 1:-1, 1:-1] = x
    cols = np.empty((c * 9, h * w), dtype=np.float64)
    k = 0
    for ci in range(c):
        for dy in range(3):
            for dx in range(3):
                cols[k] = padded[ci, dy : dy + h, dx : dx + w].ravel()
                k += 1
    return cols


def conv2d_forward(x: np.ndarray, layer: LayerParams):
    out_ch, in_ch = layer.weights.shape[:2]
    if x.ndim != 3 or x.shape[0] != in_ch:
        raise ShapeError(
            f"conv2d expects ({in_ch}, H, W) input, got shape {tuple(x.shape)}"
        )
    _, h, w = x.shape
    cols = _im2col3(x)
    w2 = layer.weights.reshape(out_ch, in_ch * 9)
    out = (w2 @ cols + layer.bias[:, None]).reshape(out_ch, h, w)
    cache = (x.shape, cols)
    return out, cache


def conv2d_backward(grad_out: np.ndarray, layer: LayerParams, cache):
    (in_shape, cols) = cache
    c, h, w = in_shape
    out_ch = layer.weights.shape[0]
    g = grad_out.reshape(out_ch, h * w)
    grad_bias = g.sum(axis=1)
    grad_weights = (g @ cols.T).reshape(layer.weights.shape)
    grad_cols = layer.weights.reshape(out_ch, c * 9).T @ g
    padded = np.zeros((c, h + 2, w + 2), dtype=np.float64)
    k = 0
    for ci in range(c):
        for dy in range(3):
            for dx in range(3):
                padded[ci, dy : dy + h, dx : dx + w] += grad_cols[k].reshape(h, w)
                k += 1
    grad_input = padded[:, 1:-1, 1:-1].copy()
    return grad_input, grad_weights, grad_bias


# -- relu ---------------------------------------------------------------------

def relu_forward(x: np.ndarray):
    mask = x > 0  # gradient at exactly 0 is defined as 0
    return np.where(mask, x, 0.0), mask


def relu_backward(grad_out: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, grad_out, 0.0)


# -- maxpool (2x2, stride 2) --------------------------------------------------

def _pool_windows(x: np.ndarray) -> np.ndarray:
    """(C, H, W) -> (C, H/2, W/2, 4) with the last axis in row-major window
    order (0,0),(0,1),(1,0),(1,1), so argmax picks the tie-break winner."""
    c, h, w = x.shape
    return (
        x.reshape(c, h // 2, 2, w // 2, 2)
        .transpose(0, 1, 3, 2, 4)
        .reshape(c, h // 2, w // 2, 4)
    )


def maxpool2_forward(x: np.ndarray):
    if x.ndim != 3 or x.shape[1] % 2 or x.shape[2] % 2:
        raise ShapeError(
            f"maxpool2 expects (C, H, W) with even H and W, got {tuple(x.shape)}"
        )
    windows = _pool_windows(x)
    argmax = windows.argmax(axis=3)
    out = np.take_along_axis(windows, argmax[..., None], axis=3)[..., 0]
    return out, (x.shape, argmax)


def maxpool2_backward(grad_out: np.ndarray, cache) -> np.ndarray:
    (in_shape, argmax) = cache
    c, h, w = in_shape
    grads = np.zeros((c, h // 2, w // 2, 4), dtype=np.float64)
    np.put_along_axis(grads, argmax[..., None], grad_out[..., None], axis=3)
    return (
        grads.reshape(c, h // 2, w // 2, 2, 2)
        .transpose(0, 1, 3, 2, 4)
        .reshape(c, h, w)
        .copy()
    )


# -- flatten ------------------------------------------------------------------

def flatten_forward(x: np.ndarray):
    return x.reshape(-1), x.shape


def flatten_backward(grad_out: np.ndarray, in_shape) -> np.ndarray:
    return grad_out.reshape(in_shape)


# -- dense --------------------------------------------------------------------

def dense_forward(x: np.ndarray, layer: LayerParams):
    out_dim, in_dim = layer.weights.shape
    if x.ndim != 1 or x.shape[0] != in_dim:
        raise ShapeError(
            f"dense expects a length-{in_dim} vector, got shape {tuple(x.shape)}"
        )
    return layer.weights @ x + layer.bias, x


def dense_backward(grad_out: np.ndarray, layer: LayerParams, cache):
    x = cache
    grad_input = layer.weights.T @ grad_out
    grad_weights = np.outer(grad_out, x)
    grad_bias = grad_out.copy()
    return grad_input, grad_weights, grad_bias


# -- layer stacks -------------------------------------------------------------

def run_forward(layers: list[LayerParams], x: np.ndarray) -> np.ndarray:
    """Inference pass; no caches kept."""
    for layer in layers:
        if layer.kind == "conv":
            x, _ = conv2d_forward(x, layer)
        elif layer.kind == "relu":
            x, _ = relu_forward(x)
        elif layer.kind == "maxpool":
            x, _ = maxpool2_forward(x)
        elif layer.kind == "flatten":
            x, _ = flatten_forward(x)
        elif layer.kind == "dense":
            x, _ = dense_forward(x, layer)
        else:
            raise ValueError(f"unknown layer kind {layer.kind!r}")
    return x


def run_forward_training(layers: list[LayerParams], x: np.ndarray):
    """Forward pass that keeps per-layer caches for the backward pass."""
    caches = []
    for layer in layers:
        if layer.kind == "conv":
            x, cache = conv2d_forward(x, layer)
        elif layer.kind == "relu":
            x, cache = relu_forward(x)
        elif layer.kind == "maxpool":
            x, cache = maxpool2_forward(x)
        elif layer.kind == "flatten":
            x, cache = flatten_forward(x)
        elif layer.kind == "dense":
            x, cache = dense_forward(x, layer)
        else:
            raise ValueError(f"unknown layer kind {layer.kind!r}")
        caches.append(cache)
    return x, caches


def run_backward(layers: list[LayerParams], caches: list, grad: np.ndarray):
    """Backprop a gradient through the stack.

    Returns (grad_input, grads) where grads aligns with layers: a
    (grad_weights, grad_bias) pair for conv/dense, None otherwise.
    """
    grads: list[tuple[np.ndarray, np.ndarray] | None] = [None] * len(layers)
    for i in range(len(layers) - 1, -1, -1):
        layer, cache = layers[i], caches[i]
        if layer.kind == "conv":
            grad, gw, gb = conv2d_backward(grad, layer, cache)
            grads[i] = (gw, gb)
        elif layer.kind == "relu":
            grad = relu_backward(grad, cache)
        elif layer.kind == "maxpool":
            grad = maxpool2_backward(grad, cache)
        elif layer.kind == "flatten":
            grad = flatten_backward(grad, cache)
        elif layer.kind == "dense":
            grad, gw, gb = dense_backward(grad, layer, cache)
            grads[i] = (gw, gb)
    return grad, grads


def shape_after(layer: LayerParams, shape: tuple[int, ...]) -> tuple[int, ...]:
    """Output shape of one layer given its input shape; raises ShapeError if
    the shapes don't chain. Used for load-time validation and shape algebra."""
    if layer.kind == "conv":
        out_ch, in_ch = layer.weights.shape[:2]
        if len(shape) != 3 or shape[0] != in_ch:
            raise ShapeError(f"conv expects ({in_ch}, H, W), got {shape}")
        return (out_ch, shape[1], shape[2])
    if layer.kind == "relu":
        return shape
    if layer.kind == "maxpool":
        if len(shape) != 3 or shape[1] % 2 or shape[2] % 2:
            raise ShapeError(f"maxpool expects (C, even H, even W), got {shape}")
        return (shape[0], shape[1] // 2, shape[2] // 2)
    if layer.kind == "flatten":
        return (int(np.prod(shape)),)
    if layer.kind == "dense":
        out_dim, in_dim = layer.weights.shape
        if shape != (in_dim,):
            raise ShapeError(f"dense expects ({in_dim},), got {shape}")
        return (out_dim,)
    raise ValueError(f"unknown layer kind {layer.kind!r}")
