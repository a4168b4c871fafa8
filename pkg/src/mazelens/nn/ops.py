"""Layer primitives for the fixed maze policy network.

All functions take and return numpy arrays. They preserve the dtype of
their input (the public network entry points feed float32), but long
reductions are accumulated in float64 and rounded once at the end so
results stay within a few ulps of an exactly-summed reference.

Convolutions are 3x3, stride 1, zero same-padding. Pooling is a 3x3
window with stride 2 and same padding, the combination that halves
64 -> 32 -> 16 -> 8 across the three blocks.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError, ShapeMismatchError

__all__ = [
    "conv2d_forward",
    "conv2d_input_grad",
    "dense_forward",
    "flatten_forward",
    "maxpool_forward",
    "maxpool_input_grad",
    "relu_forward",
    "resadd_forward",
    "softmax",
    "to_chw",
]


def to_chw(array: np.ndarray, layout: str = "chw") -> np.ndarray:
    """Normalize an observation array to channel-first layout.

    ``layout`` names the layout of ``array``: "chw" (already internal
    order) or "hwc" (channels last, as image files usually come).
    """
    arr = np.asarray(array, dtype=np.float32)
    if arr.ndim != 3:
        raise ShapeMismatchError(f"observation must be 3-d, got shape {arr.shape}")
    if layout == "chw":
        return arr
    if layout == "hwc":
        return np.ascontiguousarray(arr.transpose(2, 0, 1))
    raise ParameterError(f"unknown layout {layout!r}, expected 'chw' or 'hwc'")


def _check_finite(name: str, arr: np.ndarray) -> np.ndarray:
    if not np.isfinite(arr).all():
        raise ArithmeticError(f"{name} produced non-finite values")
    return arr


def conv2d_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """3x3 convolution, stride 1, zero same-padding.

    x: (C, H, W), kernel: (O, C, 3, 3), bias: (O,) -> (O, H, W)
    """
    if x.ndim != 3:
        raise ShapeMismatchError(f"conv input must be CxHxW, got {x.shape}")
    if kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise ShapeMismatchError(f"conv kernel must be OxCx3x3, got {kernel.shape}")
    c, h, w = x.shape
    o = kernel.shape[0]
    if kernel.shape[1] != c:
        raise ShapeMismatchError(
            f"conv channel mismatch: input {x.shape} vs kernel {kernel.shape}"
        )
    if bias.shape != (o,):
        raise ShapeMismatchError(f"conv bias must be ({o},), got {bias.shape}")

    padded = np.zeros((c, h + 2, w + 2), dtype=x.dtype)
    padded[:, 1 : h + 1, 1 : w + 1] = x
    s0, s1, s2 = padded.strides
    windows = np.lib.stride_tricks.as_strided(
        padded, shape=(c, h, w, 3, 3), strides=(s0, s1, s2, s1, s2)
    )
    # (H*W, C*9) patch matrix against (O, C*9) kernels, summed in float64.
    cols = windows.transpose(1, 2, 0, 3, 4).reshape(h * w, c * 9).astype(np.float64)
    kmat = kernel.reshape(o, c * 9).astype(np.float64)
    out = cols @ kmat.T + bias.astype(np.float64)
    out = out.T.reshape(o, h, w).astype(x.dtype)
    return _check_finite("conv2d", out)


def conv2d_input_grad(dout: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Gradient of conv2d_forward w.r.t. its input.

    With stride-1 same padding this is itself a same-padded convolution
    of dout with the kernel transposed over channels and flipped
    spatially.
    """
    o = kernel.shape[0]
    flipped = np.ascontiguousarray(kernel.transpose(1, 0, 2, 3)[:, :, ::-1, ::-1])
    zero_bias = np.zeros(flipped.shape[0], dtype=dout.dtype)
    if dout.shape[0] != o:
        raise ShapeMismatchError(
            f"grad channel mismatch: dout {dout.shape} vs kernel {kernel.shape}"
        )
    return conv2d_forward(dout, flipped, zero_bias)


def _pool_geometry(extent: int) -> tuple[int, int]:
    """(output extent, leading pad) for a 3-wide stride-2 same window."""
    out = -(-extent // 2)
    pad_total = max((out - 1) * 2 + 3 - extent, 0)
    return out, pad_total // 2


def maxpool_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 stride-2 same-padded max pool.

    Returns (output, argmax) where argmax holds, per output cell, the
    flat row-major index of the winning input cell. Ties pick the
    earliest window cell in row-major order, so the routing is
    deterministic.
    """
    if x.ndim != 3:
        raise ShapeMismatchError(f"pool input must be CxHxW, got {x.shape}")
    c, h, w = x.shape
    if h < 2 or w < 2:
        raise ShapeMismatchError(f"pool needs H,W >= 2, got {x.shape}")
    oh, pt = _pool_geometry(h)
    ow, pl = _pool_geometry(w)

    neg = np.finfo(x.dtype).min if np.issubdtype(x.dtype, np.floating) else -np.inf
    padded = np.full((c, h + 2, w + 2), neg, dtype=x.dtype)
    padded[:, pt : pt + h, pl : pl + w] = x
    s0, s1, s2 = padded.strides
    windows = np.lib.stride_tricks.as_strided(
        padded, shape=(c, oh, ow, 3, 3), strides=(s0, 2 * s1, 2 * s2, s1, s2)
    )
    flat = windows.reshape(c, oh, ow, 9)
    win_idx = flat.argmax(axis=3)
    out = np.take_along_axis(flat, win_idx[..., None], axis=3)[..., 0]

    oy = np.arange(oh)[None, :, None]
    ox = np.arange(ow)[None, None, :]
    iy = 2 * oy + win_idx // 3 - pt
    ix = 2 * ox + win_idx % 3 - pl
    argmax = (iy * w + ix).astype(np.int32)
    return np.ascontiguousarray(out), argmax


def maxpool_input_grad(
    dout: np.ndarray, argmax: np.ndarray, input_shape: tuple[int, int, int]
) -> np.ndarray:
    """Route pooled gradients back to their argmax cells (accumulating,
    since stride-2 3x3 windows overlap)."""
    c, h, w = input_shape
    dx = np.zeros((c, h * w), dtype=dout.dtype)
    chan = np.repeat(np.arange(c), argmax[0].size)
    np.add.at(dx, (chan, argmax.reshape(c, -1).ravel()), dout.reshape(c, -1).ravel())
    return dx.reshape(c, h, w)


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def resadd_forward(x: np.ndarray, skip: np.ndarray) -> np.ndarray:
    if x.shape != skip.shape:
        raise ShapeMismatchError(
            f"residual add shape mismatch: {x.shape} vs {skip.shape}"
        )
    return x + skip


def flatten_forward(x: np.ndarray) -> np.ndarray:
    """Row-major vectorization (channel-major, then row, then column)."""
    return np.ascontiguousarray(x).reshape(-1)


def dense_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map: kernel (O, I) @ x (I,) + bias (O,)."""
    if x.ndim != 1 or kernel.ndim != 2:
        raise ShapeMismatchError(
            f"dense expects vector and matrix, got {x.shape} and {kernel.shape}"
        )
    if kernel.shape[1] != x.shape[0]:
        raise ShapeMismatchError(
            f"dense shape mismatch: input {x.shape} vs kernel {kernel.shape}"
        )
    if bias.shape != (kernel.shape[0],):
        raise ShapeMismatchError(
            f"dense bias must be ({kernel.shape[0]},), got {bias.shape}"
        )
    out = kernel.astype(np.float64) @ x.astype(np.float64) + bias.astype(np.float64)
    return _check_finite("dense", out.astype(x.dtype))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax (max subtraction); sums to 1 within 1e-6."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    p = e / e.sum()
    return p.astype(np.asarray(logits).dtype)
