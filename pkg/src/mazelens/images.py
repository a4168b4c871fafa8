"""PNG emission for feature maps and saliency overlays.

Feature maps use a diverging colormap (default purple / white / green,
green at the high end) centered on zero, which keeps both strongly
positive and strongly negative activations visible. Saliency overlays
alpha-blend the heat field onto the rendered observation.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParameterError

PURPLE = (123, 50, 148)
WHITE = (247, 247, 247)
GREEN = (0, 136, 55)


def diverging_colormap(
    field: np.ndarray,
    low: tuple[int, int, int] = PURPLE,
    mid: tuple[int, int, int] = WHITE,
    high: tuple[int, int, int] = GREEN,
) -> np.ndarray:
    """(H, W) scalars -> (H, W, 3) uint8, symmetric about zero."""
    f = np.asarray(field, dtype=np.float64)
    if f.ndim != 2:
        raise ParameterError(f"colormap input must be 2-d, got shape {f.shape}")
    vmax = float(np.abs(f).max())
    t = f / vmax if vmax > 0 else np.zeros_like(f)
    out = np.empty(f.shape + (3,), dtype=np.float64)
    neg = np.clip(-t, 0.0, 1.0)[..., None]
    pos = np.clip(t, 0.0, 1.0)[..., None]
    mid_arr = np.asarray(mid, dtype=np.float64)
    out = mid_arr + neg * (np.asarray(low) - mid_arr) + pos * (np.asarray(high) - mid_arr)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def heat_overlay(
    base_rgb: np.ndarray,
    field: np.ndarray,
    strength: float = 0.75,
) -> np.ndarray:
    """Blend a scalar field over an RGB image; alpha follows |field|."""
    base = np.asarray(base_rgb, dtype=np.float64)
    f = np.asarray(field, dtype=np.float64)
    if base.shape[:2] != f.shape:
        raise ParameterError(
            f"field shape {f.shape} does not match image {base.shape[:2]}"
        )
    vmax = float(np.abs(f).max())
    alpha = (np.abs(f) / vmax if vmax > 0 else np.zeros_like(f)) * strength
    heat = diverging_colormap(f).astype(np.float64)
    out = base * (1.0 - alpha[..., None]) + heat * alpha[..., None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def save_png(rgb: np.ndarray, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path)
    return path
