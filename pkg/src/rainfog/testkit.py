"""Independent oracles and deterministic fixtures used by the test suite.

Everything here is deliberately implemented without reusing the kernels it
checks: `naive_ssim` walks windows with explicit loops instead of
convolution, `finite_diff_grad` never touches autograd, and `count_params`
is a plain element-count walk.
"""

from __future__ import annotations

import math
from collections.abc import Mapping

import numpy as np
import torch


def finite_diff_grad(f, x: torch.Tensor, h: float = 1e-3) -> torch.Tensor:
    """Central-difference gradient of a scalar function at ``x``, elementwise."""
    base = x.detach().clone()
    grad = torch.zeros_like(base, dtype=torch.float64)
    flat = base.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.numel()):
        keep = flat[i].item()
        flat[i] = keep + h
        hi = float(f(base))
        flat[i] = keep - h
        lo = float(f(base))
        flat[i] = keep
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise ValueError(f"non-finite evaluation near element {i}")
        out[i] = (hi - lo) / (2.0 * h)
    return grad


def count_params(params) -> int:
    """Total element count across a module, a mapping of arrays, or an iterable."""
    if isinstance(params, torch.nn.Module):
        arrays = [p for p in params.parameters()]
    elif isinstance(params, Mapping):
        arrays = list(params.values())
    else:
        arrays = list(params)
    total = 0
    for a in arrays:
        total += int(a.numel() if torch.is_tensor(a) else np.asarray(a).size)
    return total


def _window_weights(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    w = np.empty((size, size), dtype=np.float64)
    half = size // 2
    for i in range(size):
        for j in range(size):
            w[i, j] = math.exp(-((i - half) ** 2 + (j - half) ** 2) / (2.0 * sigma**2))
    return w / w.sum()


def naive_ssim(x: np.ndarray, y: np.ndarray) -> float:
    """Direct sliding-window SSIM on the BT.601 luminance plane.

    Same constants as the production metric (11x11 Gaussian window,
    sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1 after the [0, 1]
    remap) but evaluated window by window.
    """
    if x.shape != y.shape:
        raise ValueError("shape mismatch")
    a = ((np.asarray(x, dtype=np.float64) + 1.0) / 2.0) @ np.array([0.299, 0.587, 0.114])
    b = ((np.asarray(y, dtype=np.float64) + 1.0) / 2.0) @ np.array([0.299, 0.587, 0.114])
    size = 11
    if min(a.shape) < size:
        raise ValueError(f"images must be at least {size}x{size}")
    w = _window_weights(size)
    c1, c2 = 0.01**2, 0.03**2
    values = []
    for i in range(a.shape[0] - size + 1):
        for j in range(a.shape[1] - size + 1):
            pa = a[i : i + size, j : j + size]
            pb = b[i : i + size, j : j + size]
            mu_a = float((w * pa).sum())
            mu_b = float((w * pb).sum())
            var_a = float((w * pa * pa).sum()) - mu_a**2
            var_b = float((w * pb * pb).sum()) - mu_b**2
            cov = float((w * pa * pb).sum()) - mu_a * mu_b
            values.append(
                ((2 * mu_a * mu_b + c1) * (2 * cov + c2))
                / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(values))


def seeded_image(h: int, w: int, seed: int, smooth: bool = True) -> np.ndarray:
    """Deterministic synthetic image in [-1, 1]: smooth gradients plus mild texture."""
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    phases = rng.uniform(0, 2 * np.pi, size=6)
    freqs = rng.uniform(1.0, 4.0, size=6)
    img = np.zeros((h, w, 3))
    for c in range(3):
        img[:, :, c] = 0.5 * np.sin(2 * np.pi * freqs[c] * ys / h + phases[c]) + 0.4 * np.cos(
            2 * np.pi * freqs[c + 3] * xs / w + phases[c + 3]
        )
    if not smooth:
        img += rng.normal(0, 0.1, size=img.shape)
    return np.clip(img, -0.95, 0.95).astype(np.float32)


def seeded_tensor(shape, seed: int) -> torch.Tensor:
    """Deterministic standard-normal tensor."""
    g = torch.Generator().manual_seed(seed)
    return torch.randn(*shape, generator=g)
