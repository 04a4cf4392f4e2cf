"""Full-reference image quality metrics: PSNR and SSIM.

Both metrics remap images from [-1, 1] to [0, 1] before computing, so the
peak signal is 1.  SSIM follows the standard recipe: 11x11 Gaussian window
with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1, evaluated on the
BT.601 luminance by default.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import convolve2d

from .data import list_images, load_image

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _to_unit(image: np.ndarray) -> np.ndarray:
    return (np.asarray(image, dtype=np.float64) + 1.0) / 2.0


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; identical images return the 100 dB cap."""
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((_to_unit(x) - _to_unit(y)) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = size // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(coords**2) / (2.0 * sigma**2))
    window = np.outer(g, g)
    return window / window.sum()


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    window = _gaussian_window()
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    mu_a = convolve2d(a, window, mode="valid")
    mu_b = convolve2d(b, window, mode="valid")
    var_a = convolve2d(a * a, window, mode="valid") - mu_a**2
    var_b = convolve2d(b * b, window, mode="valid") - mu_b**2
    cov = convolve2d(a * b, window, mode="valid") - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(x: np.ndarray, y: np.ndarray, channel_mean: bool = False) -> float:
    """Mean local structural similarity.

    Computed on the luminance plane by default; ``channel_mean=True``
    averages per-channel SSIM instead.
    """
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if min(x.shape[0], x.shape[1]) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    a, b = _to_unit(x), _to_unit(y)
    if channel_mean:
        return float(np.mean([_ssim_plane(a[:, :, c], b[:, :, c]) for c in range(a.shape[2])]))
    return _ssim_plane(a @ LUMA_WEIGHTS, b @ LUMA_WEIGHTS)


@dataclass
class MetricReport:
    """Per-image PSNR/SSIM entries plus dataset means and unmatched filenames."""

    entries: list[tuple[str, float, float]] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)

    @property
    def psnr_db(self) -> float:
        return float(np.mean([e[1] for e in self.entries]))

    @property
    def ssim(self) -> float:
        return float(np.mean([e[2] for e in self.entries]))


def evaluate_dir(pred_dir, gt_dir) -> MetricReport:
    """Score every filename present in both directories; list the unmatched ones."""
    pred = {p.name: p for p in list_images(pred_dir)}
    gt = {p.name: p for p in list_images(gt_dir)}
    shared = sorted(set(pred) & set(gt))
    if not shared:
        raise ValueError(f"no matching filenames between {pred_dir} and {gt_dir}")
    report = MetricReport(missing=sorted(set(pred) ^ set(gt)))
    for name in shared:
        x = load_image(pred[name])
        y = load_image(gt[name])
        report.entries.append((name, psnr(x, y), ssim(x, y)))
    return report


def write_report(report: MetricReport, path) -> None:
    """Write the CSV report: filename, psnr_db, ssim, with a trailing mean row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "psnr_db", "ssim"])
        for name, p, s in report.entries:
            writer.writerow([name, f"{p:.6f}", f"{s:.6f}"])
        writer.writerow(["mean", f"{report.psnr_db:.6f}", f"{report.ssim:.6f}"])
        for name in report.missing:
            writer.writerow([name, "missing", "missing"])
