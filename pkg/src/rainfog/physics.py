"""Atmospheric rain-fog degradation model and synthetic degradation sampling.

A degraded observation ``I`` is produced from a clean scene ``J`` by
attenuating the scene plus its rain streaks ``R`` with a transmission map
``T`` and filling the attenuated fraction with global atmospheric light
``A``::

    I = T * (J + R) + A * (1 - T)

Images live in ``[-1, 1]``.  ``compose``/``decompose`` only assume
broadcasting semantics, so they accept numpy arrays in ``(H, W, C)`` layout
as well as torch tensors in ``(N, C, H, W)`` layout; the synthesis pipeline
and the differentiable degradation generator share this one implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

LABELS = ("rain", "fog", "rainfog")
TRANSMISSION_STYLES = ("constant", "linear-gradient", "radial")

#: smallest transmission value `decompose` accepts before the division blows up
TRANSMISSION_FLOOR = 1e-3


class SingularTransmissionError(ValueError):
    """Transmission map contains entries too close to zero to invert."""


@dataclass
class PhysicsParams:
    """Degradation parameters: airlight A, transmission T, rain layer R.

    ``A`` is a scalar, a per-channel vector, or any broadcastable tensor in
    image units ([-1, 1]).  ``T`` has a single channel and entries in
    [0, 1].  ``R`` matches the image shape and is nonnegative for synthetic
    layers (network estimates may be signed).
    """

    A: object
    T: object
    R: object


@dataclass
class StreakSpec:
    """Parameters of the synthetic rain-streak layer.

    ``angle`` is measured in degrees clockwise from vertical, so 0 means
    straight falling rain.  ``length``/``width`` are in pixels.
    """

    count: int = 60
    angle: float = 65.0
    length: int = 15
    width: float = 1.5
    intensity: float = 0.35

    def validate(self) -> None:
        if self.count < 0:
            raise ValueError("streak count must be >= 0")
        if self.count > 0 and (self.length < 1 or self.width < 1):
            raise ValueError("streak length and width must be >= 1")
        if self.intensity < 0:
            raise ValueError("streak intensity must be >= 0")


@dataclass
class FogSpec:
    """Transmission-map style and airlight range for synthetic fog."""

    style: str = "radial"
    t_min: float = 0.5
    t_max: float = 0.9
    airlight_min: float = 0.4
    airlight_max: float = 0.95


def _check_composable(image, params: PhysicsParams) -> None:
    shapes = [tuple(params.T.shape), tuple(params.R.shape)]
    if hasattr(params.A, "shape"):
        shapes.append(tuple(np.shape(params.A)))
    try:
        if torch.is_tensor(image):
            result = torch.broadcast_shapes(tuple(image.shape), *shapes)
        else:
            result = np.broadcast_shapes(image.shape, *shapes)
    except (ValueError, RuntimeError) as exc:
        raise ValueError(f"degradation parameters do not broadcast with image: {exc}") from None
    if tuple(result) != tuple(image.shape):
        raise ValueError(
            f"degradation parameters broadcast to {tuple(result)}, expected image shape {tuple(image.shape)}"
        )


def compose(clean, params: PhysicsParams):
    """Degrade a clean image: ``T * (clean + R) + A * (1 - T)``, clamped to [-1, 1]."""
    _check_composable(clean, params)
    out = params.T * (clean + params.R) + params.A * (1.0 - params.T)
    if torch.is_tensor(out):
        return out.clamp(-1.0, 1.0)
    return np.clip(out, -1.0, 1.0)


def decompose(degraded, params: PhysicsParams, eps: float = TRANSMISSION_FLOOR):
    """Invert `compose`: ``(degraded - A * (1 - T)) / T - R``, unclamped.

    Raises SingularTransmissionError when any transmission entry is below
    ``eps``.  Exact inversion only holds where `compose` did not clamp.
    """
    _check_composable(degraded, params)
    t_min = float(params.T.min())
    if t_min < eps:
        raise SingularTransmissionError(f"min transmission {t_min:g} below floor {eps:g}")
    return (degraded - params.A * (1.0 - params.T)) / params.T - params.R


def _line_kernel(length: int, width: float, angle_deg: float) -> np.ndarray:
    """Anti-aliased line segment through the kernel centre, peak value 1."""
    size = int(math.ceil(length))
    if size % 2 == 0:
        size += 1
    half = size // 2
    ys, xs = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    theta = math.radians(angle_deg)
    dy, dx = math.cos(theta), math.sin(theta)
    along = ys * dy + xs * dx
    perp = ys * dx - xs * dy
    sigma = max(width / 2.0, 1e-6)
    kernel = np.exp(-(perp**2) / (2.0 * sigma**2))
    kernel[np.abs(along) > length / 2.0] = 0.0
    peak = kernel.max()
    if peak > 0:
        kernel /= peak
    return kernel


def synth_streaks(h: int, w: int, spec: StreakSpec, rng: np.random.Generator) -> np.ndarray:
    """Rasterize ``spec.count`` motion-blurred line segments into an (h, w, 3) layer."""
    spec.validate()
    layer = np.zeros((h, w), dtype=np.float64)
    if spec.count == 0:
        return np.zeros((h, w, 3), dtype=np.float32)
    if h < spec.length or w < spec.length:
        raise ValueError(f"image {h}x{w} smaller than streak length {spec.length}")
    kernel = _line_kernel(spec.length, spec.width, spec.angle) * spec.intensity
    half = kernel.shape[0] // 2
    for _ in range(spec.count):
        cy = int(rng.integers(0, h))
        cx = int(rng.integers(0, w))
        y0, x0 = cy - half, cx - half
        y1, x1 = y0 + kernel.shape[0], x0 + kernel.shape[1]
        ky0, kx0 = max(0, -y0), max(0, -x0)
        ky1 = kernel.shape[0] - max(0, y1 - h)
        kx1 = kernel.shape[1] - max(0, x1 - w)
        layer[max(0, y0) : min(h, y1), max(0, x0) : min(w, x1)] += kernel[ky0:ky1, kx0:kx1]
    return np.repeat(layer[:, :, None], 3, axis=2).astype(np.float32)


def synth_transmission(
    h: int,
    w: int,
    style: str,
    t_min: float,
    t_max: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monotone depth-proxy transmission map of shape (h, w, 1) within [t_min, t_max]."""
    if not (0.0 < t_min <= t_max <= 1.0):
        raise ValueError(f"need 0 < t_min <= t_max <= 1, got [{t_min}, {t_max}]")
    if style == "constant":
        value = t_min if t_min == t_max else float(rng.uniform(t_min, t_max))
        t = np.full((h, w), value, dtype=np.float64)
    elif style == "linear-gradient":
        column = np.linspace(t_min, t_max, h)
        if rng.integers(0, 2):
            column = column[::-1]
        t = np.repeat(column[:, None], w, axis=1)
    elif style == "radial":
        ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
        cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
        dist = np.hypot(ys - cy, xs - cx)
        t = t_max - (t_max - t_min) * dist / dist.max()
    else:
        raise ValueError(f"unknown transmission style {style!r}; expected one of {TRANSMISSION_STYLES}")
    return t[:, :, None].astype(np.float32)


def make_rainfog_example(
    clean: np.ndarray,
    streaks: StreakSpec,
    fog: FogSpec,
    rng: np.random.Generator,
    class_mix: tuple[float, float, float] = (0.25, 0.25, 0.5),
    label: str | None = None,
    airlight: np.ndarray | None = None,
):
    """Draw degradation parameters, apply `compose`, and return (image, params, label).

    The label is drawn from ``class_mix`` over ("rain", "fog", "rainfog")
    unless forced with ``label``; a rain-only image keeps T = 1, a fog-only
    image has no streaks.  The transmission and streak draws happen before
    the airlight draw, so re-running with the same seed, a forced label, and
    the recorded ``airlight`` reproduces an image exactly; the on-disk
    parameter sidecars rely on this.
    """
    h, w = clean.shape[:2]
    # parameter draws come from a child stream spawned before the label draw,
    # so replaying with a forced label consumes the exact same sequence
    param_rng = np.random.default_rng(int(rng.integers(0, 2**63)))
    if label is None:
        mix = np.asarray(class_mix, dtype=np.float64)
        label = LABELS[int(rng.choice(len(LABELS), p=mix / mix.sum()))]
    if label not in LABELS:
        raise ValueError(f"unknown label {label!r}")

    if label == "rain":
        t = np.ones((h, w, 1), dtype=np.float32)
    else:
        t = synth_transmission(h, w, fog.style, fog.t_min, fog.t_max, param_rng)
    if label == "fog":
        r = np.zeros((h, w, 3), dtype=np.float32)
    else:
        r = synth_streaks(h, w, streaks, param_rng)
    if airlight is None:
        airlight = param_rng.uniform(fog.airlight_min, fog.airlight_max, size=3)
    a = np.asarray(airlight, dtype=np.float32).reshape(3)

    params = PhysicsParams(A=a, T=t, R=r)
    return compose(clean.astype(np.float32), params), params, label


def write_sidecar(
    path,
    *,
    params: PhysicsParams,
    streaks: StreakSpec,
    fog: FogSpec,
    seed: int,
    label: str,
) -> None:
    """Write the key-value parameter sidecar for one synthesized image.

    Records the synthesis inputs plus the per-image seed, which is enough to
    regenerate the exact transmission and streak maps.
    """
    a = np.asarray(params.A, dtype=np.float64).reshape(-1)
    if a.size == 1:
        a = np.repeat(a, 3)
    lines = [
        f"A.r = {a[0]!r}",
        f"A.g = {a[1]!r}",
        f"A.b = {a[2]!r}",
        f't_style = "{fog.style}"',
        f"t_min = {fog.t_min!r}",
        f"t_max = {fog.t_max!r}",
        f"streak.count = {streaks.count}",
        f"streak.angle = {streaks.angle!r}",
        f"streak.length = {streaks.length}",
        f"streak.width = {streaks.width!r}",
        f"streak.intensity = {streaks.intensity!r}",
        f"seed = {seed}",
        f'label = "{label}"',
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sidecar(path) -> dict:
    """Parse a parameter sidecar back into a plain dict."""
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, text = line.partition("=")
            key, text = key.strip(), text.strip()
            if text.startswith('"') and text.endswith('"'):
                values[key] = text[1:-1]
            elif any(c in text for c in ".eE") or text in ("inf", "-inf", "nan"):
                values[key] = float(text)
            else:
                values[key] = int(text)
    return values


def example_from_sidecar(clean: np.ndarray, sidecar: dict):
    """Re-run `make_rainfog_example` from a sidecar's recorded inputs and seed."""
    streaks = StreakSpec(
        count=int(sidecar["streak.count"]),
        angle=float(sidecar["streak.angle"]),
        length=int(sidecar["streak.length"]),
        width=float(sidecar["streak.width"]),
        intensity=float(sidecar["streak.intensity"]),
    )
    fog = FogSpec(style=str(sidecar["t_style"]), t_min=float(sidecar["t_min"]), t_max=float(sidecar["t_max"]))
    rng = np.random.default_rng(int(sidecar["seed"]))
    airlight = np.array([sidecar["A.r"], sidecar["A.g"], sidecar["A.b"]], dtype=np.float32)
    return make_rainfog_example(clean, streaks, fog, rng, label=str(sidecar["label"]), airlight=airlight)
