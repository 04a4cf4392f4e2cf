"""Image loading, normalization, cropping, and unpaired dataset sampling.

An image is a float32 numpy array of shape (H, W, 3) in [-1, 1]; an 8-bit
value v maps through ``v / 127.5 - 1``.  Channel order is RGB throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image as PILImage

LABELS = ("rain", "fog", "rainfog")
DEGRADED_DIRS = ("rainfog", "rain", "fog")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def load_image(path) -> np.ndarray:
    """Load a PNG/JPEG as float32 (H, W, 3) in [-1, 1]; non-RGB inputs are converted."""
    with PILImage.open(path) as img:
        rgb = img.convert("RGB")
        pixels = np.asarray(rgb, dtype=np.float32)
    return pixels / 127.5 - 1.0


def save_image(image: np.ndarray, path) -> None:
    """Write an image to 8-bit PNG; x maps to round((x + 1) * 127.5), clamped to [0, 255]."""
    levels = np.clip(np.round((image + 1.0) * 127.5), 0, 255).astype(np.uint8)
    PILImage.fromarray(levels, mode="RGB").save(path)


def random_crop(image: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """Crop a size x size window at an offset drawn uniformly from the valid range."""
    h, w = image.shape[:2]
    if h < size or w < size:
        raise ValueError(f"image {h}x{w} smaller than crop size {size}")
    top = int(rng.integers(0, h - size + 1))
    left = int(rng.integers(0, w - size + 1))
    return image[top : top + size, left : left + size]


def ensure_min_size(image: np.ndarray, size: int) -> np.ndarray:
    """Bilinearly upscale so min(H, W) >= size; larger images pass through."""
    h, w = image.shape[:2]
    if min(h, w) >= size:
        return image
    scale = size / min(h, w)
    new_h, new_w = max(size, round(h * scale)), max(size, round(w * scale))
    t = to_tensor(image)
    t = F.interpolate(t, size=(new_h, new_w), mode="bilinear", align_corners=False)
    return from_tensor(t)


def to_tensor(image: np.ndarray) -> torch.Tensor:
    """(H, W, 3) numpy image -> (1, 3, H, W) float32 tensor."""
    return torch.from_numpy(np.ascontiguousarray(image.transpose(2, 0, 1)))[None]


def from_tensor(t: torch.Tensor) -> np.ndarray:
    """(1, 3, H, W) or (3, H, W) tensor -> (H, W, 3) float32 numpy image."""
    if t.dim() == 4:
        t = t[0]
    return t.detach().cpu().numpy().transpose(1, 2, 0).astype(np.float32)


def list_images(directory) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        return []
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)


def load_manifest(path) -> list[Path]:
    """Read a newline-delimited list of image paths (relative to the manifest)."""
    base = Path(path).parent
    paths = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                p = Path(line)
                paths.append(p if p.is_absolute() else base / p)
    return paths


def _label_for(path: Path) -> str:
    name = path.parent.name
    return name if name in LABELS else "rainfog"


@dataclass
class UnpairedDataset:
    """Unpaired degraded/clean image lists with per-degraded-image class labels."""

    rainfog_paths: list[Path]
    clean_paths: list[Path]
    domain_labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.rainfog_paths or not self.clean_paths:
            raise ValueError("both degraded and clean image lists must be non-empty")
        if not self.domain_labels:
            self.domain_labels = [_label_for(Path(p)) for p in self.rainfog_paths]
        if len(self.domain_labels) != len(self.rainfog_paths):
            raise ValueError("one label per degraded image required")
        for label in self.domain_labels:
            if label not in LABELS:
                raise ValueError(f"unknown domain label {label!r}")

    @classmethod
    def from_root(cls, root) -> "UnpairedDataset":
        """Scan ``root/{rainfog,rain,fog}`` for degraded images and ``root/clean``."""
        root = Path(root)
        degraded, labels = [], []
        for sub in DEGRADED_DIRS:
            for p in list_images(root / sub):
                degraded.append(p)
                labels.append(sub)
        clean = list_images(root / "clean")
        if not degraded:
            raise ValueError(f"no degraded images under {root} (expected rainfog/, rain/ or fog/)")
        if not clean:
            raise ValueError(f"no clean images under {root / 'clean'}")
        return cls(degraded, clean, labels)

    def head(self, n: int) -> "UnpairedDataset":
        """First ``n`` degraded and clean entries (used by the overfit smoke mode)."""
        return UnpairedDataset(
            self.rainfog_paths[:n], self.clean_paths[:n], self.domain_labels[:n]
        )

    def __len__(self) -> int:
        return len(self.rainfog_paths)


def sample_pair(dataset: UnpairedDataset, rng: np.random.Generator):
    """Draw one (degraded image, label, clean image) triple, the two sides independent."""
    i = int(rng.integers(0, len(dataset.rainfog_paths)))
    j = int(rng.integers(0, len(dataset.clean_paths)))
    return (
        load_image(dataset.rainfog_paths[i]),
        dataset.domain_labels[i],
        load_image(dataset.clean_paths[j]),
    )
