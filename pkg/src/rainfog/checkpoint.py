"""Versioned binary checkpoint container.

Layout: an 8-byte magic string, a little-endian uint32 format version, then
a torch-serialized payload dict.  Writes go through a temp file and an
atomic rename.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import torch

MAGIC = b"RFOGCKPT"
VERSION = 1


class CheckpointError(RuntimeError):
    """Raised for bad magic, unsupported version, or corrupt payloads."""


def save_payload(payload: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        torch.save(payload, fh)
    os.replace(tmp, path)


def load_payload(path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        raw = fh.read(4)
        if len(raw) != 4:
            raise CheckpointError(f"{path}: truncated header")
        (version,) = struct.unpack("<I", raw)
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        try:
            return torch.load(fh, weights_only=True)
        except Exception as exc:
            raise CheckpointError(f"{path}: corrupt payload ({exc})") from exc
