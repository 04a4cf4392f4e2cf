"""Flat key-value configuration (a TOML-compatible subset).

One ``key = value`` pair per line, dotted namespaced keys, ``#`` comments.
Unknown keys are rejected by name; every key has a default, so an empty or
absent file is a valid configuration.
"""

from __future__ import annotations

from .losses import LossWeights
from .physics import FogSpec, StreakSpec
from .trainer import TrainConfig

# key -> (default, help)
DEFAULTS: dict[str, tuple[object, str]] = {
    "seed": (0, "root random seed; all subsystem randomness derives from it"),
    "data.root": ("", "dataset root containing rainfog/, rain/, fog/ and clean/ image dirs"),
    "train.epochs": (200, "training epochs"),
    "train.lr": (1e-4, "initial Adam learning rate"),
    "train.decay_start_epoch": (100, "epoch at which the linear decay to zero begins"),
    "train.batch": (1, "mini-batch size (only 1 is supported)"),
    "train.crop": (256, "square crop size fed to the networks; multiple of 16"),
    "train.checkpoint_every": (50, "epochs between checkpoint writes"),
    "train.adv_mode": ("least-squares", "adversarial objective: least-squares or log"),
    "train.cycle_mode": ("l1", "cycle-consistency norm: l1 or l2"),
    "loss.lambda1": (0.01, "perceptual term weight"),
    "loss.lambda2": (10.0, "cycle-consistency term weight"),
    "loss.lambda3": (1.0, "adversarial term weight"),
    "loss.lambda4": (1.0, "degradation-class term weight"),
    "model.residual_blocks": (6, "bottleneck residual blocks in the derain generator"),
    "model.dense_growth": (32, "growth channels per dense-block layer"),
    "physics.streak.count": (60, "rain streaks per synthesized image"),
    "physics.streak.angle": (65.0, "streak angle, degrees clockwise from vertical"),
    "physics.streak.length": (15, "streak length in pixels"),
    "physics.streak.width": (1.5, "streak width in pixels"),
    "physics.streak.intensity": (0.35, "peak per-streak brightness added to the scene"),
    "physics.t_style": ("radial", "transmission style: constant, linear-gradient, or radial"),
    "physics.t_min": (0.5, "minimum transmission"),
    "physics.t_max": (0.9, "maximum transmission"),
    "physics.airlight_min": (0.4, "minimum airlight, 0..1 scale"),
    "physics.airlight_max": (0.95, "maximum airlight, 0..1 scale"),
    "physics.mix_rain": (0.25, "probability of a rain-only example"),
    "physics.mix_fog": (0.25, "probability of a fog-only example"),
    "physics.mix_rainfog": (0.5, "probability of a combined rain-fog example"),
}


class ConfigError(ValueError):
    pass


def _parse_value(text: str):
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse value {text!r}") from None


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        values[key.strip()] = _parse_value(value.strip())
    return values


def _coerce(key: str, value, default):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"config key {key!r} expects a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"config key {key!r} expects an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {key!r} expects a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"config key {key!r} expects a string, got {value!r}")
        return value
    raise ConfigError(f"unsupported default type for {key!r}")


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then file values, then overrides; unknown keys are rejected."""
    cfg = {key: default for key, (default, _) in DEFAULTS.items()}
    layers = []
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            layers.append(parse_config_text(fh.read()))
    if overrides:
        layers.append(overrides)
    for layer in layers:
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = _coerce(key, value, DEFAULTS[key][0])
    return cfg


def train_config_from(cfg: dict) -> TrainConfig:
    return TrainConfig(
        epochs=cfg["train.epochs"],
        lr=cfg["train.lr"],
        decay_start_epoch=cfg["train.decay_start_epoch"],
        batch=cfg["train.batch"],
        crop=cfg["train.crop"],
        weights=LossWeights(
            perceptual=cfg["loss.lambda1"],
            cycle=cfg["loss.lambda2"],
            adversarial=cfg["loss.lambda3"],
            diverse=cfg["loss.lambda4"],
        ),
        seed=cfg["seed"],
        checkpoint_every=cfg["train.checkpoint_every"],
        adv_mode=cfg["train.adv_mode"],
        cycle_mode=cfg["train.cycle_mode"],
        residual_blocks=cfg["model.residual_blocks"],
        dense_growth=cfg["model.dense_growth"],
    )


def synth_specs_from(cfg: dict):
    """StreakSpec, FogSpec, and the (rain, fog, rainfog) class mix."""
    streaks = StreakSpec(
        count=cfg["physics.streak.count"],
        angle=cfg["physics.streak.angle"],
        length=cfg["physics.streak.length"],
        width=cfg["physics.streak.width"],
        intensity=cfg["physics.streak.intensity"],
    )
    fog = FogSpec(
        style=cfg["physics.t_style"],
        t_min=cfg["physics.t_min"],
        t_max=cfg["physics.t_max"],
        airlight_min=cfg["physics.airlight_min"],
        airlight_max=cfg["physics.airlight_max"],
    )
    mix = (cfg["physics.mix_rain"], cfg["physics.mix_fog"], cfg["physics.mix_rainfog"])
    return streaks, fog, mix
