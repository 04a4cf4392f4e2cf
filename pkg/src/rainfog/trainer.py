"""Two-pass cycle training loop.

Every step runs the degraded-to-clean pass (extract the rain-fog feature F,
derain, re-degrade the result with F) and the clean-to-degraded pass (the
*same* F tensor degrades the clean image, which is then derained again).
Generators update first on the weighted total objective; both
discriminators then update on detached generator outputs.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import checkpoint
from .data import LABELS, UnpairedDataset, ensure_min_size, random_crop, sample_pair, to_tensor
from .losses import (
    ADV_MODES,
    CYCLE_MODES,
    LossReport,
    LossWeights,
    adversarial_discriminator_loss,
    adversarial_generator_loss,
    cycle_loss,
    diverse_loss,
    perceptual_loss,
    total_loss,
)
from .networks import (
    DegradationGenerator,
    DerainGenerator,
    FrozenFeatureExtractor,
    PatchDiscriminator,
    RainFogFeatureNet,
)

LOG_COLUMNS = ("step", "adv", "cycle", "perceptual", "diverse", "total", "lr")
MODEL_NAMES = ("derain", "feature", "degrade", "disc_clean", "disc_degraded")


class DivergenceError(RuntimeError):
    """A training loss became non-finite."""

    def __init__(self, step: int, report: LossReport):
        super().__init__(f"non-finite loss at step {step}: {report}")
        self.step = step
        self.report = report


@dataclass
class TrainConfig:
    epochs: int = 200
    lr: float = 1e-4
    decay_start_epoch: int = 100
    batch: int = 1
    crop: int = 256
    weights: LossWeights = field(default_factory=LossWeights)
    seed: int = 0
    checkpoint_every: int = 50
    adv_mode: str = "least-squares"
    cycle_mode: str = "l1"
    residual_blocks: int = 6
    dense_growth: int = 32

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if not 0 <= self.decay_start_epoch <= self.epochs:
            raise ValueError("need 0 <= decay_start_epoch <= epochs")
        if self.batch != 1:
            raise ValueError("only batch size 1 is supported")
        if self.crop % 16:
            raise ValueError("crop size must be a multiple of 16")
        if self.adv_mode not in ADV_MODES:
            raise ValueError(f"adv_mode must be one of {ADV_MODES}")
        if self.cycle_mode not in CYCLE_MODES:
            raise ValueError(f"cycle_mode must be one of {CYCLE_MODES}")
        self.weights.validate()


def smoke_config(seed: int = 0) -> TrainConfig:
    """Deterministic overfit configuration: one pair, 200 steps at 64x64.

    The learning rate is raised to 1e-3 (decay disabled) so memorizing a
    single example converges within the 200-step budget; loss weights stay
    at their defaults.
    """
    return TrainConfig(
        epochs=200,
        lr=1e-3,
        decay_start_epoch=200,
        crop=64,
        seed=seed,
        checkpoint_every=200,
    )


@dataclass
class TrainState:
    derain: DerainGenerator
    feature: RainFogFeatureNet
    degrade: DegradationGenerator
    disc_clean: PatchDiscriminator
    disc_degraded: PatchDiscriminator
    extractor: FrozenFeatureExtractor
    opt_generators: torch.optim.Adam
    opt_disc_clean: torch.optim.Adam
    opt_disc_degraded: torch.optim.Adam
    epoch: int = 0
    step: int = 0
    seed: int = 0

    def models(self) -> dict:
        return {name: getattr(self, name) for name in MODEL_NAMES}

    def optimizers(self) -> dict:
        return {
            "generators": self.opt_generators,
            "disc_clean": self.opt_disc_clean,
            "disc_degraded": self.opt_disc_degraded,
        }

    def generator_parameters(self):
        return itertools.chain(
            self.derain.parameters(), self.feature.parameters(), self.degrade.parameters()
        )

    def param_count(self) -> int:
        return sum(p.numel() for m in self.models().values() for p in m.parameters())


def build_state(config: TrainConfig) -> TrainState:
    """Seeded construction of the five networks, extractor, and optimizers."""
    torch.manual_seed(config.seed)
    derain = DerainGenerator(
        residual_blocks=config.residual_blocks, dense_growth=config.dense_growth
    )
    feature = RainFogFeatureNet()
    degrade = DegradationGenerator()
    disc_clean = PatchDiscriminator()
    disc_degraded = PatchDiscriminator(n_classes=len(LABELS))
    extractor = FrozenFeatureExtractor(seed=config.seed)
    betas = (0.5, 0.999)
    gen_params = itertools.chain(
        derain.parameters(), feature.parameters(), degrade.parameters()
    )
    return TrainState(
        derain=derain,
        feature=feature,
        degrade=degrade,
        disc_clean=disc_clean,
        disc_degraded=disc_degraded,
        extractor=extractor,
        opt_generators=torch.optim.Adam(gen_params, lr=config.lr, betas=betas),
        opt_disc_clean=torch.optim.Adam(disc_clean.parameters(), lr=config.lr, betas=betas),
        opt_disc_degraded=torch.optim.Adam(
            disc_degraded.parameters(), lr=config.lr, betas=betas
        ),
        seed=config.seed,
    )


def lr_at(config: TrainConfig, epoch: int) -> float:
    """Flat until the decay start, then linear to zero at the final epoch."""
    if not 0 <= epoch < config.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {config.epochs})")
    if epoch < config.decay_start_epoch:
        return config.lr
    span = config.epochs - config.decay_start_epoch
    return config.lr * (1.0 - (epoch - config.decay_start_epoch) / span)


def _set_lr(state: TrainState, lr: float) -> None:
    for opt in state.optimizers().values():
        for group in opt.param_groups:
            group["lr"] = lr


def _as_batch(image) -> torch.Tensor:
    if torch.is_tensor(image):
        return image if image.dim() == 4 else image[None]
    return to_tensor(image)


def train_step(state: TrainState, x_rf, label, y_c, config: TrainConfig) -> LossReport:
    """One optimization step on a (degraded image, label, clean image) triple."""
    x_rf = _as_batch(x_rf)
    y_c = _as_batch(y_c)
    label_index = LABELS.index(label) if isinstance(label, str) else int(label)
    w = config.weights

    # degraded -> clean -> degraded
    feat = state.feature(x_rf)
    clean_hat = state.derain(x_rf)
    rf_cycled, _ = state.degrade(clean_hat, feat)
    # clean -> degraded -> clean, reusing the feature from the first pass
    degraded_hat, _ = state.degrade(y_c, feat)
    clean_cycled = state.derain(degraded_hat)

    score_clean = state.disc_clean(clean_hat)
    score_degraded, class_probs = state.disc_degraded(degraded_hat)
    adv = adversarial_generator_loss(score_clean, config.adv_mode) + adversarial_generator_loss(
        score_degraded, config.adv_mode
    )
    cyc = cycle_loss(x_rf, rf_cycled, config.cycle_mode) + cycle_loss(
        y_c, clean_cycled, config.cycle_mode
    )
    per = perceptual_loss(state.extractor, x_rf, rf_cycled) + perceptual_loss(
        state.extractor, y_c, clean_cycled
    )
    div = diverse_loss(class_probs, label_index)
    total = total_loss(per, cyc, adv, div, w)

    # discriminator objectives on frozen copies of the generated images
    clean_fake = clean_hat.detach()
    degraded_fake = degraded_hat.detach()
    d_clean = adversarial_discriminator_loss(
        state.disc_clean(y_c), state.disc_clean(clean_fake), config.adv_mode
    )
    real_score, real_probs = state.disc_degraded(x_rf)
    fake_score, fake_probs = state.disc_degraded(degraded_fake)
    d_degraded = (
        adversarial_discriminator_loss(real_score, fake_score, config.adv_mode)
        + diverse_loss(fake_probs, label_index)
        + diverse_loss(real_probs, label_index)
    )

    report = LossReport(
        adversarial=adv.detach().item(),
        cycle=cyc.detach().item(),
        perceptual=per.detach().item(),
        diverse=div.detach().item(),
        total=total.detach().item(),
    )
    if not report.is_finite() or not (
        torch.isfinite(d_clean) and torch.isfinite(d_degraded)
    ):
        raise DivergenceError(state.step, report)

    state.opt_generators.zero_grad()
    total.backward()
    state.opt_generators.step()

    state.opt_disc_clean.zero_grad()
    d_clean.backward()
    state.opt_disc_clean.step()

    state.opt_disc_degraded.zero_grad()
    d_degraded.backward()
    state.opt_disc_degraded.step()

    state.step += 1
    return report


def _log_row(step: int, report: LossReport, lr: float) -> str:
    values = [
        str(step),
        f"{report.adversarial:.17g}",
        f"{report.cycle:.17g}",
        f"{report.perceptual:.17g}",
        f"{report.diverse:.17g}",
        f"{report.total:.17g}",
        f"{lr:.17g}",
    ]
    return ",".join(values)


def _prepare(image, crop: int, rng: np.random.Generator) -> torch.Tensor:
    return to_tensor(random_crop(ensure_min_size(image, crop), crop, rng))


def fit(
    config: TrainConfig,
    dataset: UnpairedDataset,
    out_dir=None,
    state: TrainState | None = None,
) -> TrainState:
    """Run ``config.epochs`` x len(dataset) steps with logging and checkpoints."""
    if state is None:
        state = build_state(config)
    rng = np.random.default_rng(config.seed)
    out_dir = Path(out_dir) if out_dir is not None else None
    log_fh = None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        log_fh = open(out_dir / "train_log.csv", "w", encoding="utf-8")
        log_fh.write(",".join(LOG_COLUMNS) + "\n")
    try:
        for epoch in range(config.epochs):
            lr = lr_at(config, epoch)
            _set_lr(state, lr)
            state.epoch = epoch
            for _ in range(len(dataset)):
                x, label, y = sample_pair(dataset, rng)
                report = train_step(
                    state, _prepare(x, config.crop, rng), label, _prepare(y, config.crop, rng), config
                )
                if log_fh is not None:
                    log_fh.write(_log_row(state.step, report, lr) + "\n")
            if out_dir is not None and (epoch + 1) % config.checkpoint_every == 0:
                save_state(state, config, out_dir / f"ckpt_epoch{epoch + 1:04d}.pt")
        if out_dir is not None:
            save_state(state, config, out_dir / "ckpt_final.pt")
    finally:
        if log_fh is not None:
            log_fh.close()
    return state


def save_state(state: TrainState, config: TrainConfig, path) -> None:
    """Serialize models, optimizer moments, counters, config echo, and RNG state."""
    payload = {
        "models": {name: m.state_dict() for name, m in state.models().items()},
        "optimizers": {name: o.state_dict() for name, o in state.optimizers().items()},
        "epoch": state.epoch,
        "step": state.step,
        "seed": state.seed,
        "config": asdict(config),
        "torch_rng": torch.get_rng_state(),
        "param_count": state.param_count(),
    }
    checkpoint.save_payload(payload, path)


def config_from_payload(payload: dict) -> TrainConfig:
    raw = dict(payload["config"])
    raw["weights"] = LossWeights(**raw["weights"])
    return TrainConfig(**raw)


def restore_state(path) -> tuple[TrainState, TrainConfig]:
    """Rebuild a full training state; forward outputs and the next step match bitwise."""
    payload = checkpoint.load_payload(path)
    config = config_from_payload(payload)
    missing = [n for n in MODEL_NAMES if n not in payload.get("models", {})]
    if missing:
        raise checkpoint.CheckpointError(f"{path}: missing model parameters for {missing}")
    state = build_state(config)
    for name, module in state.models().items():
        module.load_state_dict(payload["models"][name])
    for name, opt in state.optimizers().items():
        opt.load_state_dict(payload["optimizers"][name])
    state.epoch = payload["epoch"]
    state.step = payload["step"]
    state.seed = payload["seed"]
    torch.set_rng_state(payload["torch_rng"])
    return state, config


def strip_for_inference(src, dst) -> None:
    """Copy a checkpoint keeping only the derain generator parameters."""
    payload = checkpoint.load_payload(src)
    if "derain" not in payload.get("models", {}):
        raise checkpoint.CheckpointError(f"{src}: no derain parameters to keep")
    derain_sd = payload["models"]["derain"]
    slim = {
        "models": {"derain": derain_sd},
        "epoch": payload["epoch"],
        "step": payload["step"],
        "seed": payload["seed"],
        "config": payload["config"],
        "param_count": sum(int(v.numel()) for v in derain_sd.values()),
    }
    checkpoint.save_payload(slim, dst)


def _build_model(name: str, config: TrainConfig):
    if name == "derain":
        return DerainGenerator(
            residual_blocks=config.residual_blocks, dense_growth=config.dense_growth
        )
    if name == "feature":
        return RainFogFeatureNet()
    if name == "degrade":
        return DegradationGenerator()
    if name == "disc_clean":
        return PatchDiscriminator()
    if name == "disc_degraded":
        return PatchDiscriminator(n_classes=len(LABELS))
    raise ValueError(f"unknown model name {name!r}")


def load_models(path, names) -> dict:
    """Load a subset of networks from a checkpoint; only those must be present."""
    payload = checkpoint.load_payload(path)
    config = config_from_payload(payload)
    loaded = {}
    for name in names:
        if name not in payload.get("models", {}):
            raise checkpoint.CheckpointError(f"{path}: checkpoint carries no {name!r} parameters")
        model = _build_model(name, config)
        model.load_state_dict(payload["models"][name])
        model.eval()
        loaded[name] = model
    return loaded


def load_derain(path) -> DerainGenerator:
    """Load just the derain generator; works for full and stripped checkpoints."""
    return load_models(path, ["derain"])["derain"]
