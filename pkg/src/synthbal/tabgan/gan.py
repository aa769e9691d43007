"""Adversarial training of a tabular generator on minority-class rows."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from ..data import Table, pearson_correlation
from ..errors import NonFiniteLoss
from .mlp import AdamState, MlpParams, adam_step, init_mlp, mlp_backward, mlp_forward
from .transform import VARIANTS, fit_transform, invert_transform, transform_from_dict

logger = logging.getLogger(__name__)


@dataclass
class GanConfig:
    epochs: int = 200
    generator_dims: tuple = (32, 288)
    discriminator_dims: tuple = (224, 192)
    embedding_dim: int = 416
    generator_lr: float = 1.091e-3
    discriminator_lr: float = 5.402e-3
    batch_size: int = 128
    variant: str = "copula"
    seed: int = 0

    def __post_init__(self):
        self.generator_dims = tuple(int(d) for d in self.generator_dims)
        self.discriminator_dims = tuple(int(d) for d in self.discriminator_dims)
        if any(d < 1 for d in self.generator_dims + self.discriminator_dims):
            raise ValueError("layer widths must be >= 1")
        if self.embedding_dim < 1:
            raise ValueError("embedding_dim must be >= 1")
        if self.generator_lr <= 0 or self.discriminator_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")

    def to_dict(self):
        d = asdict(self)
        d["generator_dims"] = list(self.generator_dims)
        d["discriminator_dims"] = list(self.discriminator_dims)
        return d


@dataclass
class GanModel:
    generator: MlpParams
    discriminator: MlpParams
    transform: object
    config: GanConfig
    feature_names: tuple
    label: int
    loss_history: list = field(default_factory=list)  # (gen_loss, disc_loss)
    disc_steps: int = 0
    gen_steps: int = 0

    def to_dict(self):
        return {
            "format": "synthbal.gan_model/1",
            "config": self.config.to_dict(),
            "feature_names": list(self.feature_names),
            "label": int(self.label),
            "transform": self.transform.to_dict(),
            "generator": self.generator.to_dict(),
            "discriminator": self.discriminator.to_dict(),
            "loss_history": [list(map(float, p)) for p in self.loss_history],
            "disc_steps": self.disc_steps,
            "gen_steps": self.gen_steps,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            generator=MlpParams.from_dict(d["generator"]),
            discriminator=MlpParams.from_dict(d["discriminator"]),
            transform=transform_from_dict(d["transform"]),
            config=GanConfig(**d["config"]),
            feature_names=tuple(d["feature_names"]),
            label=int(d["label"]),
            loss_history=[tuple(p) for p in d["loss_history"]],
            disc_steps=int(d["disc_steps"]),
            gen_steps=int(d["gen_steps"]),
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def _softplus(x):
    return np.logaddexp(0.0, x)


_sigmoid = expit


def discriminator_loss_and_grads(disc, real, fake):
    """Binary cross-entropy with real -> 1, fake -> 0; grads w.r.t. D params."""
    _, c_r = mlp_forward(disc, real)
    _, c_f = mlp_forward(disc, fake)
    l_r, l_f = c_r["logits"], c_f["logits"]
    loss = _softplus(-l_r).mean() + _softplus(l_f).mean()
    g_r, _ = mlp_backward(disc, c_r, (_sigmoid(l_r) - 1.0) / l_r.shape[0], wrt_logits=True)
    g_f, _ = mlp_backward(disc, c_f, _sigmoid(l_f) / l_f.shape[0], wrt_logits=True)
    return float(loss), [a + b for a, b in zip(g_r, g_f)]


def generator_loss_and_grads(gen, disc, noise):
    """Non-saturating loss ``-mean log D(G(z))``; grads w.r.t. G params."""
    fake, c_g = mlp_forward(gen, noise)
    _, c_d = mlp_forward(disc, fake)
    logits = c_d["logits"]
    loss = _softplus(-logits).mean()
    _, d_fake = mlp_backward(
        disc, c_d, (_sigmoid(logits) - 1.0) / logits.shape[0], wrt_logits=True
    )
    grads, _ = mlp_backward(gen, c_g, d_fake)
    return float(loss), grads


def train_gan(
    minority_rows: Table,
    cfg: GanConfig = GanConfig(),
    on_epoch: Optional[Callable[[int, "GanModel"], None]] = None,
) -> GanModel:
    """Fit generator and discriminator on the rows of a single class.

    Each minibatch takes one discriminator step followed by one generator
    step; the final partial batch is kept. ``on_epoch(epoch, model)`` runs
    after every epoch and may raise to abort (the tuner uses this to prune).
    """
    if minority_rows.row_count == 0:
        raise ValueError("no rows to train on")
    labels = np.unique(minority_rows.labels)
    if labels.size != 1:
        raise ValueError("training rows must all carry the same label")
    transform, data = fit_transform(minority_rows.features, cfg.variant)
    n, width = data.shape
    rng = np.random.default_rng(cfg.seed)
    gen = init_mlp(
        [cfg.embedding_dim, *cfg.generator_dims, width], "relu", "linear", rng
    )
    disc = init_mlp([width, *cfg.discriminator_dims, 1], "leaky_relu", "sigmoid", rng)
    g_state = AdamState.zeros_like(gen.arrays())
    d_state = AdamState.zeros_like(disc.arrays())
    model = GanModel(gen, disc, transform, cfg, minority_rows.feature_names, int(labels[0]))

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        g_losses, d_losses = [], []
        for start in range(0, n, cfg.batch_size):
            real = data[order[start:start + cfg.batch_size]]
            b = real.shape[0]
            fake = mlp_forward(model.generator, rng.standard_normal((b, cfg.embedding_dim)))[0]
            d_loss, d_grads = discriminator_loss_and_grads(model.discriminator, real, fake)
            new, d_state = adam_step(
                model.discriminator.arrays(), d_grads, d_state, cfg.discriminator_lr
            )
            model.discriminator = model.discriminator.with_arrays(new)
            model.disc_steps += 1

            noise = rng.standard_normal((b, cfg.embedding_dim))
            g_loss, g_grads = generator_loss_and_grads(
                model.generator, model.discriminator, noise
            )
            new, g_state = adam_step(
                model.generator.arrays(), g_grads, g_state, cfg.generator_lr
            )
            model.generator = model.generator.with_arrays(new)
            model.gen_steps += 1
            g_losses.append(g_loss)
            d_losses.append(d_loss)
        pair = (float(np.mean(g_losses)), float(np.mean(d_losses)))
        if not np.all(np.isfinite(pair)):
            raise NonFiniteLoss(epoch, *pair)
        model.loss_history.append(pair)
        if on_epoch is not None:
            on_epoch(epoch, model)
    logger.debug("GAN trained: %d epochs, final losses %s", cfg.epochs, model.loss_history[-1])
    return model


def sample_synthetic(m: GanModel, n: int, seed: int = 0) -> Table:
    """Draw ``n`` rows from the generator, mapped back to feature space."""
    if n < 0:
        raise ValueError("n must be non-negative")
    width = len(m.feature_names)
    if n == 0:
        return Table(m.feature_names, np.empty((0, width)), np.empty(0, dtype=np.int64))
    rng = np.random.default_rng(seed)
    z = mlp_forward(m.generator, rng.standard_normal((n, m.config.embedding_dim)))[0]
    x = invert_transform(m.transform, z)
    return Table(m.feature_names, x, np.full(n, m.label))


@dataclass
class FidelityReport:
    mean_gap: np.ndarray
    std_gap: np.ndarray
    max_corr_gap: float

    def summary_gap(self, real_std=None) -> float:
        """Scalar discrepancy used as a tuning objective (lower is better)."""
        scale = 1.0 if real_std is None else np.where(real_std > 0, real_std, 1.0)
        return float(
            np.mean(self.mean_gap / scale) + np.mean(self.std_gap / scale) + self.max_corr_gap
        )

    def to_dict(self, names=None):
        d = {
            "mean_gap": self.mean_gap.tolist(),
            "std_gap": self.std_gap.tolist(),
            "max_mean_gap": float(self.mean_gap.max(initial=0.0)),
            "max_std_gap": float(self.std_gap.max(initial=0.0)),
            "max_corr_gap": float(self.max_corr_gap),
        }
        if names is not None:
            d["feature_names"] = list(names)
        return d


def fidelity_report(real: Table, synthetic: Table) -> FidelityReport:
    """Per-column |mean| and |std| gaps and the largest correlation gap."""
    if real.feature_names != synthetic.feature_names:
        raise ValueError("real and synthetic tables must share columns")
    a, b = real.features, synthetic.features
    mean_gap = np.abs(a.mean(axis=0) - b.mean(axis=0))
    std_gap = np.abs(a.std(axis=0) - b.std(axis=0))
    corr_gap = 0.0
    if real.col_count > 1 and real.row_count > 1 and synthetic.row_count > 1:
        diff = np.abs(pearson_correlation(real) - pearson_correlation(synthetic))
        corr_gap = float(diff.max())
    return FidelityReport(mean_gap, std_gap, corr_gap)
