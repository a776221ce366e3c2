"""Experiment orchestration: training loop, schedule, records, ablations."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import autograd as ag
from .catalog import EntityCatalog
from .checkpoint import save_checkpoint
from .corpus import TaggedSentence
from .encoder import EncoderConfig
from .hrca import HrcaConfig
from .metrics import micro_f1
from .model import VARIANTS, McModel, ModelConfig, build_vocabulary
from .optim import AdamW, clip_gradients, lr_at
from .reconstruct import McTriplet, reconstruct

logger = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 8e-6   # parity default; the toy encoder usually wants far larger
    epochs: int = 10
    batch_size: int = 2
    warmup_fraction: float = 0.1
    seed: int = 0
    weight_decay: float = 0.01
    max_grad_norm: float | None = 5.0
    ablation: str = "full"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    hrca: HrcaConfig = field(default_factory=HrcaConfig)
    early_stop_patience: int | None = None  # disabled by default
    truncate: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")
        if self.ablation not in VARIANTS:
            raise ValueError(f"ablation must be one of {VARIANTS}")

    def to_dict(self) -> dict:
        d = {k: v for k, v in vars(self).items() if k not in ("encoder", "hrca")}
        d["encoder"] = dict(vars(self.encoder))
        d["hrca"] = dict(vars(self.hrca))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        enc = EncoderConfig(**d.pop("encoder", {}))
        hr = HrcaConfig(**d.pop("hrca", {}))
        return cls(encoder=enc, hrca=hr, **d)

    @classmethod
    def from_file(cls, path: str | Path) -> "TrainConfig":
        with Path(path).open("r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def model_config(self) -> ModelConfig:
        return ModelConfig(encoder=self.encoder, hrca=self.hrca,
                           variant=self.ablation, truncate=self.truncate)


@dataclass
class RunRecord:
    config: dict
    epoch_losses: list[float] = field(default_factory=list)
    dev_f1: list[float] = field(default_factory=list)
    lr_samples: list[float] = field(default_factory=list)
    wall_times: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_f1: float = 0.0
    final_test_f1: float | None = None
    stopped_early: bool = False

    def record_dict(self) -> dict:
        """Deterministic portion (excludes wall-clock times)."""
        return {
            "config": self.config,
            "epoch_losses": self.epoch_losses,
            "dev_f1": self.dev_f1,
            "lr_samples": self.lr_samples,
            "best_epoch": self.best_epoch,
            "best_dev_f1": self.best_dev_f1,
            "final_test_f1": self.final_test_f1,
            "stopped_early": self.stopped_early,
        }

    def record_json(self) -> str:
        return json.dumps(self.record_dict(), sort_keys=True, indent=2) + "\n"


def evaluate_model(model: McModel, sentences: Sequence[TaggedSentence]) -> float:
    gold = [s.tags for s in sentences]
    pred = [model.predict_tags(s.surfaces) for s in sentences]
    return micro_f1(gold, pred).f1


def _diagnostics(model: McModel, epoch: int, step: int, last_losses: list[float]) -> dict:
    norms = {name: float(np.linalg.norm(p.data)) for name, p in model.params.items()}
    return {"epoch": epoch, "step": step, "recent_losses": last_losses[-10:], "param_norms": norms}


def checkpoint_meta(model: McModel, config: TrainConfig) -> dict:
    return {
        "train_config": config.to_dict(),
        "model_config": model.config.to_dict(),
        "seed": config.seed,
        "vocab": list(model.vocab.tokens),
        "vocab_hash": model.vocab.sha256(),
        "catalog": model.catalog.to_dict(),
    }


def train(
    config: TrainConfig,
    splits: Mapping[str, Sequence[TaggedSentence]],
    catalog: EntityCatalog,
    out_dir: str | Path | None = None,
) -> tuple[McModel, RunRecord]:
    """Fine-tune on the train split; keep the best-dev checkpoint.

    Deterministic given the config: initialization, shuffling, and update
    order all derive from ``config.seed``.
    """
    if "train" not in splits or not splits["train"]:
        raise ValueError("a non-empty 'train' split is required")
    train_sents = list(splits["train"])
    dev_sents = list(splits.get("dev", ()))
    test_sents = list(splits.get("test", ()))

    vocab = build_vocabulary(train_sents, catalog, config.ablation)
    model = McModel(config.model_config(), vocab, catalog, seed=config.seed)

    triplets: list[McTriplet | None]
    if config.ablation == "vanilla":
        triplets = [None] * len(train_sents)
    else:
        triplets = [reconstruct(s, catalog) for s in train_sents]

    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    n = len(train_sents)
    batches_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_steps = config.epochs * batches_per_epoch
    optimizer = AdamW(model.params, weight_decay=config.weight_decay)
    shuffle_rng = np.random.default_rng(config.seed)

    record = RunRecord(config=config.to_dict())
    best_state: dict[str, np.ndarray] | None = None
    global_step = 0
    since_best = 0

    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(n)
        epoch_losses: list[float] = []
        for b in range(batches_per_epoch):
            idx = order[b * config.batch_size:(b + 1) * config.batch_size]
            losses = [model.loss_for(train_sents[i], triplets[i]) for i in idx]
            loss = ag.mean_of(losses)
            value = loss.item()
            if not np.isfinite(value):
                diag = _diagnostics(model, epoch, global_step, epoch_losses)
                if out_path is not None:
                    (out_path / "diagnostics.json").write_text(json.dumps(diag, indent=2))
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, step {global_step}; diagnostics dumped"
                )
            epoch_losses.append(value)
            optimizer.zero_grad()
            loss.backward()
            if config.max_grad_norm is not None:
                clip_gradients(model.params, config.max_grad_norm)
            lr = lr_at(global_step, total_steps, config.learning_rate, config.warmup_fraction)
            optimizer.step(lr)
            record.lr_samples.append(lr)
            global_step += 1

        mean_loss = float(np.mean(epoch_losses))
        record.epoch_losses.append(mean_loss)
        dev_score = evaluate_model(model, dev_sents) if dev_sents else float("nan")
        if dev_sents:
            record.dev_f1.append(dev_score)
        record.wall_times.append(time.perf_counter() - t0)

        improved = (not dev_sents) or record.best_epoch < 0 or dev_score > record.best_dev_f1
        if improved:
            record.best_epoch = epoch
            record.best_dev_f1 = dev_score if dev_sents else 0.0
            best_state = {k: v.copy() for k, v in model.state_arrays().items()}
            since_best = 0
        else:
            since_best += 1
        if out_path is not None:
            save_checkpoint(out_path / "last.ckpt", model.state_arrays(), checkpoint_meta(model, config))
            if improved:
                save_checkpoint(out_path / "best.ckpt", model.state_arrays(), checkpoint_meta(model, config))
        logger.info("epoch %d: loss %.4f dev_f1 %s", epoch, mean_loss,
                    f"{dev_score:.4f}" if dev_sents else "n/a")
        if config.early_stop_patience is not None and since_best >= config.early_stop_patience:
            record.stopped_early = True
            break

    if best_state is not None:
        model.load_state_arrays(best_state)
    if test_sents:
        record.final_test_f1 = evaluate_model(model, test_sents)
    if out_path is not None:
        (out_path / "record.json").write_text(record.record_json(), encoding="utf-8")
        (out_path / "timings.json").write_text(
            json.dumps({"epoch_seconds": record.wall_times}, indent=2) + "\n", encoding="utf-8")
    return model, record


def run_ablation(
    config: TrainConfig,
    splits: Mapping[str, Sequence[TaggedSentence]],
    catalog: EntityCatalog,
    variants: Sequence[str] = VARIANTS,
    seeds: Sequence[int] = (0,),
    out_dir: str | Path | None = None,
) -> list[dict]:
    """One training run per (variant, seed); returns comparison rows.

    Score ordering across variants is reported, never asserted.
    """
    rows = []
    for variant in variants:
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        for seed in seeds:
            cfg = TrainConfig.from_dict({**config.to_dict(), "ablation": variant, "seed": seed})
            sub_dir = Path(out_dir) / f"{variant}_seed{seed}" if out_dir is not None else None
            _, record = train(cfg, splits, catalog, out_dir=sub_dir)
            rows.append({
                "variant": variant,
                "seed": seed,
                "best_dev_f1": record.best_dev_f1,
                "final_test_f1": record.final_test_f1,
                "final_train_loss": record.epoch_losses[-1] if record.epoch_losses else None,
                "epochs_run": len(record.epoch_losses),
            })
    return rows


def format_ablation_table(rows: Sequence[dict]) -> str:
    headers = ("variant", "seed", "best_dev_f1", "final_test_f1", "final_train_loss", "epochs_run")
    lines = ["  ".join(f"{h:>18}" for h in headers)]
    for row in rows:
        cells = []
        for h in headers:
            v = row[h]
            cells.append(f"{v:>18.4f}" if isinstance(v, float) else f"{str(v):>18}")
        lines.append("  ".join(cells))
    return "\n".join(lines)
