"""Seeded training: single-run fitting, premise-level k-fold cross validation,
checkpoint save/load, and a reproducibility manifest.

All randomness (fold assignment, batch order, weight init, dropout) flows
from the one seed in TrainConfig; two runs with equal configs produce
identical per-fold metric sequences on CPU.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import torch
from torch import nn

from ..metrics import evaluate_nli
from ..pairs import NLIPair, POSITIVE
from .classifier import EntailmentClassifier
from .encoders import encoder_from_config
from .losses import LossConfig, combined_loss


@dataclass(frozen=True)
class TrainConfig:
    folds: int = 5
    learning_rate: float = 2e-5
    weight_decay: float = 1e-8
    epochs: int = 5
    batch_size: int = 16
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    wce: float
    nce: float


def _batch_tensors(batch: Sequence[NLIPair]) -> tuple[list[str], list[str], torch.Tensor]:
    premises = [p.premise for p in batch]
    hypotheses = [p.hypothesis.text for p in batch]
    labels = torch.tensor([1.0 if p.label == POSITIVE else 0.0 for p in batch])
    return premises, hypotheses, labels


def fit(
    model: EntailmentClassifier,
    pairs: Sequence[NLIPair],
    train_cfg: TrainConfig,
    loss_cfg: LossConfig,
) -> list[EpochStats]:
    """Train in place with AdamW on the combined loss; returns per-epoch
    mean loss parts."""
    if not pairs:
        raise ValueError("no training pairs")
    torch.manual_seed(train_cfg.seed)
    rng = random.Random(train_cfg.seed)
    optimizer = torch.optim.AdamW(
        model.parameters(),
        lr=train_cfg.learning_rate,
        weight_decay=train_cfg.weight_decay,
    )

    history = []
    model.train()
    for epoch in range(train_cfg.epochs):
        order = list(range(len(pairs)))
        rng.shuffle(order)
        sums = {"loss": 0.0, "wce": 0.0, "nce": 0.0}
        n_batches = 0
        for start in range(0, len(order), train_cfg.batch_size):
            batch = [pairs[i] for i in order[start : start + train_cfg.batch_size]]
            premises, hypotheses, labels = _batch_tensors(batch)
            scores = model(premises, hypotheses)
            probs = torch.softmax(scores, dim=1)[:, 1]
            parts = combined_loss(probs, scores, labels, loss_cfg)
            optimizer.zero_grad()
            parts.total.backward()
            optimizer.step()
            sums["loss"] += float(parts.total)
            sums["wce"] += float(parts.wce)
            sums["nce"] += float(parts.nce)
            n_batches += 1
        history.append(
            EpochStats(
                epoch=epoch,
                loss=sums["loss"] / n_batches,
                wce=sums["wce"] / n_batches,
                nce=sums["nce"] / n_batches,
            )
        )
    model.eval()
    return history


def predict_labels(
    model: EntailmentClassifier,
    pairs: Sequence[NLIPair],
    threshold: float | None = None,
    batch_size: int = 32,
) -> tuple[list[str], list[float]]:
    threshold = model.threshold if threshold is None else threshold
    probs = model.predict_proba_batch(
        [p.premise for p in pairs],
        [p.hypothesis.text for p in pairs],
        batch_size=batch_size,
    )
    labels = [POSITIVE if prob >= threshold else "negative" for prob in probs]
    return labels, probs


def assign_premise_folds(
    pairs: Sequence[NLIPair], folds: int, seed: int
) -> dict[str, int]:
    """Fold id per premise sentence; every pair of a premise lands in the
    same fold. Premises are shuffled (seeded) then dealt round-robin."""
    premise_ids: list[str] = []
    seen = set()
    for p in pairs:
        if p.sentence_id not in seen:
            seen.add(p.sentence_id)
            premise_ids.append(p.sentence_id)
    if len(premise_ids) < folds:
        raise ValueError(
            f"cannot make {folds} premise-level folds from {len(premise_ids)} premises"
        )
    random.Random(seed).shuffle(premise_ids)
    return {sid: i % folds for i, sid in enumerate(premise_ids)}


@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    n_train: int
    n_validation: int
    accuracy: float | None
    f1_positive: float | None
    f1_negative: float | None
    average_f1: float | None
    skipped: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class KFoldResult:
    fold_metrics: list[FoldMetrics]
    fold_assignment: dict[str, int]
    models: list[EntailmentClassifier]
    best_fold: int

    @property
    def best_model(self) -> EntailmentClassifier:
        return self.models[self.best_fold]

    @property
    def mean_average_f1(self) -> float | None:
        scores = [m.average_f1 for m in self.fold_metrics if not m.skipped]
        return sum(scores) / len(scores) if scores else None

    def to_manifest(self) -> dict:
        return {
            "fold_assignment": self.fold_assignment,
            "fold_metrics": [m.to_dict() for m in self.fold_metrics],
            "best_fold": self.best_fold,
            "mean_average_f1": self.mean_average_f1,
        }


def train_kfold(
    pairs: Sequence[NLIPair],
    train_cfg: TrainConfig,
    loss_cfg: LossConfig,
    encoder_factory: Callable[[int], nn.Module],
) -> KFoldResult:
    """k-fold training over the train split. Each fold trains a fresh model
    on the other folds and validates on its own; scores are averaged across
    folds and the model with the best validation average F1 is selected.
    A validation fold containing a single gold class is trained but skipped
    from averaging (with a warning)."""
    if not pairs:
        raise ValueError("train split is empty")
    fold_of = assign_premise_folds(pairs, train_cfg.folds, train_cfg.seed)

    metrics: list[FoldMetrics] = []
    models: list[EntailmentClassifier] = []
    for fold in range(train_cfg.folds):
        train_pairs = [p for p in pairs if fold_of[p.sentence_id] != fold]
        val_pairs = [p for p in pairs if fold_of[p.sentence_id] == fold]
        fold_seed = train_cfg.seed + 1 + fold

        encoder = encoder_factory(fold_seed)
        model = EntailmentClassifier(encoder, threshold=train_cfg.threshold)
        fit(model, train_pairs, replace(train_cfg, seed=fold_seed), loss_cfg)
        models.append(model)

        gold = [p.label for p in val_pairs]
        if len(set(gold)) < 2:
            warnings.warn(
                f"fold {fold}: validation split has a single class; "
                "skipped from averaging"
            )
            metrics.append(
                FoldMetrics(
                    fold=fold,
                    n_train=len(train_pairs),
                    n_validation=len(val_pairs),
                    accuracy=None,
                    f1_positive=None,
                    f1_negative=None,
                    average_f1=None,
                    skipped=True,
                )
            )
            continue

        predicted, _ = predict_labels(model, val_pairs, threshold=train_cfg.threshold)
        evaluation = evaluate_nli(predicted, gold)
        metrics.append(
            FoldMetrics(
                fold=fold,
                n_train=len(train_pairs),
                n_validation=len(val_pairs),
                accuracy=evaluation.accuracy,
                f1_positive=evaluation.per_class["positive"].f1,
                f1_negative=evaluation.per_class["negative"].f1,
                average_f1=evaluation.average_f1,
            )
        )

    scored = [m for m in metrics if not m.skipped and m.average_f1 is not None]
    if not scored:
        raise ValueError("every fold was skipped; cannot select a model")
    best_fold = max(scored, key=lambda m: m.average_f1).fold
    return KFoldResult(
        fold_metrics=metrics,
        fold_assignment=fold_of,
        models=models,
        best_fold=best_fold,
    )


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(model: EntailmentClassifier, directory: str | Path) -> None:
    """Checkpoint layout: encoder.pt + head.pt + config.json snapshot."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.encoder.state_dict(), directory / "encoder.pt")
    torch.save(model.head.state_dict(), directory / "head.pt")
    config = {"encoder": model.encoder.config, "threshold": model.threshold}
    (directory / "config.json").write_text(
        json.dumps(config, indent=2, ensure_ascii=False), encoding="utf-8"
    )


def load_checkpoint(directory: str | Path) -> EntailmentClassifier:
    directory = Path(directory)
    config = json.loads((directory / "config.json").read_text(encoding="utf-8"))
    encoder = encoder_from_config(config["encoder"])
    model = EntailmentClassifier(encoder, threshold=config.get("threshold", 0.5))
    model.encoder.load_state_dict(
        torch.load(directory / "encoder.pt", map_location="cpu")
    )
    model.head.load_state_dict(torch.load(directory / "head.pt", map_location="cpu"))
    model.eval()
    return model


def run_manifest(
    train_cfg: TrainConfig,
    loss_cfg: LossConfig,
    result: KFoldResult,
    dataset_hash: str | None = None,
    encoder_config: dict | None = None,
) -> dict:
    manifest = {
        "train_config": asdict(train_cfg),
        "loss_config": asdict(loss_cfg),
        "encoder_config": encoder_config,
        "dataset_sha256": dataset_hash,
    }
    manifest.update(result.to_manifest())
    return manifest
