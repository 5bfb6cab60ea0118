"""Training objective: weighted binary cross-entropy plus a noise-contrastive
term, combined additively.

The cross-entropy term weights the two classes separately so that missed
positives cost more than missed negatives (w_p=1, w_n=0.5 by default). The
contrastive term is a temperature-scaled softmax cross-entropy over the two
class scores of each instance; an in-batch variant (denominator over the
instances' true-class scores instead of the two classes) is kept behind
`mode` for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

EPS = 1e-7

NCE_MODES = ("per-instance", "in-batch")


@dataclass(frozen=True)
class LossConfig:
    w_p: float = 1.0
    w_n: float = 0.5
    tau: float = 1.0
    use_nce: bool = True
    nce_mode: str = "per-instance"

    def __post_init__(self):
        if self.w_p <= 0 or self.w_n <= 0:
            raise ValueError("class weights must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.nce_mode not in NCE_MODES:
            raise ValueError(f"nce_mode must be one of {NCE_MODES}")


def wce_loss(
    predictions: torch.Tensor,
    labels: torch.Tensor,
    w_p: float = 1.0,
    w_n: float = 0.5,
    eps: float = EPS,
) -> torch.Tensor:
    """-(1/N) * sum(w_p * y * log(p) + w_n * (1-y) * log(1-p)).

    `predictions` are positive-class probabilities; they are clamped to
    [eps, 1-eps] before the logs, which is below metric resolution but keeps
    exact 0/1 predictions finite. With w_p = w_n = 1 this is standard binary
    cross-entropy.
    """
    if w_p <= 0 or w_n <= 0:
        raise ValueError("class weights must be positive")
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have equal length")
    p = predictions.clamp(eps, 1.0 - eps)
    y = labels.to(p.dtype)
    per_instance = w_p * y * torch.log(p) + w_n * (1.0 - y) * torch.log(1.0 - p)
    return -per_instance.mean()


def nce_loss(
    class_scores: torch.Tensor,
    labels: torch.Tensor,
    tau: float = 1.0,
    mode: str = "per-instance",
) -> torch.Tensor:
    """Negative log-probability of the true class under a temperature-scaled
    softmax, averaged over the batch.

    `class_scores` has shape [N, 2] (negative-class and positive-class score
    per instance). In "per-instance" mode the softmax runs over the two class
    scores of each instance; in "in-batch" mode the denominator runs over the
    true-class scores of the whole batch.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if mode not in NCE_MODES:
        raise ValueError(f"mode must be one of {NCE_MODES}")
    if class_scores.ndim != 2 or class_scores.shape[1] != 2:
        raise ValueError("class_scores must have shape [N, 2]")
    index = labels.long().view(-1, 1)
    if mode == "per-instance":
        log_probs = torch.log_softmax(class_scores / tau, dim=1)
        return -log_probs.gather(1, index).mean()
    true_scores = class_scores.gather(1, index).squeeze(1) / tau
    return -torch.log_softmax(true_scores, dim=0).mean()


@dataclass(frozen=True)
class LossParts:
    total: torch.Tensor
    wce: torch.Tensor
    nce: torch.Tensor


def combined_loss(
    predictions: torch.Tensor,
    class_scores: torch.Tensor,
    labels: torch.Tensor,
    cfg: LossConfig,
) -> LossParts:
    """total = wce + nce; both terms are reported separately for logging.
    With use_nce=False the contrastive term is a zero constant (plain
    cross-entropy ablation)."""
    wce = wce_loss(predictions, labels, w_p=cfg.w_p, w_n=cfg.w_n)
    if cfg.use_nce:
        nce = nce_loss(class_scores, labels, tau=cfg.tau, mode=cfg.nce_mode)
    else:
        nce = torch.zeros((), dtype=wce.dtype, device=wce.device)
    return LossParts(total=wce + nce, wce=wce, nce=nce)
