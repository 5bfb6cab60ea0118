"""Binary entailment classifier: pair encoder plus a linear head.

The head emits two class scores (negative, positive). The positive-class
probability is the softmax over those two scores, which equals a sigmoid of
their difference, so the same head feeds both the probability-based
cross-entropy term and the score-based contrastive term.
"""

from __future__ import annotations

from typing import Sequence

import torch
from torch import nn

from ..templates import Hypothesis


class EntailmentClassifier(nn.Module):
    def __init__(self, encoder: nn.Module, threshold: float = 0.5):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.dim, 2)
        self.threshold = threshold

    def forward(self, premises: Sequence[str], hypotheses: Sequence[str]) -> torch.Tensor:
        """Class scores, shape [B, 2]."""
        pooled = self.encoder(premises, hypotheses)
        return self.head(pooled)

    def probabilities(self, premises: Sequence[str], hypotheses: Sequence[str]) -> torch.Tensor:
        """Positive-class probabilities, shape [B]; differentiable."""
        scores = self.forward(premises, hypotheses)
        return torch.softmax(scores, dim=1)[:, 1]

    @torch.no_grad()
    def predict_proba(self, premise: str, hypothesis: str) -> float:
        was_training = self.training
        self.eval()
        try:
            return float(self.probabilities([premise], [hypothesis])[0])
        finally:
            if was_training:
                self.train()

    def predict(self, premise: str, hypothesis: str, threshold: float | None = None) -> tuple[bool, float]:
        """(decision, probability); positive iff probability >= threshold."""
        threshold = self.threshold if threshold is None else threshold
        proba = self.predict_proba(premise, hypothesis)
        return proba >= threshold, proba

    @torch.no_grad()
    def predict_proba_batch(
        self, premises: Sequence[str], hypotheses: Sequence[str], batch_size: int = 32
    ) -> list[float]:
        was_training = self.training
        self.eval()
        try:
            out: list[float] = []
            for i in range(0, len(premises), batch_size):
                probs = self.probabilities(
                    list(premises[i : i + batch_size]),
                    list(hypotheses[i : i + batch_size]),
                )
                out.extend(float(p) for p in probs)
            return out
        finally:
            if was_training:
                self.train()

    def score(self, premise: str, hypothesis: Hypothesis) -> float:
        """Scorer interface used by the extraction pipeline."""
        return self.predict_proba(premise, hypothesis.text)
