"""Sentence-pair encoders.

Both backends consume a (premise, hypothesis) pair and return one pooled
vector per pair, taken at the leading classification token. The tiny
transformer is randomly initialized and fully offline, sized for desk-scale
tests and CPU training; the pretrained backend wraps any published
checkpoint (Arabic BERT-family encoders in the intended setup).
"""

from __future__ import annotations

import re
import zlib
from typing import Sequence

import torch
from torch import nn

# Published Arabic encoder used in the reference configuration; any
# checkpoint id understood by `transformers` works here.
DEFAULT_PRETRAINED_CHECKPOINT = "UBC-NLP/ARBERTv2"

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


class HashingTokenizer:
    """Vocabulary-free tokenizer: unicode word/punct split, then a stable
    crc32 bucket per token. Deterministic across runs and processes."""

    PAD, CLS, SEP = 0, 1, 2
    N_SPECIAL = 3

    def __init__(self, vocab_size: int = 4096):
        if vocab_size <= self.N_SPECIAL:
            raise ValueError("vocab_size must exceed the special-token count")
        self.vocab_size = vocab_size

    def tokenize(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text)

    def token_id(self, token: str) -> int:
        bucket = zlib.crc32(token.encode("utf-8")) % (self.vocab_size - self.N_SPECIAL)
        return self.N_SPECIAL + bucket

    def encode_pair(
        self, premise: str, hypothesis: str, max_length: int
    ) -> tuple[list[int], list[int]]:
        """[CLS] premise [SEP] hypothesis -> (token ids, segment ids).

        Over-length pairs lose premise tokens from the end, never hypothesis
        tokens (the hypothesis carries the relation statement); only if the
        hypothesis alone exceeds the budget is its own tail cut.
        """
        prem = [self.token_id(t) for t in self.tokenize(premise)]
        hyp = [self.token_id(t) for t in self.tokenize(hypothesis)]
        budget = max_length - 2 - len(hyp)
        if budget < 1:
            hyp = hyp[: max_length - 3]
            budget = 1
        prem = prem[:budget]
        ids = [self.CLS] + prem + [self.SEP] + hyp
        segments = [0] * (len(prem) + 2) + [1] * len(hyp)
        return ids, segments


def _check_nonempty(premises: Sequence[str], hypotheses: Sequence[str]) -> None:
    if len(premises) != len(hypotheses):
        raise ValueError("premises and hypotheses must align")
    for s, h in zip(premises, hypotheses):
        if not s.strip() or not h.strip():
            raise ValueError("empty premise or hypothesis")


class TinyPairEncoder(nn.Module):
    """Small randomly-initialized transformer encoder (default 2 layers,
    width 64). Deterministic in eval mode; meant for tests, smoke runs, and
    CPU-scale experiments, not for accuracy claims."""

    def __init__(
        self,
        dim: int = 64,
        layers: int = 2,
        heads: int = 4,
        feedforward: int = 128,
        vocab_size: int = 4096,
        max_length: int = 128,
        dropout: float = 0.1,
    ):
        super().__init__()
        self.dim = dim
        self.max_length = max_length
        self.tokenizer = HashingTokenizer(vocab_size)
        self.token_embedding = nn.Embedding(vocab_size, dim, padding_idx=HashingTokenizer.PAD)
        self.position_embedding = nn.Embedding(max_length, dim)
        self.segment_embedding = nn.Embedding(2, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim,
            nhead=heads,
            dim_feedforward=feedforward,
            dropout=dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=layers)

    @property
    def config(self) -> dict:
        return {
            "kind": "tiny",
            "dim": self.dim,
            "layers": self.encoder.num_layers,
            "heads": self.encoder.layers[0].self_attn.num_heads,
            "feedforward": self.encoder.layers[0].linear1.out_features,
            "vocab_size": self.tokenizer.vocab_size,
            "max_length": self.max_length,
            "dropout": self.encoder.layers[0].dropout.p,
        }

    def forward(self, premises: Sequence[str], hypotheses: Sequence[str]) -> torch.Tensor:
        _check_nonempty(premises, hypotheses)
        encoded = [
            self.tokenizer.encode_pair(s, h, self.max_length)
            for s, h in zip(premises, hypotheses)
        ]
        width = max(len(ids) for ids, _ in encoded)
        batch = len(encoded)
        device = self.token_embedding.weight.device
        ids = torch.zeros(batch, width, dtype=torch.long, device=device)
        segments = torch.zeros(batch, width, dtype=torch.long, device=device)
        padding = torch.ones(batch, width, dtype=torch.bool, device=device)
        for i, (seq, seg) in enumerate(encoded):
            ids[i, : len(seq)] = torch.tensor(seq, dtype=torch.long, device=device)
            segments[i, : len(seq)] = torch.tensor(seg, dtype=torch.long, device=device)
            padding[i, : len(seq)] = False

        positions = torch.arange(width, device=device).unsqueeze(0).expand(batch, -1)
        x = (
            self.token_embedding(ids)
            + self.position_embedding(positions)
            + self.segment_embedding(segments)
        )
        hidden = self.encoder(x, src_key_padding_mask=padding)
        return hidden[:, 0]


def build_tiny_encoder(seed: int = 0, **kwargs) -> TinyPairEncoder:
    """Seeded construction so identical seeds give identical initial weights."""
    torch.manual_seed(seed)
    return TinyPairEncoder(**kwargs)


class PretrainedPairEncoder(nn.Module):
    """Wraps a published transformer checkpoint via `transformers` (optional
    dependency, install extra `pretrained`). Premise-side truncation only."""

    def __init__(self, checkpoint: str = DEFAULT_PRETRAINED_CHECKPOINT, max_length: int = 512):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ImportError(
                "the pretrained encoder needs the 'transformers' package "
                "(pip install eventnli[pretrained])"
            ) from exc
        self.checkpoint = checkpoint
        self.max_length = max_length
        self.hf_tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.hf_model = AutoModel.from_pretrained(checkpoint)
        self.dim = self.hf_model.config.hidden_size

    @property
    def config(self) -> dict:
        return {
            "kind": "pretrained",
            "checkpoint": self.checkpoint,
            "max_length": self.max_length,
        }

    def forward(self, premises: Sequence[str], hypotheses: Sequence[str]) -> torch.Tensor:
        _check_nonempty(premises, hypotheses)
        batch = self.hf_tokenizer(
            list(premises),
            list(hypotheses),
            truncation="only_first",  # cut the premise tail, never the hypothesis
            padding=True,
            max_length=self.max_length,
            return_tensors="pt",
        )
        device = next(self.hf_model.parameters()).device
        batch = {k: v.to(device) for k, v in batch.items()}
        output = self.hf_model(**batch)
        return output.last_hidden_state[:, 0]


def encoder_from_config(config: dict) -> nn.Module:
    kind = config.get("kind", "tiny")
    params = {k: v for k, v in config.items() if k != "kind"}
    if kind == "tiny":
        return TinyPairEncoder(**params)
    if kind == "pretrained":
        return PretrainedPairEncoder(**params)
    raise ValueError(f"unknown encoder kind {kind!r}")
