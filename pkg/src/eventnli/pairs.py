"""NLI dataset construction from a relation-annotated corpus.

Premise sentences (those containing events) are split train/test first so no
premise text crosses splits. Positive pairs come from gold relations; negative
pairs from type-compatible (event, entity) candidates that are not gold. Train
pairs are augmented with every train-phase template (4 per relation in the
shipped set); test pairs use the single test-phase template.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

from .corpus import AnnotatedSentence, Corpus, Relation, event_sentences, relation_from_name
from .templates import (
    Hypothesis,
    TemplateRegistry,
    candidate_argument_pairs,
    instantiate,
)

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class NLIPair:
    premise: str
    hypothesis: Hypothesis
    label: str
    split: str
    sentence_id: str

    @property
    def relation(self) -> Relation:
        return self.hypothesis.relation

    @property
    def template_id(self) -> str:
        return self.hypothesis.template_id

    @property
    def event_id(self) -> str:
        return self.hypothesis.event_id

    @property
    def entity_id(self) -> str:
        return self.hypothesis.entity_id

    def to_record(self) -> dict:
        return {
            "premise": self.premise,
            "hypothesis": self.hypothesis.text,
            "label": self.label,
            "split": self.split,
            "relation": self.relation.value,
            "template_id": self.template_id,
            "sentence_id": self.sentence_id,
            "event_id": self.event_id,
            "entity_id": self.entity_id,
        }

    @classmethod
    def from_record(cls, record: dict) -> "NLIPair":
        hypothesis = Hypothesis(
            text=record["hypothesis"],
            relation=relation_from_name(record["relation"]),
            event_id=record["event_id"],
            entity_id=record["entity_id"],
            template_id=record["template_id"],
        )
        return cls(
            premise=record["premise"],
            hypothesis=hypothesis,
            label=record["label"],
            split=record["split"],
            sentence_id=record["sentence_id"],
        )


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.70
    seed: int = 13

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly between 0 and 1")


def split_premises(
    corpus: Corpus, cfg: SplitConfig
) -> tuple[list[AnnotatedSentence], list[AnnotatedSentence]]:
    """Partition the event-bearing sentences into train/test, deterministically
    for a given seed. Both splits are returned in corpus order."""
    candidates = event_sentences(corpus)
    if not candidates:
        raise ValueError(f"corpus {corpus.name!r} has no event-bearing sentences")

    indices = list(range(len(candidates)))
    random.Random(cfg.seed).shuffle(indices)
    n_train = int(len(candidates) * cfg.train_fraction + 0.5)  # half-up
    train_idx = sorted(indices[:n_train])
    test_idx = sorted(indices[n_train:])
    return [candidates[i] for i in train_idx], [candidates[i] for i in test_idx]


def generate_positive_pairs(
    sentences: Iterable[AnnotatedSentence],
    phase: str,
    registry: TemplateRegistry | None = None,
    test_index: str | None = None,
) -> list[NLIPair]:
    """One pair per gold relation per applicable template, all labeled positive."""
    registry = registry or TemplateRegistry.default()
    pairs = []
    for sent in sentences:
        for rel_ann in sent.relations:
            event = sent.entity(rel_ann.event_id)
            entity = sent.entity(rel_ann.argument_id)
            for template in registry.templates_for(rel_ann.relation, phase, test_index):
                # instantiate() re-checks type compatibility; a failure here is
                # an upstream validation bug, so the TemplateError propagates
                hyp = instantiate(template, event, entity)
                pairs.append(
                    NLIPair(
                        premise=sent.text,
                        hypothesis=hyp,
                        label=POSITIVE,
                        split=phase,
                        sentence_id=sent.sentence_id,
                    )
                )
    return pairs


def generate_negative_pairs(
    sentences: Iterable[AnnotatedSentence],
    phase: str,
    registry: TemplateRegistry | None = None,
    test_index: str | None = None,
) -> list[NLIPair]:
    """Pairs for every type-compatible (event, entity) candidate that is not a
    gold relation, using the same per-phase template policy as positives."""
    registry = registry or TemplateRegistry.default()
    pairs = []
    for sent in sentences:
        gold = sent.gold_triples()
        for event, entity, relation in candidate_argument_pairs(sent):
            if (event.entity_id, relation, entity.entity_id) in gold:
                continue
            for template in registry.templates_for(relation, phase, test_index):
                hyp = instantiate(template, event, entity)
                pairs.append(
                    NLIPair(
                        premise=sent.text,
                        hypothesis=hyp,
                        label=NEGATIVE,
                        split=phase,
                        sentence_id=sent.sentence_id,
                    )
                )
    return pairs


@dataclass(frozen=True)
class DatasetStats:
    """Pair counts per (split, relation, label), plus subtotals."""

    counts: dict

    @classmethod
    def from_pairs(cls, pairs: Sequence[NLIPair]) -> "DatasetStats":
        tally: Counter = Counter()
        for p in pairs:
            tally[(p.split, p.relation.value, p.label)] += 1
        table: dict = {}
        for split in ("train", "test"):
            table[split] = {}
            for relation in Relation:
                pos = tally[(split, relation.value, POSITIVE)]
                neg = tally[(split, relation.value, NEGATIVE)]
                table[split][relation.value] = {
                    POSITIVE: pos,
                    NEGATIVE: neg,
                    "total": pos + neg,
                }
            table[split]["subtotal"] = {
                key: sum(table[split][r.value][key] for r in Relation)
                for key in (POSITIVE, NEGATIVE, "total")
            }
        table["total"] = {
            key: table["train"]["subtotal"][key] + table["test"]["subtotal"][key]
            for key in (POSITIVE, NEGATIVE, "total")
        }
        return cls(counts=table)

    def cell(self, split: str, relation: Union[str, Relation], label: str) -> int:
        rel = relation.value if isinstance(relation, Relation) else relation
        return self.counts[split][rel][label]

    def to_dict(self) -> dict:
        return self.counts

    def format_table(self) -> str:
        lines = [f"{'Phase':<8}{'Pairs':<14}{'Positive':>10}{'Negative':>10}{'Total':>10}"]
        for split in ("train", "test"):
            for relation in Relation:
                row = self.counts[split][relation.value]
                lines.append(
                    f"{split:<8}{relation.value:<14}"
                    f"{row[POSITIVE]:>10}{row[NEGATIVE]:>10}{row['total']:>10}"
                )
            sub = self.counts[split]["subtotal"]
            lines.append(
                f"{split:<8}{'subtotal':<14}"
                f"{sub[POSITIVE]:>10}{sub[NEGATIVE]:>10}{sub['total']:>10}"
            )
        total = self.counts["total"]
        lines.append(
            f"{'':<8}{'total':<14}"
            f"{total[POSITIVE]:>10}{total[NEGATIVE]:>10}{total['total']:>10}"
        )
        return "\n".join(lines)


@dataclass(frozen=True)
class NLIDataset:
    corpus_name: str
    pairs: tuple[NLIPair, ...]

    @property
    def train_pairs(self) -> list[NLIPair]:
        return [p for p in self.pairs if p.split == "train"]

    @property
    def test_pairs(self) -> list[NLIPair]:
        return [p for p in self.pairs if p.split == "test"]

    def stats(self) -> DatasetStats:
        return DatasetStats.from_pairs(self.pairs)


def build_nli_dataset(
    corpus: Corpus,
    cfg: SplitConfig | None = None,
    registry: TemplateRegistry | None = None,
    test_only: bool = False,
    test_index: str | None = None,
) -> NLIDataset:
    """Full dataset build: split premises, then positives and negatives per
    split. `test_only=True` routes every event sentence to the test split
    (out-of-domain evaluation corpora). Deterministic given (corpus, cfg)."""
    registry = registry or TemplateRegistry.default()
    if not event_sentences(corpus):
        return NLIDataset(corpus_name=corpus.name, pairs=())

    if test_only:
        train_sents: list[AnnotatedSentence] = []
        test_sents = event_sentences(corpus)
    else:
        train_sents, test_sents = split_premises(corpus, cfg or SplitConfig())

    pairs: list[NLIPair] = []
    pairs += generate_positive_pairs(train_sents, "train", registry)
    pairs += generate_negative_pairs(train_sents, "train", registry)
    pairs += generate_positive_pairs(test_sents, "test", registry, test_index)
    pairs += generate_negative_pairs(test_sents, "test", registry, test_index)
    return NLIDataset(corpus_name=corpus.name, pairs=tuple(pairs))


def write_pairs(pairs: Iterable[NLIPair], target: Union[str, Path, TextIO]) -> None:
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            write_pairs(pairs, fh)
        return
    for pair in pairs:
        target.write(json.dumps(pair.to_record(), ensure_ascii=False))
        target.write("\n")


def read_pairs(source: Union[str, Path, TextIO]) -> list[NLIPair]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return read_pairs(fh)
    return [NLIPair.from_record(json.loads(line)) for line in source if line.strip()]
