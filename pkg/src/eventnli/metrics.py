"""Classification and extraction metrics.

Per-class precision/recall/F1 for the NLI classifier (with the report's
"average" being the unweighted mean of class F1s), per-relation metrics over
each relation's pair universe, and micro P/R/F1 over extracted relation
triples for end-to-end evaluation. Undefined metrics are None, never NaN.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .agreement import f1_score
from .corpus import Relation, relation_from_name

POSITIVE = "positive"
NEGATIVE = "negative"

Triple = tuple[str, Relation, str]


@dataclass(frozen=True)
class ClassMetrics:
    name: str
    support: int
    precision: float | None
    recall: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _prf(tp: int, fp: int, fn: int, name: str, support: int) -> ClassMetrics:
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassMetrics(name=name, support=support, precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class NliEvaluation:
    per_class: dict
    accuracy: float
    average_f1: float | None        # unweighted mean of defined class F1s
    weighted_average_f1: float | None

    def to_dict(self) -> dict:
        return {
            "classes": {name: m.to_dict() for name, m in self.per_class.items()},
            "accuracy": self.accuracy,
            "average_f1": self.average_f1,
            "weighted_average_f1": self.weighted_average_f1,
        }

    def format_table(self) -> str:
        def fmt(x: float | None) -> str:
            return "  n/a" if x is None else f"{100 * x:6.2f}"

        lines = [f"{'Class':<12}{'Support':>8}{'P':>8}{'R':>8}{'F1':>8}"]
        for name, m in self.per_class.items():
            lines.append(
                f"{name:<12}{m.support:>8}{fmt(m.precision):>8}{fmt(m.recall):>8}{fmt(m.f1):>8}"
            )
        lines.append(f"{'Average':<12}{'':>8}{'':>8}{'':>8}{fmt(self.average_f1):>8}")
        return "\n".join(lines)


def evaluate_nli(
    predictions: Sequence[str],
    golds: Sequence[str],
    classes: Sequence[str] = (POSITIVE, NEGATIVE),
    weighted: bool = False,
) -> NliEvaluation:
    """Per-class P/R/F1 with support, plus accuracy and the averaged F1.

    A class with zero support yields undefined metrics and is excluded from
    the average (with a warning). `weighted` additionally fills the
    support-weighted mean, which is never the headline number.
    """
    if len(predictions) != len(golds):
        raise ValueError("predictions and golds must align")
    if not predictions:
        raise ValueError("nothing to evaluate")

    per_class = {}
    for cls in classes:
        tp = sum(1 for p, g in zip(predictions, golds) if p == cls and g == cls)
        fp = sum(1 for p, g in zip(predictions, golds) if p == cls and g != cls)
        fn = sum(1 for p, g in zip(predictions, golds) if p != cls and g == cls)
        support = tp + fn
        if support == 0:
            warnings.warn(f"class {cls!r} has zero support; metrics undefined")
            per_class[cls] = ClassMetrics(cls, 0, None, None, None)
        else:
            per_class[cls] = _prf(tp, fp, fn, cls, support)

    defined = [m for m in per_class.values() if m.f1 is not None]
    average = sum(m.f1 for m in defined) / len(defined) if defined else None
    weighted_average = None
    if weighted and defined:
        total = sum(m.support for m in defined)
        weighted_average = sum(m.f1 * m.support for m in defined) / total

    accuracy = sum(1 for p, g in zip(predictions, golds) if p == g) / len(golds)
    return NliEvaluation(
        per_class=per_class,
        accuracy=accuracy,
        average_f1=average,
        weighted_average_f1=weighted_average,
    )


def evaluate_per_relation(
    predictions: Sequence[str],
    golds: Sequence[str],
    relation_tags: Sequence[str],
) -> dict[Relation, ClassMetrics]:
    """Positive-class P/R/F1 within each relation's pair universe (that
    relation's positives plus its negatives); support is the positive count."""
    if not len(predictions) == len(golds) == len(relation_tags):
        raise ValueError("predictions, golds and relation tags must align")
    relations = [relation_from_name(tag) for tag in relation_tags]

    result = {}
    for relation in sorted(set(relations), key=lambda r: r.value):
        idx = [i for i, r in enumerate(relations) if r is relation]
        tp = sum(1 for i in idx if predictions[i] == POSITIVE and golds[i] == POSITIVE)
        fp = sum(1 for i in idx if predictions[i] == POSITIVE and golds[i] != POSITIVE)
        fn = sum(1 for i in idx if predictions[i] != POSITIVE and golds[i] == POSITIVE)
        support = sum(1 for i in idx if golds[i] == POSITIVE)
        result[relation] = _prf(tp, fp, fn, relation.value, support)
    return result


def format_relation_table(per_relation: Mapping[Relation, ClassMetrics]) -> str:
    def fmt(x: float | None) -> str:
        return "  n/a" if x is None else f"{100 * x:6.2f}"

    lines = [f"{'Relation':<14}{'Support':>8}{'P':>8}{'R':>8}{'F1':>8}"]
    for relation in sorted(per_relation, key=lambda r: r.value):
        m = per_relation[relation]
        lines.append(
            f"{relation.value:<14}{m.support:>8}{fmt(m.precision):>8}"
            f"{fmt(m.recall):>8}{fmt(m.f1):>8}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# End-to-end extraction metrics over (event, relation, argument) triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TripleCounts:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float | None:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else None

    @property
    def recall(self) -> float | None:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else None

    @property
    def f1(self) -> float | None:
        # micro F1 straight from the summed confusion counts (same formula
        # the agreement module uses)
        if 2 * self.tp + self.fp + self.fn == 0:
            return None
        return f1_score(self.tp, self.fn, self.fp)


@dataclass(frozen=True)
class EaeEvaluation:
    overall: TripleCounts
    per_relation: dict

    def to_dict(self) -> dict:
        def counts_dict(c: TripleCounts) -> dict:
            return {
                "TP": c.tp,
                "FP": c.fp,
                "FN": c.fn,
                "precision": c.precision,
                "recall": c.recall,
                "f1": c.f1,
            }

        return {
            "overall": counts_dict(self.overall),
            "per_relation": {
                r.value: counts_dict(c) for r, c in self.per_relation.items()
            },
        }


def evaluate_eae(
    predicted: Mapping[str, Iterable[Triple]],
    gold: Mapping[str, Iterable[Triple]],
) -> EaeEvaluation:
    """Micro P/R/F1 over relation triples, exact-match semantics.

    Both mappings go from sentence_id to that sentence's triples and must
    cover the same sentence ids (gold entity spans are assumed correct, so
    ids are comparable across the two sides).
    """
    if set(predicted) != set(gold):
        missing = set(gold) ^ set(predicted)
        raise ValueError(f"sentence universes differ; mismatched ids: {sorted(missing)[:5]}")

    tally: Counter = Counter()
    for sid in gold:
        pred_set = set(predicted[sid])
        gold_set = set(gold[sid])
        for triple in pred_set & gold_set:
            tally[(triple[1], "tp")] += 1
        for triple in pred_set - gold_set:
            tally[(triple[1], "fp")] += 1
        for triple in gold_set - pred_set:
            tally[(triple[1], "fn")] += 1

    per_relation = {
        relation: TripleCounts(
            tp=tally[(relation, "tp")],
            fp=tally[(relation, "fp")],
            fn=tally[(relation, "fn")],
        )
        for relation in Relation
    }
    overall = TripleCounts(
        tp=sum(c.tp for c in per_relation.values()),
        fp=sum(c.fp for c in per_relation.values()),
        fn=sum(c.fn for c in per_relation.values()),
    )
    return EaeEvaluation(overall=overall, per_relation=per_relation)
