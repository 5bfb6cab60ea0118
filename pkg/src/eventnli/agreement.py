"""Inter-annotator agreement between two annotators' relation triples.

Agreement is measured two ways: F1 over confusion counts, with the first
annotator taken as reference (F1 = 2TP / (2TP + FN + FP)), and Cohen's kappa,
kappa = (P_o - P_e) / (1 - P_e) with expected agreement
P_e = (1/N^2) * sum_T n_T1 * n_T2 over the category marginals.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Hashable, Iterable, Mapping, Sequence

from .corpus import (
    TYPE_COMPATIBILITY,
    AnnotatedSentence,
    Relation,
)

Triple = tuple[str, Relation, str]  # (event_id, relation, argument_id)


class UndefinedMetricError(Exception):
    """The metric is undefined for these inputs; policy is the caller's call."""


@dataclass(frozen=True)
class AgreementCounts:
    """TP: asserted by both; FN: only by annotator A; FP: only by annotator B."""

    relation: Relation
    tp: int
    fn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp) < 0:
            raise ValueError("agreement counts must be non-negative")

    @property
    def total_a(self) -> int:
        return self.tp + self.fn

    @property
    def total_b(self) -> int:
        return self.tp + self.fp


def round_half_up(value: float, ndigits: int = 2) -> float:
    """Decimal half-up rounding (report convention; float round() is half-even)."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def confusion_counts(
    annotations_a: Iterable[Triple],
    annotations_b: Iterable[Triple],
    known_entity_ids: set[str] | None = None,
) -> dict[Relation, AgreementCounts]:
    """Set intersection/difference of triples, per relation.

    When `known_entity_ids` is given, any triple referencing an id outside it
    is an error (the two annotation sets must cover the same sentences).
    """
    set_a, set_b = set(annotations_a), set(annotations_b)
    if known_entity_ids is not None:
        for triple in set_a | set_b:
            event_id, _, argument_id = triple
            if event_id not in known_entity_ids or argument_id not in known_entity_ids:
                raise ValueError(f"triple {triple} references an unknown entity id")

    result = {}
    for relation in Relation:
        a = {t for t in set_a if t[1] is relation}
        b = {t for t in set_b if t[1] is relation}
        result[relation] = AgreementCounts(
            relation=relation,
            tp=len(a & b),
            fn=len(a - b),
            fp=len(b - a),
        )
    return result


def f1_score(tp: int, fn: int, fp: int) -> float:
    denominator = 2 * tp + fn + fp
    if denominator == 0:
        raise UndefinedMetricError("F1 undefined: TP = FN = FP = 0")
    return 2 * tp / denominator


def f1_from_counts(counts: AgreementCounts) -> float:
    try:
        return f1_score(counts.tp, counts.fn, counts.fp)
    except UndefinedMetricError:
        raise UndefinedMetricError(
            f"F1 undefined for {counts.relation}: TP = FN = FP = 0"
        ) from None


def cohen_kappa(
    item_labels_a: Sequence[Hashable], item_labels_b: Sequence[Hashable]
) -> float:
    if len(item_labels_a) != len(item_labels_b):
        raise ValueError("label lists must be equal length")
    n = len(item_labels_a)
    if n == 0:
        raise ValueError("label lists must be nonempty")

    observed = sum(1 for a, b in zip(item_labels_a, item_labels_b) if a == b)
    p_o = observed / n

    marginals_a = Counter(item_labels_a)
    marginals_b = Counter(item_labels_b)
    categories = set(marginals_a) | set(marginals_b)
    p_e = sum(marginals_a[c] * marginals_b[c] for c in categories) / (n * n)

    if p_e == 1.0:
        raise UndefinedMetricError(
            "kappa undefined: expected agreement is 1 (both annotators constant)"
        )
    return (p_o - p_e) / (1.0 - p_e)


def kappa_from_binary_counts(tp: int, fn: int, fp: int, tn: int) -> float:
    """Kappa of a 2x2 contingency table. The negative (both-no) cell count is
    not recoverable from TP/FN/FP alone, so TN is an explicit input."""
    n = tp + fn + fp + tn
    if n == 0:
        raise ValueError("empty contingency table")
    p_o = (tp + tn) / n
    yes_a, yes_b = tp + fn, tp + fp
    p_e = (yes_a * yes_b + (n - yes_a) * (n - yes_b)) / (n * n)
    if p_e == 1.0:
        raise UndefinedMetricError("kappa undefined: expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RelationAgreement:
    relation: Relation
    tp: int
    fn: int
    fp: int
    kappa: float | None
    f1: float | None

    def to_dict(self) -> dict:
        return {
            "relation": self.relation.value,
            "TP": self.tp,
            "FN": self.fn,
            "FP": self.fp,
            "kappa": self.kappa,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class IaaReport:
    rows: tuple[RelationAgreement, ...]
    macro_kappa: float | None
    micro_f1: float
    total_tp: int
    total_fn: int
    total_fp: int

    def to_dict(self) -> dict:
        return {
            "relations": [row.to_dict() for row in self.rows],
            "overall": {
                "TP": self.total_tp,
                "FN": self.total_fn,
                "FP": self.total_fp,
                "macro_kappa": self.macro_kappa,
                "micro_f1": self.micro_f1,
            },
        }

    def format_table(self) -> str:
        def pct(x: float | None) -> str:
            return "n/a" if x is None else f"{round_half_up(100 * x, 2):.2f}%"

        lines = [f"{'Relation':<14}{'TP':>6}{'FN':>6}{'FP':>6}{'kappa':>10}{'F1':>10}"]
        for row in self.rows:
            lines.append(
                f"{row.relation.value:<14}{row.tp:>6}{row.fn:>6}{row.fp:>6}"
                f"{pct(row.kappa):>10}{pct(row.f1):>10}"
            )
        lines.append(
            f"{'Overall':<14}{self.total_tp:>6}{self.total_fn:>6}{self.total_fp:>6}"
            f"{pct(self.macro_kappa):>10}{pct(self.micro_f1):>10}"
        )
        return "\n".join(lines)


def candidate_item_universe(
    sentences: Iterable[AnnotatedSentence],
) -> dict[Relation, list[tuple[str, str]]]:
    """Default kappa item universe: per relation, every type-compatible
    (event, entity) pair in the doubly-annotated sentences. Each item is a
    binary judgement (relation asserted or not) per annotator."""
    universe: dict[Relation, list[tuple[str, str]]] = {r: [] for r in Relation}
    for sent in sentences:
        events = [e for e in sent.entities if e.is_event]
        for event in events:
            for entity in sent.entities:
                if entity.is_event:
                    continue
                for relation, types in TYPE_COMPATIBILITY.items():
                    if entity.entity_type in types:
                        universe[relation].append((event.entity_id, entity.entity_id))
        # events judged against each other never form items: argument type
        # sets exclude EVENT
    return universe


def iaa_report(
    annotations_a: Iterable[Triple],
    annotations_b: Iterable[Triple],
    item_universe: Mapping[Relation, Sequence[tuple[str, str]]],
) -> IaaReport:
    """Per-relation kappa and F1, macro-average kappa, micro-average F1.

    `item_universe` defines the judged items per relation (see
    candidate_item_universe); kappa is computed over binary asserted/not
    labels on those items, F1 from the triple confusion counts.
    """
    set_a, set_b = set(annotations_a), set(annotations_b)
    counts = confusion_counts(set_a, set_b)

    rows = []
    kappas = []
    for relation in Relation:
        c = counts[relation]
        items = item_universe.get(relation, [])
        kappa = None
        if items:
            labels_a = [(e, relation, n) in set_a for (e, n) in items]
            labels_b = [(e, relation, n) in set_b for (e, n) in items]
            try:
                kappa = cohen_kappa(labels_a, labels_b)
            except UndefinedMetricError:
                kappa = None
        try:
            f1 = f1_from_counts(c)
        except UndefinedMetricError:
            f1 = None
        rows.append(
            RelationAgreement(
                relation=relation, tp=c.tp, fn=c.fn, fp=c.fp, kappa=kappa, f1=f1
            )
        )
        if kappa is not None:
            kappas.append(kappa)

    return _assemble_report(rows, kappas)


def iaa_report_from_counts(
    counts: Iterable[AgreementCounts],
    tn_by_relation: Mapping[Relation, int] | None = None,
) -> IaaReport:
    """Report from pre-tallied confusion counts. Kappa needs the both-no cell
    of each relation's item universe, so it is only filled in where
    `tn_by_relation` provides one."""
    rows = []
    kappas = []
    for c in counts:
        kappa = None
        if tn_by_relation and c.relation in tn_by_relation:
            kappa = kappa_from_binary_counts(c.tp, c.fn, c.fp, tn_by_relation[c.relation])
            kappas.append(kappa)
        try:
            f1 = f1_from_counts(c)
        except UndefinedMetricError:
            f1 = None
        rows.append(
            RelationAgreement(
                relation=c.relation, tp=c.tp, fn=c.fn, fp=c.fp, kappa=kappa, f1=f1
            )
        )
    return _assemble_report(rows, kappas)


def _assemble_report(
    rows: list[RelationAgreement], kappas: list[float]
) -> IaaReport:
    total_tp = sum(r.tp for r in rows)
    total_fn = sum(r.fn for r in rows)
    total_fp = sum(r.fp for r in rows)
    micro = f1_score(total_tp, total_fn, total_fp)
    macro_kappa = sum(kappas) / len(kappas) if kappas else None
    return IaaReport(
        rows=tuple(rows),
        macro_kappa=macro_kappa,
        micro_f1=micro,
        total_tp=total_tp,
        total_fn=total_fn,
        total_fp=total_fp,
    )
