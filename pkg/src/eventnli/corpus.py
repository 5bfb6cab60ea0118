"""Corpus model for relation-annotated nested-NER data.

A corpus is an ordered list of sentences; each sentence carries nested entity
mentions (character spans with types) and event-argument relations between an
EVENT mention and an argument mention in the same sentence. Corpora are
immutable after loading and safe to share across threads.
"""

from __future__ import annotations

import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, TextIO, Union


class Relation(str, Enum):
    HAS_AGENT = "hasAgent"
    HAS_LOCATION = "hasLocation"
    HAS_DATE = "hasDate"

    def __str__(self) -> str:  # so f-strings print the wire name
        return self.value


EVENT_TYPE = "EVENT"

# Argument entity types admissible per relation. The three sets are pairwise
# disjoint, so an entity's type determines the single relation it can fill.
TYPE_COMPATIBILITY: dict[Relation, frozenset[str]] = {
    Relation.HAS_AGENT: frozenset({"PERS", "ORG", "OCC", "NORP"}),
    Relation.HAS_LOCATION: frozenset({"GPE", "LOC", "FAC"}),
    Relation.HAS_DATE: frozenset({"DATE", "TIME"}),
}

ARGUMENT_TYPES = frozenset().union(*TYPE_COMPATIBILITY.values())

# Types this toolkit interprets. Corpora may carry additional tag names
# (retained on load, ignored by pairing).
INTERPRETED_TYPES = ARGUMENT_TYPES | {EVENT_TYPE}


class CorpusParseError(Exception):
    """A record could not be parsed; message carries the line/record locator."""


class CorpusValidationError(Exception):
    """One or more corpus invariants failed; all violations are aggregated."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__(
            "corpus failed validation with %d error(s):\n  %s"
            % (len(self.errors), "\n  ".join(self.errors))
        )


@dataclass(frozen=True)
class EntityMention:
    """An entity span inside a sentence, half-open char offsets [start, end)."""

    entity_id: str
    sentence_id: str
    surface: str
    start: int
    end: int
    entity_type: str

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_event(self) -> bool:
        return self.entity_type == EVENT_TYPE


@dataclass(frozen=True)
class RelationAnnotation:
    """(event entity, relation, argument entity) triple, ids sentence-local."""

    event_id: str
    relation: Relation
    argument_id: str

    def as_triple(self) -> tuple[str, Relation, str]:
        return (self.event_id, self.relation, self.argument_id)


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence_id: str
    text: str
    entities: tuple[EntityMention, ...] = ()
    relations: tuple[RelationAnnotation, ...] = ()

    @cached_property
    def entities_by_id(self) -> dict[str, EntityMention]:
        return {e.entity_id: e for e in self.entities}

    def entity(self, entity_id: str) -> EntityMention:
        return self.entities_by_id[entity_id]

    @property
    def events(self) -> tuple[EntityMention, ...]:
        return tuple(e for e in self.entities if e.is_event)

    @property
    def has_events(self) -> bool:
        return any(e.is_event for e in self.entities)

    def gold_triples(self) -> frozenset[tuple[str, Relation, str]]:
        return frozenset(r.as_triple() for r in self.relations)


@dataclass(frozen=True)
class Corpus:
    name: str
    sentences: tuple[AnnotatedSentence, ...] = ()
    source: str = ""
    domains: tuple[str, ...] = ()

    @cached_property
    def sentences_by_id(self) -> dict[str, AnnotatedSentence]:
        return {s.sentence_id: s for s in self.sentences}

    def relation_counts(self) -> Counter:
        counts: Counter = Counter()
        for sent in self.sentences:
            for rel in sent.relations:
                counts[rel.relation] += 1
        return counts

    def __len__(self) -> int:
        return len(self.sentences)


def relation_from_name(name: str) -> Relation:
    try:
        return Relation(name)
    except ValueError:
        raise ValueError(
            f"unknown relation {name!r}; expected one of "
            f"{[r.value for r in Relation]}"
        ) from None


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate_corpus(corpus: Corpus) -> list[str]:
    """Check every corpus invariant, returning all violations (not fail-fast)."""
    errors: list[str] = []
    seen_sentence_ids: set[str] = set()
    seen_entity_ids: set[str] = set()

    for sent in corpus.sentences:
        sid = sent.sentence_id
        if sid in seen_sentence_ids:
            errors.append(f"duplicate sentence_id {sid!r}")
        seen_sentence_ids.add(sid)

        seen_spans: set[tuple[int, int, str]] = set()
        local_ids: set[str] = set()
        for ent in sent.entities:
            if ent.sentence_id != sid:
                errors.append(
                    f"entity {ent.entity_id!r} carries sentence_id "
                    f"{ent.sentence_id!r} but lives in sentence {sid!r}"
                )
            if ent.entity_id in seen_entity_ids:
                errors.append(f"entity_id {ent.entity_id!r} is not unique corpus-wide")
            seen_entity_ids.add(ent.entity_id)
            local_ids.add(ent.entity_id)

            if not (0 <= ent.start < ent.end <= len(sent.text)):
                errors.append(
                    f"entity {ent.entity_id!r} span {ent.span} outside sentence "
                    f"{sid!r} bounds (len={len(sent.text)})"
                )
            elif sent.text[ent.start:ent.end] != ent.surface:
                errors.append(
                    f"entity {ent.entity_id!r} surface {ent.surface!r} != sentence "
                    f"substring {sent.text[ent.start:ent.end]!r} at {ent.span}"
                )
            key = (ent.start, ent.end, ent.entity_type)
            if key in seen_spans:
                errors.append(
                    f"exact duplicate mention (span {ent.span}, type "
                    f"{ent.entity_type}) in sentence {sid!r}"
                )
            seen_spans.add(key)

        seen_triples: set[tuple[str, Relation, str]] = set()
        for rel in sent.relations:
            triple = rel.as_triple()
            locator = f"({rel.event_id}, {rel.relation}, {rel.argument_id})"
            if rel.event_id not in local_ids or rel.argument_id not in local_ids:
                errors.append(
                    f"relation {locator} in sentence {sid!r} references an "
                    f"entity id not present in that sentence"
                )
                continue
            event = sent.entity(rel.event_id)
            argument = sent.entity(rel.argument_id)
            if event.entity_type != EVENT_TYPE:
                errors.append(
                    f"relation {locator}: event side has type "
                    f"{event.entity_type}, expected {EVENT_TYPE}"
                )
            if argument.entity_type not in TYPE_COMPATIBILITY[rel.relation]:
                errors.append(
                    f"relation {locator}: argument type {argument.entity_type} "
                    f"is incompatible with {rel.relation}"
                )
            if triple in seen_triples:
                errors.append(f"duplicate relation triple {locator} in sentence {sid!r}")
            seen_triples.add(triple)

    return errors


# ---------------------------------------------------------------------------
# Canonical line-delimited JSON format
# ---------------------------------------------------------------------------

PathOrStream = Union[str, Path, TextIO]


def _open_for_read(source: PathOrStream) -> tuple[TextIO, bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def _sentence_from_record(record: dict, locator: str) -> AnnotatedSentence:
    try:
        sid = str(record["sentence_id"])
        text = record["text"]
        entities = []
        for ent in record.get("entities", []):
            start, end = int(ent["start"]), int(ent["end"])
            surface = ent.get("surface")
            if surface is None:
                surface = text[start:end]
            entities.append(
                EntityMention(
                    entity_id=str(ent["id"]),
                    sentence_id=sid,
                    surface=surface,
                    start=start,
                    end=end,
                    entity_type=str(ent["type"]),
                )
            )
        relations = []
        for rel in record.get("relations", []):
            relations.append(
                RelationAnnotation(
                    event_id=str(rel["event_id"]),
                    relation=relation_from_name(rel["relation"]),
                    argument_id=str(rel["argument_id"]),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusParseError(f"{locator}: malformed record ({exc})") from exc
    return AnnotatedSentence(
        sentence_id=sid,
        text=text,
        entities=tuple(entities),
        relations=tuple(relations),
    )


def _load_jsonl(stream: TextIO, name: str) -> Corpus:
    sentences = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        locator = f"{name}, line {lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusParseError(f"{locator}: invalid JSON ({exc})") from exc
        if not isinstance(record, dict):
            raise CorpusParseError(f"{locator}: record is not an object")
        sentences.append(_sentence_from_record(record, locator))
    return Corpus(name=name, sentences=tuple(sentences))


# ---------------------------------------------------------------------------
# Column-per-token import (BIO tags, one column per nesting layer) with a
# line-delimited JSON relation sidecar keyed on generated entity ids.
# ---------------------------------------------------------------------------

def _entities_from_bio_block(
    sid: str, tokens: list[str], tag_columns: list[list[str]]
) -> tuple[str, list[EntityMention]]:
    # Sentence text is tokens joined by single spaces (normalized whitespace);
    # offsets are computed over that text.
    offsets = []
    pos = 0
    for tok in tokens:
        offsets.append((pos, pos + len(tok)))
        pos += len(tok) + 1
    text = " ".join(tokens)

    entities: list[EntityMention] = []
    counter = 0
    for column in tag_columns:
        open_start = None
        open_type = None
        for i, tag in enumerate(column + ["O"]):  # sentinel closes trailing span
            starts_new = tag.startswith("B-") or (
                tag.startswith("I-") and open_type != tag[2:]
            )
            if open_type is not None and (tag == "O" or starts_new):
                start = offsets[open_start][0]
                end = offsets[i - 1][1]
                counter += 1
                entities.append(
                    EntityMention(
                        entity_id=f"{sid}.e{counter}",
                        sentence_id=sid,
                        surface=text[start:end],
                        start=start,
                        end=end,
                        entity_type=open_type,
                    )
                )
                open_start, open_type = None, None
            if tag.startswith("B-") or (tag.startswith("I-") and open_type is None):
                open_start, open_type = i, tag[2:]
    return text, entities


def _load_bio(stream: TextIO, name: str, relations_source: PathOrStream | None) -> Corpus:
    """Entity ids are assigned per sentence as `<sentence_id>.e<n>`, numbering
    spans column by column (outer nesting layer first) in token order; a
    relation sidecar must reference those generated ids."""
    blocks: list[tuple[str, list[str], list[list[str]]]] = []
    tokens: list[str] = []
    columns: list[list[str]] = []
    sid: str | None = None
    auto = 0

    def flush(lineno: int) -> None:
        nonlocal tokens, columns, sid, auto
        if not tokens:
            sid = None
            return
        auto += 1
        blocks.append((sid or f"s{auto}", tokens, columns))
        tokens, columns, sid = [], [], None

    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(lineno)
            continue
        if line.startswith("#"):
            # optional "# sentence_id = X" header per block
            if "=" in line:
                sid = line.split("=", 1)[1].strip()
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise CorpusParseError(f"{name}, line {lineno}: expected 'token<TAB>tag...'")
        tokens.append(parts[0])
        tags = parts[1:]
        while len(columns) < len(tags):
            columns.append(["O"] * len(tokens[:-1]))
        for c in range(len(columns)):
            columns[c].append(tags[c] if c < len(tags) else "O")
    flush(-1)

    sentences = []
    for block_sid, block_tokens, block_columns in blocks:
        text, entities = _entities_from_bio_block(block_sid, block_tokens, block_columns)
        sentences.append(
            AnnotatedSentence(sentence_id=block_sid, text=text, entities=tuple(entities))
        )

    by_id = {s.sentence_id: s for s in sentences}
    if relations_source is not None:
        rel_stream, close = _open_for_read(relations_source)
        try:
            per_sentence: dict[str, list[RelationAnnotation]] = defaultdict(list)
            for lineno, line in enumerate(rel_stream, start=1):
                line = line.strip()
                if not line:
                    continue
                locator = f"relations sidecar, line {lineno}"
                try:
                    rec = json.loads(line)
                    per_sentence[str(rec["sentence_id"])].append(
                        RelationAnnotation(
                            event_id=str(rec["event_id"]),
                            relation=relation_from_name(rec["relation"]),
                            argument_id=str(rec["argument_id"]),
                        )
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise CorpusParseError(f"{locator}: malformed record ({exc})") from exc
            unknown = set(per_sentence) - set(by_id)
            if unknown:
                raise CorpusParseError(
                    f"relations sidecar references unknown sentence ids: {sorted(unknown)}"
                )
            sentences = [
                AnnotatedSentence(
                    sentence_id=s.sentence_id,
                    text=s.text,
                    entities=s.entities,
                    relations=tuple(per_sentence.get(s.sentence_id, ())),
                )
                for s in sentences
            ]
        finally:
            if close:
                rel_stream.close()

    return Corpus(name=name, sentences=tuple(sentences))


def load_corpus(
    source: PathOrStream,
    format: str = "jsonl",
    name: str | None = None,
    relations_source: PathOrStream | None = None,
    validate: bool = True,
) -> Corpus:
    """Load a corpus from `source` and validate all invariants.

    `format` is "jsonl" (canonical, one sentence record per line) or "bio"
    (column-per-token tags; relations supplied via `relations_source`).
    Raises CorpusParseError on malformed input and CorpusValidationError with
    the aggregated list of invariant violations.
    """
    stream, close = _open_for_read(source)
    if name is None:
        name = getattr(stream, "name", "corpus")
    try:
        if format == "jsonl":
            corpus = _load_jsonl(stream, str(name))
        elif format == "bio":
            corpus = _load_bio(stream, str(name), relations_source)
        else:
            raise ValueError(f"unknown corpus format {format!r}")
    finally:
        if close:
            stream.close()
    if validate:
        errors = validate_corpus(corpus)
        if errors:
            raise CorpusValidationError(errors)
    return corpus


def sentence_to_record(sentence: AnnotatedSentence) -> dict:
    return {
        "sentence_id": sentence.sentence_id,
        "text": sentence.text,
        "entities": [
            {
                "id": e.entity_id,
                "type": e.entity_type,
                "start": e.start,
                "end": e.end,
                "surface": e.surface,
            }
            for e in sentence.entities
        ],
        "relations": [
            {
                "event_id": r.event_id,
                "relation": r.relation.value,
                "argument_id": r.argument_id,
            }
            for r in sentence.relations
        ],
    }


def serialize_corpus(corpus: Corpus, target: PathOrStream) -> None:
    """Write the canonical line-delimited JSON form; round-trips via load_corpus."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            serialize_corpus(corpus, fh)
        return
    for sentence in corpus.sentences:
        target.write(json.dumps(sentence_to_record(sentence), ensure_ascii=False))
        target.write("\n")


def dumps_corpus(corpus: Corpus) -> str:
    buf = io.StringIO()
    serialize_corpus(corpus, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Views and statistics
# ---------------------------------------------------------------------------

def event_sentences(corpus: Corpus) -> list[AnnotatedSentence]:
    """Sentences containing at least one EVENT mention, corpus order preserved."""
    return [s for s in corpus.sentences if s.has_events]


@dataclass(frozen=True)
class StatsReport:
    corpus_name: str
    sentence_count: int
    entity_count: int
    relation_counts: dict[str, int]
    total_relations: int
    total_events: int
    events_with_arguments: int
    events_without_arguments: int
    events_with_multiple_arguments: int
    # "annotated with multiple agents" is ambiguous between counting events
    # and counting agent edges, so both readings are reported.
    events_with_multiple_agents: int
    agent_relations_on_multi_agent_events: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def corpus_stats(corpus: Corpus) -> StatsReport:
    relation_counts: Counter = Counter()
    args_per_event: Counter = Counter()
    agents_per_event: Counter = Counter()
    total_events = 0
    entity_count = 0

    for sent in corpus.sentences:
        entity_count += len(sent.entities)
        total_events += sum(1 for e in sent.entities if e.is_event)
        for rel in sent.relations:
            relation_counts[rel.relation.value] += 1
            args_per_event[(sent.sentence_id, rel.event_id)] += 1
            if rel.relation is Relation.HAS_AGENT:
                agents_per_event[(sent.sentence_id, rel.event_id)] += 1

    multi_agent_events = [k for k, n in agents_per_event.items() if n >= 2]
    return StatsReport(
        corpus_name=corpus.name,
        sentence_count=len(corpus.sentences),
        entity_count=entity_count,
        relation_counts={r.value: relation_counts.get(r.value, 0) for r in Relation},
        total_relations=sum(relation_counts.values()),
        total_events=total_events,
        events_with_arguments=len(args_per_event),
        events_without_arguments=total_events - len(args_per_event),
        events_with_multiple_arguments=sum(1 for n in args_per_event.values() if n >= 2),
        events_with_multiple_agents=len(multi_agent_events),
        agent_relations_on_multi_agent_events=sum(
            agents_per_event[k] for k in multi_agent_events
        ),
    )
