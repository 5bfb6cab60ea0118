"""Hypothesis templates: per-relation verbalizer patterns with an event and an
entity placeholder, instantiated with mention surfaces verbatim.

Templates are data, not code: the registry loads them from a JSON config so a
different template set (e.g. for the template ablation) is a config swap. The
shipped default carries four train templates per relation, with the `t2` set
doubling as the single test-phase template. Entries whose exact wording was
reconstructed from their English gloss are flagged `reconstructed`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable

from .corpus import (
    EVENT_TYPE,
    TYPE_COMPATIBILITY,
    AnnotatedSentence,
    EntityMention,
    Relation,
    relation_from_name,
)

EVENT_PLACEHOLDER = "{event}"
ENTITY_PLACEHOLDER = "{entity}"

PHASES = ("train", "test", "both")


class TemplateError(Exception):
    """Instantiation violated a template precondition."""


class TemplateConfigError(Exception):
    """The template config file is malformed or incomplete."""


@dataclass(frozen=True)
class Template:
    template_id: str
    relation: Relation
    phase: str
    pattern: str
    gloss: str = ""
    reconstructed: bool = False

    def __post_init__(self):
        if self.phase not in PHASES:
            raise TemplateConfigError(
                f"template {self.template_id}: phase {self.phase!r} not in {PHASES}"
            )
        for marker in (EVENT_PLACEHOLDER, ENTITY_PLACEHOLDER):
            if self.pattern.count(marker) != 1:
                raise TemplateConfigError(
                    f"template {self.template_id}: pattern must contain {marker} "
                    f"exactly once, got {self.pattern.count(marker)}"
                )

    @property
    def index(self) -> str:
        """Trailing index tag, e.g. 't2' from 'hasDate.t2'."""
        return self.template_id.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class Hypothesis:
    text: str
    relation: Relation
    event_id: str
    entity_id: str
    template_id: str


def relation_for_entity_type(entity_type: str) -> Relation | None:
    """Inverse of the relation/argument-type mapping; None for EVENT and for
    types outside the interpreted set."""
    for relation, types in TYPE_COMPATIBILITY.items():
        if entity_type in types:
            return relation
    return None


def instantiate(template: Template, event: EntityMention, entity: EntityMention) -> Hypothesis:
    """Substitute the two placeholders with the mention surfaces, verbatim.

    No normalization is applied: the premise contains the same surfaces, which
    keeps the pair encoder's job a span-alignment one.
    """
    if event.entity_type != EVENT_TYPE:
        raise TemplateError(
            f"event slot requires an {EVENT_TYPE} mention, got "
            f"{event.entity_id!r} of type {event.entity_type}"
        )
    if entity.entity_type not in TYPE_COMPATIBILITY[template.relation]:
        raise TemplateError(
            f"entity {entity.entity_id!r} of type {entity.entity_type} is "
            f"incompatible with {template.relation}"
        )
    text = template.pattern.replace(EVENT_PLACEHOLDER, event.surface).replace(
        ENTITY_PLACEHOLDER, entity.surface
    )
    return Hypothesis(
        text=text,
        relation=template.relation,
        event_id=event.entity_id,
        entity_id=entity.entity_id,
        template_id=template.template_id,
    )


class TemplateRegistry:
    """Immutable lookup of templates by relation and phase."""

    def __init__(self, templates: Iterable[Template]):
        self._templates = tuple(templates)
        self._by_relation: dict[Relation, list[Template]] = {r: [] for r in Relation}
        for t in self._templates:
            self._by_relation[t.relation].append(t)
        for relation, items in self._by_relation.items():
            items.sort(key=lambda t: t.index)
            if not any(t.phase in ("train", "both") for t in items):
                raise TemplateConfigError(f"no train-phase template for {relation}")
            n_test = sum(1 for t in items if t.phase in ("test", "both"))
            if n_test != 1:
                raise TemplateConfigError(
                    f"{relation} must have exactly one test-phase template, has {n_test}"
                )
        ids = [t.template_id for t in self._templates]
        if len(set(ids)) != len(ids):
            raise TemplateConfigError("duplicate template_id in config")

    @classmethod
    def from_file(cls, path: str | Path) -> "TemplateRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls._from_config(json.load(fh), str(path))

    @classmethod
    def default(cls) -> "TemplateRegistry":
        raw = resources.files("eventnli.data").joinpath("templates_default.json")
        return cls._from_config(json.loads(raw.read_text(encoding="utf-8")), "default")

    @classmethod
    def _from_config(cls, config: dict, origin: str) -> "TemplateRegistry":
        try:
            entries = config["templates"]
            templates = [
                Template(
                    template_id=str(e["template_id"]),
                    relation=relation_from_name(e["relation"]),
                    phase=str(e["phase"]),
                    pattern=str(e["pattern"]),
                    gloss=str(e.get("gloss", "")),
                    reconstructed=bool(e.get("reconstructed", False)),
                )
                for e in entries
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise TemplateConfigError(f"bad template config {origin}: {exc}") from exc
        return cls(templates)

    @property
    def templates(self) -> tuple[Template, ...]:
        return self._templates

    def get(self, template_id: str) -> Template:
        for t in self._templates:
            if t.template_id == template_id:
                return t
        raise KeyError(template_id)

    def templates_for(
        self, relation: Relation, phase: str, test_index: str | None = None
    ) -> list[Template]:
        """Templates applicable to `relation` in `phase` ('train' or 'test'),
        ordered by index. `test_index` overrides the test-phase selection
        (e.g. 't3' to evaluate an alternative verbalizer)."""
        if relation not in self._by_relation:
            raise KeyError(f"unknown relation {relation!r}")
        items = self._by_relation[relation]
        if phase == "train":
            return [t for t in items if t.phase in ("train", "both")]
        if phase == "test":
            if test_index is not None:
                chosen = [t for t in items if t.index == test_index]
                if not chosen:
                    raise KeyError(f"no template {relation}.{test_index}")
                return chosen
            return [t for t in items if t.phase in ("test", "both")]
        raise ValueError(f"phase must be 'train' or 'test', got {phase!r}")


def candidate_argument_pairs(
    sentence: AnnotatedSentence,
) -> list[tuple[EntityMention, EntityMention, Relation]]:
    """All (event, entity, relation) candidates in one sentence: the cross
    product of EVENT mentions and type-compatible argument mentions, with the
    relation fixed by the entity's type. Events never fill argument slots."""
    pairs = []
    events = [e for e in sentence.entities if e.is_event]
    for event in events:
        for entity in sentence.entities:
            if entity.is_event:
                continue
            relation = relation_for_entity_type(entity.entity_type)
            if relation is None:
                continue
            pairs.append((event, entity, relation))
    return pairs
