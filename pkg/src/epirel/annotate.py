"""Locate entity surfaces in article text and assign display colors.

Matching is case-insensitive and whitespace-collapsed, nothing fuzzier.
Overlaps are resolved longest-match-first, then leftmost. All offsets are
code points, so UI code slicing the article lands on the same characters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .schema import Entity, EntityType

# One token per entity type, indexed by canonical type order.
PALETTE: tuple[str, ...] = (
    "red", "orange", "amber", "green", "teal", "blue", "purple", "pink",
)

_TYPE_ORDER = {etype: i for i, etype in enumerate(EntityType)}


@dataclass(frozen=True)
class EntitySpan:
    """Character span [start, end) of one entity occurrence."""

    start: int
    end: int
    entity: Entity


@dataclass
class AnnotatedDocument:
    article: str
    spans: list[EntitySpan] = field(default_factory=list)
    unlocated: list[Entity] = field(default_factory=list)
    colors: dict[EntityType, str] = field(default_factory=dict)


def color_map(types_present: set[EntityType]) -> dict[EntityType, str]:
    """Stable type -> color assignment; a type always gets the same token."""
    present = sorted(types_present, key=_TYPE_ORDER.__getitem__)
    return {etype: PALETTE[_TYPE_ORDER[etype]] for etype in present}


def _match_key(surface: str) -> str:
    return " ".join(surface.split()).casefold()


def _surface_pattern(surface: str) -> re.Pattern | None:
    tokens = surface.split()
    if not tokens:
        return None
    return re.compile(r"\s+".join(re.escape(t) for t in tokens), re.IGNORECASE)


def locate_entities(article: str, entities: list[Entity]) -> AnnotatedDocument:
    """Find all occurrences of each distinct entity surface in the article.

    Entities are deduplicated by (type, casefolded surface). Candidate
    matches are kept greedily, longest first and then leftmost; entities
    with no surviving occurrence are reported as unlocated.
    """
    distinct: dict[tuple[EntityType, str], Entity] = {}
    for entity in entities:
        distinct.setdefault((entity.etype, _match_key(entity.surface)), entity)

    candidates: list[tuple[int, int, Entity]] = []
    for entity in distinct.values():
        pattern = _surface_pattern(entity.surface)
        if pattern is None:
            continue
        for m in pattern.finditer(article):
            candidates.append((m.start(), m.end(), entity))

    candidates.sort(key=lambda c: (-(c[1] - c[0]), c[0],
                                   _TYPE_ORDER[c[2].etype], _match_key(c[2].surface)))
    chosen: list[tuple[int, int, Entity]] = []
    for start, end, entity in candidates:
        if all(end <= s or start >= e for s, e, _ in chosen):
            chosen.append((start, end, entity))

    located = {(e.etype, _match_key(e.surface)) for _, _, e in chosen}
    unlocated = [entity for key, entity in distinct.items() if key not in located]
    spans = sorted((EntitySpan(s, e, ent) for s, e, ent in chosen),
                   key=lambda sp: sp.start)
    colors = color_map({entity.etype for entity in distinct.values()})
    return AnnotatedDocument(article=article, spans=spans,
                             unlocated=unlocated, colors=colors)


def annotated_to_dict(doc: AnnotatedDocument) -> dict:
    """Canonical JSON shape consumed by the UI."""
    return {
        "article": doc.article,
        "spans": [
            {
                "start": span.start,
                "end": span.end,
                "type": span.entity.etype.value,
                "text": doc.article[span.start:span.end],
            }
            for span in doc.spans
        ],
        "unlocated": [{"type": e.etype.value, "text": e.surface} for e in doc.unlocated],
        "colors": {etype.value: token for etype, token in doc.colors.items()},
    }
