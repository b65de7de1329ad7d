"""Closed vocabulary for disease-news relation extraction.

Eight entity types, seven relation types, and a fixed set of legal
(subject type, relation, object type) pairs. Surface keys seen in model
output ("infectious disease", "event date", "host", ...) resolve to
canonical types through an alias table; anything outside the vocabulary
is a typed error, never a silent fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property


class UnknownEntityKey(KeyError):
    """Raised when a surface key does not resolve to any entity type."""

    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"unknown entity key: {self.key!r}"


class UnknownRelation(KeyError):
    """Raised when a surface form does not resolve to any relation type."""

    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"unknown relation: {self.key!r}"


class EntityType(str, Enum):
    """Canonical entity types, in canonical (palette) order."""

    INFECTIOUS_DISEASE = "infectious_disease"
    PATHOGEN = "pathogen"
    SYMPTOM_SYNDROME = "symptom_syndrome"
    LOCATION = "location"
    EVENT_DATE = "event_date"
    CASE_NUMBER = "case_number"
    DEATH_NUMBER = "death_number"
    PEOPLE = "people"


class RelationType(str, Enum):
    """The seven relation types."""

    LOCATED_AT = "located_at"
    OCCURRED_ON = "occurred_on"
    ARE_SYMPTOMS_OF = "are_symptoms_of"
    DEATHS_OF = "deaths_of"
    CASES_OF = "cases_of"
    CAUSED_BY = "caused_by"
    AFFECTED_BY = "affected_by"


# Surface keys accepted for each entity type, beyond the canonical name.
ENTITY_ALIASES: dict[EntityType, tuple[str, ...]] = {
    EntityType.INFECTIOUS_DISEASE: ("infectious disease", "disease"),
    EntityType.PATHOGEN: ("pathogen",),
    EntityType.SYMPTOM_SYNDROME: ("syndrome", "symptom", "symptom/syndrome"),
    EntityType.LOCATION: ("location",),
    EntityType.EVENT_DATE: ("event date", "date"),
    EntityType.CASE_NUMBER: ("new confirmed cases", "case numbers", "case number"),
    EntityType.DEATH_NUMBER: ("overall confirmed deaths", "death numbers", "death number"),
    EntityType.PEOPLE: ("host", "people"),
}

# Preferred key per type when serializing triples back to output lines.
ENTITY_OUTPUT_KEY: dict[EntityType, str] = {
    EntityType.INFECTIOUS_DISEASE: "infectious disease",
    EntityType.PATHOGEN: "pathogen",
    EntityType.SYMPTOM_SYNDROME: "syndrome",
    EntityType.LOCATION: "location",
    EntityType.EVENT_DATE: "event date",
    EntityType.CASE_NUMBER: "case numbers",
    EntityType.DEATH_NUMBER: "death numbers",
    EntityType.PEOPLE: "people",
}

# Display surface per relation, exactly as written in the extraction prompt.
RELATION_SURFACE: dict[RelationType, str] = {
    RelationType.LOCATED_AT: "located at",
    RelationType.OCCURRED_ON: "occurred on",
    RelationType.ARE_SYMPTOMS_OF: "are symptoms of",
    RelationType.DEATHS_OF: "deaths of",
    RelationType.CASES_OF: "cases of",
    RelationType.CAUSED_BY: "caused by",
    RelationType.AFFECTED_BY: "affected by",
}

RELATION_ALIASES: dict[RelationType, tuple[str, ...]] = {
    rel: (surface,) for rel, surface in RELATION_SURFACE.items()
}
RELATION_ALIASES[RelationType.DEATHS_OF] = ("deaths of", "death of")


def normalize_key(key: str) -> str:
    """Trim, collapse internal whitespace, and casefold a surface key."""
    return " ".join(key.split()).casefold()


def _build_lookup(aliases: dict, canonical: type[Enum]) -> dict:
    table: dict[str, Enum] = {}
    for member in canonical:
        for key in (member.value, *aliases[member]):
            norm = normalize_key(key)
            if table.get(norm, member) is not member:
                raise ValueError(f"alias {norm!r} maps to two types")
            table[norm] = member
    return table


_ENTITY_LOOKUP: dict[str, EntityType] = _build_lookup(ENTITY_ALIASES, EntityType)
_RELATION_LOOKUP: dict[str, RelationType] = _build_lookup(RELATION_ALIASES, RelationType)


def entity_type_from_key(key: str) -> EntityType:
    """Resolve a surface key (e.g. "Event Date ") to its entity type."""
    try:
        return _ENTITY_LOOKUP[normalize_key(key)]
    except KeyError:
        raise UnknownEntityKey(key) from None


def relation_from_key(key: str) -> RelationType:
    """Resolve a surface form (e.g. "located at") to its relation type."""
    try:
        return _RELATION_LOOKUP[normalize_key(key)]
    except KeyError:
        raise UnknownRelation(key) from None


@dataclass(frozen=True)
class Entity:
    """A typed entity mention with its surface string, casing preserved."""

    etype: EntityType
    surface: str

    def __post_init__(self):
        if not self.surface.strip():
            raise ValueError("entity surface must be non-empty after trimming")


@dataclass(frozen=True)
class RelationTriple:
    """One extracted fact: exactly two entities joined by a relation."""

    subject: Entity
    relation: RelationType
    object: Entity


Pair = tuple[EntityType, RelationType, EntityType]

# Legal pairs in declaration order: subject comes first in each
# "X is between: A - B" entry of the extraction prompt.
DEFAULT_PAIRS: tuple[Pair, ...] = (
    (EntityType.INFECTIOUS_DISEASE, RelationType.LOCATED_AT, EntityType.LOCATION),
    (EntityType.SYMPTOM_SYNDROME, RelationType.LOCATED_AT, EntityType.LOCATION),
    (EntityType.CASE_NUMBER, RelationType.LOCATED_AT, EntityType.LOCATION),
    (EntityType.INFECTIOUS_DISEASE, RelationType.OCCURRED_ON, EntityType.EVENT_DATE),
    (EntityType.SYMPTOM_SYNDROME, RelationType.OCCURRED_ON, EntityType.EVENT_DATE),
    (EntityType.CASE_NUMBER, RelationType.OCCURRED_ON, EntityType.EVENT_DATE),
    (EntityType.INFECTIOUS_DISEASE, RelationType.ARE_SYMPTOMS_OF, EntityType.SYMPTOM_SYNDROME),
    (EntityType.INFECTIOUS_DISEASE, RelationType.DEATHS_OF, EntityType.DEATH_NUMBER),
    (EntityType.INFECTIOUS_DISEASE, RelationType.CASES_OF, EntityType.CASE_NUMBER),
    (EntityType.SYMPTOM_SYNDROME, RelationType.CASES_OF, EntityType.CASE_NUMBER),
    (EntityType.INFECTIOUS_DISEASE, RelationType.CAUSED_BY, EntityType.PATHOGEN),
    (EntityType.PEOPLE, RelationType.AFFECTED_BY, EntityType.INFECTIOUS_DISEASE),
)

# Optional pair covering death-count/person output some models emit; off by
# default because it is not in the declared relation list.
DEATH_HOST_PAIR: Pair = (EntityType.DEATH_NUMBER, RelationType.DEATHS_OF, EntityType.PEOPLE)


@dataclass(frozen=True)
class RelationSchema:
    """Set of legal (subject type, relation, object type) pairs."""

    pairs: tuple[Pair, ...]

    @cached_property
    def _pair_set(self) -> frozenset[Pair]:
        return frozenset(self.pairs)

    def allows(self, subject_type: EntityType, relation: RelationType,
               object_type: EntityType) -> bool:
        return (subject_type, relation, object_type) in self._pair_set

    def declared_direction(self, subject_type: EntityType, relation: RelationType,
                           object_type: EntityType) -> Pair | None:
        """Return the declared pair matching in either direction, or None."""
        if self.allows(subject_type, relation, object_type):
            return (subject_type, relation, object_type)
        if self.allows(object_type, relation, subject_type):
            return (object_type, relation, subject_type)
        return None

    def to_json_dict(self) -> dict:
        relations = []
        for rel in RelationType:
            pairs = [[s.value, o.value] for s, r, o in self.pairs if r is rel]
            if pairs:
                relations.append({"name": rel.value, "pairs": pairs})
        return {
            "entity_types": [t.value for t in EntityType],
            "relations": relations,
        }


def default_schema(death_host_extension: bool = False) -> RelationSchema:
    """The 12-pair schema from the extraction prompt.

    ``death_host_extension`` adds the optional (death_number, deaths_of,
    people) pair.
    """
    pairs = DEFAULT_PAIRS + ((DEATH_HOST_PAIR,) if death_host_extension else ())
    return RelationSchema(pairs=pairs)


@dataclass(frozen=True)
class Verdict:
    """Outcome of validating a triple against a schema."""

    valid: bool
    reason: str | None = None
    reversed_direction: bool = False


def validate_triple(schema: RelationSchema, triple: RelationTriple,
                    mode: str = "strict") -> Verdict:
    """Check a triple's type pair against the schema.

    ``strict`` requires (subject type, relation, object type) to be declared;
    ``symmetric`` also accepts the reversed pair and records the reversal.
    """
    if mode not in ("strict", "symmetric"):
        raise ValueError(f"unknown validation mode: {mode!r}")
    s, r, o = triple.subject.etype, triple.relation, triple.object.etype
    if schema.allows(s, r, o):
        return Verdict(valid=True)
    if mode == "symmetric" and schema.allows(o, r, s):
        return Verdict(valid=True, reversed_direction=True)
    return Verdict(
        valid=False,
        reason=f"pair ({s.value}, {r.value}, {o.value}) not in schema",
    )


def triple_to_dict(triple: RelationTriple) -> dict:
    """Serialize a triple to the canonical JSON object shape."""
    return {
        "subject": {"type": triple.subject.etype.value, "text": triple.subject.surface},
        "relation": triple.relation.value,
        "object": {"type": triple.object.etype.value, "text": triple.object.surface},
    }


def triple_from_dict(obj: dict) -> RelationTriple:
    """Rebuild a triple from its canonical JSON object shape."""
    return RelationTriple(
        subject=Entity(entity_type_from_key(obj["subject"]["type"]), obj["subject"]["text"]),
        relation=relation_from_key(obj["relation"]),
        object=Entity(entity_type_from_key(obj["object"]["type"]), obj["object"]["text"]),
    )
