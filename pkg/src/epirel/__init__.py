"""Relation extraction pipeline for infectious-disease news articles."""

__version__ = "0.1.0"

from .schema import (  # noqa: F401
    Entity,
    EntityType,
    RelationSchema,
    RelationTriple,
    RelationType,
    default_schema,
    validate_triple,
)
