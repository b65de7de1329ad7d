"""Parse numbered triple lines from raw model completions.

The models emit lines shaped like

    1) "infectious disease": "H5N1", "relation": "located at", "location": "Laos"

This module turns a whole completion into validated triples plus per-line
diagnostics. Parsing is total: malformed content lands in the report as a
rejection, never as an exception. Values may contain commas; pair splitting
keys off quoted boundaries only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .schema import (
    Entity,
    RelationSchema,
    RelationTriple,
    UnknownEntityKey,
    UnknownRelation,
    entity_type_from_key,
    normalize_key,
    relation_from_key,
    triple_from_dict,
    triple_to_dict,
    validate_triple,
)

_QUOTE_MAP = str.maketrans({
    "“": '"', "”": '"', "„": '"', "«": '"', "»": '"',
    "‘": "'", "’": "'",
})

_INDEX_RE = re.compile(r"^\s*\d+\s*[.)]\s*")
_PAIR_RE = re.compile(r'\s*"([^"]*)"\s*:\s*"([^"]*)"')
_SEP_RE = re.compile(r"\s*,")
_RELATION_KEY_RE = re.compile(r'"\s*relation\s*"\s*:', re.IGNORECASE)


class LineParseError(ValueError):
    """Base for per-line parse failures; ``code`` keys the rejection reason."""

    code = "parse_error"


class MalformedLine(LineParseError):
    code = "malformed_line"


class SchemaViolation(LineParseError):
    code = "schema_violation"


def _reason(exc: Exception) -> str:
    if isinstance(exc, UnknownEntityKey):
        return f"unknown_entity_key: {exc.key}"
    if isinstance(exc, UnknownRelation):
        return f"unknown_relation: {exc.key}"
    if isinstance(exc, LineParseError):
        return f"{exc.code}: {exc.args[0]}"
    return str(exc)


@dataclass(frozen=True)
class RawModelOutput:
    """A completion exactly as the backend returned it."""

    text: str
    model_id: str


@dataclass(frozen=True)
class Rejection:
    line: int
    raw: str
    reason: str


@dataclass(frozen=True)
class ParseWarning:
    line: int
    note: str


@dataclass
class ParseReport:
    """Accepted triples plus per-line rejections and warnings."""

    triples: list[RelationTriple] = field(default_factory=list)
    rejected: list[Rejection] = field(default_factory=list)
    warnings: list[ParseWarning] = field(default_factory=list)


@dataclass(frozen=True)
class _LineResult:
    kind: str  # "filler" | "triple" | "error"
    triple: RelationTriple | None = None
    error: Exception | None = None
    note: str | None = None


def _scan_pairs(body: str) -> list[tuple[str, str]] | None:
    """Scan `"key": "value"` pairs separated by commas; None on leftover junk."""
    pairs: list[tuple[str, str]] = []
    pos = 0
    while True:
        m = _PAIR_RE.match(body, pos)
        if not m:
            break
        pairs.append((m.group(1), m.group(2)))
        pos = m.end()
        sep = _SEP_RE.match(body, pos)
        if not sep:
            break
        pos = sep.end()
    if body[pos:].strip():
        return None
    return pairs


def _parse_line(line: str, schema: RelationSchema) -> _LineResult:
    text = line.translate(_QUOTE_MAP)
    stripped = text.strip()
    if not stripped:
        return _LineResult("filler")
    # Triple candidates carry an index prefix or a quoted relation key;
    # everything else (prose, headers, continuations) is filler.
    indexed = _INDEX_RE.match(stripped)
    if not indexed and not _RELATION_KEY_RE.search(stripped):
        return _LineResult("filler")

    body = stripped[indexed.end():] if indexed else stripped
    pairs = _scan_pairs(body)
    if pairs is None:
        return _LineResult("error", error=MalformedLine("unparseable key/value list"))
    if len(pairs) != 3:
        return _LineResult(
            "error",
            error=MalformedLine(f"expected 3 quoted pairs, found {len(pairs)}"),
        )

    relation_pairs = [(k, v) for k, v in pairs if normalize_key(k) == "relation"]
    if len(relation_pairs) != 1:
        return _LineResult(
            "error",
            error=MalformedLine(f"expected exactly one relation key, found {len(relation_pairs)}"),
        )
    entity_pairs = [(k, v) for k, v in pairs if normalize_key(k) != "relation"]

    try:
        relation = relation_from_key(relation_pairs[0][1])
        subject = Entity(entity_type_from_key(entity_pairs[0][0]), entity_pairs[0][1])
        obj = Entity(entity_type_from_key(entity_pairs[1][0]), entity_pairs[1][1])
    except (UnknownEntityKey, UnknownRelation) as exc:
        return _LineResult("error", error=exc)
    except ValueError as exc:
        return _LineResult("error", error=MalformedLine(str(exc)))

    triple = RelationTriple(subject=subject, relation=relation, object=obj)
    verdict = validate_triple(schema, triple, mode="symmetric")
    if not verdict.valid:
        return _LineResult("error", error=SchemaViolation(verdict.reason))
    if verdict.reversed_direction:
        normalized = RelationTriple(subject=obj, relation=relation, object=subject)
        return _LineResult("triple", triple=normalized,
                           note="direction reversed; normalized to declared order")
    return _LineResult("triple", triple=triple)


def parse_line(line: str, schema: RelationSchema) -> RelationTriple | None:
    """Parse one line into a triple.

    Returns None for filler (blank lines, prose); raises MalformedLine,
    UnknownEntityKey, UnknownRelation, or SchemaViolation otherwise.
    Reversed-but-legal pairs are normalized to the declared direction.
    """
    result = _parse_line(line, schema)
    if result.kind == "error":
        raise result.error
    return result.triple


def parse_output(raw: RawModelOutput, schema: RelationSchema,
                 strict: bool = False) -> ParseReport:
    """Parse a whole completion; never raises on malformed content.

    Every line becomes a triple, a rejection, or filler. Duplicate triples
    stay in the list with a warning. ``strict`` escalates warnings
    (duplicates, reversed direction) into rejections.
    """
    report = ParseReport()
    seen: set[RelationTriple] = set()
    for lineno, line in enumerate(raw.text.splitlines(), start=1):
        result = _parse_line(line, schema)
        if result.kind == "filler":
            continue
        if result.kind == "error":
            report.rejected.append(Rejection(lineno, line, _reason(result.error)))
            continue
        triple = result.triple
        if strict and result.note:
            report.rejected.append(Rejection(lineno, line, f"direction_reversed: {result.note}"))
            continue
        if triple in seen:
            if strict:
                report.rejected.append(Rejection(lineno, line, "duplicate: triple already emitted"))
                continue
            report.warnings.append(ParseWarning(lineno, "duplicate triple"))
        elif result.note:
            report.warnings.append(ParseWarning(lineno, result.note))
        seen.add(triple)
        report.triples.append(triple)
    return report


def report_to_dict(report: ParseReport) -> dict:
    """Canonical JSON shape with stable key order."""
    return {
        "relations": [triple_to_dict(t) for t in report.triples],
        "rejected": [{"line": r.line, "raw": r.raw, "reason": r.reason}
                     for r in report.rejected],
        "warnings": [{"line": w.line, "note": w.note} for w in report.warnings],
    }


def report_to_json(report: ParseReport) -> str:
    """Canonical serialization used by both the CLI and the HTTP service."""
    return json.dumps(report_to_dict(report), ensure_ascii=False, indent=2)


def report_from_dict(obj: dict) -> ParseReport:
    return ParseReport(
        triples=[triple_from_dict(t) for t in obj.get("relations", [])],
        rejected=[Rejection(r["line"], r["raw"], r["reason"])
                  for r in obj.get("rejected", [])],
        warnings=[ParseWarning(w["line"], w["note"]) for w in obj.get("warnings", [])],
    )


def report_from_json(text: str) -> ParseReport:
    """Inverse of report_to_json; lossless on the relations list."""
    return report_from_dict(json.loads(text))
