"""NER and RE scoring: precision/recall/F1 against gold annotations.

Entities are compared as (type, normalized surface) sets, relations as
direction-insensitive (relation, entity pair) sets. Relation scoring is
conditioned on recognition: gold triples whose entities the predictions
missed are out of scope and affect neither fn nor fp. Corpus scores are
micro-averages (counters summed over documents, then ratios).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .output_parser import ParseReport
from .schema import Entity, RelationTriple, triple_from_dict, triple_to_dict

_STRIP_CHARS = ".,;:!?\"'“”‘’ \t\n\r"


class DuplicateDocId(ValueError):
    pass


def normalize_surface(s: str) -> str:
    """Casefold, collapse whitespace, strip edge punctuation and quotes."""
    return " ".join(s.split()).casefold().strip(_STRIP_CHARS)


def entity_key(entity: Entity) -> tuple[str, str]:
    return (entity.etype.value, normalize_surface(entity.surface))


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 for the degenerate case."""
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        return cls(precision=p, recall=r, f1=f1(p, r), tp=tp, fp=fp, fn=fn)


@dataclass(frozen=True)
class EntityMatchResult:
    tp: int
    fp: int
    fn: int
    matched: frozenset[tuple[str, str]]


def match_entities(gold: Iterable[Entity], pred: Iterable[Entity]) -> EntityMatchResult:
    """Exact set matching on (type, normalized surface)."""
    gold_keys = {entity_key(e) for e in gold}
    pred_keys = {entity_key(e) for e in pred}
    matched = gold_keys & pred_keys
    return EntityMatchResult(
        tp=len(matched),
        fp=len(pred_keys - gold_keys),
        fn=len(gold_keys - matched),
        matched=frozenset(matched),
    )


def _triple_key(triple: RelationTriple) -> tuple:
    ends = sorted([entity_key(triple.subject), entity_key(triple.object)])
    return (triple.relation.value, ends[0], ends[1])


def _recognized(triple: RelationTriple, matched: frozenset) -> bool:
    return entity_key(triple.subject) in matched and entity_key(triple.object) in matched


def score_re(gold_triples: Iterable[RelationTriple],
             pred_triples: Iterable[RelationTriple],
             entity_matching: EntityMatchResult) -> PRF:
    """Relation PRF restricted to triples whose entities were recognized.

    A prediction is a tp when relation and both entities match a gold
    triple, direction ignored. Gold triples with an unrecognized entity are
    out of scope; predictions over unrecognized entities are ignored (they
    already count against NER).
    """
    matched = entity_matching.matched
    gold_keys = {_triple_key(t) for t in gold_triples if _recognized(t, matched)}
    pred_keys = {_triple_key(t) for t in pred_triples if _recognized(t, matched)}
    return PRF.from_counts(
        tp=len(gold_keys & pred_keys),
        fp=len(pred_keys - gold_keys),
        fn=len(gold_keys - pred_keys),
    )


@dataclass(frozen=True)
class GoldDocument:
    doc_id: str
    article: str
    gold_triples: tuple[RelationTriple, ...]

    def gold_entities(self) -> list[Entity]:
        """Distinct entities over the gold triples, first appearance first."""
        seen: dict[tuple[str, str], Entity] = {}
        for t in self.gold_triples:
            for e in (t.subject, t.object):
                seen.setdefault(entity_key(e), e)
        return list(seen.values())


def report_entities(report: ParseReport) -> list[Entity]:
    """Distinct entities over a parse report's accepted triples."""
    seen: dict[tuple[str, str], Entity] = {}
    for t in report.triples:
        for e in (t.subject, t.object):
            seen.setdefault(entity_key(e), e)
    return list(seen.values())


@dataclass(frozen=True)
class DocScore:
    doc_id: str
    ner: PRF
    re: PRF


@dataclass(frozen=True)
class EvalReport:
    ner: PRF
    re: PRF
    per_doc: tuple[DocScore, ...]


def score_document(gold: GoldDocument, pred: ParseReport) -> DocScore:
    matching = match_entities(gold.gold_entities(), report_entities(pred))
    ner = PRF.from_counts(matching.tp, matching.fp, matching.fn)
    re_score = score_re(gold.gold_triples, pred.triples, matching)
    return DocScore(doc_id=gold.doc_id, ner=ner, re=re_score)


def evaluate_corpus(docs: list[tuple[GoldDocument, ParseReport]]) -> EvalReport:
    """Per-document scores plus micro-averaged corpus scores."""
    seen_ids = set()
    per_doc = []
    for gold, pred in docs:
        if gold.doc_id in seen_ids:
            raise DuplicateDocId(gold.doc_id)
        seen_ids.add(gold.doc_id)
        per_doc.append(score_document(gold, pred))
    ner = PRF.from_counts(
        sum(d.ner.tp for d in per_doc),
        sum(d.ner.fp for d in per_doc),
        sum(d.ner.fn for d in per_doc),
    )
    re_score = PRF.from_counts(
        sum(d.re.tp for d in per_doc),
        sum(d.re.fp for d in per_doc),
        sum(d.re.fn for d in per_doc),
    )
    return EvalReport(ner=ner, re=re_score, per_doc=tuple(per_doc))


def _prf_dict(prf: PRF) -> dict:
    return {
        "precision": prf.precision, "recall": prf.recall, "f1": prf.f1,
        "tp": prf.tp, "fp": prf.fp, "fn": prf.fn,
    }


def eval_report_to_dict(report: EvalReport) -> dict:
    return {
        "ner": _prf_dict(report.ner),
        "re": _prf_dict(report.re),
        "per_doc": [
            {"doc_id": d.doc_id, "ner": _prf_dict(d.ner), "re": _prf_dict(d.re)}
            for d in report.per_doc
        ],
    }


def format_eval_table(report: EvalReport, label: str = "corpus") -> str:
    """Aligned table with Model / Eval / Precision / Recall / F1 columns."""
    rows = [
        (label, "NER", report.ner),
        (label, "RE", report.re),
    ]
    width = max(len("Model"), max(len(r[0]) for r in rows))
    lines = [f"{'Model':<{width}}  Eval  Precision  Recall  F1"]
    for model, eval_name, prf in rows:
        lines.append(
            f"{model:<{width}}  {eval_name:<4}  "
            f"{prf.precision:>9.2f}  {prf.recall:>6.2f}  {prf.f1:.2f}"
        )
    return "\n".join(lines)


def read_gold_jsonl(path: str) -> list[GoldDocument]:
    """Load a gold corpus: one {doc_id, article, triples} object per line."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                docs.append(GoldDocument(
                    doc_id=obj["doc_id"],
                    article=obj["article"],
                    gold_triples=tuple(triple_from_dict(t) for t in obj["triples"]),
                ))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad gold document: {exc}") from exc
    return docs


def write_gold_jsonl(path: str, docs: Iterable[GoldDocument]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps({
                "doc_id": doc.doc_id,
                "article": doc.article,
                "triples": [triple_to_dict(t) for t in doc.gold_triples],
            }, ensure_ascii=False) + "\n")
