"""Acceptance suite: one test per criterion, one [PASS]/[FAIL] line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Derived expectations are computed by independent oracles inside
this module (brute-force matching, hand enumeration), never by the code
under test.
"""

from __future__ import annotations

import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

from fastapi.testclient import TestClient

from epirel import dataset, evaluation
from epirel.annotate import locate_entities
from epirel.cli import main as cli_main
from epirel.evaluation import GoldDocument, evaluate_corpus
from epirel.output_parser import (
    ParseReport,
    RawModelOutput,
    parse_output,
    report_from_json,
    report_to_dict,
    report_to_json,
)
from epirel.prompting import render, template_digest
from epirel.schema import (
    DEATH_HOST_PAIR,
    DEFAULT_PAIRS,
    Entity,
    EntityType,
    RelationTriple,
    RelationType,
    default_schema,
)
from epirel.service import create_app

DATA_DIR = Path(__file__).parent / "data"


@contextmanager
def criterion(name: str):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name} ({time.perf_counter() - started:.2f}s)")


# --------------------------------------------------------------------------
# 1. Parser golden test


def test_parser_golden(example_block):
    with criterion("parser golden: worked block -> 4 triples + 1 rejection"):
        started = time.perf_counter()
        schema = default_schema()
        report = parse_output(RawModelOutput(example_block, "golden"), schema)
        expected = json.loads((DATA_DIR / "worked_example_report.json").read_text("utf-8"))
        assert report_to_dict(report) == expected
        assert len(report.triples) == 4
        assert len(report.rejected) == 1

        extended = parse_output(RawModelOutput(example_block, "golden"),
                                default_schema(death_host_extension=True))
        assert len(extended.triples) == 5
        assert not extended.rejected
        assert time.perf_counter() - started < 1.0


# --------------------------------------------------------------------------
# 2. Published-score arithmetic consistency
#
# Published precision/recall/F1 rows for the two registry models.

REPORTED_SCORES = [
    ("Open-Orca-13b", "NER", 0.93, 0.66, 0.77),
    ("Open-Orca-13b", "RE", 0.88, 0.88, 0.88),
    ("Mythical-Destroyer-13b", "NER", 0.96, 0.57, 0.71),
    ("Mythical-Destroyer-13b", "RE", 0.97, 0.97, 0.97),
]


def test_reported_scores_arithmetic_consistency():
    # Known discrepancy: the Mythical-Destroyer NER row reports F1 = 0.71,
    # but f1(0.96, 0.57) = 0.71529..., which misses the stated 0.005
    # tolerance by ~0.0003 (it is consistent only under truncation, not
    # rounding). The tolerance is asserted as stated rather than widened
    # to make this row pass.
    with criterion("reported scores: |f1(P,R) - F1| <= 0.005 on all four rows"):
        for model, eval_name, p, r, f in REPORTED_SCORES:
            delta = abs(evaluation.f1(p, r) - f)
            assert delta <= 0.005, (
                f"{model} {eval_name}: f1({p}, {r}) = {evaluation.f1(p, r):.6f} "
                f"differs from reported {f} by {delta:.6f} > 0.005"
            )


# --------------------------------------------------------------------------
# 3. Metric oracle equivalence
#
# Brute-force oracle: independent normalization, list-based deduplication,
# and exhaustive unique matching by pairwise enumeration.

_ORACLE_STRIP = ".,;:!?\"'“”‘’ \t\n\r"


def _oracle_norm(s: str) -> str:
    out = " ".join(s.split()).casefold()
    while out and out[0] in _ORACLE_STRIP:
        out = out[1:]
    while out and out[-1] in _ORACLE_STRIP:
        out = out[:-1]
    return out


def _same_entity(a: Entity, b: Entity) -> bool:
    return a.etype is b.etype and _oracle_norm(a.surface) == _oracle_norm(b.surface)


def _dedupe_entities(entities):
    out = []
    for e in entities:
        if not any(_same_entity(e, seen) for seen in out):
            out.append(e)
    return out


def _triples_match(a: RelationTriple, b: RelationTriple) -> bool:
    if a.relation is not b.relation:
        return False
    straight = _same_entity(a.subject, b.subject) and _same_entity(a.object, b.object)
    crossed = _same_entity(a.subject, b.object) and _same_entity(a.object, b.subject)
    return straight or crossed


def _dedupe_triples(triples):
    out = []
    for t in triples:
        if not any(_triples_match(t, seen) for seen in out):
            out.append(t)
    return out


def oracle_ner(gold_entities, pred_entities):
    gold = _dedupe_entities(gold_entities)
    pred = _dedupe_entities(pred_entities)
    used = set()
    matched_gold = []
    for g in gold:
        for i, p in enumerate(pred):
            if i not in used and _same_entity(g, p):
                used.add(i)
                matched_gold.append(g)
                break
    tp = len(matched_gold)
    return tp, len(pred) - tp, len(gold) - tp, matched_gold


def oracle_re(gold_triples, pred_triples, recognized_entities):
    def recognized(t):
        return (any(_same_entity(t.subject, m) for m in recognized_entities)
                and any(_same_entity(t.object, m) for m in recognized_entities))

    scope_gold = [t for t in _dedupe_triples(gold_triples) if recognized(t)]
    scope_pred = [t for t in _dedupe_triples(pred_triples) if recognized(t)]
    used = set()
    tp = 0
    for p in scope_pred:
        for j, g in enumerate(scope_gold):
            if j not in used and _triples_match(p, g):
                used.add(j)
                tp += 1
                break
    return tp, len(scope_pred) - tp, len(scope_gold) - tp


_BASE_WORDS = ["ebola", "h5n1", "congo", "laos", "fever", "cough", "may 2021",
               "3,000", "500", "nurses", "children", "cholera", "sars-cov-2"]


def _decorated(rng: random.Random, base: str) -> str:
    s = base
    if rng.random() < 0.5:
        s = s.upper() if rng.random() < 0.5 else s.title()
    if rng.random() < 0.3:
        s = "  " + s
    if rng.random() < 0.3:
        s = s + "."
    if rng.random() < 0.2:
        s = s.replace(" ", "  ")
    return s if s.strip(_ORACLE_STRIP).strip() else base


def _random_entity(rng: random.Random, pool) -> Entity:
    etype, base = rng.choice(pool)
    return Entity(etype, _decorated(rng, base))


def _random_doc(rng: random.Random, doc_id: str):
    pool = [(rng.choice(list(EntityType)), w)
            for w in rng.sample(_BASE_WORDS, rng.randint(2, 8))]
    relations = list(RelationType)

    def random_triples(n):
        return [RelationTriple(_random_entity(rng, pool), rng.choice(relations),
                               _random_entity(rng, pool))
                for _ in range(n)]

    gold = GoldDocument(doc_id=doc_id, article="synthetic",
                        gold_triples=tuple(random_triples(rng.randint(0, 6))))
    pred = ParseReport(triples=random_triples(rng.randint(0, 6)))
    return gold, pred


def test_metric_oracle_equivalence():
    with criterion("metric oracle: 200 random corpora match brute force exactly"):
        started = time.perf_counter()
        rng = random.Random(20260810)
        for corpus_idx in range(200):
            docs = [_random_doc(rng, f"doc{i}") for i in range(rng.randint(1, 5))]
            report = evaluate_corpus(docs)

            exp_ner = [0, 0, 0]
            exp_re = [0, 0, 0]
            for gold, pred in docs:
                gold_entities = [e for t in gold.gold_triples
                                 for e in (t.subject, t.object)]
                pred_entities = [e for t in pred.triples for e in (t.subject, t.object)]
                tp, fp, fn, matched = oracle_ner(gold_entities, pred_entities)
                exp_ner = [exp_ner[0] + tp, exp_ner[1] + fp, exp_ner[2] + fn]
                rtp, rfp, rfn = oracle_re(list(gold.gold_triples), pred.triples, matched)
                exp_re = [exp_re[0] + rtp, exp_re[1] + rfp, exp_re[2] + rfn]

            got_ner = [report.ner.tp, report.ner.fp, report.ner.fn]
            got_re = [report.re.tp, report.re.fp, report.re.fn]
            assert got_ner == exp_ner, f"NER mismatch on corpus {corpus_idx}"
            assert got_re == exp_re, f"RE mismatch on corpus {corpus_idx}"
        assert time.perf_counter() - started < 10.0


# --------------------------------------------------------------------------
# 4. Round-trip properties

_SURFACES = ["H1N1", "Ebola virus", "fever and cough", "Saravane province",
             "3,000", "13 October 2020", "one-year-old female", "SARS-CoV-2",
             "27", "Maharashtra", "swine flu", "today", "more than 500 birds",
             "productive cough, difficulty breathing and runny nose"]


def _random_example(rng: random.Random) -> dataset.LabeledExample:
    pairs = list(DEFAULT_PAIRS) + [DEATH_HOST_PAIR]
    triples = []
    for _ in range(rng.randint(0, 6)):
        st, rel, ot = rng.choice(pairs)
        triples.append(RelationTriple(Entity(st, rng.choice(_SURFACES)), rel,
                                      Entity(ot, rng.choice(_SURFACES))))
    return dataset.LabeledExample(article=f"outbreak report {rng.random()}",
                                  triples=triples)


def test_round_trip_properties():
    with criterion("round trips: 500 training records + report JSON identity"):
        started = time.perf_counter()
        rng = random.Random(99)
        for _ in range(500):
            example = _random_example(rng)
            record = dataset.to_training_record(example)
            recovered = dataset.completion_triples(record.completion)
            assert recovered == example.triples

        schema = default_schema()
        for _ in range(50):
            example = _random_example(rng)
            completion = dataset.to_training_record(example).completion
            report = parse_output(RawModelOutput(completion, "x"), schema)
            restored = report_from_json(report_to_json(report))
            assert restored.triples == report.triples
        assert time.perf_counter() - started < 10.0


# --------------------------------------------------------------------------
# 5. Prompt fidelity

ANCHOR_SYNTHESIS = ("You are an AI content creator who helps to write news about "
                    "epidemic around the world.")
ANCHOR_ANNOTATION = ("You are a smart and intelligent Relation Extraction (RE) "
                     "system for diseases information.")
RELATION_LIST_LINES = [
    '- "located at" is between: disease - location, symptom/syndrome - location, '
    'case number - location',
    '- "occurred on" is between: disease - date, symptom/syndrome - date, '
    'case number - date',
    '- "are symptoms of" is between: disease - symptom/syndrome',
    '- "deaths of" is between: disease - death numbers',
    '- "cases of" is between: disease - case numbers, symptom/syndrome - case numbers',
    '- "caused by" is between: disease - pathogen',
    '- "affected by" is between: people - disease',
]
PINNED_DIGESTS = {
    "synthesis": "6146f66034e381aa0121d0d4e0b290bc67a2a8ae6289b96b04846f792d3f8f13",
    "annotation": "2034749ece002ec02b834219101c5d295032f326bebf1a2e5fcd7462c404f0b5",
    "inference": "5b802919ed06771810e6634d79313f04003b59bc9255196c6bbe9a8516dba396",
}


def test_prompt_fidelity():
    with criterion("prompt fidelity: anchors, relation list, pinned digests"):
        synthesis = render("synthesis")
        annotation = render("annotation", "ARTICLE BODY")
        inference = render("inference", "ARTICLE BODY")
        assert ANCHOR_SYNTHESIS in synthesis.system
        assert ANCHOR_ANNOTATION in annotation.system
        for line in RELATION_LIST_LINES:
            assert line in annotation.user
            assert line in inference.user
        for template_id, digest in PINNED_DIGESTS.items():
            assert template_digest(template_id) == digest


# --------------------------------------------------------------------------
# 6. Fine-tune config emission

EXPECTED_CONFIG_KEYS = {
    "model_type", "tokenizer_type", "is_llama_derived_model", "load_in_8bit",
    "load_in_4bit", "strict", "val_set_size", "adapter", "sequence_len",
    "sample_packing", "pad_to_sequence_len", "lora_r", "lora_alpha",
    "lora_dropout", "lora_target_linear", "gradient_accumulation_steps",
    "micro_batch_size", "num_epochs", "optimizer", "lr_scheduler",
    "learning_rate", "train_on_inputs", "group_by_length", "bf16", "fp16",
    "tf32", "gradient_checkpointing", "logging_steps", "flash_attention",
    "warmup_steps", "eval_steps", "weight_decay", "special_tokens",
}


def test_config_emission():
    with criterion("config emission: full key set with exact values"):
        config = dataset.finetune_config_dict("base-13b")
        assert set(config) == EXPECTED_CONFIG_KEYS | {"base_model"}
        assert config["lora_r"] == 64
        assert config["val_set_size"] == 0.01
        assert config["num_epochs"] == 3
        assert config["learning_rate"] == 0.0002
        assert config["optimizer"] == "paged_adamw_32bit"
        text = dataset.emit_finetune_config("base-13b")
        for needle in ("lora_r: 64", "val_set_size: 0.01", "num_epochs: 3",
                       "learning_rate: 0.0002", "optimizer: paged_adamw_32bit"):
            assert needle in text


# --------------------------------------------------------------------------
# 7. Split arithmetic


def test_split_arithmetic():
    with criterion("split: 300 examples at 0.01 -> 297/3, seed-deterministic"):
        examples = [f"example-{i}" for i in range(300)]
        train, val = dataset.split(examples, 0.01, seed=7)
        assert (len(train), len(val)) == (297, 3)
        train2, val2 = dataset.split(examples, 0.01, seed=7)
        assert train == train2 and val == val2
        assert sorted(train + val) == sorted(examples)


# --------------------------------------------------------------------------
# 8. Annotation soundness

_WORDS = ["outbreak", "reported", "village", "health", "officials", "confirmed",
          "cases", "in", "the", "province", "于", "疫情", "déjà", "naïve"]


def _random_article_fixture(rng: random.Random):
    words = [rng.choice(_WORDS) for _ in range(rng.randint(5, 40))]
    surfaces = rng.sample(_SURFACES, rng.randint(1, 5))
    for s in surfaces:
        pos = rng.randint(0, len(words))
        mutated = s.upper() if rng.random() < 0.3 else s
        words.insert(pos, mutated)
    article = " ".join(words)
    entities = [Entity(rng.choice(list(EntityType)), s) for s in surfaces]
    entities.append(Entity(EntityType.LOCATION, "never-present-surface-xyz"))
    return article, entities


def _collapse_fold(s: str) -> str:
    return " ".join(s.split()).casefold()


def test_annotation_soundness():
    with criterion("annotation: 100 random fixtures, in-bounds disjoint spans"):
        rng = random.Random(4242)
        for _ in range(100):
            article, entities = _random_article_fixture(rng)
            doc = locate_entities(article, entities)
            for span in doc.spans:
                assert 0 <= span.start < span.end <= len(article)
                assert (_collapse_fold(article[span.start:span.end])
                        == _collapse_fold(span.entity.surface))
            for i, a in enumerate(doc.spans):
                for b in doc.spans[i + 1:]:
                    assert a.end <= b.start or b.end <= a.start

        # multi-byte prefix: offsets must count code points
        article = "疫情通报——Ebola confirmed in Congo"
        doc = locate_entities(article, [Entity(EntityType.INFECTIOUS_DISEASE, "Ebola"),
                                        Entity(EntityType.LOCATION, "Congo")])
        by_surface = {span.entity.surface: span for span in doc.spans}
        ebola = by_surface["Ebola"]
        assert article[ebola.start:ebola.end] == "Ebola"
        assert ebola.start == article.index("Ebola")


# --------------------------------------------------------------------------
# 9. End-to-end stub run

E2E_ARTICLE = ("Officials reported an avian influenza outbreak in Saravane "
               "province on 13 October 2020.")


def test_end_to_end_stub(tmp_path, capsys, example_block):
    with criterion("end to end: service + CLI agree against the stub backend"):
        started = time.perf_counter()
        with TestClient(create_app()) as tc:
            resp = tc.post("/api/extract", json={
                "article": E2E_ARTICLE, "model": "openorca", "max_tokens": 512})
            assert resp.status_code == 200
            body = resp.json()
            assert body["raw"] == example_block
            assert len(body["relation_table"]) == 4
            for span in body["annotated"]["spans"]:
                assert 0 <= span["start"] < span["end"] <= len(E2E_ARTICLE)
                assert (_collapse_fold(E2E_ARTICLE[span["start"]:span["end"]])
                        == _collapse_fold(span["text"]))

        article_path = tmp_path / "article.txt"
        article_path.write_text(E2E_ARTICLE, encoding="utf-8")
        code = cli_main(["extract", "--input", str(article_path), "--format", "json",
                         "--model", "openorca", "--max-tokens", "512"])
        assert code == 0
        cli_bytes = capsys.readouterr().out.rstrip("\n").encode("utf-8")
        api_bytes = json.dumps(body["relations"], ensure_ascii=False,
                               indent=2).encode("utf-8")
        assert cli_bytes == api_bytes
        assert time.perf_counter() - started < 5.0
