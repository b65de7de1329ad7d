"""Build instruction-tuning records from labeled articles.

Labeled examples are serialized into (prompt, completion) pairs: the
prompt is the inference template with the article substituted, the
completion the numbered triple lines the parser reads back. One grammar
serves training-data generation and inference, so every record round-trips
through the parser. Also emits the fine-tuning configuration document.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable

from .output_parser import RawModelOutput, parse_output
from .prompting import render
from .schema import (
    ENTITY_OUTPUT_KEY,
    RELATION_SURFACE,
    RelationTriple,
    default_schema,
    triple_from_dict,
    triple_to_dict,
    validate_triple,
)

EMPTY_COMPLETION = "No relations found."

ORIGINS = ("synthetic", "curated")

# Characters that cannot survive the quoted line grammar (the parser
# unifies curly quotes before matching).
_UNSERIALIZABLE = '"“”„«»\n\r'

_EXAMPLE_SCHEMA = default_schema(death_host_extension=True)


class ValidationFailure(ValueError):
    pass


@dataclass
class LabeledExample:
    """One article with its gold triples, normalized to declared direction."""

    article: str
    triples: list[RelationTriple]
    origin: str = "synthetic"

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValidationFailure(f"origin must be one of {ORIGINS}, got {self.origin!r}")
        normalized = []
        for triple in self.triples:
            verdict = validate_triple(_EXAMPLE_SCHEMA, triple, mode="symmetric")
            if not verdict.valid:
                raise ValidationFailure(verdict.reason)
            if verdict.reversed_direction:
                triple = RelationTriple(subject=triple.object, relation=triple.relation,
                                        object=triple.subject)
            normalized.append(triple)
        self.triples = normalized


@dataclass(frozen=True)
class TrainingRecord:
    prompt: str
    completion: str

    def to_dict(self) -> dict:
        return {"prompt": self.prompt, "completion": self.completion}


def triple_to_line(triple: RelationTriple, index: int) -> str:
    """Serialize one triple to the numbered output-line grammar."""
    for surface in (triple.subject.surface, triple.object.surface):
        if any(ch in surface for ch in _UNSERIALIZABLE):
            raise ValidationFailure(
                f"surface {surface!r} contains quote or newline characters "
                "that cannot round-trip through the line grammar")
    subj_key = ENTITY_OUTPUT_KEY[triple.subject.etype]
    obj_key = ENTITY_OUTPUT_KEY[triple.object.etype]
    rel = RELATION_SURFACE[triple.relation]
    return (f'{index}) "{subj_key}": "{triple.subject.surface}", '
            f'"relation": "{rel}", "{obj_key}": "{triple.object.surface}"')


def to_training_record(example: LabeledExample) -> TrainingRecord:
    """Render the prompt and serialize the triples as the completion.

    The completion parses back to exactly the example's triples; an
    example with no triples gets the explicit empty sentinel.
    """
    prompt = render("inference", example.article).user
    if not example.triples:
        return TrainingRecord(prompt=prompt, completion=EMPTY_COMPLETION)
    lines = [triple_to_line(t, i) for i, t in enumerate(example.triples, start=1)]
    return TrainingRecord(prompt=prompt, completion="\n".join(lines))


def completion_triples(completion: str) -> list[RelationTriple]:
    """Parse a completion back into triples (round-trip check helper)."""
    report = parse_output(RawModelOutput(text=completion, model_id="dataset"),
                          _EXAMPLE_SCHEMA)
    return report.triples


def split(examples: list, val_fraction: float, seed: int) -> tuple[list, list]:
    """Deterministic shuffled split; validation gets ceil(N * fraction).

    round() before ceil() absorbs float noise in N * fraction so exact
    products (300 * 0.01) never spill into an extra validation row.
    """
    if not 0 <= val_fraction < 1:
        raise ValueError("val_fraction must be in [0, 1)")
    shuffled = list(examples)
    random.Random(seed).shuffle(shuffled)
    n_val = math.ceil(round(len(shuffled) * val_fraction, 9))
    return shuffled[n_val:], shuffled[:n_val]


# Fine-tune configuration: key order and values match the training setup
# this pipeline's records feed. Values are emitted verbatim.
FINETUNE_CONFIG_ITEMS: tuple[tuple[str, object], ...] = (
    ("model_type", "LlamaForCausalLM"),
    ("tokenizer_type", "LlamaTokenizer"),
    ("is_llama_derived_model", True),
    ("load_in_8bit", False),
    ("load_in_4bit", True),
    ("strict", False),
    ("val_set_size", 0.01),
    ("adapter", "qlora"),
    ("sequence_len", 4096),
    ("sample_packing", True),
    ("pad_to_sequence_len", True),
    ("lora_r", 64),
    ("lora_alpha", 32),
    ("lora_dropout", 0.05),
    ("lora_target_linear", True),
    ("gradient_accumulation_steps", 4),
    ("micro_batch_size", 1),
    ("num_epochs", 3),
    ("optimizer", "paged_adamw_32bit"),
    ("lr_scheduler", "cosine"),
    ("learning_rate", 0.0002),
    ("train_on_inputs", False),
    ("group_by_length", False),
    ("bf16", False),
    ("fp16", True),
    ("tf32", False),
    ("gradient_checkpointing", True),
    ("logging_steps", 1),
    ("flash_attention", False),
    ("warmup_steps", 10),
    ("eval_steps", 20),
    ("weight_decay", 0.0),
)

SPECIAL_TOKENS: tuple[tuple[str, str], ...] = (
    ("bos_token", "<s>"),
    ("eos_token", "</s>"),
    ("unk_token", "<unk>"),
)


def finetune_config_dict(base_model_id: str) -> dict:
    config: dict = {"base_model": base_model_id}
    config.update(FINETUNE_CONFIG_ITEMS)
    config["special_tokens"] = dict(SPECIAL_TOKENS)
    return config


def _scalar(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def emit_finetune_config(base_model_id: str) -> str:
    """Render the trainer config as YAML-style key/value text."""
    lines = [f"base_model: {base_model_id}"]
    lines += [f"{key}: {_scalar(value)}" for key, value in FINETUNE_CONFIG_ITEMS]
    lines.append("special_tokens:")
    lines += [f'  {key}: "{value}"' for key, value in SPECIAL_TOKENS]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LineError:
    line: int
    message: str


def example_to_dict(example: LabeledExample) -> dict:
    return {
        "article": example.article,
        "origin": example.origin,
        "triples": [triple_to_dict(t) for t in example.triples],
    }


def example_from_dict(obj: dict) -> LabeledExample:
    return LabeledExample(
        article=obj["article"],
        triples=[triple_from_dict(t) for t in obj["triples"]],
        origin=obj.get("origin", "synthetic"),
    )


def write_jsonl(path: str, examples: Iterable[LabeledExample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for example in examples:
            fh.write(json.dumps(example_to_dict(example), ensure_ascii=False) + "\n")


def read_jsonl(path: str) -> tuple[list[LabeledExample], list[LineError]]:
    """Read a corpus, collecting bad lines instead of raising."""
    examples: list[LabeledExample] = []
    errors: list[LineError] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                examples.append(example_from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                errors.append(LineError(lineno, str(exc)))
    return examples, errors
