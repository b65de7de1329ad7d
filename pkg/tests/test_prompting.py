from __future__ import annotations

import re

import pytest

from epirel.prompting import (
    MissingArticle,
    RenderedPrompt,
    UnexpectedArticle,
    UnknownTemplate,
    render,
    template_digest,
)
from epirel.schema import RELATION_SURFACE, RelationType

SYNTHESIS_SYSTEM = ("You are an AI content creator who helps to write news about "
                    "epidemic around the world.")
ANNOTATION_SYSTEM = ("You are a smart and intelligent Relation Extraction (RE) system "
                     "for diseases information.")

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

# Pinned at first canonicalization; any change to the template files is a
# deliberate act that must update these.
DIGESTS = {
    "synthesis": "6146f66034e381aa0121d0d4e0b290bc67a2a8ae6289b96b04846f792d3f8f13",
    "annotation": "2034749ece002ec02b834219101c5d295032f326bebf1a2e5fcd7462c404f0b5",
    "inference": "5b802919ed06771810e6634d79313f04003b59bc9255196c6bbe9a8516dba396",
}


class TestRender:
    def test_synthesis_system_text(self):
        prompt = render("synthesis")
        assert prompt.system.strip() == SYNTHESIS_SYSTEM

    def test_synthesis_rejects_article(self):
        with pytest.raises(UnexpectedArticle):
            render("synthesis", "an article")

    def test_annotation_contains_relation_list_and_article_slot(self):
        prompt = render("annotation", "X")
        assert prompt.system.strip() == ANNOTATION_SYSTEM
        assert '- "caused by" is between: disease - pathogen' in prompt.user
        assert prompt.user.rstrip("\n").endswith("Article: X\nOutput:")

    def test_annotation_requires_article(self):
        with pytest.raises(MissingArticle):
            render("annotation")

    def test_inference_accepts_empty_article(self):
        prompt = render("inference", "")
        assert prompt.system is None
        assert prompt.user.rstrip("\n").endswith("### Response:")

    def test_inference_requires_article(self):
        with pytest.raises(MissingArticle):
            render("inference")

    def test_unknown_template(self):
        with pytest.raises(UnknownTemplate):
            render("zero-shot", "x")

    def test_rendering_is_deterministic(self):
        assert render("annotation", "same text") == render("annotation", "same text")
        assert render("synthesis") == render("synthesis")

    def test_placeholder_fully_substituted(self):
        prompt = render("inference", "Some outbreak article.")
        assert "{content}" not in prompt.user
        assert "Some outbreak article." in prompt.user

    def test_full_text_joins_system_and_user(self):
        prompt = RenderedPrompt(system="sys", user="usr")
        assert prompt.full_text == "sys\nusr"
        assert RenderedPrompt(system=None, user="usr").full_text == "usr"


class TestTemplateStructure:
    def test_inference_markers_once_in_order(self):
        text = render("inference", "A").user
        assert text.count("### Instruction:") == 1
        assert text.count("### Response:") == 1
        assert text.index("### Instruction:") < text.index("### Response:")

    def test_relation_list_lines_in_annotation_and_inference(self):
        annotation = render("annotation", "A").user
        inference = render("inference", "A").user
        for line in RELATION_LIST_LINES:
            assert line in annotation
            assert line in inference

    def test_relation_list_matches_schema_surfaces(self):
        """The template's quoted relation names must equal the schema's."""
        annotation = render("annotation", "A").user
        quoted = re.findall(r'^- "([^"]+)" is between:', annotation, re.M)
        assert quoted == [RELATION_SURFACE[r] for r in RelationType]

    def test_annotation_embeds_worked_example(self, example_block):
        annotation = render("annotation", "A").user
        assert example_block in annotation
        assert "Laos reports two H5N1 avian influenza poultry outbreaks" in annotation


class TestDigests:
    @pytest.mark.parametrize("template_id", list(DIGESTS))
    def test_pinned_digest(self, template_id):
        assert template_digest(template_id) == DIGESTS[template_id]

    def test_digest_stable_across_calls(self):
        assert template_digest("synthesis") == template_digest("synthesis")

    def test_digests_distinct(self):
        assert len(set(DIGESTS.values())) == 3

    def test_digest_unknown_template(self):
        with pytest.raises(UnknownTemplate):
            template_digest("nonesuch")
