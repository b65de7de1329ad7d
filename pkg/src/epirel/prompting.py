"""Render the three canonical prompts: synthesis, annotation, inference.

Templates live as plain-text files under ``templates/`` so they can be
audited without reading code. Rendering only substitutes the single
``{content}`` placeholder; nothing else is transformed. Digests over the
LF-normalized template bytes guard against silent drift.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

PLACEHOLDER = "{content}"

# template id -> (system file or None, user/template file)
_TEMPLATE_FILES: dict[str, tuple[str | None, str]] = {
    "synthesis": ("synthesis.system.txt", "synthesis.user.txt"),
    "annotation": ("annotation.system.txt", "annotation.user.txt"),
    "inference": (None, "inference.txt"),
}

TEMPLATE_IDS = tuple(_TEMPLATE_FILES)


class UnknownTemplate(KeyError):
    pass


class MissingArticle(ValueError):
    pass


class UnexpectedArticle(ValueError):
    pass


@dataclass(frozen=True)
class RenderedPrompt:
    """A ready-to-send prompt; ``system`` is None for single-text templates."""

    system: str | None
    user: str

    @property
    def full_text(self) -> str:
        return f"{self.system}\n{self.user}" if self.system else self.user


def _read_template_file(name: str) -> str:
    text = resources.files(__package__).joinpath("templates", name).read_text("utf-8")
    return text.replace("\r\n", "\n").replace("\r", "\n")


@lru_cache(maxsize=None)
def _load(template_id: str) -> tuple[str | None, str]:
    if template_id not in _TEMPLATE_FILES:
        raise UnknownTemplate(template_id)
    system_file, user_file = _TEMPLATE_FILES[template_id]
    system = _read_template_file(system_file) if system_file else None
    user = _read_template_file(user_file)
    expects_placeholder = template_id != "synthesis"
    if user.count(PLACEHOLDER) != (1 if expects_placeholder else 0):
        raise ValueError(f"template {template_id!r} has wrong placeholder count")
    return system, user


def render(template_id: str, article: str | None = None) -> RenderedPrompt:
    """Substitute the article into a template.

    ``synthesis`` takes no article; ``annotation`` and ``inference``
    require one (empty string is allowed).
    """
    system, user = _load(template_id)
    if template_id == "synthesis":
        if article is not None:
            raise UnexpectedArticle("synthesis template takes no article")
        return RenderedPrompt(system=system, user=user)
    if article is None:
        raise MissingArticle(f"{template_id} template requires an article")
    return RenderedPrompt(system=system, user=user.replace(PLACEHOLDER, article))


def template_digest(template_id: str) -> str:
    """SHA-256 over the template's LF-normalized bytes (system NUL user)."""
    system, user = _load(template_id)
    h = hashlib.sha256()
    h.update((system or "").encode("utf-8"))
    h.update(b"\x00")
    h.update(user.encode("utf-8"))
    return h.hexdigest()
