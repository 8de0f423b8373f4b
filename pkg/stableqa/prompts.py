"""Few-shot prompt registry and rendering."""
from functools import lru_cache
from typing import Dict, List, Optional

import srsly
from jinja2 import Template

from .constants import PROMPT_TEMPLATE_PATH, PROMPTS_FOLDER
from .errors import PromptInputError, UnknownTaskError
from .modules import get_profile
from .types import PromptTemplate

PLACEHOLDER = "[INPUT]"


@lru_cache(maxsize=None)
def templates() -> Dict[str, PromptTemplate]:
    found = {}
    for path in sorted(PROMPTS_FOLDER.glob("*.yml")):
        for name, body in srsly.read_yaml(path).items():
            found[name] = PromptTemplate(id=name, **body)
    return found


def get_template(name: str) -> PromptTemplate:
    known = templates()
    if name not in known:
        raise UnknownTaskError(name, what="prompt template")
    return known[name]


def task_template(task: str, role: str = "context") -> Optional[PromptTemplate]:
    """The template a task uses for ``role`` (context, query or gender), if any."""
    name = getattr(get_profile(task).prompts, role)
    return get_template(name) if name else None


@lru_cache(maxsize=None)
def _skeleton(name: str) -> str:
    prompt = get_template(name)
    template = Template(PROMPT_TEMPLATE_PATH.read_text(encoding="utf8"), trim_blocks=True)
    return template.render(
        preamble=prompt.preamble,
        examples=prompt.examples,
        layout=prompt.layout,
        input_label=prompt.input_label,
        output_label=prompt.output_label,
        final_label=prompt.final_output_label or prompt.output_label,
    )


def render_prompt(template, text: str) -> str:
    """Fill the input slot of a prompt. ``template`` is a template or its name.

    The input is placed verbatim; only an empty input is refused.
    """
    name = template.id if isinstance(template, PromptTemplate) else template
    if not text or not text.strip():
        raise PromptInputError(f"empty input for prompt {name!r}")
    head, _, tail = _skeleton(name).rpartition(PLACEHOLDER)
    return head + text + tail


def numbered(sentences: List[str]) -> str:
    """Story as the whole-story prompts for spatial tasks present it."""
    return "\n".join(f"Sentence {i}: {s}" for i, s in enumerate(sentences, start=1))
