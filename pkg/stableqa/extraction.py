"""Instance to FactSet: the semantic parsing half of the pipeline."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

from .constants import CONFIG
from .engine import render
from .facts import FactSet, parse_response, scan_atoms
from .modules import get_profile
from .prompts import numbered
from .types import FactSource, Instance, TaskProfile


@dataclass(frozen=True)
class Request:
    template: str
    text: str
    source: FactSource
    sentence: Optional[int] = None
    whole: bool = False


def story_text(task: str, story: List[str]) -> str:
    """The story as the task's whole-story prompt expects it."""
    if task == "babi_17":
        return numbered(story)
    if task.startswith("clutrr"):
        return "  ".join(story)
    return "\n".join(story)


def context_requests(profile: TaskProfile, instance: Instance, strategy: Optional[str] = None) -> List[Request]:
    template = profile.prompts.context
    if template is None:
        return []
    strategy = strategy or profile.strategy
    if strategy == "whole-story":
        return [Request(template, story_text(profile.task, instance.story), "context", whole=True)]
    return [Request(template, s, "context", i) for i, s in enumerate(instance.story) if s.strip()]


def query_requests(profile: TaskProfile, instance: Instance, context: FactSet) -> List[Request]:
    template = profile.prompts.query
    if template is None or not instance.query.strip():
        return []
    if profile.query_strategy == "per-sentence":
        lines = [s for s in instance.query.splitlines() if s.strip()]
        return [Request(template, s, "query", i) for i, s in enumerate(lines)]
    text = instance.query
    if profile.task == "babi_17":
        objects = " ".join(f"{render(a)}." for a in context.atoms("context") if a.name == "obj")
        text = f"Objects: {objects}\nSentence: {instance.query}"
    return [Request(template, text, "query")]


def gender_requests(profile: TaskProfile, instance: Instance) -> List[Request]:
    if profile.prompts.gender is None:
        return []
    return [Request(profile.prompts.gender, story_text(profile.task, instance.story), "gender", whole=True)]


def side_facts(instance: Instance) -> FactSet:
    """Facts that come with the instance instead of from a parser."""
    from .datasets import grid_to_facts

    facts = FactSet()
    if instance.grid is not None:
        facts.extend(grid_to_facts(instance.grid))
    for name, kind in instance.inventory.items():
        facts.add(f'feature("{name}", {kind})', source="side")
    if instance.query_pair is not None:
        a, b = instance.query_pair
        facts.add(f'query("{a}", "{b}")', source="side")
    return facts


def _run(backend, request: Request) -> FactSet:
    response = backend.respond(request.template, request.text)
    if request.whole:
        # Atoms of a whole-story parse come back in story order; their position stands in
        # for the sentence index, so a move repeated later in the story is kept twice.
        parsed = FactSet()
        for i, (span, atom) in enumerate(scan_atoms(response or "")):
            parsed.add(atom, source=request.source, sentence=i, span=span)
    else:
        parsed = parse_response(response, source=request.source, sentence=request.sentence)
    if not len(parsed):
        parsed.mark_unmatched(request.sentence, request.text)
    return parsed


def run_requests(backend, requests: List[Request], concurrency: Optional[int] = None) -> FactSet:
    """Send requests through ``backend`` and union the results in request order."""
    concurrency = concurrency or CONFIG.backend.concurrency
    facts = FactSet()
    if not requests:
        return facts
    if concurrency <= 1 or len(requests) == 1:
        results = [_run(backend, r) for r in requests]
    else:
        with ThreadPoolExecutor(max_workers=min(concurrency, len(requests))) as pool:
            results = list(pool.map(lambda r: _run(backend, r), requests))
    for result in results:
        facts.extend(result)
    return facts


def extract_facts(instance: Instance, backend, strategy: Optional[str] = None, concurrency: Optional[int] = None) -> FactSet:
    """Parse story, query and (for kinship) genders of ``instance`` into one FactSet.

    ``strategy`` overrides the profile's parse strategy (``per-sentence`` or ``whole-story``)
    for the context template. Per-sentence requests run concurrently.
    """
    profile = get_profile(instance.task)
    facts = run_requests(backend, context_requests(profile, instance, strategy) + gender_requests(profile, instance), concurrency)
    facts.extend(run_requests(backend, query_requests(profile, instance, facts), concurrency))
    facts.extend(side_facts(instance))
    return facts
