"""Run a task end to end, score it, and explain what went wrong where it failed."""
import datetime as dt
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import tqdm

from .completion import OracleBackend, make_backend
from .constants import CONFIG, ERROR_CATEGORIES
from .datasets import load_instances
from .engine import SAT, UNSAT, Function, LogicError, SolveResult, SolveTimeout, atom, ground, render, solve, solve_external
from .errors import AmbiguousAnswerError, StableQAError
from .extraction import extract_facts, story_text
from .facts import FactSet, label
from .modules import Composition, candidates, compose, extract_answer, get_profile, matches, module_versions
from .oracle import GRAMMARS, oracle_parse
from .pickplace import check_plan, from_instance
from .prompts import task_template
from .simulators import OFFSETS, family_from_facts, family_relation, replay_gscan, stepgame_label
from .types import Answer, EvalReport, Instance, InstanceRecord, RunConfig
from .utils import console


@dataclass
class Outcome:
    """What the reasoner made of one FactSet."""

    result: SolveResult
    composition: Composition
    answer: Answer
    candidates: List[str] = field(default_factory=list)


# -- reasoning ----------------------------------------------------------------------------


def first_satisfiable(holds: Callable[[int], bool], upper: int, lower: int = 0) -> Optional[int]:
    """Smallest horizon in ``lower..upper`` where ``holds`` is true, by galloping then bisection.

    Assumes ``holds`` is monotone: once a plan fits, it fits every longer horizon too.
    """
    lower = min(max(lower, 0), upper)
    if holds(lower):
        return lower
    lo, step = lower, 1
    hi = min(lower + step, upper)
    while not holds(hi):
        if hi >= upper:
            return None
        lo, step = hi, step * 2
        hi = min(lower + step, upper)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def walk_floor(facts: FactSet) -> int:
    """Horizon below which the agent cannot stand on any object of the grid."""
    positions = {a.args[0]: a.args[1] for a in facts.atoms() if a.name == "pos" and a.arity == 2}
    start = positions.pop(Function("agent"), None)
    if start is None or not positions:
        return 0
    distances = [
        sum(abs(x - y) for x, y in zip(start.args, cell.args))
        for cell in positions.values()
        if cell.arity == start.arity and all(isinstance(v, int) for v in cell.args + start.args)
    ]
    return max(min(distances) - 1, 0) if distances else 0


def _solve(
    composition: Composition,
    config: RunConfig,
    assumptions: Sequence[Tuple[Function, bool]] = (),
    optimize: bool = True,
) -> SolveResult:
    if config.solver == "external":
        text = composition.text
        text += "".join(f":- {'not ' if truth else ''}{render(a)}.\n" for a, truth in assumptions)
        return solve_external(text, CONFIG.engine.solver_cmd, max_models=config.max_models, timeout=config.timeout)
    keep = get_profile(composition.task).keep or None
    program = ground(composition.program, cap=CONFIG.engine.rule_cap, keep=keep)
    return _search(program, config, assumptions, optimize)


def _search(program, config: RunConfig, assumptions: Sequence[Tuple[Function, bool]] = (), optimize: bool = True) -> SolveResult:
    """Solve a ground program; when the budget runs out, the best model found so far stands."""
    max_models = config.max_models if optimize else 1
    try:
        return solve(program, max_models=max_models, optimize=optimize, timeout=config.timeout, assumptions=assumptions)
    except SolveTimeout as err:
        if err.incumbent is None:
            raise
        console.log(f"Solver budget ran out after {err.elapsed:.1f}s; keeping the best model found.")
        return SolveResult(SAT, [err.incumbent], err.best_cost, stats={"seconds": err.elapsed, "timed_out": 1})


def reason(task: str, facts: FactSet, sentences: Optional[int] = None, config: Optional[RunConfig] = None) -> Tuple[SolveResult, Composition]:
    """Compose, ground and solve. Planning tasks grow their horizon until a plan fits.

    Horizons are tried for satisfiability only; optimization runs once, at the smallest
    horizon that admits a plan.
    """
    config = config or RunConfig(task=task)
    horizon = get_profile(task).horizon
    if horizon is None:
        composition = compose(task, facts, sentences)
        return _solve(composition, config), composition
    if horizon.mode == "assume":
        composition = compose(task, facts, sentences)
        if config.solver == "external":
            # The module's weak constraint on maxtime already picks the shortest plan.
            return _solve(composition, config), composition
        keep = get_profile(task).keep or None
        program = ground(composition.program, cap=CONFIG.engine.rule_cap, keep=keep)

        def fits(h: int) -> bool:
            return _search(program, config, [(atom("maxtime", h), True)], optimize=False).satisfiable

        found = first_satisfiable(fits, horizon.max)
        if found is None:
            return SolveResult(UNSAT), composition
        composition.horizon = found
        return _search(program, config, [(atom("maxtime", found), True)]), composition

    compositions: Dict[int, Composition] = {}

    def satisfiable_at(h: int) -> bool:
        if h not in compositions:
            compositions[h] = compose(task, facts, sentences, horizon=h)
        return _solve(compositions[h], config, optimize=False).satisfiable

    found = first_satisfiable(satisfiable_at, horizon.max, walk_floor(facts))
    if found is None:
        return SolveResult(UNSAT), compositions[horizon.max]
    return _solve(compositions[found], config), compositions[found]


def answer_for(instance: Instance, facts: FactSet, config: Optional[RunConfig] = None) -> Outcome:
    result, composition = reason(instance.task, facts, len(instance.story), config)
    try:
        answer = extract_answer(instance.task, result)
    except AmbiguousAnswerError as err:
        kind = get_profile(instance.task).answer
        answer = Answer(kind=kind, value=",".join(sorted(err.labels)), ambiguous=True, labels=err.labels)
    return Outcome(result, composition, answer, candidates(instance.task, result))


def judge(instance: Instance, answer: Answer) -> Tuple[bool, str]:
    """Whether ``answer`` counts as correct. Plans are replayed instead of compared to gold text."""
    if answer.ambiguous or answer.abstained:
        return False, ""
    if instance.task == "pickplace":
        return check_plan(from_instance(instance), list(answer.value))
    return matches(instance.task, answer, instance.gold), ""


# -- evaluation ---------------------------------------------------------------------------


def run_instance(index: int, instance: Instance, backend, config: RunConfig) -> InstanceRecord:
    """Parse, reason and score one instance. Failures are recorded with the stage they hit."""
    started = time.perf_counter()
    record = InstanceRecord(
        index=index,
        source=instance.source,
        story=instance.story,
        query=instance.query,
        gold=instance.gold,
    )
    stage = "parse"
    try:
        facts = extract_facts(instance, backend)
        record.facts = facts.to_records()
        record.warnings = [f"no atoms for sentence {i}: {text}" for i, text in facts.unmatched]
        stage = "solve"
        outcome = answer_for(instance, facts, config)
        stage = "answer"
        record.status = outcome.result.status
        record.warnings += outcome.composition.warnings
        record.candidates = outcome.candidates
        record.ambiguous = outcome.answer.ambiguous
        record.predicted = outcome.answer.text
        record.correct, record.detail = judge(instance, outcome.answer)
        record.stage = "done"
    except (StableQAError, LogicError) as err:
        record.stage = stage
        record.status = "TIMEOUT" if isinstance(err, SolveTimeout) else "ERROR"
        record.error = f"{type(err).__name__}: {err}"
        console.log(f"[red]{instance.source}[/red] failed at {stage}: {err}")
    record.latency = round(time.perf_counter() - started, 4)
    return record


def evaluate(config: RunConfig, instances: Optional[List[Instance]] = None, backend=None, progress: bool = True) -> EvalReport:
    """Score ``config.task`` and attribute every mismatch; writes the run folder when ``config.output`` is set."""
    from .report import save_report

    get_profile(config.task)
    if instances is None:
        instances = load_instances(config.task, config.path, config.k, config.split, config.seed, config.limit)
    elif config.limit is not None:
        instances = instances[: config.limit]
    backend = backend or make_backend(config.parser, config.model, config.cache_dir, config.replay)
    console.log(f"Evaluating [bold]{config.task}[/bold] on {len(instances)} instances with the {config.parser} parser.")

    def work(pair: Tuple[int, Instance]) -> InstanceRecord:
        return run_instance(pair[0], pair[1], backend, config)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        stream = pool.map(work, enumerate(instances))
        records = list(tqdm.tqdm(stream, total=len(instances), disable=not progress))
    correct = sum(r.correct for r in records)
    report = EvalReport(
        task=config.task,
        config=config,
        config_hash=config.config_hash,
        module_versions=module_versions(config.task),
        records=records,
        accuracy=correct / len(records) if records else 0.0,
        created=dt.datetime.now().isoformat(timespec="seconds"),
    )
    attribute_errors(report, config.task, instances)
    console.log(f"Accuracy on [bold]{config.task}[/bold]: {correct}/{len(records)} ({report.accuracy:.1%})")
    if config.output:
        folder = save_report(report, config.output)
        console.log(f"Wrote run to [bold]{folder}[/bold]")
    return report


# -- attribution --------------------------------------------------------------------------


def has_oracle(task: str) -> bool:
    """Whether every prompt the task sends has a template grammar behind it.

    Grammars may cover only part of a benchmark; a partial oracle parse is still a
    usable reference because it only blames the parser when it reaches the gold answer.
    """
    used = [task_template(task, role) for role in ("context", "query", "gender")]
    return all(t.id in GRAMMARS for t in used if t is not None)


def oracle_facts(instance: Instance) -> Optional[FactSet]:
    if not has_oracle(instance.task):
        return None
    try:
        facts = extract_facts(instance, OracleBackend(), concurrency=1)
    except (StableQAError, LogicError):
        return None
    # whole-story parses only report a story with no atoms at all; list the sentences too
    known = {text for _, text in facts.unmatched}
    for role, text in _sentences(instance):
        try:
            unread = oracle_parse(instance.task, text, role=role).unmatched
        except (StableQAError, LogicError):
            continue
        for sentence, missed in unread:
            if missed not in known:
                known.add(missed)
                facts.mark_unmatched(sentence, missed)
    return facts


def _sentences(instance: Instance) -> Iterator[Tuple[str, str]]:
    """(role, text) pairs in the shape the oracle reads them."""
    profile = get_profile(instance.task)
    if profile.prompts.context:
        if profile.strategy == "whole-story":
            yield "context", story_text(instance.task, instance.story)
        else:
            yield from (("context", s) for s in instance.story)
    if profile.prompts.gender:
        yield "gender", story_text(instance.task, instance.story)
    if profile.prompts.query:
        lines = instance.query.splitlines() if profile.query_strategy == "per-sentence" else [instance.query]
        yield from (("query", line) for line in lines if line.strip())


def offending_sentence(instance: Instance, atom_text: str) -> str:
    """The sentence the oracle reads ``atom_text`` from, or empty when none does."""
    for role, text in _sentences(instance):
        try:
            found = oracle_parse(instance.task, text, role=role)
        except (StableQAError, LogicError):
            continue
        for fact in found:
            if fact.atom == atom_text:
                return fact.span or text
    return ""


def _parse_difference(instance: Instance, parsed: FactSet, reference: FactSet) -> str:
    missing = sorted(reference.atom_set() - parsed.atom_set())
    extra = sorted(parsed.atom_set() - reference.atom_set())
    if missing:
        where = offending_sentence(instance, missing[0])
        return f"{where!r}: expected {missing[0]}" + (f", got {extra[0]}" if extra else "")
    return f"unexpected {extra[0]}" if extra else ""


def _steps(task: str, predicted: str) -> List[str]:
    if task == "pickplace":
        return [line for line in predicted.splitlines() if line.strip()]
    return [x.strip() for x in predicted.split(",") if x.strip()]


def semantic_check(instance: Instance, facts: FactSet, predicted: str) -> Optional[bool]:
    """Check ``predicted`` against a reasoner-free reading of ``facts``.

    ``None`` when the task has no independent checker or the facts are out of its reach.
    """
    task = instance.task
    profile = get_profile(task)
    if task == "stepgame":
        triples = [(a.name, label(a.args[0]), label(a.args[1])) for a in facts.atoms("context") if a.name in OFFSETS and len(a.args) == 2]
        asked = [a for a in facts.atoms("query") if a.name == "query" and len(a.args) == 2]
        if not asked:
            return None
        relation = stepgame_label(triples, label(asked[0].args[0]), label(asked[0].args[1]))
        return None if relation is None else profile.surface(relation).casefold() == predicted.casefold()
    if task in ("clutrr", "clutrr_s"):
        if instance.query_pair is None:
            return None
        statements = [(a.name, label(a.args[0]), label(a.args[1])) for a in facts.atoms("context") if len(a.args) == 2]
        genders = {label(a.args[0]): a.name for a in facts.atoms("gender") if len(a.args) == 1}
        family = family_from_facts(statements, genders)
        if family is None:
            return None
        relation = family_relation(family, *instance.query_pair)
        return None if relation is None else relation.replace("_", "-") == predicted.casefold()
    if task == "gscan" and instance.grid is not None:
        return replay_gscan(instance.grid, instance.query, _steps(task, predicted)).ok
    if task == "pickplace":
        return check_plan(from_instance(instance), _steps(task, predicted))[0]
    return None


def attribute(record: InstanceRecord, instance: Instance, config: Optional[RunConfig] = None) -> Tuple[str, str]:
    """Category and detail for one mismatch.

    A parse that differs from the oracle's is judged first: when the oracle facts answer
    correctly the parse is to blame, otherwise the oracle outcome is what gets attributed.
    """
    parsed = FactSet(record.facts)
    reference = oracle_facts(instance)
    status, predicted, facts = record.status, record.predicted, parsed
    ambiguous, found = record.ambiguous, record.candidates
    if reference is not None and reference.atom_set() != parsed.atom_set():
        try:
            outcome = answer_for(instance, reference, config)
        except (StableQAError, LogicError) as err:
            return "reasoning-gap", f"oracle facts fail too: {err}"
        if judge(instance, outcome.answer)[0]:
            return "parse-error", _parse_difference(instance, parsed, reference)
        status, predicted, facts = outcome.result.status, outcome.answer.text, reference
        ambiguous, found = outcome.answer.ambiguous, outcome.candidates

    if ambiguous:
        return "ambiguous-gold", f"several answers: {predicted}"
    gold = instance.gold.strip().casefold()
    if len(found) > 1 and gold in {c.casefold() for c in found}:
        return "ambiguous-gold", f"gold is one of {', '.join(found)}"
    if record.stage == "parse" and reference is None:
        return "unattributed", record.error
    if record.stage != "done" and facts is parsed:
        return "reasoning-gap", record.error
    if status == UNSAT or predicted in ("", "unknown"):
        return "abstain", "no answer set" if status == UNSAT else "no answer atom"
    verdict = semantic_check(instance, facts, predicted)
    if verdict:
        return "dataset-error-candidate", f"derived {predicted!r}, gold {instance.gold!r}"
    if verdict is None and reference is None:
        return "unattributed", ""
    detail = f"derived {predicted!r}, gold {instance.gold!r}"
    if reference is not None and reference.unmatched:
        detail += f"; the oracle reads nothing from {reference.unmatched[0][1]!r}"
    return "reasoning-gap", detail


def attribute_errors(report: EvalReport, task: str, instances: Optional[Sequence[Instance]] = None) -> Dict[str, int]:
    """Label every mismatch of ``report`` with an error category; returns the histogram.

    The counts always add up to the number of mismatches.
    """
    histogram: Counter = Counter({c: 0 for c in ERROR_CATEGORIES})
    for record in report.mismatches:
        if instances is not None:
            instance = instances[record.index]
        else:
            instance = Instance(task=task, story=record.story, query=record.query, gold=record.gold, source=record.source)
        category, detail = attribute(record, instance, report.config)
        record.attribution = category
        record.detail = "; ".join(x for x in (record.detail, detail) if x)
        histogram[category] += 1
    report.histogram = dict(histogram)
    return report.histogram
