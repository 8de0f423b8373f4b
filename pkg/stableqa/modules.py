"""Knowledge module registry, task profiles, program composition and answer read-back."""
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Set, Tuple

import srsly

from .constants import CONFIG, MANIFEST_PATH, MODULES_FOLDER, PROFILES_PATH
from .engine import (
    OPTIMUM_FOUND,
    SAT,
    LogicError,
    Program,
    SolveResult,
    SolveTimeout,
    ground,
    parse_program,
    render,
    solve,
)
from .engine.grounder import body_signatures
from .engine.terms import Function, atom
from .errors import AmbiguousAnswerError, UnknownModuleError, UnknownTaskError
from .facts import FactSet, label
from .types import Answer, KnowledgeModule, TaskProfile

Signature = Tuple[str, int]


@lru_cache(maxsize=None)
def registry() -> Dict[str, KnowledgeModule]:
    """Every module in the manifest, keyed by name. Read once per process."""
    modules = {}
    for entry in srsly.read_yaml(MANIFEST_PATH)["modules"]:
        text = (MODULES_FOLDER / entry["path"]).read_text(encoding="utf8")
        modules[entry["name"]] = KnowledgeModule(text=text, **entry)
    return modules


def get_module(name: str) -> KnowledgeModule:
    modules = registry()
    if name not in modules:
        raise UnknownModuleError(name, modules)
    return modules[name]


def closure(name: str, modules: Optional[Dict[str, KnowledgeModule]] = None) -> List[KnowledgeModule]:
    """The module and everything it depends on, dependencies first."""
    modules = modules if modules is not None else registry()
    order: List[KnowledgeModule] = []
    seen: Set[str] = set()

    def visit(current: str) -> None:
        if current in seen:
            return
        seen.add(current)
        if current not in modules:
            raise UnknownModuleError(current, modules)
        for dep in modules[current].deps:
            visit(dep)
        order.append(modules[current])

    visit(name)
    return order


@lru_cache(maxsize=None)
def _parsed(name: str) -> Program:
    module = get_module(name)
    return parse_program(module.text, name=module.path)


@lru_cache(maxsize=None)
def profiles() -> Dict[str, TaskProfile]:
    raw = srsly.read_yaml(PROFILES_PATH)
    return {p["task"]: TaskProfile(**p) for p in raw["profiles"]}


def get_profile(task: str) -> TaskProfile:
    known = profiles()
    if task not in known:
        raise UnknownTaskError(task)
    return known[task]


def module_versions(task: str) -> Dict[str, str]:
    """Content digests of the modules a task reasons with, for run metadata."""
    return {m.name: m.digest[:12] for m in closure(get_profile(task).module)}


def signatures(program: Program) -> Set[Signature]:
    out = set()
    for statement in program:
        out.update(a.signature for a in statement.head_atoms())
        out.update(sig for sig, _ in body_signatures(statement))
    return {(name.lstrip("-"), arity) for name, arity in out}


# -- composition --------------------------------------------------------------------------


@dataclass
class Composition:
    """A task's modules plus timestamped facts, ready to ground."""

    task: str
    program: Program
    facts: List[Function]
    warnings: List[str] = field(default_factory=list)
    horizon: Optional[int] = None

    @property
    def text(self) -> str:
        """Source text of the whole program, for an external solver."""
        profile = get_profile(self.task)
        parts = [m.text for m in closure(profile.module)]
        parts.append("\n".join(f"{render(a)}." for a in self.facts))
        return "\n\n".join(parts) + "\n"


def timestamp(profile: TaskProfile, facts: FactSet, sentences: Optional[int] = None) -> Tuple[List[Function], Optional[int]]:
    """Apply the profile's timestamping policy. Returns the atoms and the maxtime to add."""
    atoms: List[Function] = []
    times: List[int] = []
    seen: Set[Function] = set()
    events, states = set(profile.events), set(profile.states)
    for fact in facts:
        value = facts.function(fact)
        stamped = fact.source == "context" and profile.timestamp == "sentence-index" and fact.sentence is not None
        if stamped and value.name in events:
            t = fact.sentence * profile.stride
            value = Function(value.name, value.args + (t,))
            times.append(t)
        elif stamped and value.name in states:
            t = fact.sentence * profile.stride + profile.stride - 1
            value = Function(value.name, value.args + (t,))
            times.append(t)
        elif profile.timestamp == "parser-supplied" and value.name in events and value.args:
            last = value.args[-1]
            if isinstance(last, int):
                times.append(last)
        if value not in seen:
            seen.add(value)
            atoms.append(value)
    if profile.timestamp == "sentence-index":
        count = sentences if sentences is not None else (max((f.sentence for f in facts if f.sentence is not None), default=-1) + 1)
        return atoms, max(count * profile.stride, max(times, default=-1) + 1)
    if profile.timestamp == "parser-supplied":
        return atoms, max(times, default=-1) + 1
    return atoms, None


def compose(task: str, facts: FactSet, sentences: Optional[int] = None, horizon: Optional[int] = None) -> Composition:
    """Modules of ``task`` in dependency order, then the facts with time arguments added.

    ``horizon`` adds ``maxtime(horizon)`` for tasks that plan with a growing horizon.
    Facts over predicates that no module mentions are kept and reported as warnings.
    """
    profile = get_profile(task)
    modules = closure(profile.module)
    program = Program([], name=task)
    for module in modules:
        program = program + _parsed(module.name)
    known = set().union(*(signatures(_parsed(m.name)) for m in modules))
    atoms, maxtime = timestamp(profile, facts, sentences)
    if horizon is not None and profile.horizon is not None and profile.horizon.mode == "fact":
        maxtime = horizon
    if maxtime is not None:
        atoms.append(atom("maxtime", maxtime))
    warnings = [
        f"{render(a)} matches no predicate of {profile.module} or its dependencies"
        for a in atoms
        if a.positive.signature not in known
    ]
    fact_program = parse_program("\n".join(f"{render(a)}." for a in atoms), name=f"{task}:facts")
    return Composition(task, program + fact_program, atoms, warnings, horizon)


# -- answers ------------------------------------------------------------------------------


def _action_label(term: Function) -> str:
    """Last argument of an ``action(...)`` term: the move or direction taken."""
    inner = term.args[0] if term.name == "happens" else term
    return label(inner.args[-1])


def extract_answer(task: str, result: SolveResult) -> Answer:
    """Read the task's answer predicate from the first (optimal) answer set."""
    profile = get_profile(task)
    kind = profile.answer
    if result.status not in (SAT, OPTIMUM_FOUND) or not result.answer_sets:
        return Answer(kind=kind, value="unknown", abstained=True)
    model = result.answer_sets[0]
    if kind in ("action-sequence", "plan"):
        steps = sorted(
            (a for a in model.select(profile.predicate, 2) if isinstance(a.args[1], int)),
            key=lambda a: a.args[1],
        )
        if kind == "plan":
            lines = [f"Move the {label(a.args[0].args[2])} onto the {label(a.args[0].args[3])}." for a in steps]
            return Answer(kind=kind, value=lines, labels=[str(a) for a in steps])
        moves = [profile.surface(_action_label(a)) for a in steps]
        return Answer(kind=kind, value=moves, labels=[str(a) for a in steps])
    labels = [label(a.args[0]) for a in model.select(profile.predicate, 1)]
    if kind == "item-set":
        items = sorted(profile.surface(x) for x in labels)
        return Answer(kind=kind, value=items or "nothing", labels=labels)
    if not labels:
        return Answer(kind=kind, value="unknown", abstained=True)
    if len(labels) > 1:
        raise AmbiguousAnswerError(task, labels)
    value = profile.surface(labels[0])
    if kind == "relation-label":
        value = value.replace("_", "-")
    return Answer(kind=kind, value=value, labels=labels)


def candidates(task: str, result: SolveResult) -> List[str]:
    """Values of the profile's candidate predicate, used to spot ambiguous gold labels."""
    profile = get_profile(task)
    if not profile.candidate or not result.answer_sets:
        return []
    model = result.answer_sets[0]
    return sorted({profile.surface(label(a.args[0])) for a in model.select(profile.candidate)})


def matches(task: str, answer: Answer, gold: str) -> bool:
    """Gold comparison after per-task normalization; sets compare order-insensitively."""
    if answer.abstained:
        return False
    kind = get_profile(task).answer
    if kind == "item-set":
        wanted = {x.strip().casefold() for x in gold.split(",") if x.strip()} - {"nothing"}
        got = set() if answer.value == "nothing" else {x.casefold() for x in answer.value}
        return wanted == got
    if kind == "action-sequence":
        return [x.strip().casefold() for x in gold.split(",") if x.strip()] == [x.casefold() for x in answer.value]
    if kind == "plan":
        return [x.strip() for x in gold.splitlines() if x.strip()] == list(answer.value)
    return answer.text.strip().casefold() == gold.strip().casefold()


# -- validation ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _producers(program: Program) -> Set[Signature]:
    return {(a.signature[0].lstrip("-"), a.signature[1]) for s in program for a in s.head_atoms()}


def validate_modules(modules: Optional[Dict[str, KnowledgeModule]] = None, timeout: Optional[float] = None) -> ValidationReport:
    """Parse every module with its dependencies and run each glue on its smoke facts."""
    modules = modules if modules is not None else registry()
    timeout = timeout if timeout is not None else CONFIG.engine.timeout
    report = ValidationReport()
    parsed: Dict[str, Program] = {}
    for name, module in modules.items():
        try:
            parsed[name] = parse_program(module.text, name=module.path)
        except LogicError as err:
            report.errors.append(f"{name}: {err}")
    for name, module in modules.items():
        if name not in parsed:
            continue
        try:
            members = closure(name, modules)
        except UnknownModuleError as err:
            report.errors.append(f"{name}: {err}")
            continue
        if any(m.name not in parsed for m in members):
            continue
        program = Program([], name=name)
        for member in members:
            program = program + parsed[member.name]
        _check_arities(name, program, report)
        if module.smoke is None:
            continue
        try:
            smoke = parse_program(module.smoke, name=f"{name}:smoke")
        except LogicError as err:
            report.errors.append(f"{name}: smoke facts do not parse: {err}")
            continue
        program = program + smoke
        produced = _producers(program)
        for sig in sorted({sig for s in parsed[name] for sig, _ in body_signatures(s)}):
            family = (sig[0].lstrip("-"), sig[1])
            if family not in produced:
                report.warnings.append(f"{name}: {family[0]}/{family[1]} is read but never defined")
        _smoke(name, module, program, report, timeout)
    return report


def _check_arities(name: str, program: Program, report: ValidationReport) -> None:
    arities: Dict[str, Set[int]] = defaultdict(set)
    for pred, arity in signatures(program):
        arities[pred].add(arity)
    for pred, used in sorted(arities.items()):
        if len(used) > 1:
            note = f"{name}: {pred} is used with arities {sorted(used)}"
            if note not in report.notes:
                report.notes.append(note)


def _smoke(name: str, module: KnowledgeModule, program: Program, report: ValidationReport, timeout: float) -> None:
    predicate = module.answer or "answer"
    try:
        models = solve(ground(program, keep=[predicate]), max_models=1, timeout=timeout).answer_sets
    except SolveTimeout as err:
        if err.incumbent is None:
            report.errors.append(f"{name}: smoke run failed: {err}")
            return
        models = [err.incumbent]
    except LogicError as err:
        report.errors.append(f"{name}: smoke run failed: {err}")
        return
    if not models or not models[0].select(predicate):
        report.errors.append(f"{name}: answer predicate {predicate} never fires on the smoke facts")
