"""Run a conforming external solver as a subprocess and read its output back."""
from __future__ import annotations

import shlex
import shutil
import subprocess
import time
from typing import Dict, List, Optional, Sequence, Union

from .errors import ExternalSolverError, LogicError, SolverNotFound, SolverOutputError, SolveTimeout
from .grounder import ground, resolve_constants
from .parser import parse_atom, parse_program
from .solver import OPTIMUM_FOUND, SAT, UNSAT, AnswerSet, SolveResult
from .terms import WeakConstraint

# exit codes are bit flags: 1 interrupted, 10 satisfiable, 20 exhausted, 30 both
OK_CODES = {0, 10, 20, 30}
INTERRUPTED = {1, 11, 21, 31}


def split_atoms(line: str) -> List[str]:
    """Split a model line on spaces that sit outside quotes and parentheses."""
    out, depth, quoted, start = [], 0, False, 0
    i = 0
    while i < len(line):
        char = line[i]
        if quoted:
            if char == "\\":
                i += 1
            elif char == '"':
                quoted = False
        elif char == '"':
            quoted = True
        elif char == "(":
            depth += 1
        elif char == ")":
            depth -= 1
        elif char == " " and depth == 0:
            if i > start:
                out.append(line[start:i])
            start = i + 1
        i += 1
    if start < len(line):
        out.append(line[start:])
    return out


def weak_levels(program_text: str, bindings: Optional[Dict[str, object]] = None) -> List[int]:
    """Priority levels of the program's weak constraints, highest first."""
    program = resolve_constants(parse_program(program_text, "<external>"), bindings)
    levels = set()
    for statement in program.statements:
        if not isinstance(statement, WeakConstraint):
            continue
        if statement.level.variables():
            return ground(program).levels
        levels.add(statement.level.evaluate({}))
    return sorted(levels, reverse=True)


def _command(solver_cmd: Union[str, Sequence[str]]) -> List[str]:
    args = shlex.split(solver_cmd) if isinstance(solver_cmd, str) else list(solver_cmd)
    if not args:
        raise SolverNotFound("empty solver command")
    if shutil.which(args[0]) is None:
        raise SolverNotFound(f"solver executable not found: {args[0]}")
    return args


def solve_external(
    program_text: str,
    solver_cmd: Union[str, Sequence[str]] = "clingo",
    max_models: int = 1,
    optimize: bool = True,
    timeout: Optional[float] = None,
) -> SolveResult:
    """Solve ``program_text`` with an external executable; same result shape as ``solve``.

    The program goes in on stdin. With weak constraints and ``optimize`` the solver is
    asked for optimal models only.
    """
    args = _command(solver_cmd)
    levels = weak_levels(program_text) if ":~" in program_text else []
    args += [f"--models={max_models}"]
    if levels:
        args += ["--opt-mode=optN" if optimize else "--opt-mode=ignore"]
        if optimize and max_models == 1:
            args[-1] = "--opt-mode=opt"
    started = time.monotonic()
    try:
        completed = subprocess.run(
            args,
            input=program_text,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as err:
        raise SolveTimeout(time.monotonic() - started) from err
    except OSError as err:
        raise SolverNotFound(f"could not start {args[0]}: {err}") from err
    if completed.returncode not in OK_CODES:
        if completed.returncode in INTERRUPTED:
            raise SolveTimeout(time.monotonic() - started)
        raise ExternalSolverError(
            f"{args[0]} exited with status {completed.returncode}",
            completed.returncode,
            completed.stderr,
        )
    result = parse_output(completed.stdout, levels, optimize and bool(levels), max_models)
    result.stats["seconds"] = round(time.monotonic() - started, 4)
    return result


def parse_output(stdout: str, levels: Sequence[int], optimizing: bool, max_models: int = 0) -> SolveResult:
    """Read ``Answer:``/``Optimization:`` blocks of the solver's text output."""
    models: List[AnswerSet] = []
    costs: List[Optional[Dict[int, int]]] = []
    lines = stdout.splitlines()
    status = None
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("Answer:"):
            if i + 1 >= len(lines):
                raise SolverOutputError("model line missing after 'Answer:'")
            try:
                atoms = frozenset(parse_atom(text) for text in split_atoms(lines[i + 1].strip()))
            except LogicError as err:
                raise SolverOutputError(f"unreadable model: {lines[i + 1]!r}") from err
            models.append(AnswerSet(atoms))
            costs.append(None)
            i += 2
            continue
        if line.startswith("Optimization:"):
            if not models:
                raise SolverOutputError("cost line before any model")
            values = [int(v) for v in line.split(":", 1)[1].split()]
            if len(values) != len(levels):
                raise SolverOutputError(f"expected {len(levels)} cost values, got {line!r}")
            costs[-1] = dict(zip(levels, values))
        elif line in ("SATISFIABLE", "UNSATISFIABLE", "OPTIMUM FOUND", "UNKNOWN"):
            status = line
        i += 1
    if status is None:
        raise SolverOutputError("no result line in solver output")
    if status == "UNSATISFIABLE" or not models:
        return SolveResult(UNSAT)
    models = [AnswerSet(m.atoms, c if levels else None) for m, c in zip(models, costs)]
    if not optimizing:
        return SolveResult(SAT, _dedupe(models)[: max_models or None])
    # optN reports the improving models first, then the optimal ones again
    scored = [m for m in models if m.cost is not None]
    if not scored:
        raise SolverOutputError("optimization requested but no cost lines found")
    best = min(tuple(m.cost[l] for l in levels) for m in scored)
    optimal = [m for m in scored if tuple(m.cost[l] for l in levels) == best]
    if max_models == 1:
        optimal = optimal[-1:]
    return SolveResult(
        OPTIMUM_FOUND if status == "OPTIMUM FOUND" else SAT,
        _dedupe(optimal)[: max_models or None],
        dict(zip(levels, best)),
    )


def _dedupe(models: List[AnswerSet]) -> List[AnswerSet]:
    seen, out = set(), []
    for model in models:
        if model.atoms not in seen:
            seen.add(model.atoms)
            out.append(model)
    return out
