"""Answer set search over ground programs."""
from __future__ import annotations

import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import SolveTimeout
from .ground import GroundProgram
from .terms import Function, render, sort_key

SAT = "SAT"
UNSAT = "UNSAT"
OPTIMUM_FOUND = "OPTIMUM-FOUND"

Cost = Dict[int, int]


@dataclass(frozen=True)
class AnswerSet:
    atoms: FrozenSet[Function]
    cost: Optional[Cost] = None

    def __contains__(self, atom) -> bool:
        return atom in self.atoms

    def __iter__(self):
        return iter(sorted(self.atoms, key=sort_key))

    def __len__(self) -> int:
        return len(self.atoms)

    def select(self, name: str, arity: Optional[int] = None) -> List[Function]:
        """Atoms of one predicate, in the engine's term order."""
        return sorted(
            (a for a in self.atoms if a.name == name and (arity is None or len(a.args) == arity)),
            key=sort_key,
        )

    def __str__(self) -> str:
        return " ".join(render(a) for a in self)


@dataclass
class SolveResult:
    status: str
    answer_sets: List[AnswerSet] = field(default_factory=list)
    cost: Optional[Cost] = None
    witness: Optional[Tuple[Function, Function]] = None
    stats: Dict[str, float] = field(default_factory=dict)

    @property
    def satisfiable(self) -> bool:
        return self.status != UNSAT

    @property
    def models(self) -> List[FrozenSet[Function]]:
        return [a.atoms for a in self.answer_sets]


# -- stability --------------------------------------------------------------------------


def _body_true(rule, model: Set[int]) -> bool:
    return all(p in model for p in rule.pos) and not any(n in model for n in rule.neg)


def _agg_holds(agg, model: Set[int]) -> bool:
    count = sum(1 for e in agg.elements if e in model)
    return count >= agg.lower and (agg.upper is None or count <= agg.upper)


def complete_hidden(ground: GroundProgram, visible: Set[int]) -> Set[int]:
    """Extend a set of visible atoms with the auxiliary atoms it implies."""
    hidden_rules = [r for r in ground.rules if r.head and all(h in ground.hidden for h in r.head) and not r.choice]
    current: Set[int] = set()
    for _ in range(len(ground.hidden) + 2):
        model = visible | current
        derived = {r.head[0] for r in hidden_rules if len(r.head) == 1 and _body_true(r, model)}
        derived |= {a.atom for a in ground.aggregates if _agg_holds(a, model)}
        if derived == current:
            break
        current = derived
    return visible | current


def check_stability(ground: GroundProgram, candidate: Iterable) -> bool:
    """True iff ``candidate`` (atoms or ids) is an answer set of ``ground``.

    Auxiliary atoms are filled in when the candidate names only visible atoms.
    """
    ids: Set[int] = set()
    for atom in candidate:
        atom_id = atom if isinstance(atom, int) else ground.id_of(atom)
        if atom_id is None:
            return False
        ids.add(atom_id)
    if not ids & ground.hidden:
        ids = complete_hidden(ground, ids)
    return is_stable(ground, ids)


def is_stable(ground: GroundProgram, model: Set[int]) -> bool:
    for rule in ground.rules:
        if not _body_true(rule, model):
            continue
        if not rule.head:
            return False
        if not rule.choice and not any(h in model for h in rule.head):
            return False
    for agg in ground.aggregates:
        if (agg.atom in model) != _agg_holds(agg, model):
            return False
    # least model of the reduct
    derived: Set[int] = set()
    missing: List[int] = []
    heads: List[Tuple[int, ...]] = []
    watch: Dict[int, List[int]] = defaultdict(list)
    disjunctive: List[int] = []
    queue: List[int] = []
    for index, rule in enumerate(ground.rules):
        if any(n in model for n in rule.neg) or not rule.head:
            missing.append(-1)
            heads.append(())
            continue
        in_model = tuple(h for h in rule.head if h in model)
        if len(rule.head) > 1 and not rule.choice and len(in_model) > 1:
            if all(p in model for p in rule.pos):
                disjunctive.append(index)
            missing.append(-1)
            heads.append(())
            continue
        heads.append(in_model if (rule.choice or len(rule.head) > 1) else rule.head)
        missing.append(len(rule.pos))
        for p in rule.pos:
            watch[p].append(index)
        if not rule.pos:
            queue.extend(heads[-1])
    agg_need: Dict[int, int] = {}
    agg_watch: Dict[int, List[int]] = defaultdict(list)
    for agg in ground.aggregates:
        if agg.atom not in model:
            continue
        agg_need[agg.atom] = agg.lower
        for e in agg.elements:
            agg_watch[e].append(agg.atom)
        if agg.lower <= 0:
            queue.append(agg.atom)
    while queue:
        atom = queue.pop()
        if atom in derived:
            continue
        derived.add(atom)
        for index in watch.get(atom, ()):
            missing[index] -= 1
            if missing[index] == 0:
                queue.extend(heads[index])
        for g in agg_watch.get(atom, ()):
            agg_need[g] -= 1
            if agg_need[g] == 0:
                queue.append(g)
    if not disjunctive:
        return derived == model
    if not derived <= model:
        return False
    return not _smaller_model_exists(ground, model, derived)


def _smaller_model_exists(ground: GroundProgram, model: Set[int], fixed: Set[int]) -> bool:
    """Search for a model N of the reduct with fixed <= N < model."""
    free = sorted(model - fixed)
    if not free:
        return False
    clauses: List[Tuple[Tuple[int, ...], Tuple[int, ...]]] = []
    for rule in ground.rules:
        if any(n in model for n in rule.neg) or not all(p in model for p in rule.pos):
            continue
        heads = [h for h in rule.head if h in model]
        if rule.choice:
            for h in heads:
                if h not in fixed:
                    clauses.append((tuple(p for p in rule.pos if p not in fixed), (h,)))
            continue
        if any(h in fixed for h in heads):
            continue
        clauses.append((tuple(p for p in rule.pos if p not in fixed), tuple(heads)))
    aggs = [a for a in ground.aggregates if a.atom in model and a.atom not in fixed]
    value: Dict[int, bool] = {a: True for a in fixed}

    def ok() -> bool:
        for body, head in clauses:
            if all(value.get(p) is True for p in body) and all(value.get(h) is False for h in head):
                return False
        for agg in aggs:
            if value.get(agg.atom) is False:
                count = sum(1 for e in agg.elements if value.get(e) is True)
                if count >= agg.lower:
                    return False
        return True

    def unit(assigned: List[int]) -> bool:
        changed = True
        while changed:
            changed = False
            for body, head in clauses:
                if not all(value.get(p) is True for p in body):
                    continue
                open_heads = [h for h in head if h not in value]
                if any(value.get(h) is True for h in head):
                    continue
                if not open_heads:
                    return False
                if len(open_heads) == 1:
                    value[open_heads[0]] = True
                    assigned.append(open_heads[0])
                    changed = True
        return True

    def search(position: int) -> bool:
        assigned: List[int] = []
        if not unit(assigned) or not ok():
            for a in assigned:
                del value[a]
            return False
        while position < len(free) and free[position] in value:
            position += 1
        if position == len(free):
            found = any(value.get(a) is False for a in free)
            if not found:
                for a in assigned:
                    del value[a]
            return found
        atom = free[position]
        for choice in (False, True):
            value[atom] = choice
            if search(position + 1):
                return True
            del value[atom]
        for a in assigned:
            del value[a]
        return False

    return search(0)


# -- search -----------------------------------------------------------------------------


class _Search:
    """Propagation and chronological backtracking over one ground program.

    Values: 1 true, -1 false, 0 unassigned.
    """

    def __init__(self, ground: GroundProgram, deadline: Optional[float]) -> None:
        self.ground = ground
        self.deadline = deadline
        n = len(ground) + 1
        self.value = [0] * n
        self.trail: List[int] = []
        self.decisions: List[Tuple[int, int, bool, int]] = []
        rules = ground.rules
        self.rules = rules
        self.size = [len(r.pos) + len(r.neg) for r in rules]
        self.n_true = [0] * len(rules)
        self.n_false = [0] * len(rules)
        self.head_true = [0] * len(rules)
        self.head_false = [0] * len(rules)
        self.pos_occ: List[List[int]] = [[] for _ in range(n)]
        self.neg_occ: List[List[int]] = [[] for _ in range(n)]
        self.head_occ: List[List[int]] = [[] for _ in range(n)]
        self.support = [0] * n
        for index, rule in enumerate(rules):
            for p in rule.pos:
                self.pos_occ[p].append(index)
            for q in rule.neg:
                self.neg_occ[q].append(index)
            for h in rule.head:
                self.head_occ[h].append(index)
                self.support[h] += 1
        self.aggs = list(ground.aggregates)
        self.agg_index = {a.atom: i for i, a in enumerate(self.aggs)}
        self.elem_occ: List[List[int]] = [[] for _ in range(n)]
        for i, agg in enumerate(self.aggs):
            for e in agg.elements:
                self.elem_occ[e].append(i)
        self.agg_true = [0] * len(self.aggs)
        self.agg_false = [0] * len(self.aggs)
        self.consistency = {}
        pairs = set(ground.consistency)
        for index, rule in enumerate(rules):
            if not rule.head and len(rule.pos) == 2 and not rule.neg and tuple(rule.pos) in pairs:
                self.consistency[index] = tuple(rule.pos)
        self.witness: Optional[Tuple[Function, Function]] = None
        self.rule_queue: List[int] = []
        self.atom_queue: List[int] = []
        self.agg_queue: List[int] = []
        self.has_recursion = any(r.pos for r in rules) or bool(self.aggs)
        self.steps = 0
        self.conflicts = 0

    # -- assignment ----------------------------------------------------------------------

    def assign(self, atom: int, value: int) -> bool:
        current = self.value[atom]
        if current == value:
            return True
        if current:
            return False
        self.value[atom] = value
        self.trail.append(atom)
        self._count(atom, value, 1)
        return True

    def _count(self, atom: int, value: int, delta: int) -> None:
        queue_rule = self.rule_queue.append if delta > 0 else None
        for r in self.pos_occ[atom]:
            if value > 0:
                self.n_true[r] += delta
            else:
                self._false_body(r, delta)
            if queue_rule:
                queue_rule(r)
        for r in self.neg_occ[atom]:
            if value < 0:
                self.n_true[r] += delta
            else:
                self._false_body(r, delta)
            if queue_rule:
                queue_rule(r)
        for r in self.head_occ[atom]:
            if value > 0:
                self.head_true[r] += delta
            else:
                self.head_false[r] += delta
            if queue_rule:
                queue_rule(r)
        for i in self.elem_occ[atom]:
            if value > 0:
                self.agg_true[i] += delta
            else:
                self.agg_false[i] += delta
            if delta > 0:
                self.agg_queue.append(i)
        if delta > 0:
            self.atom_queue.append(atom)
            i = self.agg_index.get(atom)
            if i is not None:
                self.agg_queue.append(i)

    def _false_body(self, r: int, delta: int) -> None:
        before = self.n_false[r]
        self.n_false[r] = before + delta
        if delta > 0 and before == 0:
            for h in self.rules[r].head:
                self.support[h] -= 1
                self.atom_queue.append(h)
        elif delta < 0 and before == 1:
            for h in self.rules[r].head:
                self.support[h] += 1

    def undo(self, length: int) -> None:
        while len(self.trail) > length:
            atom = self.trail.pop()
            value = self.value[atom]
            self._count(atom, value, -1)
            self.value[atom] = 0
        self.rule_queue.clear()
        self.atom_queue.clear()
        self.agg_queue.clear()

    # -- propagation ---------------------------------------------------------------------

    def _set_literal_false(self, r: int) -> bool:
        """Falsify the single unassigned body literal of rule ``r``."""
        rule = self.rules[r]
        for p in rule.pos:
            if self.value[p] == 0:
                return self.assign(p, -1)
        for q in rule.neg:
            if self.value[q] == 0:
                return self.assign(q, 1)
        return True

    def _make_body_true(self, r: int) -> bool:
        rule = self.rules[r]
        for p in rule.pos:
            if not self.assign(p, 1):
                return False
        for q in rule.neg:
            if not self.assign(q, -1):
                return False
        return True

    def check_rule(self, r: int) -> bool:
        if self.n_false[r]:
            return True
        rule = self.rules[r]
        if rule.choice:
            return True
        size = self.size[r]
        true = self.n_true[r]
        width = len(rule.head)
        if self.head_true[r]:
            return True
        if self.head_false[r] == width:
            if true == size:
                if not self.decisions and r in self.consistency:
                    p, n = self.consistency[r]
                    self.witness = (self.ground.symbol(p), self.ground.symbol(n))
                return False
            if true == size - 1:
                return self._set_literal_false(r)
            return True
        if true == size and self.head_false[r] == width - 1:
            for h in rule.head:
                if self.value[h] == 0:
                    return self.assign(h, 1)
        return True

    def check_atom(self, atom: int) -> bool:
        if atom in self.agg_index:
            return True
        value = self.value[atom]
        support = self.support[atom]
        if support == 0:
            return self.assign(atom, -1)
        if value == 1 and support == 1:
            for r in self.head_occ[atom]:
                if self.n_false[r] == 0:
                    if not self._make_body_true(r):
                        return False
                    rule = self.rules[r]
                    if len(rule.head) > 1 and not rule.choice:
                        for h in rule.head:
                            if h != atom and not self.assign(h, -1):
                                return False
                    break
        return True

    def check_agg(self, i: int) -> bool:
        agg = self.aggs[i]
        total = len(agg.elements)
        true = self.agg_true[i]
        undecided = total - true - self.agg_false[i]
        lower, upper = agg.lower, agg.upper
        value = self.value[agg.atom]
        must_hold = true >= lower and (upper is None or true + undecided <= upper)
        cannot_hold = (upper is not None and true > upper) or true + undecided < lower
        if value == 0:
            if must_hold:
                return self.assign(agg.atom, 1)
            if cannot_hold:
                return self.assign(agg.atom, -1)
            return True
        if value == 1:
            if cannot_hold:
                return False
            if undecided and upper is not None and true == upper:
                return self._fill(agg, -1)
            if undecided and true + undecided == lower:
                return self._fill(agg, 1)
            return True
        if must_hold:
            return False
        if upper is None:
            if undecided and true == lower - 1:
                return self._fill(agg, -1)
        elif lower <= 0:
            if undecided and true + undecided == upper + 1:
                return self._fill(agg, 1)
        return True

    def _fill(self, agg, value: int) -> bool:
        for e in agg.elements:
            if self.value[e] == 0 and not self.assign(e, value):
                return False
        return True

    def propagate(self) -> bool:
        while True:
            while self.rule_queue or self.atom_queue or self.agg_queue:
                while self.rule_queue:
                    if not self.check_rule(self.rule_queue.pop()):
                        return False
                while self.agg_queue:
                    if not self.check_agg(self.agg_queue.pop()):
                        return False
                while self.atom_queue:
                    if not self.check_atom(self.atom_queue.pop()):
                        return False
            if not self.has_recursion:
                return True
            unfounded = self.unfounded()
            if unfounded is None:
                return False
            if not unfounded:
                return True
            for atom in unfounded:
                if not self.assign(atom, -1):
                    return False

    def unfounded(self) -> Optional[List[int]]:
        """Atoms that can no longer be derived; None if one of them is already true."""
        value = self.value
        derived = [False] * len(value)
        missing = [0] * len(self.rules)
        stack: List[int] = []
        agg_count = [0] * len(self.aggs)

        def reach(atom: int) -> None:
            if not derived[atom] and value[atom] != -1:
                derived[atom] = True
                stack.append(atom)

        # disjunctive rules support every head that is not false; minimality is checked
        # on complete assignments by is_stable
        def fire(r: int) -> None:
            for h in self.rules[r].head:
                reach(h)

        for r, rule in enumerate(self.rules):
            if not rule.head or self.n_false[r]:
                missing[r] = -1
                continue
            missing[r] = len(rule.pos)
            if not rule.pos:
                fire(r)
        for i, agg in enumerate(self.aggs):
            if agg.lower <= 0:
                reach(agg.atom)
        while stack:
            atom = stack.pop()
            for r in self.pos_occ[atom]:
                if missing[r] > 0:
                    missing[r] -= 1
                    if missing[r] == 0:
                        fire(r)
            for i in self.elem_occ[atom]:
                agg_count[i] += 1
                if agg_count[i] == self.aggs[i].lower:
                    reach(self.aggs[i].atom)
        out = []
        for atom in range(1, len(value)):
            if not derived[atom] and value[atom] != -1:
                if value[atom] == 1:
                    return None
                out.append(atom)
        return out

    # -- branching -----------------------------------------------------------------------

    def pick(self) -> Optional[int]:
        value = self.value
        for atom in range(1, len(value)):
            if value[atom] == 0:
                return atom
        return None

    def decide(self, atom: int, value: int, flipped: bool = False) -> None:
        self.decisions.append((atom, value, flipped, len(self.trail)))
        self.assign(atom, value)

    def backtrack(self) -> bool:
        self.conflicts += 1
        while self.decisions:
            atom, value, flipped, mark = self.decisions.pop()
            self.undo(mark)
            if not flipped:
                self.decide(atom, -value, True)
                return True
        return False

    def tick(self) -> None:
        self.steps += 1
        if self.deadline is not None and self.steps % 64 == 0 and time.monotonic() > self.deadline:
            raise SolveTimeout(0.0)

    def true_atoms(self) -> Set[int]:
        return {a for a in range(1, len(self.value)) if self.value[a] == 1}


class _Objective:
    """Weak constraints grouped by (level, weight, terms); each group counts once."""

    def __init__(self, ground: GroundProgram) -> None:
        groups: Dict[tuple, List[Tuple[tuple, tuple]]] = defaultdict(list)
        for w in ground.weak:
            groups[(w.level, w.weight, w.terms)].append((w.pos, w.neg))
        self.levels = ground.levels
        self.position = {level: i for i, level in enumerate(self.levels)}
        self.groups = list(groups.items())

    def cost(self, model: Set[int]) -> Tuple[int, ...]:
        out = [0] * len(self.levels)
        for (level, weight, _), bodies in self.groups:
            if any(all(p in model for p in pos) and not any(n in model for n in neg) for pos, neg in bodies):
                out[self.position[level]] += weight
        return tuple(out)

    def lower_bound(self, value: List[int]) -> Tuple[int, ...]:
        out = [0] * len(self.levels)
        for (level, weight, _), bodies in self.groups:
            if weight > 0:
                hit = any(
                    all(value[p] == 1 for p in pos) and all(value[n] == -1 for n in neg) for pos, neg in bodies
                )
            else:
                hit = any(
                    not any(value[p] == -1 for p in pos) and not any(value[n] == 1 for n in neg) for pos, neg in bodies
                )
            if hit:
                out[self.position[level]] += weight
        return tuple(out)

    def as_dict(self, cost: Tuple[int, ...]) -> Cost:
        return {level: cost[i] for i, level in enumerate(self.levels)}


def _enumerate(
    ground: GroundProgram,
    objective: Optional[_Objective],
    bound: Optional[Tuple[int, ...]],
    strict: bool,
    limit: int,
    assumptions: Sequence[Tuple[int, int]],
    deadline: Optional[float],
    stats: Dict[str, float],
    improve: bool = False,
):
    """Run one search; yields (true atom ids, cost tuple) for each stable model found.

    With ``improve`` the bound tightens after every model (branch and bound).
    """
    search = _Search(ground, deadline)
    for atom in sorted(ground.facts):
        search.assign(atom, 1)
    ok = True
    for atom, value in assumptions:
        if not search.assign(atom, value):
            ok = False
    if ok:
        for atom in range(1, len(ground) + 1):
            search.atom_queue.append(atom)
            search.rule_queue.extend(search.head_occ[atom])
        search.rule_queue.extend(r for r, rule in enumerate(ground.rules) if not rule.pos and not rule.neg)
        search.agg_queue.extend(range(len(search.aggs)))
    found = 0
    stats.setdefault("choices", 0)
    stats.setdefault("conflicts", 0)
    try:
        while ok:
            search.tick()
            consistent = search.propagate()
            if consistent and objective is not None and bound is not None:
                lb = objective.lower_bound(search.value)
                if lb > bound or (strict and lb == bound):
                    consistent = False
            if consistent:
                atom = search.pick()
                if atom is not None:
                    stats["choices"] += 1
                    search.decide(atom, 1)
                    continue
                model = search.true_atoms()
                if is_stable(ground, model):
                    cost = objective.cost(model) if objective is not None else ()
                    found += 1
                    yield model, cost
                    if improve:
                        bound = cost
                    if limit and found >= limit:
                        return
            if not search.backtrack():
                return
    finally:
        stats["choices"] = stats.get("choices", 0)
        stats["conflicts"] += search.conflicts
        if search.witness is not None:
            stats["witness"] = search.witness


def solve(
    ground: GroundProgram,
    max_models: int = 1,
    optimize: bool = True,
    timeout: Optional[float] = None,
    assumptions: Iterable[Tuple[Function, bool]] = (),
) -> SolveResult:
    """Enumerate answer sets; with ``optimize`` and weak constraints, only optimal ones.

    ``max_models`` of 0 means all. Branching is deterministic: lowest atom id first,
    true before false.
    """
    started = time.monotonic()
    deadline = started + timeout if timeout else None
    stats: Dict[str, float] = {"atoms": len(ground), "rules": len(ground.rules)}
    fixed: List[Tuple[int, int]] = []
    for atom, truth in assumptions:
        atom_id = ground.id_of(atom)
        if atom_id is None:
            if truth:
                return SolveResult(UNSAT, stats=stats)
            continue
        fixed.append((atom_id, 1 if truth else -1))
    objective = _Objective(ground) if ground.has_weak else None
    best: Optional[Tuple[int, ...]] = None
    best_model: Optional[Set[int]] = None
    seen: Set[FrozenSet[Function]] = set()
    answers: List[AnswerSet] = []

    def record(model: Set[int], cost: Tuple[int, ...]) -> bool:
        atoms = ground.visible(model)
        if atoms in seen:
            return False
        seen.add(atoms)
        answers.append(AnswerSet(atoms, objective.as_dict(cost) if objective is not None else None))
        return True

    try:
        if objective is not None and optimize:
            for model, cost in _enumerate(ground, objective, None, True, 0, fixed, deadline, stats, improve=True):
                if best is None or cost < best:
                    best, best_model = cost, model
            if best is None:
                return _finish(UNSAT, [], None, ground, stats, started)
            record(best_model, best)
            if max_models != 1:
                for model, cost in _enumerate(ground, objective, best, False, 0, fixed, deadline, stats):
                    if cost == best:
                        record(model, cost)
                    if max_models and len(answers) >= max_models:
                        break
            return _finish(OPTIMUM_FOUND, answers, objective.as_dict(best), ground, stats, started)
        for model, cost in _enumerate(ground, objective, None, False, 0, fixed, deadline, stats):
            record(model, cost)
            if max_models and len(answers) >= max_models:
                break
    except SolveTimeout:
        elapsed = time.monotonic() - started
        if best_model is not None:
            cost = objective.as_dict(best)
            raise SolveTimeout(elapsed, cost, AnswerSet(ground.visible(best_model), cost))
        raise SolveTimeout(elapsed, None, answers[0] if answers else None)
    if not answers:
        return _finish(UNSAT, [], None, ground, stats, started)
    return _finish(SAT, answers, None, ground, stats, started)


def _finish(status, answers, cost, ground: GroundProgram, stats, started) -> SolveResult:
    stats["seconds"] = round(time.monotonic() - started, 4)
    witness = stats.pop("witness", None) or ground.witness
    return SolveResult(status, answers, cost, witness if status == UNSAT else None, stats)
