"""Independent checkers for every task the reasoner answers.

None of these read the knowledge modules: they restate what a correct answer means so that
disagreements point at the parser, the modules or the dataset label.
"""
import functools
import heapq
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .types import GridConfig

# -- StepGame -----------------------------------------------------------------------------

OFFSETS = {
    "overlap": (0, 0), "top": (0, 1), "down": (0, -1), "left": (-1, 0), "right": (1, 0),
    "top_left": (-1, 1), "top_right": (1, 1), "down_left": (-1, -1), "down_right": (1, -1),
}
_BY_SIGN = {v: k for k, v in OFFSETS.items()}


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def stepgame_label(facts: Sequence[Tuple[str, str, str]], a: str, b: str) -> Optional[str]:
    """Relation of ``a`` to ``b`` by summing offsets along the facts ``(rel, x, y)``: x is rel of y.

    ``None`` when the two agents are not connected.
    """
    graph: Dict[str, List[Tuple[str, Tuple[int, int]]]] = {}
    for rel, x, y in facts:
        dx, dy = OFFSETS[rel]
        graph.setdefault(y, []).append((x, (dx, dy)))
        graph.setdefault(x, []).append((y, (-dx, -dy)))
    where = {b: (0, 0)}
    queue = deque([b])
    while queue:
        node = queue.popleft()
        for other, (dx, dy) in graph.get(node, []):
            if other not in where:
                where[other] = (where[node][0] + dx, where[node][1] + dy)
                queue.append(other)
    if a not in where:
        return None
    x, y = where[a]
    return _BY_SIGN[(_sign(x), _sign(y))]


# -- families -----------------------------------------------------------------------------

_GENDERED = {
    "parent": ("father", "mother"),
    "child": ("son", "daughter"),
    "sibling": ("brother", "sister"),
    "spouse": ("husband", "wife"),
    "grandparent": ("grandfather", "grandmother"),
    "grandchild": ("grandson", "granddaughter"),
    "greatgrandparent": ("greatgrandfather", "greatgrandmother"),
    "greatgrandchild": ("greatgrandson", "greatgranddaughter"),
    "pibling": ("uncle", "aunt"),
    "nibling": ("nephew", "niece"),
    "parent_in_law": ("father_in_law", "mother_in_law"),
    "child_in_law": ("son_in_law", "daughter_in_law"),
}


@dataclass
class Family:
    """People with a gender, their (up to two) parents and spouses."""

    gender: Dict[str, str] = field(default_factory=dict)
    parents: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    spouse: Dict[str, str] = field(default_factory=dict)

    def add(self, name: str, gender: str, parents: Tuple[str, ...] = ()) -> None:
        self.gender[name] = gender
        self.parents[name] = tuple(parents)

    def marry(self, a: str, b: str) -> None:
        self.spouse[a] = b
        self.spouse[b] = a

    def members(self) -> List[str]:
        return list(self.gender)

    def __len__(self) -> int:
        return len(self.gender)

    def children(self, name: str) -> Set[str]:
        return {c for c, ps in self.parents.items() if name in ps}

    def siblings(self, name: str) -> Set[str]:
        return {o for o in self.gender if o != name and set(self.parents[o]) & set(self.parents[name])}

    def statements(self, rng: random.Random, sibling_rate: float = 0.3) -> List[Tuple[str, str, str]]:
        """(relation, anchor, relative) triples that pin the family down; ``relative`` is the anchor's relation."""
        out = []
        male = lambda n: self.gender[n] == "male"  # noqa: E731
        for child, parents in self.parents.items():
            for parent in parents:
                if rng.random() < 0.5:
                    out.append(("father" if male(parent) else "mother", child, parent))
                else:
                    out.append(("son" if male(child) else "daughter", parent, child))
        for a, b in sorted(self.spouse.items()):
            if a < b:
                out.append(("husband" if male(b) else "wife", a, b))
        for a in self.gender:
            for b in sorted(self.siblings(a)):
                if a < b and rng.random() < sibling_rate:
                    out.append(("brother" if male(b) else "sister", a, b))
        rng.shuffle(out)
        return out

    def facts(self, rng: random.Random) -> List[str]:
        atoms = [f'{rel}("{a}", "{b}")' for rel, a, b in self.statements(rng)]
        return atoms + [f'{g}("{n}")' for n, g in self.gender.items()]


def _kin(family: Family, a: str, b: str) -> Optional[str]:
    """Ungendered relation of ``b`` to ``a``."""
    parents = set(family.parents.get(a, ()))
    grandparents = {g for p in parents for g in family.parents.get(p, ())}
    if b in parents:
        return "parent"
    if b in family.children(a):
        return "child"
    if family.spouse.get(a) == b:
        return "spouse"
    if b in family.siblings(a):
        return "sibling"
    if b in grandparents:
        return "grandparent"
    if a in {g for p in family.parents.get(b, ()) for g in family.parents.get(p, ())}:
        return "grandchild"
    if b in {g for p in grandparents for g in family.parents.get(p, ())}:
        return "greatgrandparent"
    if a in {gg for p in family.parents.get(b, ()) for g in family.parents.get(p, ()) for gg in family.parents.get(g, ())}:
        return "greatgrandchild"
    if any(b in family.siblings(p) for p in parents):
        return "pibling"
    if any(b in family.children(s) for s in family.siblings(a)):
        return "nibling"
    spouse = family.spouse.get(a)
    if spouse is not None and b in family.parents.get(spouse, ()):
        return "parent_in_law"
    if any(family.spouse.get(c) == b for c in family.children(a)):
        return "child_in_law"
    return None


def family_relation(family: Family, a: str, b: str) -> Optional[str]:
    """How ``b`` is related to ``a``, as a kinship label, by direct search of the family."""
    kind = _kin(family, a, b)
    if kind is None:
        return None
    male, female = _GENDERED[kind]
    gender = family.gender.get(b)
    if gender not in ("male", "female"):
        return None
    return male if gender == "male" else female


_PARENT_WORDS = {"father", "mother"}
_CHILD_WORDS = {"son", "daughter"}
_SPOUSE_WORDS = {"husband", "wife"}
_SIBLING_WORDS = {"brother", "sister"}


def family_from_facts(statements: Sequence[Tuple[str, str, str]], genders: Dict[str, str]) -> Optional[Family]:
    """Rebuild a family from ``(relation, anchor, relative)`` statements.

    Only parent, child, spouse and sibling statements can be placed; any other relation
    word returns ``None``. Siblings without known parents share an unnamed one.
    """
    parents: Dict[str, Set[str]] = {}
    siblings: List[Tuple[str, str]] = []
    family = Family()
    for rel, a, b in statements:
        parents.setdefault(a, set())
        parents.setdefault(b, set())
        if rel in _PARENT_WORDS:
            parents[a].add(b)
        elif rel in _CHILD_WORDS:
            parents[b].add(a)
        elif rel in _SPOUSE_WORDS:
            family.marry(a, b)
        elif rel in _SIBLING_WORDS:
            siblings.append((a, b))
        else:
            return None
    changed = True
    while changed:
        changed = False
        for a, b in siblings:
            if not parents[a] and not parents[b]:
                parents[a].add(f"?{min(a, b)}")
                changed = True
            if parents[a] != parents[b]:
                parents[a] = parents[b] = parents[a] | parents[b]
                changed = True
    for name in {p for ps in parents.values() for p in ps} - set(parents):
        parents[name] = set()
    for name, ps in parents.items():
        family.add(name, genders.get(name, "unknown"), tuple(sorted(ps)))
        couple = sorted(p for p in ps if not p.startswith("?"))
        if len(couple) == 2 and not any(p in family.spouse for p in couple):
            family.marry(*couple)
    return family


# -- gSCAN --------------------------------------------------------------------------------

_STEP = {"east": (0, 1), "west": (0, -1), "north": (-1, 0), "south": (1, 0)}
_LEFT = {"east": "north", "north": "west", "west": "south", "south": "east"}
_RIGHT = {v: k for k, v in _LEFT.items()}
_MOVES = {"walk", "push", "pull"}
_ADVERBS = {"cautiously", "hesitantly", "spinning", "zigzagging"}


@dataclass
class Command:
    verb: str
    words: List[str]
    adverb: Optional[str] = None

    @classmethod
    def parse(cls, text: str) -> "Command":
        words = text.replace(",", " ").split()
        verb, rest = words[0], words[1:]
        adverb = next((w for w in rest if w in _ADVERBS), None)
        rest = [w for w in rest if w not in _ADVERBS and w not in ("to", "a", "an", "the", "while")]
        return cls(verb, rest, adverb)


def gscan_target(grid: GridConfig, words: Sequence[str]) -> Optional[int]:
    """Index of the object the description picks; size words pick among shape/color matches."""
    known = {o.shape for o in grid.objects} | {o.color for o in grid.objects}
    matching = [
        i for i, o in enumerate(grid.objects)
        if all(w in (o.shape, o.color) for w in words if w in known)
        and not any(w not in known and w not in ("big", "small", "object") for w in words)
    ]
    if "small" in words and matching:
        low = min(grid.objects[i].size for i in matching)
        matching = [i for i in matching if grid.objects[i].size == low]
    if "big" in words and matching:
        high = max(grid.objects[i].size for i in matching)
        matching = [i for i in matching if grid.objects[i].size == high]
    return matching[0] if len(matching) == 1 else None


@dataclass
class Replay:
    ok: bool
    reason: str = ""
    agent: Tuple[int, int] = (0, 0)
    direction: str = "east"
    objects: List[Tuple[int, int]] = field(default_factory=list)


def _axis(direction: str) -> str:
    return "horizontally" if direction in ("east", "west") else "vertically"


def _adverb_problem(adverb: Optional[str], actions: List[str], walk_axes: Dict[int, str]) -> Optional[str]:
    moves = [i for i, a in enumerate(actions) if a in _MOVES]
    if adverb == "hesitantly":
        if any(i + 1 >= len(actions) or actions[i + 1] != "stay" for i in moves):
            return "a step without a following stay"
    if adverb == "cautiously":
        look = ["turn left", "turn right", "turn right", "turn left"]
        if any(i < 4 or actions[i - 4:i] != look for i in moves):
            return "a step without looking left and right first"
    if adverb == "spinning":
        spin = ["turn left"] * 4
        if actions[:4] != spin:
            return "no spin before the first step"
        if any(actions[i + 1:i + 5] != spin for i in moves[:-1]):
            return "no spin between steps"
    axes = sorted(walk_axes.items())
    if adverb == "zigzagging":
        if any(ax == "horizontally" for _, ax in axes) and axes and axes[0][1] != "horizontally":
            return "zigzag does not start horizontally"
        for i, (t1, d1) in enumerate(axes):
            for t2, d2 in axes[i + 1:]:
                if d1 != d2 and walk_axes.get(t1 + 2) != d2:
                    return "zigzag does not alternate"
    else:
        seen_vertical = False
        for _, ax in axes:
            if ax == "vertically":
                seen_vertical = True
            elif seen_vertical:
                return "horizontal step after a vertical one"
    return None


def replay_gscan(grid: GridConfig, command: str, actions: Sequence[str]) -> Replay:
    """Run ``actions`` on ``grid`` and check that they carry out ``command``."""
    cmd = Command.parse(command)
    target = gscan_target(grid, cmd.words)
    if target is None:
        return Replay(False, "command does not pick out a single object")
    agent, facing = tuple(grid.agent), grid.direction
    objects = [tuple(o.pos) for o in grid.objects]
    heavy = grid.objects[target].size >= 3
    primed = False
    arrived = False
    walk_axes: Dict[int, str] = {}
    actions = [a.strip().replace("_", " ") for a in actions if a.strip()]

    def inside(cell):
        return all(0 <= c < grid.size for c in cell)

    for t, act in enumerate(actions):
        if act == "turn left":
            facing = _LEFT[facing]
        elif act == "turn right":
            facing = _RIGHT[facing]
        elif act == "walk":
            if arrived and cmd.verb != "walk":
                return Replay(False, f"walks after reaching the target at step {t}")
            step = _STEP[facing]
            nxt = (agent[0] + step[0], agent[1] + step[1])
            if not inside(nxt):
                return Replay(False, f"walks off the grid at step {t}")
            agent = nxt
            walk_axes[t] = _axis(facing)
        elif act in ("push", "pull"):
            if act != cmd.verb:
                return Replay(False, f"{act} in a {cmd.verb} command")
            if agent != objects[target]:
                return Replay(False, f"{act} away from the target at step {t}")
            step = _STEP[facing] if act == "push" else tuple(-c for c in _STEP[facing])
            nxt = (agent[0] + step[0], agent[1] + step[1])
            if not inside(nxt) or nxt in objects:
                return Replay(False, f"{act} into a wall or an object at step {t}")
            if heavy and not primed:
                primed = True
                continue
            primed = False
            agent = objects[target] = nxt
        elif act != "stay":
            return Replay(False, f"unknown action {act!r}")
        if agent == objects[target]:
            arrived = True
    problem = _adverb_problem(cmd.adverb, actions, walk_axes)
    result = Replay(problem is None, problem or "", agent, facing, objects)
    if not result.ok:
        return result
    if agent != objects[target]:
        return Replay(False, "agent does not end on the target", agent, facing, objects)
    if cmd.verb in ("push", "pull"):
        step = _STEP[facing] if cmd.verb == "push" else tuple(-c for c in _STEP[facing])
        ahead = (agent[0] + step[0], agent[1] + step[1])
        if inside(ahead) and ahead not in objects:
            return Replay(False, f"target could still be {cmd.verb}ed further", agent, facing, objects)
    return result


# -- Pick&Place ---------------------------------------------------------------------------

TABLE = "table"
State = FrozenSet[Tuple[str, str]]


@dataclass(frozen=True)
class PickPlaceWorld:
    """Blocks on the table, on bowls or on blocks; one thing directly on anything but the table.

    At most two blocks stack on a block or bowl. With bowls present, blocks never rest on the table.
    """

    blocks: Tuple[str, ...]
    bowls: Tuple[str, ...] = ()
    max_height: int = 2

    @property
    def places(self) -> Tuple[str, ...]:
        return self.blocks + self.bowls + (() if self.bowls else (TABLE,))

    def support(self, state: State) -> Dict[str, str]:
        return dict(state)

    def valid(self, state: State) -> bool:
        support = self.support(state)
        if set(support) != set(self.blocks):
            return False
        below: Dict[str, int] = {}
        for block, place in support.items():
            if place == block or place not in self.places:
                return False
            if place != TABLE:
                below[place] = below.get(place, 0) + 1
        if any(n > 1 for n in below.values()):
            return False
        for block in self.blocks:
            if self._above(support, block) >= self.max_height:
                return False
        return not self._cyclic(support)

    def _above(self, support: Dict[str, str], place: str) -> int:
        on = {v: k for k, v in support.items() if v != TABLE}
        count, current = 0, place
        while current in on:
            current = on[current]
            count += 1
        return count

    def _cyclic(self, support: Dict[str, str]) -> bool:
        for block in support:
            seen, current = set(), block
            while current in support:
                if current in seen:
                    return True
                seen.add(current)
                current = support[current]
        return False

    def clear(self, state: State, thing: str) -> bool:
        return thing == TABLE or all(place != thing for _, place in state)

    def moves(self, state: State) -> Iterator[Tuple[str, str]]:
        support = self.support(state)
        covered = {place for place in support.values() if place != TABLE}
        for block in self.blocks:
            if block in covered:
                continue
            for place in self.places:
                if place in (block, support[block]) or place in covered:
                    continue
                # a block carries one more only while it rests directly on a bowl or the table
                if place in support and support[place] in support:
                    continue
                yield block, place

    def apply(self, state: State, move: Tuple[str, str]) -> State:
        block, place = move
        return frozenset((b, place if b == block else p) for b, p in state)

    def replay(self, state: State, plan: Sequence[Tuple[str, str]]) -> Optional[State]:
        """State after ``plan``, or None when a step is not allowed."""
        for move in plan:
            if move not in set(self.moves(state)):
                return None
            state = self.apply(state, move)
        return state

    def satisfies(self, state: State, goal: Sequence[Tuple[str, str]]) -> bool:
        return set(goal) <= set(state)

    def shortest(self, state: State, goal: Sequence[Tuple[str, str]], limit: int = 12) -> Optional[List[Tuple[str, str]]]:
        """An optimal plan reaching every goal pair, up to ``limit`` steps.

        Best-first on steps taken plus blocks still off their goal support; one move fixes at
        most one block, so the first plan found is as short as breadth-first search would find.
        """
        plan = self._shortest(state, frozenset(goal), limit)
        return None if plan is None else list(plan)

    @functools.lru_cache(maxsize=4096)
    def _shortest(self, state: State, goal: FrozenSet[Tuple[str, str]], limit: int) -> Optional[Tuple[Tuple[str, str], ...]]:
        wanted = dict(goal)

        def remaining(s: State) -> int:
            return sum(1 for b, p in s if b in wanted and wanted[b] != p)

        tie = 0
        frontier = [(remaining(state), 0, tie, state)]
        parents: Dict[State, Tuple[State, Tuple[str, str]]] = {}
        cost = {state: 0}
        while frontier:
            _, steps, _, current = heapq.heappop(frontier)
            if steps > cost.get(current, steps):
                continue
            if self.satisfies(current, goal):
                plan = []
                while current != state:
                    current, move = parents[current]
                    plan.append(move)
                return tuple(plan[::-1])
            if steps >= limit:
                continue
            for move in self.moves(current):
                nxt = self.apply(current, move)
                if steps + 1 < cost.get(nxt, limit + 1):
                    cost[nxt] = steps + 1
                    parents[nxt] = (current, move)
                    tie += 1
                    heapq.heappush(frontier, (steps + 1 + remaining(nxt), steps + 1, tie, nxt))
        return None
