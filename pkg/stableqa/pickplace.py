"""Pick&Place instance generator."""
import random
import re
from typing import Dict, List, Optional, Tuple

import tqdm

from .errors import GenerationBudgetError
from .simulators import TABLE, PickPlaceWorld, State
from .types import Instance, PickPlaceInstance

COLORS = ["red", "orange", "yellow", "green", "blue", "cyan", "violet", "purple", "pink", "brown", "gray", "white", "black"]
MIN_STEPS, MAX_STEPS = 3, 10


def on_sentence(block: str, place: str) -> str:
    return f"The {block} is on the {place}."


def move_sentence(block: str, place: str) -> str:
    return f"Move the {block} onto the {place}."


def random_state(rng: random.Random, world: PickPlaceWorld) -> Optional[State]:
    """Place blocks one at a time on a random free support; None when they do not all fit."""
    support: Dict[str, str] = {}
    taken = set()
    for block in rng.sample(world.blocks, len(world.blocks)):
        options = [TABLE] if not world.bowls else []
        options += [b for b in world.bowls if b not in taken]
        # A block can carry one more only while it rests directly on a bowl or the table.
        options += [b for b, p in support.items() if b not in taken and p not in world.blocks]
        if not options:
            return None
        place = rng.choice(options)
        support[block] = place
        if place != TABLE:
            taken.add(place)
    state = frozenset(support.items())
    return state if world.valid(state) else None


def sample_world(rng: random.Random, blocks_only: bool) -> PickPlaceWorld:
    if blocks_only:
        n_bowls, n_blocks = 0, rng.randint(4, 7)
    else:
        n_bowls = rng.randint(3, 7)
        n_blocks = rng.randint(4, min(7, 2 * n_bowls))
    block_colors = rng.sample(COLORS, n_blocks)
    bowl_colors = rng.sample(COLORS, n_bowls)
    return PickPlaceWorld(
        blocks=tuple(f"{c} block" for c in block_colors),
        bowls=tuple(f"{c} bowl" for c in bowl_colors),
    )


def gen_instance(rng: random.Random, index: int, seed: int, blocks_only: bool, budget: int = 500) -> PickPlaceInstance:
    for _ in range(budget):
        world = sample_world(rng, blocks_only)
        initial = random_state(rng, world)
        goal = random_state(rng, world)
        if initial is None or goal is None:
            continue
        plan = world.shortest(initial, sorted(goal), limit=MAX_STEPS)
        if plan is None or not MIN_STEPS <= len(plan) <= MAX_STEPS:
            continue
        return PickPlaceInstance(
            index=index,
            seed=seed,
            initial=[on_sentence(b, p) for b, p in sorted(initial)],
            goal=[on_sentence(b, p) for b, p in sorted(goal)],
            plan=[move_sentence(b, p) for b, p in plan],
            blocks=list(world.blocks),
            bowls=list(world.bowls),
            optimal=len(plan),
        )
    raise GenerationBudgetError(budget)


def gen_pickplace(seed: int, count: int = 40, progress: bool = False) -> List[PickPlaceInstance]:
    """``count`` instances, deterministic in ``seed``. Even indices use blocks only, odd ones bowls too."""
    if count < 1:
        raise ValueError("count must be at least one")
    rng = random.Random(f"pickplace:{seed}")
    indices = tqdm.tqdm(range(count), disable=not progress)
    return [gen_instance(rng, i, seed, blocks_only=i % 2 == 0) for i in indices]


def world_of(instance: PickPlaceInstance) -> PickPlaceWorld:
    return PickPlaceWorld(blocks=tuple(instance.blocks), bowls=tuple(instance.bowls))


def read_pairs(sentences: List[str], prefix: str = "The ", verb: str = " is on the ") -> List[Tuple[str, str]]:
    pairs = []
    for s in sentences:
        body = s.strip().rstrip(".")
        if body.startswith(prefix) and verb in body:
            block, place = body[len(prefix):].split(verb, 1)
            pairs.append((block, place))
    return pairs


def read_plan(lines: List[str]) -> List[Tuple[str, str]]:
    """Moves of a plan; a leading "1." style step number is ignored."""
    return read_pairs([re.sub(r"^\s*\d+\.\s*", "", line) for line in lines], prefix="Move the ", verb=" onto the ")


def baseline_input(instance: PickPlaceInstance) -> str:
    """The input block of the direct-planning prompt."""
    return "\n".join(["# Initial State:", *instance.initial, "", "# Goal State:", *instance.goal])


def check_plan(instance: PickPlaceInstance, plan_lines: List[str]) -> Tuple[bool, str]:
    """Replay ``plan_lines`` from the initial state: valid, reaching the goal, and optimal in length."""
    world = world_of(instance)
    state = frozenset(read_pairs(instance.initial))
    moves = read_plan(plan_lines)
    if len(moves) != len([line for line in plan_lines if line.strip()]):
        return False, "unreadable plan step"
    end = world.replay(state, moves)
    if end is None:
        return False, "plan makes an illegal move"
    if not world.satisfies(end, read_pairs(instance.goal)):
        return False, "plan does not reach the goal"
    if len(moves) != instance.optimal:
        return False, f"plan has {len(moves)} steps, optimum is {instance.optimal}"
    return True, ""


def from_instance(instance: Instance) -> PickPlaceInstance:
    """Recover the Pick&Place view of a generic instance built by ``to_instance``."""
    return PickPlaceInstance(
        index=0,
        seed=0,
        initial=instance.story,
        goal=[line for line in instance.query.splitlines() if line.strip()],
        plan=[line for line in instance.gold.splitlines() if line.strip()],
        blocks=[name for name, kind in instance.inventory.items() if kind == "block"],
        bowls=[name for name, kind in instance.inventory.items() if kind == "bowl"],
        optimal=int(instance.meta.get("optimal", len(instance.gold.splitlines()))),
    )
