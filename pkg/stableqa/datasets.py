"""Benchmark loaders, the grid converter and the synthetic instance generators."""
import ast
import csv
import random
import string
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import srsly

from .constants import GSCAN_SPLITS
from .errors import DatasetFormatError, GenerationBudgetError
from .facts import FactSet
from .oracle import STEPGAME_QUERY, stepgame_phrase
from .types import GridConfig, GridObject, Instance, PickPlaceInstance
from .utils import console

PathLike = Union[str, Path]


# -- bAbI ---------------------------------------------------------------------------------


def babi_file(path: PathLike, task: int, split: str = "test") -> Path:
    path = Path(path)
    if path.is_file():
        return path
    found = sorted(path.glob(f"qa{task}_*_{split}.txt"))
    if not found:
        raise DatasetFormatError(f"no file for task {task} ({split}) under {path}")
    return found[0]


def load_babi(path: PathLike, task: int, split: str = "test") -> List[Instance]:
    """One Instance per question line; the story is every earlier statement of its episode."""
    if not 1 <= task <= 20:
        raise DatasetFormatError(f"bAbI tasks are numbered 1..20, got {task}")
    file = babi_file(path, task, split)
    instances: List[Instance] = []
    story: List[str] = []
    line_ids: Dict[int, int] = {}
    for lineno, raw in enumerate(file.read_text(encoding="utf8").splitlines(), start=1):
        if not raw.strip():
            continue
        number, _, text = raw.strip().partition(" ")
        if not number.isdigit():
            raise DatasetFormatError("line does not start with a number", file, lineno)
        if int(number) == 1:
            story, line_ids = [], {}
        if "\t" not in text:
            if text.rstrip().endswith("?"):
                raise DatasetFormatError("question without answer column", file, lineno)
            line_ids[int(number)] = len(story)
            story.append(text.strip())
            continue
        question, gold, *rest = text.split("\t")
        supporting = [line_ids[int(i)] for i in (rest[0].split() if rest else []) if int(i) in line_ids]
        instances.append(
            Instance(
                task=f"babi_{task}",
                story=list(story) or [""],
                query=question.strip(),
                gold=gold.strip(),
                source=f"{file.name}:{lineno}",
                supporting=supporting,
            )
        )
    return instances


# -- StepGame -----------------------------------------------------------------------------


def load_stepgame(path: PathLike, k: Optional[int] = None, split: str = "test") -> List[Instance]:
    """Records of the public JSON release: an object of ``{"story", "question", "label"}`` by index.

    A directory holds one ``qa{k}_{split}.json`` per hop count; without ``k`` all of them load.
    """
    if k is not None and not 1 <= k <= 10:
        raise DatasetFormatError(f"k must be within 1..10, got {k}")
    path = Path(path)
    if path.is_dir():
        files = [path / f"qa{k}_{split}.json"] if k is not None else sorted(path.glob(f"qa*_{split}.json"))
        if not files or not files[0].exists():
            raise DatasetFormatError(f"no StepGame {split} file under {path}")
        return [inst for file in files for inst in _read_stepgame(file, k)]
    return _read_stepgame(path, k)


def _read_stepgame(path: Path, k: Optional[int]) -> List[Instance]:
    records = srsly.read_json(path)
    items = records.items() if isinstance(records, dict) else enumerate(records)
    instances = []
    for index, record in items:
        try:
            story = record["story"]
            instances.append(
                Instance(
                    task="stepgame",
                    story=[s.strip() for s in (story if isinstance(story, list) else [story])],
                    query=record["question"].strip(),
                    gold=record["label"],
                    source=f"{path.name}:{index}",
                    meta={"k": int(record.get("k_hop", k or 0))},
                )
            )
        except (KeyError, TypeError, ValueError) as err:
            raise DatasetFormatError(f"record {index}: {err}", path) from err
    return instances


_INVERSE = {
    "top": "down", "down": "top", "left": "right", "right": "left",
    "top_left": "down_right", "down_right": "top_left", "top_right": "down_left", "down_left": "top_right",
}


def gen_stepgame(seed: int, k: int, count: int, noise: int = 2, budget: int = 1000) -> List[Instance]:
    """StepGame-style instances: a chain of ``k`` relations plus distractor branches.

    The label comes from the vector-sum labeller; chains that end on the start (overlap)
    are redrawn.
    """
    from .modules import get_profile
    from .simulators import stepgame_label

    if not 1 <= k <= 10:
        raise DatasetFormatError(f"k must be within 1..10, got {k}")
    rng = random.Random(f"stepgame:{seed}:{k}")
    surface = get_profile("stepgame").surface
    relations = sorted(_INVERSE)
    instances = []
    for index in range(count):
        for _ in range(budget):
            extra = rng.randint(0, noise)
            agents = rng.sample(string.ascii_uppercase, k + 1 + extra)
            chain, spare = agents[: k + 1], agents[k + 1:]
            facts: List[Tuple[str, str, str]] = []
            for a, b in zip(chain[1:], chain):
                facts.append((rng.choice(relations), a, b))
            for agent in spare:
                facts.append((rng.choice(relations), agent, rng.choice(chain)))
            label = stepgame_label(facts, chain[-1], chain[0])
            if label != "overlap":
                break
        else:
            raise GenerationBudgetError(budget)
        sentences = []
        for rel, a, b in facts:
            if rng.random() < 0.5:
                sentences.append(stepgame_phrase(rng, rel, a, b))
            else:
                sentences.append(stepgame_phrase(rng, _INVERSE[rel], b, a))
        rng.shuffle(sentences)
        instances.append(
            Instance(
                task="stepgame",
                story=sentences,
                query=STEPGAME_QUERY.format(A=chain[-1], B=chain[0]),
                gold=surface(label),
                source=f"stepgame-gen:{seed}:{k}:{index}",
                meta={"k": k},
            )
        )
    return instances


# -- CLUTRR -------------------------------------------------------------------------------


def load_clutrr(path: PathLike, task: str = "clutrr") -> List[Instance]:
    """Rows of a CLUTRR csv: ``story``, ``query`` (a python tuple literal) and ``target``."""
    path = Path(path)
    instances = []
    with path.open(encoding="utf8", newline="") as f:
        reader = csv.DictReader(f)
        missing = {"story", "query", "target"} - set(reader.fieldnames or [])
        if missing:
            raise DatasetFormatError(f"missing column(s) {sorted(missing)}", path)
        for row_index, row in enumerate(reader):
            line = row_index + 2
            try:
                pair = ast.literal_eval(row["query"])
                a, b = (str(x) for x in pair)
            except (ValueError, SyntaxError, TypeError) as err:
                raise DatasetFormatError(f"unreadable query {row['query']!r}: {err}", path, line) from err
            if not (row["target"] or "").strip():
                raise DatasetFormatError("empty target", path, line)
            instances.append(
                Instance(
                    task=task,
                    story=[row["story"].strip()],
                    query=f"How is [{b}] related to [{a}]?",
                    gold=row["target"].strip(),
                    source=f"{path.name}:{line}",
                    query_pair=(a, b),
                    meta={"category": row.get("task_name") or ""},
                )
            )
    return instances


def gen_family_graph(seed: int, people: int = 8, budget: int = 200):
    """A random consistent family and a query pair with a nameable relation.

    Returns ``(family, (a, b), relation)`` where ``family`` is a :class:`simulators.Family`.
    A grandchild's second parent is only included when the first parent has no siblings in
    the family, so every stated fact set has a single reading.
    """
    from .oracle import lexicon
    from .simulators import Family, family_relation

    rng = random.Random(f"family:{seed}")
    names = {"male": sorted(n for n, g in lexicon().items() if g == "male"),
             "female": sorted(n for n, g in lexicon().items() if g == "female")}
    for _ in range(budget):
        used = set()

        def person(gender=None):
            gender = gender or rng.choice(["male", "female"])
            name = rng.choice([n for n in names[gender] if n not in used])
            used.add(name)
            return name, gender

        family = Family()
        (p, pg), (q, qg) = person("male"), person("female")
        family.add(p, pg)
        family.add(q, qg)
        family.marry(p, q)
        kids = []
        for _ in range(rng.randint(1, 3)):
            kid, kg = person()
            family.add(kid, kg, parents=(p, q))
            kids.append(kid)
        heir = rng.choice(kids)
        partners = ()
        if len(kids) == 1 and len(family) < people:
            spouse, sg = person("female" if family.gender[heir] == "male" else "male")
            family.add(spouse, sg)
            family.marry(heir, spouse)
            partners = (spouse,)
        while len(family) < people and rng.random() < 0.8:
            grandkid, gg = person()
            family.add(grandkid, gg, parents=(heir,) + partners)
        members = family.members()
        a, b = rng.sample(members, 2)
        relation = family_relation(family, a, b)
        if relation is not None:
            return family, (a, b), relation
    raise GenerationBudgetError(budget)


def family_story(family, rng: random.Random) -> List[str]:
    """Sentences stating the family in the bracketed-name style of the CLUTRR release."""
    return [f"[{relative}] is [{anchor}]'s {rel.replace('_', '-')}." for rel, anchor, relative in family.statements(rng)]


def gen_clutrr(seed: int, count: int, task: str = "clutrr_s", people: int = 8) -> List[Instance]:
    """Clean kinship stories from random families, labelled by direct search of the family."""
    rng = random.Random(f"clutrr:{seed}")
    instances = []
    for index in range(count):
        family, (a, b), relation = gen_family_graph(seed * 10_000 + index, people=people)
        instances.append(
            Instance(
                task=task,
                story=[" ".join(family_story(family, rng))],
                query=f"How is [{b}] related to [{a}]?",
                gold=relation.replace("_", "-"),
                source=f"clutrr-gen:{seed}:{index}",
                query_pair=(a, b),
            )
        )
    return instances


def write_clutrr(instances: List[Instance], path: PathLike) -> None:
    with Path(path).open("w", encoding="utf8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=["story", "query", "target"])
        writer.writeheader()
        for instance in instances:
            writer.writerow({"story": " ".join(instance.story), "query": repr(tuple(instance.query_pair)), "target": instance.gold})


def write_stepgame(instances: List[Instance], path: PathLike) -> None:
    records = {
        str(i): {"story": inst.story, "question": inst.query, "label": inst.gold, "k_hop": inst.meta.get("k", 0)}
        for i, inst in enumerate(instances)
    }
    srsly.write_json(path, records)


# -- gSCAN --------------------------------------------------------------------------------

_GSCAN_DIRECTIONS = {0: "east", 1: "south", 2: "west", 3: "north"}


def _position(raw) -> Tuple[int, int]:
    return int(raw["row"]), int(raw["column"])


def parse_situation(situation: Dict) -> GridConfig:
    direction = situation["agent_direction"]
    objects = [
        GridObject(
            shape=placed["object"]["shape"],
            color=placed["object"]["color"],
            size=int(placed["object"]["size"]),
            pos=_position(placed["position"]),
        )
        for _, placed in sorted(situation.get("placed_objects", {}).items(), key=lambda kv: int(kv[0]))
    ]
    return GridConfig(
        size=int(situation["grid_size"]),
        agent=_position(situation["agent_position"]),
        direction=_GSCAN_DIRECTIONS[int(direction)] if str(direction).isdigit() else direction,
        objects=objects,
    )


def load_gscan(path: PathLike, split: str = "A", limit: Optional[int] = None) -> List[Instance]:
    """Examples of one split from the public ``dataset.txt`` layout (``examples`` by split name)."""
    if split not in GSCAN_SPLITS:
        raise DatasetFormatError(f"unknown gSCAN split {split!r}; use one of {', '.join(GSCAN_SPLITS)}")
    path = Path(path)
    data = srsly.read_json(path)
    examples = data.get("examples", {}).get(GSCAN_SPLITS[split], [])
    if limit is not None:
        examples = examples[:limit]
    instances = []
    for index, example in enumerate(examples):
        try:
            command = " ".join(example["command"].split(","))
            gold = ", ".join(a.strip() for a in example["target_commands"].split(","))
            grid = parse_situation(example["situation"])
        except (KeyError, TypeError, ValueError) as err:
            raise DatasetFormatError(f"{GSCAN_SPLITS[split]} example {index}: {err}", path) from err
        instances.append(
            Instance(
                task="gscan",
                story=[command],
                query=command,
                gold=gold,
                source=f"{path.name}:{GSCAN_SPLITS[split]}:{index}",
                grid=grid,
                meta={"split": split},
            )
        )
    console.log(f"Loaded [bold]{len(instances)}[/bold] gSCAN examples from split {split}.")
    return instances


def grid_to_facts(grid: GridConfig) -> FactSet:
    """Grid size, agent pose and object descriptions in the gSCAN module's vocabulary.

    Positions are (row, column) tuples; objects are named ``o0``, ``o1``, ... in grid order.
    """
    facts = FactSet()
    facts.add(f"gridSize({grid.size})", source="side")
    facts.add(f"pos(agent, ({grid.agent[0]}, {grid.agent[1]}))", source="side")
    facts.add(f"dir(agent, {grid.direction})", source="side")
    for i, obj in enumerate(grid.objects):
        name = f"o{i}"
        facts.add(f"pos({name}, ({obj.pos[0]}, {obj.pos[1]}))", source="side")
        facts.add(f"shape({name}, {obj.shape})", source="side")
        facts.add(f"color({name}, {obj.color})", source="side")
        facts.add(f"size({name}, {obj.size})", source="side")
    return facts


# -- Pick&Place ---------------------------------------------------------------------------


def load_pickplace(path: PathLike) -> List[PickPlaceInstance]:
    path = Path(path)
    out = []
    for i, record in enumerate(srsly.read_jsonl(path)):
        try:
            out.append(PickPlaceInstance(**record))
        except (TypeError, ValueError) as err:
            raise DatasetFormatError(f"record {i}: {err}", path) from err
    return out


def load_instances(task: str, path: Optional[PathLike] = None, k: Optional[int] = None, split: Optional[str] = None, seed: Optional[int] = None, limit: Optional[int] = None) -> List[Instance]:
    """Instances for a task from its dataset root, or from the generator when ``seed`` is given."""
    from .constants import CONFIG

    roots = CONFIG.datasets
    if task.startswith("babi_"):
        found = load_babi(path or roots.babi, int(task.split("_")[1]), split or "test")
    elif task == "stepgame":
        found = gen_stepgame(seed, k or 1, limit or 100) if seed is not None else load_stepgame(path or roots.stepgame, k, split or "test")
    elif task in ("clutrr", "clutrr_s"):
        if seed is not None:
            found = gen_clutrr(seed, limit or 100, task=task)
        else:
            found = load_clutrr(path or Path(roots.clutrr) / f"{task}.csv", task=task)
    elif task == "gscan":
        found = load_gscan(path or roots.gscan, split or "A", limit)
    elif task == "pickplace":
        if seed is not None:
            from .pickplace import gen_pickplace

            found = [p.to_instance() for p in gen_pickplace(seed, limit or 40)]
        else:
            found = [p.to_instance() for p in load_pickplace(path or roots.pickplace)]
    else:
        raise DatasetFormatError(f"no loader for task {task!r}")
    return found[:limit] if limit is not None else found
