import hashlib
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, StrictFloat, StrictInt, StrictStr, validator


class EngineConfig(BaseModel):
    rule_cap: int = 10_000_000
    timeout: float = 60.0
    max_models: int = 1
    solver_cmd: str = "clingo"


class BackendConfig(BaseModel):
    model: str = "text-davinci-003"
    base_url: str = "https://api.openai.com/v1"
    temperature: float = 0.0
    max_tokens: int = 256
    stop: List[str] = ["\n\n"]
    concurrency: int = 4
    retries: int = 5
    timeout: float = 30.0


class DatasetPaths(BaseModel):
    babi: str = "data/fixtures/babi"
    stepgame: str = "data/fixtures/stepgame"
    clutrr: str = "data/fixtures/clutrr"
    gscan: str = "data/fixtures/gscan/dataset.txt"
    pickplace: str = "data/fixtures/pickplace/instances.jsonl"


class Config(BaseModel):
    engine: EngineConfig = EngineConfig()
    backend: BackendConfig = BackendConfig()
    cache_dir: str = "cache/completions"
    output_dir: str = "runs"
    datasets: DatasetPaths = DatasetPaths()


# -- prompts and profiles -----------------------------------------------------------------


class PromptExample(BaseModel):
    input: str
    target: str


class PromptTemplate(BaseModel):
    """Few-shot prompt: preamble, worked examples, then the ``[INPUT]`` slot."""

    id: str = ""
    kind: Literal["context", "query", "whole-story", "baseline"]
    layout: Literal["inline", "block", "bare", "section"] = "inline"
    preamble: str
    examples: List[PromptExample]
    input_label: str = ""
    output_label: str
    final_output_label: Optional[str] = None
    oracle: bool = True
    errata: Dict[int, str] = {}

    def gold_pairs(self) -> List[Tuple[str, str]]:
        """Example pairs that the published prompt gets right."""
        return [(ex.input, ex.target) for i, ex in enumerate(self.examples) if i not in self.errata]


class TaskPrompts(BaseModel):
    context: Optional[str] = None
    query: Optional[str] = None
    gender: Optional[str] = None


class Horizon(BaseModel):
    mode: Literal["fact", "assume"] = "fact"
    max: int = 10


AnswerKind = Literal[
    "single-label",
    "yes-no-maybe",
    "count-word",
    "item-set",
    "direction-label",
    "relation-label",
    "action-sequence",
    "plan",
]


class TaskProfile(BaseModel):
    task: str
    dataset: Literal["babi", "stepgame", "clutrr", "gscan", "pickplace"]
    module: str
    prompts: TaskPrompts
    strategy: Literal["per-sentence", "whole-story"] = "per-sentence"
    query_strategy: Literal["single", "per-sentence"] = "single"
    timestamp: Literal["none", "sentence-index", "parser-supplied"] = "none"
    events: List[str] = []
    states: List[str] = []
    stride: int = 1
    answer: AnswerKind
    predicate: str = "answer"
    query_predicates: List[str] = []
    candidate: Optional[str] = None
    normalize: Dict[str, str] = {}
    horizon: Optional[Horizon] = None
    keep: List[str] = []

    def surface(self, label: str) -> str:
        return self.normalize.get(label, label)


class KnowledgeModule(BaseModel):
    name: str
    path: str
    text: str
    deps: List[str] = []
    answer: Optional[str] = None
    smoke: Optional[str] = None

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode("utf8")).hexdigest()


class CompletionRequest(BaseModel):
    model: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = 256
    stop: List[str] = ["\n\n"]

    @property
    def key(self) -> str:
        """Content address of the request: sha256 over its canonical JSON."""
        return hashlib.sha256(self.json(sort_keys=True).encode("utf8")).hexdigest()


class CompletionResponse(BaseModel):
    text: str
    model: str = ""
    usage: Dict[str, int] = {}
    cached: bool = False


# -- facts and answers --------------------------------------------------------------------


FactSource = Literal["context", "query", "gender", "side"]


class Fact(BaseModel):
    """One ground atom with where it came from."""

    atom: str
    source: FactSource = "context"
    sentence: Optional[int] = None
    span: str = ""


class Answer(BaseModel):
    kind: AnswerKind
    value: Union[str, List[str]] = ""
    abstained: bool = False
    ambiguous: bool = False
    labels: List[str] = []

    @property
    def text(self) -> str:
        if self.abstained:
            return "unknown"
        if isinstance(self.value, list):
            return ("\n" if self.kind == "plan" else ",").join(self.value)
        return self.value


# -- datasets -----------------------------------------------------------------------------


Direction = Literal["east", "west", "north", "south"]


class GridObject(BaseModel):
    shape: str
    color: str
    size: int
    pos: Tuple[int, int]

    @validator("size")
    def positive_size(cls, v):
        if v < 1:
            raise ValueError("object sizes are positive integers")
        return v


class GridConfig(BaseModel):
    """A gSCAN world. Positions are (row, column); east is column + 1, north is row - 1."""

    size: int
    agent: Tuple[int, int]
    direction: Direction
    objects: List[GridObject] = []

    @validator("agent")
    def agent_on_grid(cls, v, values):
        n = values.get("size", 0)
        if not all(0 <= c < n for c in v):
            raise ValueError(f"agent position {v} is outside a grid of size {n}")
        return v

    @validator("objects")
    def objects_on_grid(cls, v, values):
        n = values.get("size", 0)
        for obj in v:
            if not all(0 <= c < n for c in obj.pos):
                raise ValueError(f"object position {obj.pos} is outside a grid of size {n}")
        return v


class Instance(BaseModel):
    task: str
    story: List[str]
    query: str
    gold: str
    source: str
    supporting: List[int] = []
    grid: Optional[GridConfig] = None
    inventory: Dict[str, Literal["block", "bowl"]] = {}
    query_pair: Optional[Tuple[str, str]] = None
    meta: Dict[str, Union[StrictInt, StrictFloat, StrictStr, List[StrictStr]]] = {}

    @validator("gold")
    def gold_not_empty(cls, v):
        if not v.strip():
            raise ValueError("gold answer is empty")
        return v

    @validator("story")
    def story_not_empty(cls, v):
        if not v:
            raise ValueError("story is empty")
        return v


class PickPlaceInstance(BaseModel):
    index: int
    seed: int
    initial: List[str]
    goal: List[str]
    plan: List[str]
    blocks: List[str]
    bowls: List[str]
    optimal: int

    @property
    def inventory(self) -> Dict[str, str]:
        return {**{b: "block" for b in self.blocks}, **{b: "bowl" for b in self.bowls}}

    def to_instance(self, source: str = "") -> Instance:
        return Instance(
            task="pickplace",
            story=self.initial,
            query="\n".join(self.goal),
            gold="\n".join(self.plan),
            source=source or f"pickplace:{self.seed}:{self.index}",
            inventory=self.inventory,
            meta={"optimal": self.optimal},
        )


# -- runs and reports ---------------------------------------------------------------------


ParserMode = Literal["oracle", "llm", "replay"]
ErrorCategory = Literal[
    "parse-error",
    "reasoning-gap",
    "dataset-error-candidate",
    "ambiguous-gold",
    "abstain",
    "unattributed",
]


class RunConfig(BaseModel):
    task: str
    parser: ParserMode = "oracle"
    model: str = "text-davinci-003"
    path: Optional[str] = None
    split: Optional[str] = None
    k: Optional[int] = None
    seed: Optional[int] = None
    limit: Optional[int] = None
    timeout: float = 60.0
    max_models: int = 1
    solver: Literal["internal", "external"] = "internal"
    workers: int = 1
    output: str = "runs"
    replay: Optional[str] = None
    cache_dir: Optional[str] = None

    @validator("limit", "workers", "max_models")
    def positive(cls, v):
        if v is not None and v < 1:
            raise ValueError("must be positive")
        return v

    @validator("k")
    def k_range(cls, v):
        if v is not None and not 1 <= v <= 10:
            raise ValueError("k must be within 1..10")
        return v

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.json(sort_keys=True).encode("utf8")).hexdigest()


class InstanceRecord(BaseModel):
    index: int
    source: str
    story: List[str] = []
    query: str = ""
    gold: str
    predicted: str = ""
    correct: bool = False
    status: str = ""
    stage: str = "done"
    error: str = ""
    facts: List[Fact] = []
    warnings: List[str] = []
    candidates: List[str] = []
    ambiguous: bool = False
    latency: float = 0.0
    attribution: Optional[ErrorCategory] = None
    detail: str = ""


class EvalReport(BaseModel):
    task: str
    config: RunConfig
    config_hash: str
    module_versions: Dict[str, str] = {}
    records: List[InstanceRecord] = []
    accuracy: float = 0.0
    histogram: Dict[str, int] = {}
    created: str = ""

    @property
    def mismatches(self) -> List[InstanceRecord]:
        return [r for r in self.records if not r.correct]

    def summary(self) -> Dict:
        return {
            "task": self.task,
            "config_hash": self.config_hash,
            "total": len(self.records),
            "correct": sum(r.correct for r in self.records),
            "accuracy": self.accuracy,
            "histogram": self.histogram,
            "module_versions": self.module_versions,
            "created": self.created,
            "config": self.config.dict(),
        }
