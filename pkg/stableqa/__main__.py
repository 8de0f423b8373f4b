from pathlib import Path
from typing import Optional

from pydantic import ValidationError
from radicli import Arg, Radicli

from .constants import CONFIG, DATA_FOLDER, RUNS_FOLDER
from .engine import LogicError
from .errors import StableQAError
from .utils import console, msg

cli = Radicli()
FAILURES = (StableQAError, LogicError, ValidationError, OSError)


@cli.command(
    "eval",
    task=Arg(help="Task to run: babi_1..babi_20, stepgame, clutrr, clutrr_s, gscan or pickplace"),
    parser=Arg("--parser", "-p", help="Where facts come from: oracle, llm or replay"),
    model=Arg("--model", "-m", help="Completion model for the llm parser"),
    path=Arg("--path", help="Dataset file or folder, defaults to config.yml"),
    split=Arg("--split", help="Dataset split, e.g. test or a gSCAN split letter A..H"),
    k=Arg("--k", "-k", help="StepGame hop count"),
    seed=Arg("--seed", help="Generate instances with this seed instead of loading a dataset"),
    limit=Arg("--limit", "-l", help="Only the first N instances"),
    timeout=Arg("--timeout", help="Seconds per solver call"),
    models=Arg("--models", help="Answer sets to enumerate per instance"),
    solver=Arg("--solver", help="internal or external"),
    workers=Arg("--workers", "-w", help="Instances in flight at once"),
    output=Arg("--output", "-o", help="Root folder for run output"),
    replay=Arg("--replay", help="JSONL of canned completions for the replay parser"),
    cache_dir=Arg("--cache-dir", help="Completion cache folder for the llm parser"),
)
def eval_cli(
    task: str,
    parser: str = "oracle",
    model: str = CONFIG.backend.model,
    path: Optional[str] = None,
    split: Optional[str] = None,
    k: Optional[int] = None,
    seed: Optional[int] = None,
    limit: Optional[int] = None,
    timeout: float = CONFIG.engine.timeout,
    models: int = CONFIG.engine.max_models,
    solver: str = "internal",
    workers: int = 1,
    output: str = str(RUNS_FOLDER),
    replay: Optional[str] = None,
    cache_dir: str = CONFIG.cache_dir,
):
    """Parse, reason and score a task, then attribute the errors."""
    from .harness import evaluate
    from .types import RunConfig

    try:
        config = RunConfig(
            task=task, parser=parser, model=model, path=path, split=split, k=k, seed=seed,
            limit=limit, timeout=timeout, max_models=models, solver=solver, workers=workers,
            output=output, replay=replay, cache_dir=cache_dir,
        )
        report = evaluate(config)
    except FAILURES as err:
        msg.fail(f"Could not evaluate {task}", str(err), exits=1)
    msg.good(f"{task}: {report.accuracy:.1%} on {len(report.records)} instances")
    for category, count in report.histogram.items():
        if count:
            console.print(f"  {category}: {count}")


@cli.command(
    "solve",
    program=Arg(help="Path to a logic program"),
    models=Arg("--models", "-n", help="Answer sets to print, 0 for all"),
    show_ground=Arg("--ground", "-g", help="Print the ground program instead of solving"),
    external=Arg("--external", "-e", help="Use the external solver from config.yml"),
    timeout=Arg("--timeout", help="Seconds before giving up"),
)
def solve_cli(program: Path, models: int = 1, show_ground: bool = False, external: bool = False, timeout: float = CONFIG.engine.timeout):
    """Ground and solve a program file, printing its answer sets."""
    from .engine import ground, parse_program, render, solve, solve_external

    try:
        text = Path(program).read_text()
        if external:
            result = solve_external(text, CONFIG.engine.solver_cmd, max_models=models, timeout=timeout)
        else:
            grounded = ground(parse_program(text, name=str(program)), cap=CONFIG.engine.rule_cap)
            if show_ground:
                console.print(grounded.pretty())
                return
            result = solve(grounded, max_models=models, timeout=timeout)
    except FAILURES as err:
        msg.fail(f"Could not solve {program}", str(err), exits=1)
    for i, answer_set in enumerate(result.answer_sets, start=1):
        console.print(f"Answer: {i}")
        console.print(str(answer_set), markup=False)
        if answer_set.cost:
            console.print(f"Optimization: {answer_set.cost}")
    console.print(result.status)
    if result.witness is not None:
        console.print(f"Conflict: {render(result.witness[0])} / {render(result.witness[1])}", markup=False)


@cli.command(
    "parse",
    task=Arg(help="Task whose prompts to use"),
    sentence=Arg(help="Sentence, question or whole story to parse"),
    role=Arg("--role", "-r", help="context, query or gender; questions default to query"),
    parser=Arg("--parser", "-p", help="oracle, llm, or baseline for direct planning by the model"),
    model=Arg("--model", "-m", help="Completion model for the llm parser"),
)
def parse_cli(task: str, sentence: str, role: Optional[str] = None, parser: str = "oracle", model: str = CONFIG.backend.model):
    """Show the facts a parser reads from one sentence."""
    from .completion import make_backend
    from .facts import parse_response
    from .oracle import infer_role, oracle_parse
    from .prompts import get_template, task_template

    try:
        role = role or infer_role(task, sentence)
        if parser == "baseline":
            backend = make_backend("llm", model=model, cache_dir=CONFIG.cache_dir)
            console.print(backend.respond(get_template(f"{task}_baseline").id, sentence), markup=False)
            return
        if parser == "oracle":
            facts = oracle_parse(task, sentence, role=role)
        else:
            template = task_template(task, role)
            if template is None:
                raise StableQAError(f"{task} has no {role} prompt")
            backend = make_backend(parser, model=model, cache_dir=CONFIG.cache_dir)
            facts = parse_response(backend.respond(template.id, sentence), source=role)
    except FAILURES as err:
        msg.fail(f"Could not parse for {task}", str(err), exits=1)
    console.print(facts.render(), markup=False)
    for _, text in facts.unmatched:
        msg.warn(f"No atoms for: {text}")


@cli.command(
    "modules",
    validate=Arg("--validate", "-v", help="Parse every module and run its smoke facts"),
)
def modules_cli(validate: bool = False):
    """List the knowledge modules, or check them."""
    from .modules import registry, validate_modules

    if validate:
        report = validate_modules()
        for note in report.notes:
            msg.info(note)
        for warning in report.warnings:
            msg.warn(warning)
        for error in report.errors:
            msg.fail(error)
        if not report.ok:
            msg.fail(f"{len(report.errors)} module error(s)", exits=1)
        msg.good("All modules parse and answer their smoke facts")
        return
    rows = [(name, ", ".join(m.deps), m.digest[:12], m.path) for name, m in registry().items()]
    msg.table(rows, header=("Module", "Depends on", "Digest", "File"), divider=True)


@cli.command(
    "gen",
    dataset=Arg(help="stepgame, clutrr or pickplace"),
    seed=Arg("--seed", "-s", help="Random seed"),
    count=Arg("--count", "-n", help="Number of instances"),
    k=Arg("--k", "-k", help="StepGame hop count"),
    output=Arg("--output", "-o", help="Where to write; defaults under data/generated"),
)
def gen_cli(dataset: str, seed: int = 0, count: int = 40, k: int = 1, output: Optional[Path] = None):
    """Generate synthetic instances in the format the loaders read."""
    import srsly

    from .datasets import gen_clutrr, gen_stepgame, write_clutrr, write_stepgame
    from .pickplace import gen_pickplace

    folder = DATA_FOLDER / "generated"
    try:
        if dataset == "stepgame":
            output = Path(output or folder / f"qa{k}_test.json")
            output.parent.mkdir(parents=True, exist_ok=True)
            write_stepgame(gen_stepgame(seed, k, count), output)
        elif dataset in ("clutrr", "clutrr_s"):
            output = Path(output or folder / "clutrr_s.csv")
            output.parent.mkdir(parents=True, exist_ok=True)
            write_clutrr(gen_clutrr(seed, count), output)
        elif dataset == "pickplace":
            output = Path(output or folder / "pickplace.jsonl")
            output.parent.mkdir(parents=True, exist_ok=True)
            srsly.write_jsonl(output, (p.dict() for p in gen_pickplace(seed, count, progress=True)))
        else:
            raise StableQAError(f"no generator for {dataset!r}; pick stepgame, clutrr or pickplace")
    except FAILURES as err:
        msg.fail(f"Could not generate {dataset}", str(err), exits=1)
    msg.good(f"Wrote {count} {dataset} instances to {output}")


@cli.command(
    "report",
    root=Arg("--root", "-r", help="Folder holding run folders"),
    output=Arg("--output", "-o", help="Markdown file to write; defaults to <root>/report.md"),
)
def report_cli(root: Path = RUNS_FOLDER, output: Optional[Path] = None):
    """Collect finished runs into one markdown report."""
    from .report import find_reports, render_report

    try:
        reports = find_reports(root)
        if not reports:
            raise StableQAError(f"no runs under {root}")
        output = Path(output or Path(root) / "report.md")
        output.write_text(render_report(reports))
    except FAILURES as err:
        msg.fail("Could not build the report", str(err), exits=1)
    console.log(f"Report written to [bold]{output}[/bold]")


if __name__ == "__main__":
    cli.run()
