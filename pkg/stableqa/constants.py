from pathlib import Path
from typing import Literal

import srsly

from .types import Config

# Paths and folders
PACKAGE_FOLDER = Path(__file__).parent
ASSETS_FOLDER = PACKAGE_FOLDER / "assets"
MODULES_FOLDER = ASSETS_FOLDER / "modules"
PROMPTS_FOLDER = ASSETS_FOLDER / "prompts"
MANIFEST_PATH = MODULES_FOLDER / "manifest.yml"
PROFILES_PATH = ASSETS_FOLDER / "profiles.yml"
NAMES_PATH = ASSETS_FOLDER / "names.yml"
TEMPLATES_FOLDER = PACKAGE_FOLDER / "templates"
PROMPT_TEMPLATE_PATH = TEMPLATES_FOLDER / "prompt.jinja"
REPORT_TEMPLATE_PATH = TEMPLATES_FOLDER / "report.md.jinja"
CONFIG_FILE = Path("config.yml")

# Possible values
BABI_TASKS = [f"babi_{i}" for i in range(1, 21)]
TASKS = BABI_TASKS + ["stepgame", "clutrr", "clutrr_s", "gscan", "pickplace"]
PARSER_MODES = ["oracle", "llm", "replay"]
PARSER_MODES_TYPE = Literal["oracle", "llm", "replay"]
SOLVER_KINDS = ["internal", "external"]
SOLVER_KINDS_TYPE = Literal["internal", "external"]
GSCAN_SPLITS = {
    "A": "test",
    "B": "visual_easier",
    "C": "visual",
    "D": "situational_1",
    "E": "situational_2",
    "F": "contextual",
    "G": "adverb_1",
    "H": "adverb_2",
}
ERROR_CATEGORIES = [
    "parse-error",
    "reasoning-gap",
    "dataset-error-candidate",
    "ambiguous-gold",
    "abstain",
    "unattributed",
]

CONFIG = Config(**srsly.read_yaml(CONFIG_FILE)) if CONFIG_FILE.exists() else Config()
DATA_FOLDER = Path("data")
CACHE_FOLDER = Path(CONFIG.cache_dir)
RUNS_FOLDER = Path(CONFIG.output_dir)
