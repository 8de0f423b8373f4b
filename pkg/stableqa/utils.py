import re

from rich.console import Console
from wasabi import Printer


console = Console()
msg = Printer()


_SENTENCE_END = re.compile(r"(?<=[.?!])\s+(?=[\[\"A-Z])")


def split_sentences(text):
    """Split running text on sentence punctuation; bracketed names stay attached."""
    return [s.strip() for s in _SENTENCE_END.split(text.strip()) if s.strip()]
