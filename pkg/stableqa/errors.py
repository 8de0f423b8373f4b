class StableQAError(Exception):
    """Base class for pipeline errors outside the logic engine."""


class UnknownModuleError(StableQAError):
    def __init__(self, name: str, known=()):
        self.name = name
        hint = f" (known: {', '.join(sorted(known))})" if known else ""
        super().__init__(f"unknown knowledge module {name!r}{hint}")


class UnknownTaskError(StableQAError):
    def __init__(self, task: str, what: str = "profile"):
        self.task = task
        super().__init__(f"no {what} registered for task {task!r}")


class AmbiguousAnswerError(StableQAError):
    def __init__(self, task: str, labels):
        self.task = task
        self.labels = list(labels)
        super().__init__(f"{task}: {len(self.labels)} conflicting answers {self.labels}")


class PromptInputError(StableQAError):
    pass


class BackendError(StableQAError):
    def __init__(self, message: str, status: int = None):
        self.status = status
        super().__init__(message)


class CacheWriteError(StableQAError):
    pass


class DatasetFormatError(StableQAError):
    def __init__(self, message: str, path=None, line: int = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path is not None and line is not None else (f"{path}: " if path else "")
        super().__init__(f"{where}{message}")


class GenerationBudgetError(StableQAError):
    def __init__(self, attempts: int):
        self.attempts = attempts
        super().__init__(f"no acceptable instance after {attempts} attempts")
