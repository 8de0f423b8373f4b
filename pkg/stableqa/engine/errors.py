class LogicError(Exception):
    """Base class for everything the logic engine raises."""


class ParseError(LogicError):
    def __init__(self, message: str, line: int = 0, column: int = 0, name: str = "<program>"):
        self.message = message
        self.line = line
        self.column = column
        self.name = name
        super().__init__(f"{name}:{line}:{column}: {message}")


class UnsupportedConstructError(ParseError):
    def __init__(self, construct: str, line: int = 0, column: int = 0, name: str = "<program>"):
        self.construct = construct
        super().__init__(f"unsupported construct {construct}", line, column, name)


class SafetyError(ParseError):
    def __init__(self, rule_index: int, variable: str, rule_text: str = "", name: str = "<program>", line: int = 0):
        self.rule_index = rule_index
        self.variable = variable
        self.rule_text = rule_text
        message = f"unsafe variable {variable} in rule {rule_index}"
        if rule_text:
            message += f": {rule_text}"
        super().__init__(message, line, 0, name)


class ConstantRedefinitionError(LogicError):
    def __init__(self, constant: str, first, second):
        self.constant = constant
        super().__init__(f"constant {constant} defined twice ({first} and {second})")


class GroundingError(LogicError):
    pass


class GroundingLimitError(GroundingError):
    def __init__(self, rule_text: str, cap: int):
        self.rule_text = rule_text
        self.cap = cap
        super().__init__(f"ground rule cap of {cap:,} exceeded while grounding: {rule_text}")


class SolveTimeout(LogicError):
    """Raised when the time budget runs out; ``incumbent`` is the best answer set found, if any."""

    def __init__(self, elapsed: float, best_cost=None, incumbent=None):
        self.elapsed = elapsed
        self.best_cost = best_cost
        self.incumbent = incumbent
        super().__init__(f"solver budget exhausted after {elapsed:.1f}s, best known cost {best_cost}")


class ExternalSolverError(LogicError):
    def __init__(self, message: str, returncode: int = None, stderr: str = ""):
        self.returncode = returncode
        self.stderr = stderr
        super().__init__(message)


class SolverNotFound(ExternalSolverError):
    pass


class SolverOutputError(ExternalSolverError):
    pass
