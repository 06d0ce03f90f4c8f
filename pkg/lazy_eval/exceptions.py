# lazy_eval/exceptions.py


class LrpError(Exception):
    """Base class for every error raised by the interpreter."""


class LrpSyntaxError(LrpError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(str(self))

    def __str__(self):
        if self.line is None:
            return self.message
        return f"line {self.line}, column {self.column}: {self.message}"


class CompileError(LrpError):
    def __init__(self, message, names=()):
        self.names = tuple(sorted(names))
        if self.names:
            message = f"{message}: {', '.join(self.names)}"
        super().__init__(message)


class BlackholeError(LrpError):
    """Demand on a variable that has no binding on the heap."""

    def __init__(self, name, result=None):
        self.name = name
        self.result = result
        super().__init__(f"blackhole: no heap binding for '{name}'")


class MachineError(LrpError):
    """The machine reached a state no transition rule covers."""


class OracleError(LrpError):
    pass


class TraceError(LrpError):
    pass


class StepLimitExceeded(LrpError):
    """A run did not finish within its step budget."""

    def __init__(self, max_steps, result=None):
        self.max_steps = max_steps
        self.result = result
        super().__init__(f"step limit of {max_steps} reached")
