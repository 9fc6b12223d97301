"""Exception hierarchy.

Everything deriving from :class:`EngineError` aborts a run with a
diagnostic. Runtime facts such as a failed skill are reported as
``Failure`` statuses instead, never as exceptions.
"""


class EngineError(Exception):
    pass


class PortResolutionError(EngineError):
    pass


class ParseError(PortResolutionError):
    pass


class KeyNotFound(EngineError, KeyError):
    def __init__(self, key, scope_path=""):
        super().__init__(key)
        self.key = key
        self.scope_path = scope_path

    def __str__(self):
        where = f" in scope {self.scope_path!r}" if self.scope_path else ""
        return f"blackboard key {self.key!r} not found{where}"


class DuplicateRemapKey(EngineError):
    pass


class PredicateError(EngineError):
    pass


class HaltTimeout(EngineError):
    def __init__(self, path, timeout):
        super().__init__(f"halt of {path} did not complete within {timeout * 1000:.0f} ms")
        self.path = path
        self.timeout = timeout


class ConfigError(EngineError):
    pass


class TreeFileError(EngineError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TreeSyntaxError(TreeFileError):
    pass


class UnknownElement(TreeFileError):
    pass


class MissingAttribute(TreeFileError):
    pass


class InvalidTree(TreeFileError):
    def __init__(self, diagnostics):
        lines = "; ".join(str(d) for d in diagnostics)
        super().__init__(f"tree failed validation: {lines}")
        self.diagnostics = diagnostics


class UnregisteredLeaf(TreeFileError):
    pass


class PortMismatch(TreeFileError):
    pass


class ExpansionUnsupported(TreeFileError):
    pass


class DecodeError(EngineError):
    def __init__(self, message, line):
        super().__init__(f"{message}: {line!r}")
        self.line = line


class SkillConnectionError(EngineError):
    pass
