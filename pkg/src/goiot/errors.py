"""Exception hierarchy shared by all goiot modules."""

from __future__ import annotations


class GoiotError(Exception):
    """Base class for all package errors."""


class InputError(GoiotError):
    """Bad user input (scenario, CLI arguments). Maps to CLI exit code 2."""


class DuplicateNode(InputError):
    pass


class DanglingEdge(InputError):
    pass


class Unreachable(InputError):
    def __init__(self, ap: str, cloud: str):
        super().__init__(f"cloud {cloud!r} is unreachable from access point {ap!r}")
        self.ap = ap
        self.cloud = cloud


class ParseError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, field: str, message: str = ""):
        super().__init__(f"{field}: {message}" if message else field)
        self.field = field


class DanglingReference(InputError):
    def __init__(self, ref: str, where: str = ""):
        super().__init__(f"unknown id {ref!r}" + (f" referenced by {where}" if where else ""))
        self.ref = ref


class ConfigMismatch(InputError):
    pass


class InvalidFrequency(InputError):
    pass


class MismatchedLengths(InputError):
    pass


class MissingPath(InputError):
    def __init__(self, cloud: str):
        super().__init__(f"no path terminates at cloud {cloud!r}")
        self.cloud = cloud


class EmptyInput(GoiotError):
    pass


class Infeasible(GoiotError):
    """No assignment satisfies the resource and epsilon bounds. CLI exit code 1."""
