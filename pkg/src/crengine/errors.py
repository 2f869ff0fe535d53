"""Exception taxonomy for the engine.

Every error carries a stable machine-readable ``code`` (kebab-case) that the
CLI and the debug-server surface verbatim.
"""

from __future__ import annotations


class CrError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class HandlerFault(CrError):
    """Invalid declaration, rule definition, or rule compilation.

    ``kind`` is the fault class (e.g. ``arity-mismatch``); ``rule_index`` is
    the 1-based index of the offending rule when one exists, and ``position``
    the 0-based atom position within its section.
    """

    def __init__(
        self,
        kind: str,
        message: str,
        rule_index: int | None = None,
        position: int | None = None,
    ):
        self.kind = kind
        self.rule_index = rule_index
        self.position = position
        self.code = kind
        where = ""
        if rule_index is not None:
            where = f" (rule {rule_index}"
            if position is not None:
                where += f", atom {position}"
            where += ")"
        super().__init__(f"{kind}: {message}{where}")


# HandlerFault kinds
DUPLICATE_CONSTRAINT = "duplicate-constraint"
RESERVED_NAME = "reserved-name"
DECLARATION_AFTER_SETUP = "declaration-after-setup"
UNKNOWN_CONSTRAINT = "unknown-constraint"
ARITY_MISMATCH = "arity-mismatch"
MODIFIER_ON_BODY = "modifier-on-body"
EMPTY_HEAD = "empty-head"
ALL_HEADS_PASSIVE = "all-heads-passive"
UNKNOWN_GUARD = "unknown-guard"
GUARD_ARITY_MISMATCH = "guard-arity-mismatch"
UNBOUND_SYMBOL = "unbound-body-symbol"
NEGATED_GUARD_OUT_PARAM = "negated-guard-out-param"
DUPLICATE_GUARD = "duplicate-guard"
SECTION_ORDER = "section-order"
INVALID_PATTERN = "invalid-pattern"


class EngineFault(CrError):
    """A bug-level runtime failure: guard internal error, out-binding
    collision, listener exception, or an unset symbol read."""

    code = "engine-fault"


class StateError(CrError):
    """An operation invoked in a state that forbids it."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        super().__init__(message or code)


class TellOnFailed(StateError):
    def __init__(self):
        super().__init__("tell-on-failed", "cannot tell to a failed handler")


class ResumeNotSuspended(StateError):
    def __init__(self):
        super().__init__("resume-not-suspended", "resume requires a suspended handler")


class NoOpenTransaction(StateError):
    def __init__(self):
        super().__init__("no-open-transaction", "no transaction is open")


class BeginDuringRun(StateError):
    def __init__(self):
        super().__init__("begin-during-run", "transactions cannot start during a run")


class FactTypeError(CrError):
    """A told or instantiated fact violates its constraint signature."""

    code = "type-error"
