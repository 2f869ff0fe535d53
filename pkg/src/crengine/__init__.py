"""Committed-choice constraint-rule engine with a fluent rule DSL.

Declare constraints and multi-head rewrite rules on a Handler, compile it,
then tell facts and read the fixpoint back with select. The run is fully
instrumented (event listeners, breakpoints, transactions) and a TCP debug
server plus a CLI wrap the same handler API.
"""

from .engine import Fact, Handler, RunStatus, Store, SuspendReason
from .errors import (
    BeginDuringRun,
    CrError,
    EngineFault,
    FactTypeError,
    HandlerFault,
    NoOpenTransaction,
    ResumeNotSuspended,
    StateError,
    TellOnFailed,
)
from .events import Breakpoint, BreakpointSet, Event, EventBus
from .guards import GuardRegistry, GuardSpec, In, Out
from .oracle import OracleResult, oracle_run
from .rules import (
    WILDCARD,
    Bind,
    ConstraintSignature,
    Literal,
    Rule,
    match_head,
)
from .server import DebugServer, serve
from .solvers import HANDLERS, build_order_interval_handler, interval_fixpoint_bounds
from .values import (
    NULL,
    SymbolRef,
    Tag,
    Value,
    compare_values,
    from_python,
    parse_value,
    render_value,
    to_python,
    type_check,
    values_equal,
)

__version__ = "0.1.0"

__all__ = [
    "Bind",
    "Breakpoint",
    "BreakpointSet",
    "BeginDuringRun",
    "ConstraintSignature",
    "CrError",
    "DebugServer",
    "EngineFault",
    "Event",
    "EventBus",
    "Fact",
    "FactTypeError",
    "GuardRegistry",
    "GuardSpec",
    "HANDLERS",
    "Handler",
    "HandlerFault",
    "In",
    "Literal",
    "NULL",
    "NoOpenTransaction",
    "OracleResult",
    "Out",
    "ResumeNotSuspended",
    "Rule",
    "RunStatus",
    "StateError",
    "Store",
    "SuspendReason",
    "SymbolRef",
    "Tag",
    "TellOnFailed",
    "Value",
    "WILDCARD",
    "build_order_interval_handler",
    "compare_values",
    "from_python",
    "interval_fixpoint_bounds",
    "match_head",
    "oracle_run",
    "parse_value",
    "render_value",
    "serve",
    "to_python",
    "type_check",
    "values_equal",
]
