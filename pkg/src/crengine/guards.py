"""Guard registry: named side-condition functions callable from rules.

A guard runs only after every In argument passes its type/null check; a
failed check is a plain Failure and the function is never entered. Negation
inverts the plain result. Out parameters receive the writable symbol itself
and produce frame bindings on plain success.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .errors import DUPLICATE_GUARD, EngineFault, HandlerFault
from .values import SymbolRef, Tag, Value, as_tag, to_python, type_check


@dataclass(frozen=True)
class In:
    """An input parameter; ``tag`` None admits any type."""

    tag: object = None
    nullable: bool = False

    def __post_init__(self):
        if self.tag is not None:
            object.__setattr__(self, "tag", as_tag(self.tag))


@dataclass(frozen=True)
class Out:
    """An output parameter: the guard receives a writable symbol cell."""


ParamSpec = In | Out


@dataclass(frozen=True)
class GuardSpec:
    name: str
    params: tuple[ParamSpec, ...]
    variadic_tail: ParamSpec | None = None
    returns_truth: bool = True

    def param_at(self, i: int) -> ParamSpec | None:
        if i < len(self.params):
            return self.params[i]
        return self.variadic_tail

    def params_for(self, n: int) -> tuple[ParamSpec, ...]:
        return _params_for(self, n)

    def arity_ok(self, n: int) -> bool:
        if self.variadic_tail is None:
            return n == len(self.params)
        return n >= len(self.params)

    def has_out(self, n: int) -> bool:
        return any(isinstance(self.param_at(i), Out) for i in range(n))


@lru_cache(maxsize=None)
def _params_for(spec: GuardSpec, n: int) -> tuple[ParamSpec, ...]:
    return tuple(spec.param_at(i) for i in range(n))


def _builtin_equals(x, y):
    # Structural equality over natives, matching the value model: tags are
    # distinct (1 != true) and floats compare bitwise at the zeros.
    if x is None or y is None:
        return x is None and y is None
    if type(x) is not type(y):
        return False
    if isinstance(x, float):
        import math

        return x == y and math.copysign(1.0, x) == math.copysign(1.0, y)
    return x == y


class GuardRegistry:
    """Name -> (spec, function); ``equals`` is pre-registered."""

    def __init__(self):
        self._guards: dict[str, tuple[GuardSpec, Callable]] = {}
        self.register(
            "equals",
            _builtin_equals,
            [In(None, nullable=True), In(None, nullable=True)],
        )

    def register(
        self,
        name: str,
        fn: Callable,
        params: Sequence[ParamSpec],
        variadic_tail: ParamSpec | None = None,
        returns_truth: bool = True,
    ) -> GuardSpec:
        if not name or name.startswith("!"):
            raise HandlerFault("invalid-pattern", f"bad guard name {name!r}")
        if name in self._guards:
            raise HandlerFault(DUPLICATE_GUARD, f"guard {name!r} already registered")
        spec = GuardSpec(name, tuple(params), variadic_tail, returns_truth)
        self._guards[name] = (spec, fn)
        return spec

    def lookup(self, name: str) -> GuardSpec | None:
        entry = self._guards.get(name)
        return entry[0] if entry else None

    def invoke(
        self,
        name: str,
        negated: bool,
        args: Sequence[Value | SymbolRef],
        frame: dict | None = None,
    ) -> dict[SymbolRef, Value] | None:
        """Run one guard invocation.

        Returns the out-bindings dict on success (empty when there are none)
        or None on failure. ``frame`` is consulted only to reject writes to
        already-bound symbols.
        """
        spec, fn = self._guards[name]
        if not spec.arity_ok(len(args)):
            raise EngineFault(f"guard {name!r} arity mismatch at invocation")
        natives = []
        out_syms: list[SymbolRef] = []
        checks_ok = True
        for p, a in zip(spec.params_for(len(args)), args):
            if isinstance(p, Out):
                if negated:
                    raise EngineFault(f"negated guard {name!r} has out parameter")
                sym = a
                sym.clear()
                out_syms.append(sym)
                natives.append(sym)
            else:
                v = a
                if not type_check(v, p.tag) or (v.tag is Tag.NULL and not p.nullable):
                    checks_ok = False
                    break
                natives.append(to_python(v))
        result: dict[SymbolRef, Value] | None = None
        if checks_ok:
            try:
                ret = fn(*natives)
            except Exception as e:
                raise EngineFault(f"guard {name!r} raised: {e}") from e
            ok = bool(ret) if spec.returns_truth else True
            if ok:
                result = {}
                for sym in out_syms:
                    if not sym.is_set():
                        continue
                    if (frame is not None and sym in frame) or sym in result:
                        raise EngineFault(
                            f"guard {name!r} wrote already-bound symbol {sym.name!r}"
                        )
                    result[sym] = sym.get()
        if negated:
            return {} if result is None else None
        return result
