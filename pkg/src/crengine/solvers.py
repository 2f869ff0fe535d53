"""Bundled handlers: the partial-order and integer-interval rule program.

Constraints leq/lt/eq/neq relate string variables; dom maps a variable to an
inclusive integer bound pair. The rules drop trivial (in)equalities, rewrite
strict inequality, detect inconsistencies, close eq under symmetry, swap
domains across equal variables, ignore non-informative bounds, and intersect
informative ones.
"""

from __future__ import annotations

from .engine import Handler
from .guards import In, Out


def build_order_interval_handler(goal_limit: int | None = None) -> Handler:
    h = Handler("order-interval", goal_limit=goal_limit)
    leq, lt, eq, neq, dom = h.symbols("leq", "lt", "eq", "neq", "dom")
    X, Y = h.symbols("X", "Y")
    A, B, C, D, E, F = h.symbols("A", "B", "C", "D", "E", "F")

    h.constraint(leq, str, str)
    h.constraint(lt, str, str)
    h.constraint(eq, str, str)
    h.constraint(neq, str, str)
    h.constraint(dom, str).with_(int, int)

    h.register_guard("lessOrEqual", lambda a, b: a <= b, [In(int), In(int)])
    h.register_guard(
        "includes",
        lambda a, b, c, d: a <= c and d <= b,
        [In(int), In(int), In(int), In(int)],
    )

    def isect(a, b, c, d, e, f):
        e.set(max(a, c))
        f.set(min(b, d))

    h.register_guard(
        "isect", isect,
        [In(int), In(int), In(int), In(int), Out(), Out()],
        returns_truth=False,
    )

    h.when(leq, X, X)
    h.when(eq, X, X)
    h.when(lt, X, Y).then(leq, X, Y).and_(neq, X, Y)
    h.when(neq, X, X).then(h.fail)
    h.when(leq, X, Y).and_(leq, Y, X).passive().then(eq, X, Y)
    h.when(eq, X, Y).and_(eq, X, Y).passive().keep()
    h.when(eq, X, Y).keep().then(eq, Y, X)
    (
        h.when(eq, X, Y).keep()
        .and_(dom, X).with_(A, B).keep()
        .and_(dom, Y).with_(C, D).keep()
        .where("!equals", X, Y)
        .then(dom, X).with_(C, D)
        .and_(dom, Y).with_(A, B)
    )
    h.when(dom, X).with_(A, B).and_("!lessOrEqual", A, B).then(h.fail)
    (
        h.when(dom, X).with_(A, B)
        .and_(dom, X).with_(C, D).passive().keep()
        .where("includes", A, B, C, D)
    )
    (
        h.when(dom, X).with_(A, B)
        .and_(dom, X).with_(C, D).passive()
        .where("!includes", A, B, C, D)
        .and_("isect", A, B, C, D, E, F)
        .then(dom, X).with_(E, F)
    )
    return h.compile()


def interval_fixpoint_bounds(pairs) -> tuple[int, int] | None:
    """Analytic fixpoint for a multiset of bound pairs: the intersection.

    Returns (max of lows, min of highs), or None when the intersection is
    empty (the rule program must then fail). Each pair must satisfy a <= b.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("at least one bound pair required")
    if any(a > b for a, b in pairs):
        raise ValueError("bound pairs must satisfy a <= b")
    lo = max(a for a, _ in pairs)
    hi = min(b for _, b in pairs)
    return (lo, hi) if lo <= hi else None


HANDLERS = {"order-interval": build_order_interval_handler}
