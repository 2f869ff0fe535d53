from __future__ import annotations

import pytest

from crengine import RunStatus, build_order_interval_handler


@pytest.fixture
def order_handler():
    return build_order_interval_handler()


def observable_state(handler) -> dict:
    """Everything a client can see: store per constraint, goal, status, depth."""
    return {
        "store": tuple(handler.store_facts()),
        "goal": handler.goal_facts(),
        "status": handler.status,
        "reason": handler.suspend_reason,
        "depth": handler.depth,
    }


def run_to_completion(handler, constraint, *values) -> RunStatus:
    out = handler.tell(constraint, *values)
    while out is RunStatus.SUSPENDED:
        out = handler.resume()
    return out
