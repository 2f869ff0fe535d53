"""REPL over a bundled handler: tell facts, inspect the store, drive
transactions, trace events, and optionally host the debug server.

Value literals use the canonical text form (null, true/false, decimal
integers, floats with '.' or exponent, double-quoted strings); ``_`` is the
wildcard in select patterns.
"""

from __future__ import annotations

import argparse
import re
import sys

from .engine import Handler
from .errors import CrError
from .rules import WILDCARD
from .server import DebugServer, default_port
from .solvers import HANDLERS
from .values import parse_value

_TOKEN_RE = re.compile(r'"(?:[^"\\]|\\.)*"|\S+')

HELP_TEXT = """\
commands:
  tell <constraint> <value>*      tell a fact (keys then data, by arity)
  select <constraint> [<value-or-_>*]   list matching stored facts
  run                             run the main loop on the current state
  resume                          resume a suspended run
  begin | commit | partial | rollback   transaction controls
  limit <n|off>                   set or clear the goal-size safety limit
  trace on|off                    print one line per engine event
  serve <port>                    host the debug server on a port
  help                            this text
  quit                            leave the REPL\
"""


def tokenize(line: str) -> list[str]:
    return _TOKEN_RE.findall(line)


class Repl:
    def __init__(self, handler: Handler, out=None):
        self.handler = handler
        self.out = out or sys.stdout
        self._trace_id: int | None = None
        self._server: DebugServer | None = None

    def println(self, text: str) -> None:
        print(text, file=self.out, flush=True)

    def close(self) -> None:
        if self._server is not None:
            self._server.close()

    # -- command execution --------------------------------------------------

    def execute(self, line: str) -> bool:
        """Run one command line; returns False when the session should end."""
        tokens = tokenize(line)
        if not tokens:
            return True
        cmd, args = tokens[0], tokens[1:]
        try:
            return self._execute(cmd, args)
        except CrError as e:
            self.println(f"error: {e.code}")
        except ValueError as e:
            self.println(f"error: parse: {e}")
        return True

    def _execute(self, cmd: str, args: list[str]) -> bool:
        h = self.handler
        if cmd == "quit":
            return False
        if cmd == "help":
            self.println(HELP_TEXT)
        elif cmd == "tell":
            if not args:
                raise ValueError("tell needs a constraint name")
            values = [parse_value(t).payload for t in args[1:]]
            outcome = self._locked(lambda: h.tell(args[0], *values))
            self.println(f"outcome: {outcome.value}")
        elif cmd == "select":
            if not args:
                raise ValueError("select needs a constraint name")
            pattern = None
            if len(args) > 1:
                pattern = [WILDCARD if t == "_" else parse_value(t) for t in args[1:]]
            facts = h.select(args[0], pattern)
            for fact in facts:
                self.println(fact.render())
            if not facts:
                self.println("(none)")
        elif cmd == "run":
            self.println(f"outcome: {self._locked(h.run).value}")
        elif cmd == "resume":
            self.println(f"outcome: {self._locked(h.resume).value}")
        elif cmd == "begin":
            self.println(f"depth: {self._locked(h.begin)}")
        elif cmd == "commit":
            self.println(f"depth: {self._locked(h.commit)}")
        elif cmd == "partial":
            self.println(f"depth: {self._locked(h.partial_commit)}")
        elif cmd == "rollback":
            self.println(f"depth: {self._locked(h.rollback)}")
        elif cmd == "limit":
            if not args:
                raise ValueError("limit needs a number or 'off'")
            if args[0] == "off":
                h.goal_limit = None
                self.println("limit: off")
            else:
                n = int(args[0])
                if n < 0:
                    raise ValueError("limit must be non-negative")
                h.goal_limit = n
                self.println(f"limit: {n}")
        elif cmd == "trace":
            if args[:1] == ["on"]:
                if self._trace_id is None:
                    self._trace_id = h.subscribe(
                        lambda e: self.println(f"[{e.seq}] {e.render()}")
                    )
                self.println("trace: on")
            elif args[:1] == ["off"]:
                if self._trace_id is not None:
                    h.unsubscribe(self._trace_id)
                    self._trace_id = None
                self.println("trace: off")
            else:
                raise ValueError("trace on|off")
        elif cmd == "serve":
            if self._server is not None:
                raise ValueError("already serving")
            port = int(args[0]) if args else default_port()
            self._server = DebugServer(h, port=port).start()
            self.println(f"serving on {self._server.port}")
        else:
            raise ValueError(f"unknown command {cmd!r}")
        return True

    def _locked(self, fn):
        # Share the serialization point with a running debug server.
        if self._server is not None:
            with self._server.engine_lock:
                return fn()
        return fn()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="crengine", description="constraint-rule engine REPL"
    )
    parser.add_argument(
        "--handler", default="order-interval", choices=sorted(HANDLERS),
        help="bundled handler to load",
    )
    parser.add_argument("--limit", type=int, default=None, help="goal-size safety limit")
    parser.add_argument("--trace", action="store_true", help="start with tracing on")
    parser.add_argument("--serve", type=int, metavar="PORT", help="host the debug server")
    parser.add_argument("--script", metavar="FILE", help="read commands from a file")
    args = parser.parse_args(argv)

    try:
        handler = HANDLERS[args.handler](goal_limit=args.limit)
    except CrError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    repl = Repl(handler)
    if args.trace:
        repl.execute("trace on")
    if args.serve is not None:
        try:
            repl.execute(f"serve {args.serve}")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1

    if args.script:
        try:
            source = open(args.script, encoding="utf-8")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
    else:
        source = sys.stdin

    interactive = source is sys.stdin and sys.stdin.isatty()
    try:
        while True:
            if interactive:
                print("> ", end="", flush=True)
            line = source.readline()
            if not line:
                break
            if not repl.execute(line):
                break
    finally:
        repl.close()
        if source is not sys.stdin:
            source.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
