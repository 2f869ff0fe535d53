"""TCP debug server: one handler exposed over newline-delimited JSON.

Server to client: a hello on connect, then every engine event plus one reply
per command id. Clients send ``{"id": K, "cmd": C, ...}`` lines. All clients
share the handler's single event stream.

The engine runs on whichever worker thread executes a tell/resume command;
breakpoints block that thread inside the event listener, freezing the state.
While paused, reads (select, breakpoint ops) are served directly and
state-changing commands reply ``busy``; ``continue``/``step`` release the
pause from another thread.
"""

from __future__ import annotations

import os
import socket
import threading
from concurrent.futures import ThreadPoolExecutor

from . import events as ev
from .engine import Handler
from .errors import CrError
from .wire import (
    WireError,
    decode_key_pattern,
    decode_value,
    dumps,
    encode_event,
    encode_fact,
    encode_signature,
)

DEFAULT_PORT = 7454
PORT_ENV_VAR = "CR_DEBUG_PORT"

_ENGINE_LOCK_TIMEOUT = 30.0


def default_port() -> int:
    return int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))


class _Client:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.wlock = threading.Lock()
        self.alive = True

    def send(self, line: str) -> bool:
        data = (line + "\n").encode("utf-8")
        try:
            with self.wlock:
                self.sock.sendall(data)
            return True
        except OSError:
            self.alive = False
            return False


class _PauseGate:
    """Blocks the engine thread at matching events until released."""

    def __init__(self):
        self._release = threading.Event()
        self._lock = threading.Lock()
        self.paused = False
        self._step_armed = False

    def maybe_pause(self, event: ev.Event, breakpoints: ev.BreakpointSet) -> None:
        with self._lock:
            step_hit = self._step_armed and event.kind == ev.DEQUEUED
            if not step_hit and not breakpoints.matches(event):
                return
            self._step_armed = False
            self.paused = True
            self._release.clear()
        self._release.wait()
        with self._lock:
            self.paused = False

    def resume(self, step: bool) -> bool:
        with self._lock:
            if not self.paused:
                return False
            self._step_armed = step
            self._release.set()
            return True

    def unblock(self) -> None:
        self._release.set()


class DebugServer:
    def __init__(self, handler: Handler, port: int | None = None, host: str = "127.0.0.1"):
        self.handler = handler
        self.host = host
        self._requested_port = default_port() if port is None else port
        self.port: int | None = None
        self.breakpoints = ev.BreakpointSet()
        self.gate = _PauseGate()
        self.engine_lock = threading.Lock()
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._sock: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._pool = ThreadPoolExecutor(max_workers=8, thread_name_prefix="cr-cmd")
        self._subscription: int | None = None
        self._running = False

    # -- lifecycle -------------------------------------------------------

    def start(self) -> "DebugServer":
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self._requested_port))
        self._sock.listen(8)
        self._sock.settimeout(0.5)
        self.port = self._sock.getsockname()[1]
        self._subscription = self.handler.subscribe(self._on_event)
        self._running = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="cr-accept", daemon=True
        )
        self._accept_thread.start()
        return self

    def close(self) -> None:
        if not self._running:
            return
        self._running = False
        self.gate.unblock()
        if self._subscription is not None:
            try:
                self.handler.unsubscribe(self._subscription)
            except CrError:
                pass
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass
        with self._clients_lock:
            for client in self._clients:
                try:
                    client.sock.close()
                except OSError:
                    pass
            self._clients.clear()
        self._pool.shutdown(wait=False)

    def _accept_loop(self) -> None:
        while self._running and self._sock is not None:
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            client = _Client(conn)
            with self._clients_lock:
                self._clients.append(client)
            client.send(dumps(self._hello()))
            threading.Thread(
                target=self._read_loop, args=(client,), name="cr-read", daemon=True
            ).start()

    def _hello(self) -> dict:
        h = self.handler
        return {
            "type": "hello",
            "handler": h.name,
            "constraints": [encode_signature(s) for s in h.signatures.values()],
            "rules": [r.label() for r in h.rules],
        }

    # -- event bridge ------------------------------------------------------

    def _on_event(self, event: ev.Event) -> None:
        line = dumps({"type": "event", "seq": event.seq, "event": encode_event(event)})
        dead = []
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if not client.send(line):
                dead.append(client)
        if dead:
            with self._clients_lock:
                for client in dead:
                    if client in self._clients:
                        self._clients.remove(client)
        if self._running:
            self.gate.maybe_pause(event, self.breakpoints)

    # -- command handling ----------------------------------------------------

    def _read_loop(self, client: _Client) -> None:
        buf = b""
        while self._running and client.alive:
            try:
                chunk = client.sock.recv(4096)
            except OSError:
                break
            if not chunk:
                break
            buf += chunk
            while b"\n" in buf:
                line, buf = buf.split(b"\n", 1)
                text = line.decode("utf-8", errors="replace").strip()
                if text:
                    self._pool.submit(self._dispatch, client, text)
        client.alive = False
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)

    def _dispatch(self, client: _Client, text: str) -> None:
        import json

        msg_id = None
        try:
            msg = json.loads(text)
            if not isinstance(msg, dict):
                raise WireError("command must be an object")
            msg_id = msg.get("id")
            reply = self._reply(msg_id, *self.handle_command(msg))
        except (json.JSONDecodeError, WireError, KeyError, TypeError):
            reply = self._reply(msg_id, False, "parse")
        except CrError as e:
            reply = self._reply(msg_id, False, e.code)
        except Exception:
            reply = self._reply(msg_id, False, "engine-fault")
        client.send(dumps(reply))

    @staticmethod
    def _reply(msg_id, ok: bool, payload) -> dict:
        if ok:
            return {"type": "reply", "id": msg_id, "ok": True, "data": payload}
        return {"type": "reply", "id": msg_id, "ok": False, "error": payload}

    def _with_engine(self, fn):
        """Run a state-changing operation while holding the engine lock."""
        if self.gate.paused:
            return False, "busy"
        if not self.engine_lock.acquire(timeout=_ENGINE_LOCK_TIMEOUT):
            return False, "busy"
        try:
            return True, fn()
        except CrError as e:
            return False, e.code
        finally:
            self.engine_lock.release()

    def handle_command(self, msg: dict) -> tuple[bool, object]:
        """Execute one parsed command; returns (ok, data-or-error-code)."""
        cmd = msg.get("cmd")
        h = self.handler

        if cmd == "tell":
            values = [decode_value(v) for v in msg.get("key", [])]
            values += [decode_value(v) for v in msg.get("data", [])]
            constraint = msg["constraint"]
            return self._with_engine(
                lambda: {"outcome": h.tell(constraint, *values).value}
            )
        if cmd == "resume":
            return self._with_engine(lambda: {"outcome": h.resume().value})
        if cmd == "run":
            return self._with_engine(lambda: {"outcome": h.run().value})
        if cmd == "select":
            key = msg.get("key")
            pattern = decode_key_pattern(key) if key is not None else None
            if self.gate.paused:
                facts = h.select(msg["constraint"], pattern)
            else:
                ok, facts = self._with_engine(lambda: h.select(msg["constraint"], pattern))
                if not ok:
                    return ok, facts
            return True, {"facts": [encode_fact(f) for f in facts]}
        if cmd == "begin":
            return self._with_engine(lambda: {"depth": h.begin()})
        if cmd == "commit":
            return self._with_engine(lambda: {"depth": h.commit()})
        if cmd == "partialCommit":
            return self._with_engine(lambda: {"depth": h.partial_commit()})
        if cmd == "rollback":
            return self._with_engine(lambda: {"depth": h.rollback()})
        if cmd == "limit":
            n = msg.get("n")
            if n is not None and (not isinstance(n, int) or isinstance(n, bool) or n < 0):
                return False, "parse"
            h.goal_limit = n
            return True, {"limit": n}
        if cmd == "status":
            return True, {
                "status": h.status.value,
                "depth": h.depth,
                "paused": self.gate.paused,
            }
        if cmd == "breakpoint.add":
            bp = self._parse_breakpoint(msg)
            return True, {"id": self.breakpoints.add(bp)}
        if cmd == "breakpoint.remove":
            self.breakpoints.remove(msg["breakpoint"])
            return True, {}
        if cmd == "breakpoint.list":
            out = []
            for bid, bp in sorted(self.breakpoints.entries().items()):
                entry: dict = {"id": bid}
                if bp.step:
                    entry["step"] = True
                elif bp.rule is not None:
                    entry["rule"] = bp.rule
                else:
                    entry["constraint"] = bp.constraint
                out.append(entry)
            return True, {"breakpoints": out}
        if cmd == "continue":
            if not self.gate.resume(step=False):
                return False, "not-paused"
            return True, {}
        if cmd == "step":
            if not self.gate.resume(step=True):
                return False, "not-paused"
            return True, {}
        return False, "unknown-command"

    def _parse_breakpoint(self, msg: dict) -> ev.Breakpoint:
        if msg.get("step"):
            return ev.Breakpoint(step=True)
        if "rule" in msg:
            rule = msg["rule"]
            if not isinstance(rule, int) or not (1 <= rule <= len(self.handler.rules)):
                raise WireError(f"no rule {rule}")
            return ev.Breakpoint(rule=rule)
        if "constraint" in msg:
            name = msg["constraint"]
            if name not in self.handler.signatures:
                raise WireError(f"no constraint {name}")
            return ev.Breakpoint(constraint=name)
        raise WireError("breakpoint needs rule, constraint, or step")


def serve(handler: Handler, port: int | None = None, host: str = "127.0.0.1") -> DebugServer:
    """Start a debug server for a compiled handler; returns the running server."""
    return DebugServer(handler, port=port, host=host).start()
