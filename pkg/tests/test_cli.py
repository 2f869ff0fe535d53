from __future__ import annotations

import io

import pytest

from crengine import build_order_interval_handler
from crengine.cli import Repl, main, tokenize


def run_script(tmp_path, lines, argv_extra=()):
    script = tmp_path / "script.txt"
    script.write_text("\n".join(lines) + "\n", encoding="utf-8")
    import contextlib

    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(["--script", str(script), *argv_extra])
    return code, out.getvalue()


def test_tokenizer_keeps_quoted_strings():
    assert tokenize('tell dom "x y" 0 10') == ["tell", "dom", '"x y"', "0", "10"]
    assert tokenize('select eq _ "a"') == ["select", "eq", "_", '"a"']
    assert tokenize("") == []


GOLDEN_SESSION = """\
outcome: fixpoint
outcome: fixpoint
dom("x") -> (3, 10)
outcome: failed
error: tell-on-failed
"""


def test_golden_interval_session(tmp_path):
    code, out = run_script(tmp_path, [
        'tell dom "x" 0 10',
        'tell dom "x" 3 15',
        "select dom",
        'tell neq "a" "a"',
        'tell leq "a" "b"',
        "quit",
    ])
    assert code == 0
    assert out == GOLDEN_SESSION


def test_script_transcript_is_deterministic(tmp_path):
    lines = [
        "begin",
        'tell dom "x" 5 3',
        "rollback",
        "rollback",
        'tell leq "a" "b"',
        "select leq",
        "select dom",
        "limit 0",
        'tell lt "p" "q"',
        "resume",
        "resume",
        "limit off",
        'select leq "p" "q"',
        "quit",
    ]
    first = run_script(tmp_path, lines)
    second = run_script(tmp_path, lines)
    assert first == second
    code, out = first
    assert code == 0
    assert out == (
        "depth: 1\n"
        "outcome: failed\n"
        "depth: 0\n"
        "error: no-open-transaction\n"
        "outcome: fixpoint\n"
        'leq("a", "b")\n'
        "(none)\n"
        "limit: 0\n"
        "outcome: suspended\n"
        "outcome: suspended\n"
        "outcome: fixpoint\n"
        "limit: off\n"
        'leq("p", "q")\n'
    )


def test_trace_prints_events(tmp_path):
    code, out = run_script(tmp_path, ['tell lt "a" "b"', "quit"], ["--trace"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "trace: on"
    assert lines[1] == '[0] told lt("a", "b")'
    assert any(line.startswith("[2] rule-fired rule=3") for line in lines)
    assert "[7] fixpoint" in lines
    assert lines[-1] == "outcome: fixpoint"


def test_parse_errors_do_not_kill_session(tmp_path):
    code, out = run_script(tmp_path, [
        "tell",
        "tell dom bareword",
        "nonsense",
        'tell leq "a" "b"',
        "quit",
    ])
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("error: parse:")
    assert lines[1].startswith("error: parse:")
    assert lines[2].startswith("error: parse:")
    assert lines[3] == "outcome: fixpoint"


def test_limit_flag(tmp_path):
    code, out = run_script(
        tmp_path, ['tell lt "a" "b"', "run", "run", "quit"], ["--limit", "0"]
    )
    assert code == 0
    assert out.splitlines() == [
        "outcome: suspended", "outcome: suspended", "outcome: fixpoint",
    ]


def test_startup_error_exit_code(capsys):
    with pytest.raises(SystemExit):
        main(["--handler", "bogus"])


def test_missing_script_is_startup_error(capsys):
    assert main(["--script", "/nonexistent/path.txt"]) == 1


def test_repl_help_and_eof():
    handler = build_order_interval_handler()
    out = io.StringIO()
    repl = Repl(handler, out=out)
    assert repl.execute("help")
    assert "commands:" in out.getvalue()
    assert not repl.execute("quit")
    repl.close()


def test_serve_command_starts_server(tmp_path):
    handler = build_order_interval_handler()
    out = io.StringIO()
    repl = Repl(handler, out=out)
    try:
        repl.execute("serve 0")
        assert out.getvalue().startswith("serving on ")
        port = repl._server.port
        from wireclient import WireClient

        client = WireClient(port)
        assert client.hello["handler"] == "order-interval"
        repl.execute('tell leq "a" "b"')
        client.wait(lambda: client.event_count("fixpoint") >= 1)
        client.close()
    finally:
        repl.close()
