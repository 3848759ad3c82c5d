"""Plugin timeout: a stalled fp_eval surfaces per the foreign-error policy."""

import json
import os
import subprocess
import sys
import textwrap


def test_stalled_plugin_times_out(tmp_path):
    slow_plugin = tmp_path / "slow_plugin.py"
    slow_plugin.write_text(textwrap.dedent("""
        import json, sys, time
        for line in sys.stdin:
            doc = json.loads(line)
            if doc["method"] == "handshake":
                manifest = {"protocol": 1, "name": "slow", "attributes": [],
                            "predicates": [{"name": "slow_echo", "fp_handle": "slow_echo",
                                            "args": [{"type": "String", "adornment": "bound"},
                                                     {"type": "String", "adornment": "free"}]}]}
                print(json.dumps({"id": doc["id"], "result": manifest}), flush=True)
            elif doc["method"] == "fp_eval":
                time.sleep(2)
                print(json.dumps({"id": doc["id"], "result": {"facts": []}}), flush=True)
            else:
                print(json.dumps({"id": doc["id"], "result": {}}), flush=True)
    """))
    program = tmp_path / "p.scl"
    program.write_text('rel q = {("x",)}\nrel out(a) = q(p) and slow_echo(p, a)\nquery out\n')
    env = dict(os.environ, RELOG_PLUGIN_TIMEOUT_MS="300")
    # timeout -> ForeignEvalError -> discarded under the default policy
    proc = subprocess.run(
        [sys.executable, "-m", "relog.cli", "run", str(program),
         "--plugin", f"{sys.executable} {slow_plugin}"],
        capture_output=True, text=True, env=env, timeout=60)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["facts"] == []
    # abort policy propagates as an evaluation error
    proc = subprocess.run(
        [sys.executable, "-m", "relog.cli", "run", str(program),
         "--plugin", f"{sys.executable} {slow_plugin}",
         "--foreign-errors", "abort"],
        capture_output=True, text=True, env=env, timeout=60)
    assert proc.returncode == 2, proc.stderr
