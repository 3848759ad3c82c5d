"""Core-vs-bridge parity: identical fixture files must give identical
query output through the in-process mock attribute and the bridged mock
plugin. The core is consumed strictly through its CLI."""

import json
import subprocess
import sys

import pytest

PLUGIN_CMD = f"{sys.executable} -m relog_bridge serve mock_models"


def run_core(program_path, *extra):
    proc = subprocess.run(
        [sys.executable, "-m", "relog.cli", "run", str(program_path), *extra],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture
def scene(tmp_path):
    (tmp_path / "clf.json").write_text(json.dumps([
        {"input": [{"shape": [2], "data": [1.0, 0.0]}],
         "outputs": [{"prob": 0.93, "tuple": ["dog"]},
                     {"prob": 0.07, "tuple": ["cat"]}]},
        {"input": [{"shape": [2], "data": [0.0, 1.0]}],
         "outputs": [{"prob": 0.80, "tuple": ["cat"]},
                     {"prob": 0.20, "tuple": ["dog"]}]},
    ]))
    (tmp_path / "a.json").write_text('{"shape": [2], "data": [1.0, 0.0]}')
    (tmp_path / "b.json").write_text('{"shape": [2], "data": [0.0, 1.0]}')
    return tmp_path


BODY = '''
type classify(bound img: Tensor, label: String)
rel image = {(0, $load_tensor("a.json")), (1, $load_tensor("b.json"))}
rel out(i, l) = image(i, m) and classify(m, l)
rel n(c) = c := count(i: out(i, "dog"))
query out
query n
'''


def test_mock_parity_with_core(scene):
    core = scene / "core.scl"
    core.write_text(
        '@mock_classify(labels=["dog", "cat"], fixture="clf.json")' + BODY)
    bridged = scene / "bridged.scl"
    bridged.write_text(
        '@bridge(plugin="mock_models", attribute="mock_classify", '
        'labels=["dog", "cat"], fixture="clf.json")' + BODY)
    core_out = run_core(core)
    bridge_out = run_core(bridged, "--plugin", PLUGIN_CMD)
    assert core_out == bridge_out
    doc = json.loads(core_out.splitlines()[0])
    probs = {tuple(f["tuple"]): f["prob"] for f in doc["facts"]}
    assert probs[(0, "dog")] == pytest.approx(0.93)
    assert probs[(1, "cat")] == pytest.approx(0.80)


def test_parity_under_every_provenance(scene):
    core = scene / "core.scl"
    core.write_text(
        '@mock_classify(labels=["dog", "cat"], fixture="clf.json")' + BODY)
    bridged = scene / "bridged.scl"
    bridged.write_text(
        '@bridge(plugin="mock_models", attribute="mock_classify", '
        'labels=["dog", "cat"], fixture="clf.json")' + BODY)
    for provenance in ("unit", "minmaxprob", "topkproofs"):
        core_out = run_core(core, "--provenance", provenance)
        bridge_out = run_core(bridged, "--plugin", PLUGIN_CMD,
                              "--provenance", provenance)
        assert core_out == bridge_out, provenance


def test_echo_round_trip(tmp_path):
    program = tmp_path / "echo.scl"
    program.write_text('rel q = {("x",)}\n'
                       "rel out(a) = q(p) and echo(p, a)\n"
                       "query out\n")
    out = run_core(program, "--plugin", PLUGIN_CMD, "--provenance", "unit")
    assert json.loads(out) == {"query": "out",
                               "facts": [{"prob": None, "tuple": ["x"]}]}
