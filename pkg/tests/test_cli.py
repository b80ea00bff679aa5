import io
import json

import pytest

from bikraw.cli import encode, parse_scalar, run, BadInput
from fractions import Fraction

CHAIN = ["--n", "1", "--alpha1", "1/2", "--alpha2", "1/3", "--beta1", "1/4", "--beta2", "1/4"]


def call(argv):
    out = io.StringIO()
    code = run(argv, out)
    return code, out.getvalue()


def doc(argv):
    code, text = call(argv)
    return code, json.loads(text)


def test_encode():
    assert encode(Fraction(3, 4)) == {"num": "3", "den": "4"}
    assert encode(0.1) == "0.10000000000000001"
    assert encode([1, (2, 3)]) == [1, [2, 3]]


def test_parse_scalar_routes_backend():
    assert parse_scalar("3/4", "--x") == Fraction(3, 4)
    assert isinstance(parse_scalar("0.75", "--x"), float)
    with pytest.raises(BadInput, match="--x"):
        parse_scalar("abc", "--x")


def test_kernel_document():
    code, d = doc(["kernel"] + CHAIN + ["--evaluator", "all"])
    assert code == 0
    assert d["schema_version"] == "1" and d["command"] == "kernel"
    assert d["inputs"]["alpha2"] == "1/3" and d["inputs"]["backend"] == "exact"
    assert d["results"]["states"] == [[0, 0], [0, 1], [1, 0]]
    assert d["results"]["matrix"][2][2] == {"num": "5", "den": "8"}
    assert d["results"]["max_cross_evaluator_discrepancy"] == {"num": "0", "den": "1"}


def test_kernel_decimal_flags_use_float_backend():
    code, d = doc(["kernel", "--n", "2", "--alpha1", "0.5", "--alpha2", "0.3", "--beta1", "0.25", "--beta2", "0.25"])
    assert code == 0 and d["inputs"]["backend"] == "float"
    assert isinstance(d["results"]["matrix"][0][0], str)


def test_kernel_csv():
    code, text = call(["kernel"] + CHAIN + ["--format", "csv"])
    lines = text.strip().splitlines()
    assert code == 0
    assert lines[0] == 'source\\destination,"(0,0)","(0,1)","(1,0)"'
    assert lines[3] == '"(1,0)",1/4,1/8,5/8'


@pytest.mark.parametrize("flags, needle", [
    (["--beta1", "3/4", "--beta2", "1/2"], "--beta1"),
    (["--alpha1", "1", "--beta2", "1/4"], "--alpha1"),
    (["--alpha1", "x", "--beta2", "1/4"], "--alpha1"),
])
def test_bad_input_exits_2(flags, needle, capsys):
    argv = ["kernel", "--n", "1", "--alpha1", "1/2", "--alpha2", "1/3", "--beta1", "1/4", "--beta2", "1/4"]
    for i in range(0, len(flags), 2):
        argv[argv.index(flags[i]) + 1] = flags[i + 1]
    code, _ = call(argv)
    assert code == 2
    assert needle in capsys.readouterr().err


def test_spectrum_arbitration():
    code, d = doc(["spectrum", "--n", "3", "--alpha1", "1/2", "--alpha2", "1/3", "--beta1", "1/4", "--beta2", "1/4",
                   "--arbitrate"])
    assert code == 0
    assert d["results"]["arbitration"]["verdict"] == "mixed_roots"
    assert d["results"]["discriminant"][0] == {"num": "11", "den": "192"}


def test_poly_commands():
    code, d = doc(["poly", "--n", "2", "--p", "2,1,1,1"])
    assert code == 0 and d["results"]["orthonormality_residual"] == {"num": "0", "den": "1"}
    assert d["results"]["tuvw"][0] == {"num": "9", "den": "10"}
    code, d = doc(["poly", "--n", "4", "--tuvw", "1,1,1,1", "--m", "2", "--mm", "1"])
    assert code == 0 and len(d["results"]["table"]) == 15
    assert call(["poly", "--n", "2", "--p", "1,1,1,1"])[0] == 2
    assert call(["poly", "--n", "2"])[0] == 2


def test_ninej_commands():
    code, d = doc(["ninej", "--args", "1,1,2,1,1,2,2,2,2"])
    assert code == 0 and "value" in d["results"]
    code, d = doc(["ninej", "--orthocheck", "2"])
    assert code == 0 and d["results"]["orthocheck"]["failures"] == 0
    assert call(["ninej", "--args", "1,2"])[0] == 2


def test_simulate_is_deterministic():
    argv = ["simulate"] + CHAIN + ["--seed", "4", "--steps", "2000", "--mode", "kernel", "--tv-tol", "0.1"]
    code, first = call(argv)
    assert code == 0
    assert call(argv)[1] == first


def test_simulate_failing_tolerance_exits_1():
    argv = ["simulate"] + CHAIN + ["--seed", "4", "--steps", "50", "--mode", "stationary", "--tv-tol", "1e-9"]
    assert call(argv)[0] == 1


def test_replay_round_trip(tmp_path):
    code, text = call(["kernel"] + CHAIN)
    path = tmp_path / "doc.json"
    path.write_text(text)
    code, d = doc(["replay", str(path)])
    assert code == 0 and d["results"]["identical"] is True
    tampered = json.loads(text)
    tampered["results"]["matrix"][0][0] = {"num": "1", "den": "3"}
    path.write_text(json.dumps(tampered))
    assert call(["replay", str(path)])[0] == 1
