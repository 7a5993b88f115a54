from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from cantor import errors
from cantor.approximation import corollary22_spec
from cantor.cli import InputError, RunConfig, main
from cantor.numeration import BINARY, RadixSequence
from cantor.product_engine import all_ones_spec, thue_morse_spec
from cantor.tm_words import thue_morse_tm


@pytest.fixture
def specs(tmp_path):
    paths = {}

    def put(name, data):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data))
        paths[name] = str(path)

    put("ones", all_ones_spec().to_json())
    put("tm", thue_morse_spec().to_json())
    put("cor", corollary22_spec().to_json())
    put("tmword", thue_morse_tm().to_json())
    put("radix", RadixSequence.table([2, 3], 4).to_json())
    put("binary", BINARY.to_json())
    put("prop", {"f": {"kind": "constant", "value": 1},
                 "F": {"kind": "pow", "base": 2, "mult": 1, "ratio": 4}})
    put("prop_bad", {"f": {"kind": "constant", "value": 1},
                     "F": {"kind": "pow", "base": 2, "mult": 3, "ratio": 2}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    paths["bad"] = str(bad)
    paths["dir"] = tmp_path
    return paths


def _run(argv, tmp_path, name="out.txt"):
    out = tmp_path / name
    status = main(argv + ["--out", str(out)])
    return status, out.read_text()


def test_expand_csv_all_ones(specs):
    status, text = _run(["expand", "--spec", specs["ones"], "--N", "16", "--format", "csv"],
                        specs["dir"])
    assert status == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["m", "num", "den"]
    assert rows[1:] == [[str(m), "1", "1"] for m in range(16)]


def test_tail_expand_json(specs):
    status, text = _run(["tail-expand", "--spec", specs["cor"], "--n", "1", "--N", "4"],
                        specs["dir"])
    assert status == 0
    assert json.loads(text)["coefficients"] == ["1", "1/4", "1/16", "1/64"]


def test_check_inequality_factorial_spec(specs):
    status, text = _run(["check-thm21", "--spec", specs["cor"], "--b", "4", "--epsilon", "1/100",
                         "--variant", "second", "--n-range", "1", "8"], specs["dir"])
    assert status == 0
    report = json.loads(text)
    assert report["summary"] == "ALL_HOLD"
    assert report["epsilon"] == "1/100"
    assert [r["n"] for r in report["rows"]] == list(range(1, 9))


def test_check_inequality_failure_exit(specs):
    status, text = _run(["check-thm21", "--spec", specs["cor"], "--b", "2", "--epsilon", "1/100",
                         "--variant", "second", "--n-range", "1", "8"], specs["dir"])
    assert status == 2
    assert json.loads(text)["summary"] == "FIRST_FAILURE(1)"


def test_factorial_spec_command(specs):
    status, text = _run(["cor22"], specs["dir"])
    assert status == 0 and json.loads(text)["coeffs"]["kind"] == "factorial_support"
    status, text = _run(["cor22", "--b", "4", "--epsilon", "1/100", "--n-range", "1", "8"],
                        specs["dir"])
    assert status == 0 and json.loads(text)["variant"] == "COR22"


def test_malformed_spec(specs):
    status, text = _run(["expand", "--spec", specs["bad"], "--N", "4"], specs["dir"])
    assert status == 1
    assert json.loads(text)["error"]["code"] == "SPEC_PARSE"


def test_missing_spec_file(specs):
    status, text = _run(["expand", "--spec", str(specs["dir"] / "nope.json"), "--N", "4"],
                        specs["dir"])
    assert status == 1 and json.loads(text)["error"]["code"] == "SPEC_PARSE"


def test_bad_arguments(capsys):
    assert main(["no-such-command"]) == 1
    assert json.loads(capsys.readouterr().err)["error"]["code"] == "BAD_ARGUMENTS"
    assert main(["check-thm21", "--b", "4"]) == 1


def test_no_witness_exit(specs, tmp_path):
    spec = tmp_path / "zero.json"
    spec.write_text(json.dumps({"radix": BINARY.to_json(), "domain": "rational",
                                "coeffs": {"kind": "constant", "value": "0"}}))
    status, text = _run(["witness", "--spec", str(spec), "--n", "0"], tmp_path)
    assert status == 2 and json.loads(text)["error"]["code"] == "NO_WITNESS"


def test_dyadic_product_commands(specs):
    status, text = _run(["check-prop23", "--spec", specs["prop"], "--b", "2", "--c", "2",
                         "--epsilon", "1/4", "--y-range", "0", "6"], specs["dir"])
    assert status == 0 and json.loads(text)["summary"] == "ALL_HOLD"
    status, text = _run(["check-prop23", "--spec", specs["prop_bad"], "--b", "2", "--c", "2",
                         "--epsilon", "1/4", "--y-range", "0", "6"], specs["dir"])
    assert status == 2 and json.loads(text)["summary"] == "FIRST_FAILURE(1)"


def test_numeration_commands(specs):
    status, text = _run(["digits", "--spec", specs["radix"], "--value", "5"], specs["dir"])
    assert status == 0 and json.loads(text)["digits"] == [[0, 1], [1, 2]]
    status, text = _run(["digits", "--spec", specs["radix"], "--digits", "[[0,1],[1,2]]"],
                        specs["dir"])
    assert json.loads(text)["value"] == "5"
    status, text = _run(["digits", "--spec", specs["binary"], "--digits", "[[0,2]]"],
                        specs["dir"])
    assert status == 1 and json.loads(text)["error"]["code"] == "DIGIT_OUT_OF_RANGE"
    status, text = _run(["sparse-multiple", "--spec", specs["binary"], "--l", "3", "--t", "2"],
                        specs["dir"])
    assert json.loads(text)["x"] == 3


def test_product_commands(specs):
    status, text = _run(["copy-structure", "--spec", specs["tm"], "--n", "1", "--num-blocks", "4"],
                        specs["dir"])
    assert json.loads(text)["scalars"] == ["1", "-1", "-1", "1"]
    status, text = _run(["evaluate", "--spec", specs["ones"], "--b", "2"], specs["dir"])
    iv = json.loads(text)["interval"]
    from fractions import Fraction
    assert Fraction(iv["lo"]) <= 2 <= Fraction(iv["hi"])
    status, text = _run(["bounded-report", "--spec", specs["cor"], "--n-max", "3", "--m-max", "64"],
                        specs["dir"])
    assert json.loads(text)["sup_ratio"] == str(2**64)


def test_approximation_commands(specs):
    status, text = _run(["witness", "--spec", specs["tm"], "--n", "0"], specs["dir"])
    assert json.loads(text) == {"n": 0, "s": 1, "t": 0, "L": 1, "alpha": "-1", "beta": "1"}
    status, text = _run(["approximant", "--spec", specs["tm"], "--n", "0"], specs["dir"])
    assert json.loads(text)["p"] == ["1"] and json.loads(text)["C"] == "1"
    status, text = _run(["schmidt-report", "--spec", specs["tm"], "--b", "2",
                         "--n-range", "1", "3", "--format", "csv"], specs["dir"])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["n", "log_linear_form", "log_height", "ratio"] and len(rows) == 4


def test_tm_commands(specs):
    status, text = _run(["tm-build", "--spec", specs["tmword"], "--n", "3", "--format", "text"],
                        specs["dir"])
    assert text == "0 1 1 0 1 0 0 1\n"
    status, text = _run(["tm-letter", "--spec", specs["tmword"], "--m", "7"], specs["dir"])
    assert json.loads(text)["letter"] == 1
    status, text = _run(["tm-period", "--spec", specs["tmword"]], specs["dir"])
    assert json.loads(text) == {"kind": "DECIDED_NONE"}
    status, text = _run(["tm-subseq-scan", "--spec", specs["tmword"]], specs["dir"])
    assert json.loads(text) == {"kind": "NO_PERIOD_UP_TO", "max_period": 64, "horizon": 8192}
    status, text = _run(["tm-subseq-value", "--spec", specs["tmword"], "--b", "2"], specs["dir"])
    assert status == 0 and "value" in json.loads(text)
    status, text = _run(["tm-to-product", "--spec", specs["tmword"], "--rational"], specs["dir"])
    assert json.loads(text) == thue_morse_spec().to_json()


def test_reports_are_byte_identical(specs):
    argv = ["check-thm21", "--spec", specs["cor"], "--b", "4", "--epsilon", "1/100",
            "--variant", "second", "--n-range", "1", "8"]
    _, first = _run(argv, specs["dir"], "a.json")
    _, second = _run(argv, specs["dir"], "b.json")
    assert first == second
    meta = json.loads((specs["dir"] / "a.json.meta.json").read_text())
    assert meta["command"] == "check-thm21" and "finished" in meta


def test_max_bits_env(specs, monkeypatch):
    monkeypatch.setenv("CANTOR_MAX_BITS", "32")
    status, text = _run(["expand", "--spec", specs["cor"], "--N", "128"], specs["dir"])
    assert status == 1 and json.loads(text)["error"]["code"] == "CAP_EXCEEDED"


def test_run_config_validation():
    with pytest.raises(InputError):
        RunConfig.from_dict({"command": "expand", "params": {"N": 4}, "colour": "red"})
    with pytest.raises(InputError):
        RunConfig.from_dict({"command": "expand", "params": {"N": 4, "zzz": 1}})
    with pytest.raises(InputError):
        RunConfig.from_dict({"command": "expand", "params": {}})
    cfg = RunConfig.from_dict({"command": "check-thm21",
                               "params": {"b": 4, "epsilon": "1/100", "n_range": [1, 2]}})
    assert cfg.params["epsilon"].denominator == 100 and cfg.params["variant"] == "first"


def test_error_codes_distinct():
    classes = [c for c in vars(errors).values()
               if isinstance(c, type) and issubclass(c, errors.CantorError)]
    codes = [c.code for c in classes] + [InputError.code]
    assert len(codes) == len(set(codes))


def test_console_entry_point(specs):
    proc = subprocess.run([sys.executable, "-m", "cantor.cli", "expand", "--spec", specs["ones"],
                           "--N", "3", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "m,num,den\n0,1,1\n1,1,1\n2,1,1\n"
