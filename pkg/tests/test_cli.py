import json

import mpmath
import pytest

from eseries.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_coeffs_b_table(capsys):
    code, doc = run_json(capsys, "coeffs", "--route", "b", "--max", "6")
    assert code == 0
    assert doc["command"] == "coeffs"
    assert doc["status"] == "PASS"
    assert [row["value"] for row in doc["rows"]] == ["1", "1/2", "1/24", "1/48", "73/5760", "11/1280", "3625/580608"]
    assert doc["expected"]["6"] == "3625/580608"
    assert doc["known_misprints"] == {"6": "1945/580608"}
    assert doc["rows"][6]["published_misprint"] == "1945/580608"


@pytest.mark.parametrize("route", ["d-conversion", "d-recurrence"])
def test_coeffs_d_routes(route, capsys):
    code, doc = run_json(capsys, "coeffs", "--route", route, "--max", "5")
    assert code == 0
    assert [row["value"] for row in doc["rows"]] == ["1/2", "0", "5/288", "139/17280", "119/23040"]


def test_verify_passes(capsys):
    code, doc = run_json(capsys, "verify", "--max", "60")
    assert code == 0
    assert doc["result"]["failures"] == []


def test_verify_catches_injected_fault(capsys):
    code, doc = run_json(capsys, "verify", "--max", "20", "--inject-fault", "7")
    assert code == 1
    assert doc["status"] == "FAIL"
    assert [f["index"] for f in doc["result"]["failures"]] == [7]


def test_quad_mass(capsys):
    code, doc = run_json(capsys, "quad", "--target", "g-mass")
    assert code == 0
    assert doc["rows"][0]["nodes_used"] > 0


def test_quad_coefficient(capsys):
    code, doc = run_json(capsys, "quad", "--target", "d", "--n", "5")
    assert code == 0
    assert doc["rows"][0]["expected"].startswith("0.005164930555")


def test_quad_h(capsys):
    code, doc = run_json(capsys, "quad", "--target", "h", "--x", "10")
    assert code == 0
    row = doc["rows"][0]
    assert row["x"] == "10"
    assert row["nodes_used"] > 0
    assert row["levels"] >= 2
    assert mpmath.mpf(row["error_estimate"]) <= mpmath.mpf("1e-14")
    assert mpmath.mpf(row["abs_diff"]) < mpmath.mpf("1e-12")


def test_quad_level_budget_exhausted(capsys):
    code, doc = run_json(capsys, "quad", "--target", "g-mass", "--max-levels", "1")
    assert code == 1
    assert doc["status"] == "FAIL"
    assert "not reached" in doc["result"]["error"]


def test_order_truncation(capsys):
    code, doc = run_json(capsys, "order", "--experiment", "truncation", "--shift", "1", "--K", "1")
    assert code == 0
    assert doc["rows"][0]["expected_exponent"] == 2


def test_order_too_few_bits_is_usage_error(capsys):
    code, _ = run(capsys, "order", "--precision-bits", "64")
    assert code == 2


def test_carleman_margin(capsys):
    code, doc = run_json(capsys, "carleman", "--family", "bicheng-debnath", "--max", "500")
    assert code == 0
    assert doc["rows"][0]["argmin"] == 500


def test_carleman_report(capsys):
    code, doc = run_json(capsys, "carleman", "--family", "classical", "--seq", "geometric:1/2", "--N", "200")
    assert code == 0
    assert doc["rows"][0]["holds"] is True
    assert doc["rows"][0]["lhs"].startswith("1.70710678")


def test_carleman_rank(capsys):
    code, doc = run_json(capsys, "carleman", "--rank", "bicheng-debnath,d-series:3", "--N", "300")
    assert code == 0
    assert doc["rows"][0]["family"] == "d-series:3"


def test_csv_output(capsys):
    code, out = run(capsys, "coeffs", "--route", "b", "--max", "3", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert "# status=PASS" in lines
    assert "# route=b" in lines
    header = [line for line in lines if not line.startswith("#")][0]
    assert header.split(",")[:2] == ["n", "value"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "d.json"
    code, out = run(capsys, "coeffs", "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["status"] == "PASS"


def test_repeated_runs_and_worker_counts_print_the_same(capsys):
    argv = ["carleman", "--family", "d-series", "--K", "2", "--max", "2600"]
    _, first = run(capsys, *argv, "--workers", "1")
    _, second = run(capsys, *argv, "--workers", "2")
    _, third = run(capsys, *argv, "--workers", "1")
    assert first == second == third


def test_bad_parameter_exits_2(capsys):
    code = main(["coeffs", "--max", "-1"])
    assert code == 2
    assert "index must be" in capsys.readouterr().err


def test_bad_choice_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["coeffs", "--route", "z"])
    assert err.value.code == 2


def test_order_shift_compare_single_term(capsys):
    code, doc = run_json(capsys, "order", "--experiment", "shift-compare", "--k", "1")
    assert code == 0
    row = doc["rows"][0]
    assert (row["depth_shift_1"], row["depth_shift_11_12"]) == (1, 1)
    assert row["exponent_shift_1"].startswith(("2.0", "1.99"))


def test_carleman_invalid_yang_parameter(capsys):
    code = main(["carleman", "--family", "yang", "--c", "1/10", "--margin", "--max", "10"])
    assert code == 2


@pytest.mark.parametrize("bound", ["0", "-3"])
def test_verify_rejects_empty_range(bound, capsys):
    code = main(["verify", "--max", bound])
    assert code == 2
    assert "--max >= 1" in capsys.readouterr().err
