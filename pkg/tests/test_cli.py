"""Command-line interface: outputs, JSON round-trips, caching, exit codes."""

import json

import pytest

from asdlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------


def test_expand_theta2(capsys):
    code, out, _ = run(capsys, "expand", "theta2", "--n", "5")
    assert code == 0
    assert "1,4,4,0,4,8" in out


def test_expand_json_schema(capsys):
    code, out, _ = run(capsys, "expand", "C4", "--n", "6", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["form_id"] == "C4"
    assert data["mu"] == 1
    assert data["lo"] == 1
    assert data["coeffs"][:3] == ["1", "-56", "2076"]


def test_expand_parametrized_form(capsys):
    code, out, _ = run(capsys, "expand", "mero_w3", "--u", "2", "--n", "3", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["form_id"] == "mero_w3[u=2]"
    assert data["coeffs"][0] == "-8"


def test_expand_table_and_json_same_data(capsys):
    code, tab, _ = run(capsys, "expand", "h2", "--n", "7")
    code2, js, _ = run(capsys, "expand", "h2", "--n", "7", "--json")
    assert code == code2 == 0
    data = json.loads(js)
    header, coeffline = [l for l in tab.strip().splitlines()]
    assert f"mu={data['mu']}" in header
    assert f"lo={data['lo']}" in header
    assert coeffline == ",".join(data["coeffs"])


def test_expand_cache_hit_identical(tmp_path, capsys):
    args = ("expand", "aperyF", "--n", "25", "--json", "--cache", str(tmp_path))
    code, first, _ = run(capsys, *args)
    assert code == 0
    assert list(tmp_path.iterdir())  # cache file written
    code, second, _ = run(capsys, *args)
    assert code == 0
    assert first == second


def test_cache_env_var(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ASDLAB_CACHE", str(tmp_path))
    code, _, _ = run(capsys, "expand", "lambda", "--n", "10")
    assert code == 0
    assert any("lambda" in f.name for f in tmp_path.iterdir())


# ---------------------------------------------------------------------------
# count / unitroot / eigenbasis / picheck
# ---------------------------------------------------------------------------


def test_count_command(capsys):
    code, out, _ = run(capsys, "count", "--family", "thm1.6", "--u", "2",
                       "--p", "13", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["a_p"] == 6
    assert data["count"] == 13 + 1 - 6


def test_count_extension_field(capsys):
    code, out, _ = run(capsys, "count", "--family", "thm1.6", "--u", "2",
                       "--p", "5", "--r", "2", "--json")
    data = json.loads(out)
    # a_5 = -2: #E(F_25) = 25 + 1 - (a^2 - 2p) = 26 - (4 - 10) = 32
    assert data["count"] == 32


def test_count_bad_reduction_exits_1(capsys):
    code, _, err = run(capsys, "count", "--family", "ex1.3", "--u", "1", "--p", "11")
    assert code == 1
    assert json.loads(err)["error"] == "BadReduction"


def test_unitroot_command(capsys):
    code, out, _ = run(capsys, "unitroot", "--family", "thm1.6", "--u", "2",
                       "--p", "5", "--precision", "2", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["unit_root"] == 13
    assert data["a_p"] == -2


def test_eigenbasis_command(capsys):
    code, out, _ = run(capsys, "eigenbasis", "--family", "thm1.6", "--u", "2",
                       "--json")
    data = json.loads(out)
    assert code == 0
    assert data["c1"] == "1" and data["c2"] == "4"


def test_picheck_command(capsys):
    code, out, _ = run(capsys, "picheck", "--u", "17-12*sqrt(2)",
                       "--c2", "2*sqrt(2)-3", "--k", "30",
                       "--target", "2*sqrt(2)/pi", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["a"] == "6"
    assert data["lambda"] == "-1/8"
    assert float(data["abs_error"]) < 1e-12


def test_picheck_divergent_exits_1(capsys):
    code, _, err = run(capsys, "picheck", "--u", "2", "--c2", "4")
    assert code == 1
    assert json.loads(err)["error"] == "DivergentParameter"


# ---------------------------------------------------------------------------
# identities / scenario
# ---------------------------------------------------------------------------


def test_identities_command(capsys):
    code, out, _ = run(capsys, "identities", "--upto", "40", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["summary"] == {"pass": 8, "fail": 0}


def test_scenario_json_round_trip(capsys):
    code, out, _ = run(capsys, "scenario", "thm1.6.1", "--p", "5,13",
                       "--smax", "1", "--mmax", "6", "--coeffs", "80", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["scenario"] == "thm1.6.1"
    assert data["summary"]["fail"] == 0
    assert json.dumps(data, sort_keys=True, default=str) == out.strip()


def test_scenario_table_matches_json_summary(capsys):
    args = ("scenario", "ex1.2", "--p", "5", "--mmax", "4", "--smax", "1",
            "--coeffs", "60")
    code, tab, _ = run(capsys, *args)
    code2, js, _ = run(capsys, *args, "--json")
    assert code == code2 == 0
    data = json.loads(js)
    assert f"pass={data['summary']['pass']}" in tab
    assert f"fail={data['summary']['fail']}" in tab


def test_scenario_jobs_fanout_matches_serial(capsys):
    common = ("--p", "7", "--mmax", "4", "--smax", "1", "--coeffs", "120")
    code, serial, _ = run(capsys, "scenario", "sec8.3-ALL", *common, "--json")
    code2, fan, _ = run(capsys, "scenario", "sec8.3-ALL", *common, "--json",
                        "--jobs", "4")
    assert code == code2 == 0
    assert serial == fan


def test_scenario_unknown_exits_2(capsys):
    code, _, err = run(capsys, "scenario", "nope")
    assert code == 2
    assert json.loads(err)["error"] == "usage"


def test_scenario_unsupported_override_exits_2(capsys):
    code, _, err = run(capsys, "scenario", "ex1.9-cross", "--mmax", "3")
    assert code == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["expand"])  # missing form id
    assert exc.value.code == 2


def test_bad_prime_list_exits_2(capsys):
    code, _, err = run(capsys, "scenario", "ex1.2", "--p", "5,x")
    assert code == 2
