import json
import subprocess
import sys

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jumpgue import cli

GAUSS = ["--A", "1", "--B1", "0", "--B2", "0", "--relaxed"]


def run(*argv):
    return cli.run(list(argv))


def test_moments_sqrt_pi(capsys):
    assert run("moments", *GAUSS, "--k", "0") == 0
    out = capsys.readouterr().out
    value = out.split("=")[1].strip()
    with mp.workprec(120):
        assert abs(mp.mpf(value) - mp.sqrt(mp.pi)) < mp.mpf("1e-28")


def test_recurrence_csv_and_json(tmp_path):
    csv_path, json_path = tmp_path / "r.csv", tmp_path / "r.json"
    assert run("recurrence", "--n-max", "5", "--oracle", "--csv", str(csv_path), "--output", str(json_path)) == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "n,alpha_n,beta_n,h_n,lnD_n"
    assert len(lines) == 7
    doc = json.loads(json_path.read_text())
    assert set(doc) == {"command", "params", "precision_bits", "checks"}
    assert doc["command"] == "recurrence"
    check = doc["checks"][0]
    assert set(check) == {"label", "n", "lhs", "rhs", "rel_residual", "threshold", "pass"}
    digits = check["lhs"].lstrip("-0.").split("e")[0].replace(".", "")
    assert len(digits) >= 39


def test_output_is_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"v{k}.json"
        assert run("painleve4", "--n", "3", "--output", str(path)) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_verify_small(tmp_path):
    assert run("verify", "--n-max", "5", "--deriv-n", "3") == 0


def test_verify_single_jump():
    assert run("verify", "--B2", "0", "--relaxed", "--n-max", "4", "--deriv-n", "3") == 0


def test_invalid_weight_exit_code(capsys):
    assert run("recurrence", "--s1", "1", "--s2", "0") == 2
    assert "s1 < s2" in capsys.readouterr().err


def test_strict_mode_rejects_single_jump():
    assert run("recurrence", "--B2", "0") == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_max": 3, "B1": "-0.25"}))
    out = tmp_path / "o.csv"
    assert run("recurrence", "--config", str(cfg), "--csv", str(out)) == 0
    assert len(out.read_text().splitlines()) == 5
    # command-line flags override the file
    assert run("recurrence", "--config", str(cfg), "--n-max", "2", "--csv", str(out)) == 0
    assert len(out.read_text().splitlines()) == 4


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n_mx": 3}))
    assert run("recurrence", "--config", str(cfg)) == 2


def test_config_unreadable(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{not json")
    assert run("recurrence", "--config", str(cfg)) == 2


def test_precision_env_override(tmp_path, monkeypatch):
    out = tmp_path / "o.json"
    monkeypatch.setenv(cli.ENV_BITS, "300")
    assert run("recurrence", "--n-max", "3", "--output", str(out)) == 0
    assert json.loads(out.read_text())["precision_bits"] == 300
    assert run("recurrence", "--n-max", "3", "--precision-bits", "200", "--output", str(out)) == 0
    assert json.loads(out.read_text())["precision_bits"] == 200
    monkeypatch.setenv(cli.ENV_BITS, "lots")
    assert run("recurrence", "--n-max", "3") == 2


def test_precision_exhausted_exit_code(monkeypatch):
    from jumpgue.errors import PrecisionExhausted

    def boom(args):
        raise PrecisionExhausted("no agreement")

    monkeypatch.setitem(cli.HANDLERS, "recurrence", boom)
    assert run("recurrence") == 3


def test_failed_check_exit_code(monkeypatch, capsys):
    from jumpgue.identities import make_report

    def failing(args):
        with mp.workprec(64):
            return {}, 64, [make_report("made-up identity", 1, None, 1, 2, 1e-10)], None

    monkeypatch.setitem(cli.HANDLERS, "recurrence", failing)
    assert run("recurrence") == 1
    assert "made-up identity" in capsys.readouterr().err


def test_montecarlo_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert run("montecarlo", "--n", "2", "--samples", "20000", "--seed", "3", "--csv", str(out)) == 0
    rows = out.read_text().splitlines()
    assert rows[0].split(",") == ["n", "s1", "s2", "mode", "p_hat", "stderr", "p_det", "sigma_distance"]
    assert [r.split(",")[3] for r in rows[1:]] == ["none_in_interval", "all_in_interval"]


def test_montecarlo_bad_mode():
    with pytest.raises(SystemExit):
        run("montecarlo", "--mode", "some")


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "x.txt"
    cli.write_atomic(str(target), "a\n")
    cli.write_atomic(str(target), "b\n")
    assert target.read_text() == "b\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.txt"]


@given(st.lists(st.integers(min_value=1, max_value=10_000), min_size=1, max_size=6))
def test_int_list_round_trip(xs):
    assert cli.int_list(",".join(map(str, xs))) == xs


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_real_str_round_trip(x):
    s = cli.real_str(x)
    assert float(s) == x


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jumpgue", "moments", *GAUSS, "--k", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("m_2 = 0.886226925452758")
