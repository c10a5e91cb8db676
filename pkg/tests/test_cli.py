import json

import pytest

from spiked_lab import cli


def run_cli(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(list(argv))
    out, err = capsys.readouterr()
    return exc.value.code, out, err


def test_parse_int_list():
    assert cli.parse_int_list("3..5,10,100") == [3, 4, 5, 10, 100]
    assert cli.parse_int_list("7") == [7]


def test_theory_mu_table(capsys):
    code, out, _ = run_cli(capsys, "theory", "mu", "--k", "3..4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,mu_k,sqrt_k_log_k"
    assert lines[1].startswith("3,2.87")
    assert lines[2].startswith("4,3.588")


def test_theory_omega(capsys):
    code, out, _ = run_cli(capsys, "theory", "omega", "--k", "3")
    assert code == 0
    assert out.strip().splitlines()[1] == "3,2"


def test_theory_gamma_star_defined(capsys):
    code, out, _ = run_cli(capsys, "theory", "gamma-star", "--k", "3",
                           "--beta", "3.0")
    assert code == 0
    value = float(out.strip().splitlines()[1].split(",")[2])
    assert 0.3 < value < 0.5


def test_theory_gamma_star_undefined_exits_2(capsys):
    code, _, err = run_cli(capsys, "theory", "gamma-star", "--k", "3",
                           "--beta", "1.5")
    assert code == 2
    assert "undefined" in err


def test_theory_missing_required_flag_exits_1(capsys):
    code, _, err = run_cli(capsys, "theory", "gamma-star", "--k", "3")
    assert code == 1
    assert "--beta is required" in err


def test_usage_error_exits_1(capsys):
    code, _, _ = run_cli(capsys, "theory", "not-a-subcommand")
    assert code == 1
    code, _, _ = run_cli(capsys, "no-such-command")
    assert code == 1


def test_theory_se_prints_overlaps(capsys):
    code, out, _ = run_cli(capsys, "theory", "se", "--k", "3", "--beta", "3",
                           "--gamma", "1", "--steps", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,tau,overlap"
    assert len(lines) == 6


def test_theory_kl_bound(capsys):
    code, out, _ = run_cli(capsys, "theory", "kl-bound", "--k", "3",
                           "--beta", "2", "--n", "9")
    assert code == 0
    assert float(out.strip().splitlines()[1].split(",")[4]) == pytest.approx(
        2 * 9 / 3 * 4.0)


def test_demo_runs_and_reports(capsys):
    code, out, _ = run_cli(capsys, "demo", "--k", "3", "--n", "12",
                           "--beta", "8", "--algo", "rec-unfold",
                           "--seed", "4")
    assert code == 0
    assert "correlation:" in out
    fields = dict(line.split(":", 1) for line in out.strip().splitlines()
                  if ":" in line)
    assert float(fields["correlation"]) > 0.8


def test_demo_psd_requires_k3(capsys):
    code, _, err = run_cli(capsys, "demo", "--k", "4", "--n", "6",
                           "--beta", "3", "--algo", "psd", "--seed", "0")
    assert code == 1
    assert "require --k 3" in err


def test_run_and_aggregate_end_to_end(tmp_path, capsys):
    cfg = dict(kind="comparison", k=3, n_list=[8], beta=[4.0],
               algorithms=["rec_unfold"], replicates=3, master_seed=2,
               experiment_id="clitest")
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_csv = tmp_path / "records.csv"
    summary = tmp_path / "summary.json"

    code, out, _ = run_cli(capsys, "run", "--config", str(cfg_path),
                           "--out", str(out_csv), "--summary", str(summary))
    assert code == 0
    assert "wrote 3 records" in out
    assert out_csv.exists() and summary.exists()

    agg_csv = tmp_path / "agg.csv"
    code, out, _ = run_cli(capsys, "aggregate", "--in", str(out_csv),
                           "--out", str(agg_csv))
    assert code == 0
    header = agg_csv.read_text().splitlines()[0]
    assert header.startswith("experiment_id,algorithm,")


def test_run_bad_config_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "comparison"}))
    code, _, err = run_cli(capsys, "run", "--config", str(bad),
                           "--out", str(tmp_path / "o.csv"))
    assert code == 1
    assert "bad config" in err


def test_run_worker_override_matches_serial(tmp_path, capsys):
    cfg = dict(kind="comparison", k=3, n_list=[8], beta=[4.0],
               algorithms=["rec_unfold"], replicates=4, master_seed=2)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code1, _, _ = run_cli(capsys, "run", "--config", str(cfg_path),
                          "--out", str(a), "--workers", "1")
    code2, _, _ = run_cli(capsys, "run", "--config", str(cfg_path),
                          "--out", str(b), "--workers", "4")
    assert code1 == code2 == 0
    assert a.read_bytes() == b.read_bytes()


def test_aggregate_rejects_aggregate_input(tmp_path, capsys):
    cfg = dict(kind="comparison", k=3, n_list=[8], beta=[4.0],
               algorithms=["rec_unfold"], replicates=2, master_seed=2)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    raw, agg = tmp_path / "raw.csv", tmp_path / "agg.csv"
    run_cli(capsys, "run", "--config", str(cfg_path), "--out", str(raw))
    run_cli(capsys, "aggregate", "--in", str(raw), "--out", str(agg))
    code, _, err = run_cli(capsys, "aggregate", "--in", str(agg),
                           "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert "aggregate failed" in err
