import json

import pytest

from lteu_coexist.cli import config_template, main
from lteu_coexist.config import ScenarioConfig

SMALL = ScenarioConfig(samples=2000, slots=20_000)


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(config_template(SMALL), encoding="utf-8")
    return str(path)


def test_config_init_round_trips(tmp_path, capsys):
    assert main(["config", "init"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("# ")
    assert ScenarioConfig.loads(text) == ScenarioConfig()
    out = tmp_path / "c.yaml"
    assert main(["config", "init", "--seed", "9", "--out", str(out)]) == 0
    assert ScenarioConfig.load(out).seed == 9


def test_corrupted_config_rejected(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(ScenarioConfig().dumps().replace("mac.min_window: 16", "mac.min_window: 0"))
    assert main(["validate", "--config", str(path)]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_table3_csv(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["table3", "--out", str(out1)]) == 0
    assert main(["table3", "--out", str(out2)]) == 0
    data = out1.read_bytes()
    assert data == out2.read_bytes()
    assert b"\r" not in data
    lines = data.decode("utf-8").splitlines()
    assert lines[0].split(",")[:6] == ["e_s", "e_w", "rs_bps", "rw_bps", "N", "wifi_dof"]
    assert lines[0].endswith("config_hash,seed")
    assert len(lines) == 10
    assert lines[1].split(",")[-1] == "2024"
    assert lines[1].split(",")[-2] == ScenarioConfig().digest()


def test_seed_flag_changes_hash_and_seed_column(tmp_path):
    out = tmp_path / "f4.csv"
    assert main(["fig4", "--seed", "3", "--out", str(out)]) in (0, 1)
    row = out.read_text().splitlines()[1].split(",")
    assert row[-1] == "3"
    assert row[-2] == ScenarioConfig(seed=3).digest()


def test_fig2_and_fig3_rows(small_config, tmp_path):
    f2, f3 = tmp_path / "f2.csv", tmp_path / "f3.csv"
    main(["fig2", "--config", small_config, "--out", str(f2)])
    main(["fig3", "--config", small_config, "--out", str(f3)])
    rows2 = f2.read_text().splitlines()
    rows3 = f3.read_text().splitlines()
    assert len(rows2) == 1 + 12 and rows2[0].startswith("K,B,")
    assert len(rows3) == 1 + 15 and rows3[0].startswith("M,")


def test_validate_report_structure(small_config, tmp_path):
    out = tmp_path / "v.json"
    code = main(["validate", "--config", small_config, "--out", str(out)])
    report = json.loads(out.read_text())
    assert {"statistic", "threshold", "pass"} <= set(report["dcf_fixed_point_residual"])
    for mode in ("paper", "erlang", "matched"):
        assert report[f"interference_ks_{mode}"]["pass"] is None
    failed = [k for k, v in report.items() if v["pass"] is False]
    assert code == (1 if failed else 0)
