from __future__ import annotations

import json

from scripts.norm_ratio_report import main


def test_norm_ratio_report_writes_summary(tmp_path, capsys):
    out = tmp_path / "ratios.json"
    argv = ["--dims", "2", "--samples", "2", "--exponents", "2", "--config", str(tmp_path / "absent.yaml")]
    assert main([*argv, "--out", str(out)]) == 0
    capsys.readouterr()

    rows = json.loads(out.read_text())
    assert {row["ratio"] for row in rows} == {"exp_vs_lp", "log_vs_lq", "dual_vs_log"}
    for row in rows:
        assert row["samples"] == 2
        assert row["min"] > 0
    dual = next(row for row in rows if row["ratio"] == "dual_vs_log")
    assert dual["exponent"] is None
    assert dual["max"] <= 2.0 + 1e-5
