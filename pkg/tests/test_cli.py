import json

import pytest

from ranking_market.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def test_gen_kvv(capsys):
    code, out = run_cli(capsys, "gen", "--kvv", "3")
    assert code == 0
    lines = [l for l in out.splitlines() if l and not l.startswith("#")]
    assert lines[0] == "3 3"
    assert len(lines) == 1 + 6


def test_gen_random_deterministic(capsys):
    code1, out1 = run_cli(capsys, "gen", "--random", "4", "4", "0.5", "--seed", "1")
    code2, out2 = run_cli(capsys, "gen", "--random", "4", "4", "0.5", "--seed", "1")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "seed=1" in out1


def test_gen_rejects_zero(capsys):
    code, _ = run_cli(capsys, "gen", "--kvv", "0")
    assert code == 2


def test_gen_output_parses_back(tmp_path, capsys):
    out_path = tmp_path / "inst.txt"
    code, _ = run_cli(capsys, "gen", "--random", "5", "4", "0.6", "--seed", "3",
                      "--out", str(out_path))
    assert code == 0
    from ranking_market import parse

    inst = parse(out_path.read_text())
    assert inst.n_left == 5 and inst.n_right == 4


def test_ratio_single_edge(tmp_path, capsys):
    inst = tmp_path / "single.txt"
    inst.write_text("1 1\n0 0\n")
    code, out = run_cli(capsys, "ratio", "--file", str(inst), "--trials", "200",
                        "--seed", "5")
    assert code == 0
    header, row = out.splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert float(values["mean_ratio"]) == 1.0
    assert values["seed"] == "5"


def test_ratio_empty_graph_errors(tmp_path, capsys):
    inst = tmp_path / "empty.txt"
    inst.write_text("2 2\n")
    code, _ = run_cli(capsys, "ratio", "--file", str(inst), "--trials", "10", "--seed", "1")
    assert code == 2


def test_ratio_unreadable_file(capsys):
    code, _ = run_cli(capsys, "ratio", "--file", "/nonexistent/x.txt", "--seed", "1")
    assert code == 2


def test_claim1_passes_on_exponential(capsys):
    code, out = run_cli(capsys, "claim1", "--kvv", "4", "--trials", "2000", "--seed", "4")
    assert code == 0
    rows = out.splitlines()[1:]
    assert len(rows) == 10
    assert all(row.split(",")[4] == "true" for row in rows)


def test_claim1_uniform_fails_on_last_edge(capsys):
    code, out = run_cli(capsys, "claim1", "--kvv", "12", "--scheme", "uniform",
                        "--edge", "11", "11", "--trials", "3000", "--seed", "4")
    assert code == 1
    row = out.splitlines()[1].split(",")
    assert row[4] == "false"
    assert float(row[2]) < 0.6


def test_claim1_edge_out_of_range(capsys):
    code, _ = run_cli(capsys, "claim1", "--kvv", "4", "--edge", "0", "9",
                      "--trials", "100", "--seed", "1")
    assert code == 2


def test_remark3_rejects_n1(capsys):
    code, _ = run_cli(capsys, "remark3", "--n", "1", "--trials", "100", "--seed", "1")
    assert code == 2


def test_remark3_reports_all_metrics(capsys):
    code, out = run_cli(capsys, "remark3", "--n", "5", "--trials", "2000", "--seed", "3",
                        "--format", "json")
    assert code == 0
    payload = json.loads(out)
    metrics = {r["metric"]: r for r in payload["results"]}
    assert set(metrics) == {
        "edge_guarantee_exp",
        "edge_guarantee_uniform",
        "service_probability",
        "priciest_last_probability",
        "service_without_priciest_count",
    }
    assert metrics["service_without_priciest_count"]["mean"] == 0.0
    assert payload["config"]["seed"] == 3


def test_properties_zero_violations(capsys):
    code, out = run_cli(capsys, "properties", "--kvv", "6", "--sweep", "300", "--seed", "9")
    assert code == 0
    header, row = out.splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert values["trials"] == "300"
    assert values["sold_if_cheaper_violations"] == "0"
    assert values["monotone_violations"] == "0"


def test_properties_random_instances(capsys):
    code, out = run_cli(capsys, "properties", "--sweep", "200", "--seed", "2")
    assert code == 0


def test_oracle_check_kvv2(capsys):
    code, out = run_cli(capsys, "oracle-check", "--kvv", "2", "--trials", "5000",
                        "--seed", "2")
    assert code == 0
    header, row = out.splitlines()
    values = dict(zip(header.split(","), row.split(",")))
    assert values["exact_numerator"] == "3"
    assert values["exact_denominator"] == "2"
    assert float(values["exact"]) == 1.5
    assert values["passed"] == "true"


def test_oracle_check_no_edges(tmp_path, capsys):
    inst = tmp_path / "empty.txt"
    inst.write_text("3 3\n")
    code, out = run_cli(capsys, "oracle-check", "--file", str(inst), "--trials", "50",
                        "--seed", "2")
    assert code == 0
    row = out.splitlines()[1].split(",")
    assert row[2] == "0" and row[3] == "0"


def test_oracle_check_rejects_large_instance(capsys):
    code, _ = run_cli(capsys, "oracle-check", "--kvv", "9", "--trials", "10", "--seed", "1")
    assert code == 2


def test_run_dumps_complete_outcome(capsys):
    code, out = run_cli(capsys, "run", "--kvv", "3", "--seed", "1", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    rows = payload["results"]
    buyers = [r for r in rows if r["buyer"] >= 0]
    assert len(buyers) == 3
    matched = [r for r in buyers if r["item"] >= 0]
    for r in matched:
        assert r["util"] + r["rev"] == pytest.approx(1.0, abs=1e-9)
    # every item appears either as a matched row or an unsold row
    items_seen = {r["item"] for r in rows if r["item"] >= 0}
    assert items_seen == {0, 1, 2}


def test_reruns_are_byte_identical(capsys):
    cases = [
        ("gen", "--random", "6", "6", "0.4", "--seed", "8"),
        ("ratio", "--kvv", "8", "--trials", "400", "--seed", "8"),
        ("claim1", "--kvv", "4", "--trials", "400", "--seed", "8", "--format", "json"),
        ("remark3", "--n", "4", "--trials", "400", "--seed", "8"),
        ("properties", "--kvv", "5", "--sweep", "150", "--seed", "8"),
        ("oracle-check", "--kvv", "3", "--trials", "400", "--seed", "8"),
        ("run", "--kvv", "5", "--seed", "8", "--sigma", "random"),
    ]
    for argv in cases:
        code1, out1 = run_cli(capsys, *argv)
        code2, out2 = run_cli(capsys, *argv)
        assert code1 == code2 == 0, argv
        assert out1 == out2, argv


def test_parallel_output_identical(capsys):
    base = ("claim1", "--kvv", "5", "--trials", "5000", "--seed", "3")
    _, sequential = run_cli(capsys, *base, "--jobs", "1")
    _, parallel = run_cli(capsys, *base, "--jobs", "3")
    assert sequential == parallel


def test_csv_and_json_carry_identical_values(capsys):
    base = ("ratio", "--kvv", "6", "--trials", "500", "--seed", "11")
    _, csv_text = run_cli(capsys, *base, "--format", "csv")
    _, json_text = run_cli(capsys, *base, "--format", "json")
    header, row = csv_text.splitlines()
    csv_values = dict(zip(header.split(","), row.split(",")))
    json_row = json.loads(json_text)["results"][0]
    for key, cell in csv_values.items():
        assert float(cell) == float(json_row[key]), key


def test_auto_seed_is_printed_and_reproduces(capsys):
    code, out = run_cli(capsys, "ratio", "--kvv", "5", "--trials", "300")
    assert code == 0
    header, row = out.splitlines()
    seed = dict(zip(header.split(","), row.split(",")))["seed"]
    code2, out2 = run_cli(capsys, "ratio", "--kvv", "5", "--trials", "300", "--seed", seed)
    assert out2 == out


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "report.csv"
    code, out = run_cli(capsys, "ratio", "--kvv", "4", "--trials", "200", "--seed", "2",
                        "--out", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text().startswith("mean_ratio,")
