import json

import pytest

from twoexperts import adversaries as adv, cli, policies as pol


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_example(capsys):
    code, out, _ = run(["simulate", "--policy", "erfc", "--T", "2", "--adversary", "bits:11"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["regret"] == 0.5 and doc["rounds"]["x1"] == [0.5, 0.0]


def test_simulate_csv_infers_T(capsys):
    code, out, _ = run(["simulate", "--adversary", "bits:101", "--format", "csv"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "t,l1,l2,x1,x2,player_cost,L1,L2,gap,cum_regret"
    assert len(out.splitlines()) == 4


def test_simulate_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["simulate", "--T", "50", "--adversary", "random-general:small-increment",
                         "--seed", "3", "--format", "csv", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    row = paths[0].read_text().splitlines()[5].split(",")
    assert all(len(v.replace("-", "").replace(".", "").lstrip("0")) <= 17 for v in row[1:])


def test_simulate_file(tmp_path, capsys):
    seq = adv.random_general(6, 1)
    f = tmp_path / "costs.csv"
    f.write_text(seq.to_csv())
    code, out, _ = run(["simulate", "--adversary", f"file:{f}", "--policy", "mwu"], capsys)
    assert code == 0 and json.loads(out)["T"] == 6
    g = tmp_path / "costs.json"
    g.write_text(seq.to_json())
    assert run(["simulate", "--adversary", f"file:{g}"], capsys)[0] == 0


def test_worstcase_uniform(tmp_path, capsys):
    seqfile = tmp_path / "seq.csv"
    code, out, _ = run(["worstcase", "--policy", "uniform", "--T", "8",
                        "--sequence-output", str(seqfile)], capsys)
    assert code == 0
    assert json.loads(out)["V00"] == 4.0
    assert adv.CostSequence.from_csv(seqfile.read_text()).T == 8


def test_worstcase_mwu_rejected(capsys):
    assert run(["worstcase", "--policy", "mwu", "--T", "8"], capsys)[0] == 1


def test_verify_fast(capsys):
    code, out, _ = run(["verify", "--T", "16"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] and all(c["pass"] for c in doc["checks"])
    flagged = {c["check"] for c in doc["checks"] if c.get("documented_discrepancy")}
    assert "passages_published_lower_bound" in flagged
    assert "final_round_increment_at_most_half" in flagged


def test_tables(tmp_path, capsys):
    out = tmp_path / "t.bin"
    assert cli.main(["tables", "--T", "5", "--format", "bin", "-o", str(out)]) == 0
    back = pol.tables_from_bytes(out.read_bytes())
    assert back.V[0][0] == pol.build_cover_tables(5).V[0][0]
    code, text, _ = run(["tables", "--T", "3"], capsys)
    assert json.loads(text)["V"][0][0] == 0.75


def test_export(capsys):
    code, out, _ = run(["export", "--T", "64", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "T,bound,worst_case,minimax" and len(lines) == 8
    for line in lines[1:]:
        T, bound, worst, floor = map(float, line.split(","))
        assert floor - 1e-12 <= worst <= bound


def test_bench(capsys):
    code, out, _ = run(["bench", "--T", "2000"], capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["T"] == 2000 and row["median_ns"] > 0


@pytest.mark.parametrize("argv", [
    ["simulate", "--T", "3", "--adversary", "nonsense"],
    ["simulate", "--T", "3", "--adversary", "random-binary"],
    ["simulate", "--T", "3", "--adversary", "bits:102"],
    ["simulate", "--T", "4", "--adversary", "bits:101"],
    ["simulate", "--T", "3", "--adversary", "worst", "--policy", "mwu"],
    ["simulate", "--T", "3", "--adversary", "file:/no/such/file.csv"],
    ["simulate", "--T", "0", "--adversary", "worst"],
    ["tables", "--T", "3", "--format", "csv"],
    ["frobnicate"],
])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(cli.main(argv))
    assert exc.value.code == 1


def test_resource_error(capsys):
    cfg = cli.RunConfig("worstcase", T=10 ** 7, policy="cover")
    assert cli.dispatch(cfg) == 3


def test_parse_adversary():
    assert cli.parse_adversary("bits:10")() == adv.seq_from_bits([True, False])
    make = cli.parse_adversary("random-binary", seed=7)
    assert make(12) == adv.random_restricted(12, 7)
    assert cli.parse_adversary("random-general:equal", seed=2)(4) == adv.random_general(4, 2, "equal")
    p = pol.make_erfc_policy(6)
    assert cli.parse_adversary("worst", p)(6) == adv.worst_case_sequence(p)
    with pytest.raises(cli.UsageError, match="accepted"):
        cli.parse_adversary("zigzag")
    with pytest.raises(cli.UsageError):
        cli.parse_adversary("worst", pol.make_mwu_policy(6))
    with pytest.raises(cli.UsageError):
        cli.parse_adversary("random-general")


def test_tables_schema_documented():
    assert "row-major" in cli.__doc__ and "little-endian" in cli.__doc__
