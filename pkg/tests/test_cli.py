"""CLI: flag parsing, config merging, document emission, determinism."""

import csv
import io
import json

import pytest

from mpspricer import AsianSpec, price_asian_bruteforce
from mpspricer.cli import CSV_HEADER, main, parse_args


def run_cli(args, tmp_path, name="out"):
    path = tmp_path / name
    code = main([*args, "--output-path", str(path)])
    return code, path.read_bytes() if path.exists() else b""


def test_csv_header_is_frozen():
    assert CSV_HEADER == [
        "method", "param_name", "param_value", "run_index",
        "price", "abs_error", "wall_time_s", "seed",
    ]


def test_parse_merges_config_with_flag_priority(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"steps": 9, "strike": 123.0}))
    cfg = parse_args(
        ["price-asian", "--config", str(cfg_file), "--strike", "50"]
    )
    assert cfg.command == "price-asian"
    assert cfg.options["steps"] == 9
    assert cfg.options["strike"] == 50.0


def test_price_asian_bruteforce_passthrough(tmp_path):
    args = [
        "price-asian", "--method", "bruteforce", "--steps", "12",
        "--s0", "100", "--strike", "100", "--rate", "0.1", "--vol", "0.5",
        "--expiry", "1", "--scheme", "crr",
    ]
    code, raw = run_cli(args, tmp_path, "p.json")
    assert code == 0
    doc = json.loads(raw)
    spec = AsianSpec(
        spot=100, strike=100, rate=0.1, vol=0.5, expiry=1.0, steps=12
    )
    assert doc["price"] == price_asian_bruteforce(spec).price
    assert doc["method"] == "bruteforce"


def test_price_asian_montecarlo_fields(tmp_path):
    args = [
        "price-asian", "--method", "montecarlo", "--steps", "8",
        "--samples", "1e4", "--seed", "3", "--omit-timing",
    ]
    code, raw = run_cli(args, tmp_path, "mc.json")
    assert code == 0
    doc = json.loads(raw)
    assert doc["n_samples"] == 10000
    assert doc["seed"] == 3
    assert doc["wall_time_s"] == 0.0
    assert doc["std_error"] > 0


def test_bench_rows_counts_sorting_and_seeds(tmp_path):
    args = [
        "bench-asian", "--methods", "ttcross,montecarlo", "--steps", "10",
        "--bond-dims", "8,4", "--samples", "1e3,1e4", "--repeats", "2",
        "--seed", "7", "--omit-timing",
    ]
    code, raw = run_cli(args, tmp_path, "bench.csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(raw.decode())))
    assert len(rows) == 2 * 2 + 2 * 2
    key = [
        (r["method"], int(r["param_value"]), int(r["run_index"])) for r in rows
    ]
    assert key == sorted(key)
    for r in rows:
        assert int(r["seed"]) == 7 + int(r["run_index"])
        assert float(r["abs_error"]) >= 0.0
        assert r["param_name"] == (
            "n_samples" if r["method"] == "montecarlo" else "bond_dim"
        )


def test_bench_reruns_byte_identical(tmp_path):
    args = [
        "bench-asian", "--methods", "ttcross,variational", "--steps", "10",
        "--bond-dims", "4,8", "--repeats", "2", "--seed", "1", "--omit-timing",
    ]
    _, first = run_cli(args, tmp_path, "a.csv")
    _, second = run_cli(args, tmp_path, "b.csv")
    assert first == second
    assert first.startswith(b"method,param_name,param_value,run_index,")


def test_price_reruns_byte_identical(tmp_path):
    args = [
        "price-basket", "--style", "american", "--payoff", "min",
        "--assets", "2", "--steps", "5", "--corr", "0.3333333333",
        "--bond-dim", "8", "--omit-timing",
    ]
    _, first = run_cli(args, tmp_path, "a.json")
    _, second = run_cli(args, tmp_path, "b.json")
    assert first == second


def test_oracle_command_and_cache(tmp_path):
    from mpspricer import cli

    before = len(cli._ORACLE_CACHE)
    # Strike 103 makes this spec unique to the test even when earlier
    # tests in the same process already warmed the cache.
    args = [
        "oracle", "--kind", "asian", "--steps", "13",
        "--strike", "103", "--omit-timing",
    ]
    code, raw = run_cli(args, tmp_path, "o1.json")
    assert code == 0
    code, raw2 = run_cli(args, tmp_path, "o2.json")
    assert raw == raw2
    # Same spec twice lands in one cache slot.
    assert len(cli._ORACLE_CACHE) == before + 1
    doc = json.loads(raw)
    assert doc["method"] == "bruteforce"


def test_dump_mps_roundtrip(tmp_path):
    from mpspricer import MPS

    mps_path = tmp_path / "dump.json"
    args = [
        "price-asian", "--method", "ttcross", "--steps", "8",
        "--bond-dim", "8", "--dump-mps", str(mps_path),
    ]
    code, _ = run_cli(args, tmp_path, "p.json")
    assert code == 0
    m = MPS.from_document(json.loads(mps_path.read_text()))
    assert m.n_sites == 8


def test_dump_mps_rejected_without_mps(tmp_path, capsys):
    args = [
        "price-asian", "--method", "montecarlo", "--samples", "100",
        "--steps", "5", "--dump-mps", str(tmp_path / "x.json"),
    ]
    code = main(args)
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_output_dir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("MPSPRICER_OUTPUT_DIR", str(tmp_path))
    code = main(
        ["price-asian", "--method", "bruteforce", "--steps", "6",
         "--output-path", "nested.json", "--omit-timing"]
    )
    assert code == 0
    assert (tmp_path / "nested.json").exists()


def test_absolute_path_ignores_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("MPSPRICER_OUTPUT_DIR", str(tmp_path / "elsewhere"))
    target = tmp_path / "direct.json"
    code = main(
        ["price-asian", "--method", "bruteforce", "--steps", "6",
         "--output-path", str(target)]
    )
    assert code == 0
    assert target.exists()


def test_config_file_heterogeneous_basket(tmp_path):
    cfg_file = tmp_path / "b.json"
    cfg_file.write_text(
        json.dumps(
            {
                "spots": [100.0, 110.0],
                "vols": [0.5, 0.4],
                "corr": [[1.0, 0.25], [0.25, 1.0]],
                "strike": 105.0,
                "steps": 5,
                "method": "bruteforce",
            }
        )
    )
    code, raw = run_cli(
        ["price-basket", "--config", str(cfg_file), "--omit-timing"],
        tmp_path, "hb.json",
    )
    assert code == 0
    doc = json.loads(raw)
    from mpspricer import BasketSpec, price_basket_bruteforce

    spec = BasketSpec(
        spots=(100.0, 110.0), strike=105.0, rate=0.1, vols=(0.5, 0.4),
        corr=((1.0, 0.25), (0.25, 1.0)), expiry=1.0, steps=5,
        payoff_kind="min", style="european",
    )
    assert doc["price"] == price_basket_bruteforce(spec).price


def test_bench_rejects_bruteforce_method(capsys):
    code = main(["bench-asian", "--methods", "bruteforce", "--steps", "6"])
    assert code == 1
    assert "not benchable" in capsys.readouterr().err


def test_bench_rejects_json_output(capsys):
    code = main(
        ["bench-asian", "--methods", "ttcross", "--steps", "6",
         "--bond-dims", "2", "--repeats", "1", "--output", "json"]
    )
    assert code == 1
    assert "CSV" in capsys.readouterr().err


def test_unknown_flag_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["price-asian", "--frobnicate", "1"])
    assert exc.value.code != 0


def test_stdout_emission(capsys):
    code = main(
        ["price-asian", "--method", "bruteforce", "--steps", "5",
         "--omit-timing"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["wall_time_s"] == 0.0
