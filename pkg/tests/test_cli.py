import json

import pytest

from polyreg.cli import CliConfig, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval(capsys):
    code, out, _ = run(capsys, "eval", "--form", "m=3;a=1,1,1;r=1,1,1;domain=Z", "--x", "1,1,2")
    assert code == 0 and out.strip() == "5"


def test_local(capsys):
    code, out, _ = run(capsys, "local", "--form", "m=4;a=1,1,1;r=1,1,1;domain=Z",
                       "--n", "7", "--prime", "2")
    data = json.loads(out)
    assert code == 0 and data["status"] == "No" and data["precision"] == 3


def test_local_undetermined_exit(capsys):
    code, out, _ = run(capsys, "local", "--form", "m=4;a=1,1,1", "--n", str(7 * 4 ** 6),
                       "--prime", "2", "--cap", "6")
    assert code == 3 and json.loads(out)["status"] == "Undetermined"


def test_regular(capsys):
    code, out, _ = run(capsys, "regular", "--form", "m=16;a=1,3,6,9;r=1,1,1,1;domain=Z",
                       "--bound", "2000")
    data = json.loads(out)
    assert data["status"] == "Irregular" and code == 1
    code, out, _ = run(capsys, "regular", "--form", "m=4;a=1,1,1,1", "--bound", "500")
    assert code == 0 and json.loads(out)["status"] == "ConsistentUpTo"
    code, out, _ = run(capsys, "regular", "--form", "m=4;a=1,1,1,1", "--bound", "50",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[1].endswith("ConsistentUpTo(50),,,")


def test_lambda(capsys):
    code, out, _ = run(capsys, "lambda", "--form", "m=16;a=1,3,3,3", "--prime", "3")
    data = json.loads(out)
    assert code == 0 and data["output"] == "m=16;a=3,1,1,1;r=5,1,1,1;domain=Z"
    code, out, _ = run(capsys, "lambda", "--form", "m=16;a=1,3,3,3", "--prime", "7")
    assert code == 2


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "--form", "m=28;a=3,4,12,12", "--bound", "300")
    data = json.loads(out)
    assert code == 0 and data["tags"][0]["id"] == "F1_15" and data["local_match"] == [True]


def test_local_universal(capsys):
    code, out, _ = run(capsys, "local-universal", "--form", "m=16;a=1,3,3,3")
    assert code == 0 and json.loads(out)["deciding_prime"] == 3


def test_represented(capsys):
    code, out, _ = run(capsys, "represented", "--form", "m=4;a=1,1,1", "--n", "7")
    assert code == 0 and json.loads(out)["witness"] is None


def test_search_universal(capsys):
    code, out, _ = run(capsys, "search-universal", "--m", "14", "--max-rank", "5",
                       "--bound", "10000")
    assert code == 0 and json.loads(out)["min_rank_proved"] == 4


def test_survey_and_merge(capsys, tmp_path):
    paths = []
    for shard in (0, 1):
        p = tmp_path / f"s{shard}.jsonl"
        code, _, _ = run(capsys, "survey", "--m", "14", "--rank", "4", "--coeff-bound", "4",
                         "--bound", "500", "--out", str(p), "--shards", "2", "--shard", str(shard))
        assert code == 0
        paths.append(str(p))
    merged = tmp_path / "all.jsonl"
    code, _, _ = run(capsys, "survey", "--merge", *paths, "--out", str(merged))
    assert code == 0 and len(merged.read_text().splitlines()) == 29


def test_survey_flags_exit(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("POLYREG_CACHE", str(tmp_path))
    # a bound this small leaves irregular forms unrefuted and outside every family
    code, out, _ = run(capsys, "survey", "--m", "14", "--rank", "4", "--coeff-bound", "5",
                       "--bound", "1")
    data = json.loads(out)
    assert code == 1 and "m=14;a=1,5,5,5;r=1,1,1,1;domain=Z" in data["outside_classification"]
    assert data["out"].startswith(str(tmp_path))


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    code, _, err = run(capsys, "eval", "--form", "m=2;a=1", "--x", "1")
    assert code == 2 and "m must be" in err
    assert run(capsys, "local", "--form", "m=4;a=1", "--n", "1")[0] == 2
    assert run(capsys, "survey", "--m", "10", "--rank", "3", "--coeff-bound", "2")[0] == 2


def test_config_precedence():
    args = build_parser().parse_args(["regular", "--form", "m=4;a=1", "--bound", "7"])
    cfg = CliConfig.resolve(args, {"POLYREG_BOUND": "99", "POLYREG_CAP": "5",
                                   "POLYREG_FORMAT": "text"})
    assert (cfg.bound, cfg.cap, cfg.output_format) == (7, 5, "text")
    args = build_parser().parse_args(["regular", "--form", "m=4;a=1"])
    assert CliConfig.resolve(args, {}).bound == 1000


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.count("PASS") == 8
