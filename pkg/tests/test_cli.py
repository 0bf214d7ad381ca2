import json

import pytest

from rrtperc.cli import EXIT_TOLERANCE, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_empty(capsys):
    code, out, _ = run(capsys, "generate", "--n", "0")
    assert code == 0 and json.loads(out) == {"n": 0, "parent": []}


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["generate", "--n", "3", "--seed", "5", "--out", str(a)]) == 0
    assert main(["generate", "--n", "3", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    parent = json.loads(a.read_text())["parent"]
    assert all(p < j for j, p in enumerate(parent, start=1))


def test_generate_binary_roundtrips_through_percolate(tmp_path, capsys):
    tree = tmp_path / "t.bin"
    assert main(["generate", "--n", "10", "--format", "bin", "--out", str(tree)]) == 0
    code, out, _ = run(capsys, "percolate", "--tree", str(tree), "--p", "1.0")
    assert code == 0 and json.loads(out)["clusters"] == [{"root": 0, "size": 11, "generation": 0}]


def test_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("RRTPERC_SEED", "17")
    _, env_out, _ = run(capsys, "generate", "--n", "6")
    _, flag_out, _ = run(capsys, "generate", "--n", "6", "--seed", "17")
    assert env_out == flag_out
    monkeypatch.setenv("RRTPERC_SEED", "oops")
    assert run(capsys, "generate", "--n", "6")[0] == EXIT_USAGE


def test_percolate_full_retention(capsys):
    code, out, _ = run(capsys, "percolate", "--n", "10", "--p", "1.0")
    obj = json.loads(out)
    assert code == 0 and obj["cluster_sizes"] == {"": 11} and obj["marks"] == []


def test_percolate_csv_and_t(capsys):
    code, out, _ = run(capsys, "percolate", "--n", "50", "--t", "1.0", "--format", "csv")
    assert code == 0 and out.startswith("path,level,size\n,0,")


def test_percolate_needs_exactly_one_parameter(capsys):
    assert run(capsys, "percolate", "--n", "5")[0] == EXIT_USAGE
    assert run(capsys, "percolate", "--n", "5", "--p", "0.5", "--t", "1")[0] == EXIT_USAGE
    assert run(capsys, "percolate", "--n", "5", "--p", "2")[0] == EXIT_USAGE


def test_limit_shape(capsys):
    code, out, _ = run(capsys, "limit", "--depth", "2", "--breadth", "5")
    assert code == 0 and len(json.loads(out)) == 1 + 5 + 25


def test_limit_kinds(capsys):
    code, out, _ = run(capsys, "limit", "--kind", "truncated", "--t", "1", "--depth", "1", "--breadth", "2", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "path,level,Z,z"
    assert run(capsys, "limit", "--kind", "G")[0] == EXIT_USAGE


def test_destroy_outputs(capsys):
    code, out, _ = run(capsys, "destroy", "--n", "8", "--ranked", "--t", "2")
    obj = json.loads(out)
    assert code == 0 and obj[""][0] == 9
    code, out, _ = run(capsys, "destroy", "--n", "3", "--cut-tree")
    assert code == 0 and json.loads(out)[0] == [0, 1, 2, 3]
    assert run(capsys, "destroy", "--n", "1")[0] == EXIT_USAGE


@pytest.mark.parametrize("method", ["chain", "tree", "walk"])
def test_isolate(capsys, method):
    code, out, _ = run(capsys, "isolate", "--n", "40", "--method", method)
    obj = json.loads(out)
    assert code == 0 and sum(obj["cut_sizes"]) == 40 and obj["X_n"] == len(obj["cut_sizes"])


def test_experiment_pass_and_tolerance_failure(tmp_path, capsys):
    code, out, err = run(capsys, "experiment", "splitting", "--n", "30", "--replicates", "20000")
    assert code == 0 and json.loads(out)["passed"] is True and "PASS" in err
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"name": "coupling", "n_grid": [2000], "replicates": 10, "options": {"prefix_n": 50, "prefix_replicates": 5}}))
    code, out, err = run(capsys, "experiment", "--config", str(cfg))
    # the mean undershoot does not vanish, so the default tolerance fails
    assert code == EXIT_TOLERANCE and "FAIL" in err


def test_experiment_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "nonsense"])
    assert exc.value.code == EXIT_USAGE
    assert run(capsys, "experiment")[0] == EXIT_USAGE
    assert run(capsys, "experiment", "splitting", "--replicates", "0")[0] == EXIT_USAGE
