import json

import numpy as np
import pytest
from scipy import stats

from mpmrf import cli
from mpmrf.model import dump_model, new_model
from mpmrf.tree import generate


@pytest.fixture
def hubchain_json(tmp_path):
    def make(beta):
        p = tmp_path / f"hubchain_{beta}.json"
        dump_model(new_model(generate("hubchain"), 1.0, beta), p)
        return str(p)
    return make


def test_sample_from_model_file(tmp_path, capsys):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"lambda": 1.5, "tree": {"d": 3, "edges": [[1, 2], [2, 3]]},
                                 "alpha": {"broadcast": 0.4}}))
    out = tmp_path / "o"
    assert cli.main(["sample", "--model", str(model), "--n", "1000", "--seed", "7", "--out", str(out)]) == 0
    data = np.loadtxt(out / "sample.csv", delimiter=",", skiprows=1)
    assert data.shape == (1000, 3)
    assert "vertex,mean,variance" in capsys.readouterr().out


def test_sample_is_byte_reproducible(tmp_path):
    args = ["sample", "--tree", "star:5", "--lambda", "2", "--alpha", "0.4", "--n", "500", "--seed", "3"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b"), "--threads", "0"]) == 0
    assert (tmp_path / "a" / "sample.csv").read_bytes() == (tmp_path / "b" / "sample.csv").read_bytes()


def test_sample_requires_seed(tmp_path):
    assert cli.main(["sample", "--tree", "star:3", "--lambda", "1", "--alpha", "0.5",
                     "--out", str(tmp_path)]) == cli.EXIT_USAGE


def test_sum_pmf_independent_series(tmp_path):
    assert cli.main(["sum-pmf", "--tree", "series:3", "--lambda", "1", "--alpha", "0",
                     "--nfft", "1024", "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "sum_pmf.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1] - stats.poisson.pmf(data[:, 0], 3.0))) < 1e-10
    assert (tmp_path / "secondary_pmf.csv").exists()


def test_cov_unit_diagonal(tmp_path, hubchain_json):
    assert cli.main(["cov", "--model", hubchain_json(0.3), "--out", str(tmp_path)]) == 0
    c = np.loadtxt(tmp_path / "covariance.csv", delimiter=",", skiprows=1)
    assert c.shape == (50, 50) and np.all(np.diag(c) == 1.0)


def test_alloc_row(tmp_path, hubchain_json, capsys):
    assert cli.main(["alloc", "--model", hubchain_json(0.3), "--vertices", "1,16,30", "--kappa", "0.9",
                     "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "tvar_contributions.csv").read_text().splitlines()
    assert rows[0] == "kappa,vertex,contribution,fraction_of_tvar,tvar"
    got = {int(r.split(",")[1]): float(r.split(",")[2]) for r in rows[1:]}
    assert got[1] == pytest.approx(1.31, abs=5e-3)
    assert got[16] == pytest.approx(1.86, abs=5e-3)
    assert got[30] == pytest.approx(2.38, abs=5e-3)
    header = (tmp_path / "allocations.csv").read_text().splitlines()[0]
    assert header == "k,p_M,alloc_v1,share_v1,alloc_v16,share_v16,alloc_v30,share_v30"


def test_risk(tmp_path, hubchain_json):
    assert cli.main(["risk", "--model", hubchain_json(0.7), "--out", str(tmp_path)]) == 0
    rows = dict((r.rsplit(",", 1)[0], float(r.rsplit(",", 1)[1]))
                for r in (tmp_path / "risk.csv").read_text().splitlines()[1:])
    assert rows["VaR,0.9"] == 90
    assert rows["TVaR,0.9"] == pytest.approx(109.95, abs=5e-3)
    assert rows["entropic,0.1"] == pytest.approx(200.01, abs=5e-3)
    assert (tmp_path / "curves.csv").read_text().startswith("x,F,pi")


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["cov", "--tree", "series:3", "--lambda", "1", "--alpha", "0.5"]) == 0
    assert (tmp_path / "env" / "covariance.csv").exists()


def test_gen_tree_roundtrip(tmp_path, capsys):
    assert cli.main(["gen-tree", "chinary:2:2"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("d=7\n")
    f = tmp_path / "t.txt"
    f.write_text(text)
    assert cli.main(["cov", "--tree-file", str(f), "--lambda", "2", "--alpha", "0.5",
                     "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv,code", [
    (["cov", "--lambda", "1", "--alpha", "0.5"], cli.EXIT_USAGE),
    (["cov", "--tree", "series:3"], cli.EXIT_USAGE),
    (["nonsense"], cli.EXIT_USAGE),
    (["sum-pmf", "--tree", "series:3", "--lambda", "1", "--alpha", "0.5", "--nfft", "1000"], cli.EXIT_COMPUTE),
    (["cov", "--tree", "ring:3", "--lambda", "1", "--alpha", "0.5"], cli.EXIT_COMPUTE),
    (["cov", "--tree", "series:3", "--lambda", "-1", "--alpha", "0.5"], cli.EXIT_COMPUTE),
    (["cov", "--model", "/nonexistent/m.json"], cli.EXIT_COMPUTE),
])
def test_exit_codes(tmp_path, argv, code):
    assert cli.main(argv + ["--out", str(tmp_path)] if argv[0] != "nonsense" else argv) == code


@pytest.mark.slow
def test_reproduce_outputs_and_exit_contract(tmp_path, capsys, monkeypatch):
    code = cli.main(["reproduce", "--out", str(tmp_path)])
    text = capsys.readouterr().out
    failures = [line for line in text.splitlines() if "MISMATCH" in line]
    assert code == (cli.EXIT_MISMATCH if failures else cli.EXIT_OK)
    for name in ("table1.csv", "table2.csv", "table3.csv"):
        assert len((tmp_path / name).read_text().splitlines()) > 4
    for beta in ("0", "0.3", "0.7", "0.9"):
        for stem in ("pmf_M", "pmf_C_M", "curves"):
            assert (tmp_path / f"{stem}_beta_{beta}.csv").exists()
    for csv in tmp_path.glob("*.csv"):
        for row in csv.read_text().splitlines()[1:]:
            [float(cell) for cell in row.split(",")]


def test_reproduce_exit_code_follows_comparisons(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "reproduce", lambda out, n, t: [])
    assert cli.main(["reproduce", "--out", str(tmp_path)]) == cli.EXIT_OK
    monkeypatch.setattr(cli, "reproduce", lambda out, n, t: ["cell: got 1, expected 2"])
    assert cli.main(["reproduce", "--out", str(tmp_path)]) == cli.EXIT_MISMATCH


def test_golden_comparison_tolerances():
    failures = []
    assert cli._compare("a", 1.2549, 1.25, cli.TOL_TWO_DECIMALS, failures) == "ok"
    assert cli._compare("b", 1.2551, 1.25, cli.TOL_TWO_DECIMALS, failures) == "MISMATCH"
    assert cli._compare("c", np.int64(59), 59, 0, failures) == "ok"
    assert cli._compare("d", 60, 59, 0, failures) == "MISMATCH"
    assert len(failures) == 2 and failures[0].startswith("b:")
