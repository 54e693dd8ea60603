import json

from minmodlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_simulate_json(capsys):
    code, out = run(capsys, "simulate", "--n", "64", "--replicates", "120",
                    "--method", "dense_oracle", "--seed", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["failures"] == 0
    assert 0.5 < doc["fit"]["lambda_hat_mle"] < 4.0


def test_simulate_csv(capsys):
    code, out = run(capsys, "simulate", "--n", "64", "--replicates", "120",
                    "--method", "dense_oracle", "--format", "csv")
    assert code == 0
    assert out.startswith("bin_left,bin_right,count,density")


def test_minmod_methods_agree(capsys):
    code, out = run(capsys, "minmod", "--n", "128", "--seed", "5")
    assert code == 0
    doc = json.loads(out)
    a = doc["mesh_linearized"]["value"]
    b = doc["dense_oracle"]["value"]
    # the linearized value differs from the true minimum by at most the
    # curvature times the squared mesh spacing (~5e-3 at this degree)
    assert abs(a - b) < 5e-3


def test_classify(capsys):
    code, out = run(capsys, "classify", "--n", "128")
    assert code == 0
    doc = json.loads(out)
    assert 0 < doc["bad_fraction"] < 0.2


def test_covariance_fixed_tuple(capsys):
    code, out = run(capsys, "covariance", "--n", "256", "--tuple", "100.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["sigma_min"] > 0
    assert len(doc["V"]) == 4


def test_charfn(capsys):
    code, out = run(capsys, "charfn", "--n", "512", "--dist", "rademacher")
    assert code == 0
    doc = json.loads(out)
    assert doc["log_modulus"] < 0
    assert doc["stderr"] == 0.0


def test_smallball_monotone(capsys):
    code, out = run(capsys, "smallball", "--n", "128", "--dist", "rademacher",
                    "--replicates", "20000")
    assert code == 0
    ps = [r["p"] for r in json.loads(out)["records"]]
    assert ps == sorted(ps)


def test_edgeworth(capsys):
    code, out = run(capsys, "edgeworth", "--n", "128", "--dist", "rademacher",
                    "--replicates", "20000")
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["empirical"] - doc["gaussian"]) < 0.02


def test_precondition_exit_code(capsys):
    # degree too small for the mesh construction
    code = main(["minmod", "--n", "2"])
    assert code == 2


def test_report(capsys):
    code, out = run(capsys, "report", "--threads", "4")
    doc = json.loads(out)
    assert code in (0, 3)
    assert {c["name"] for c in doc["checks"]} == {
        "exponential_rate", "covariance_positive", "charfn_decay", "smallball_slope"}
    assert code == 0 and doc["all_pass"]
