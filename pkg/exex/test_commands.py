import json
import math

import pytest
from click.testing import CliRunner

from exex import cli
from exex.files import read_dat, write_dat
from modules.exponents import ExponentCurve


@pytest.fixture
def runner():
    return CliRunner()


def run_json(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def write_codebook(path, *codewords):
    path.write_text("# test codebook\n" + "\n".join(codewords) + "\n")
    return str(path)


def test_exponents_in_bits(runner):
    report = run_json(runner, ["exponents", "--eps", "0.001", "--unit", "bits"])
    assert report["rate_zero_expurgated"] == pytest.approx(1.9916, abs=1e-3)
    assert report["expurgated"] == pytest.approx(report["rate_zero_expurgated"])
    assert report["converse"] < report["rate_zero_expurgated"]


def test_exponents_of_a_useless_bsc(runner):
    report = run_json(runner, ["exponents", "--family", "bsc", "--eps", "0.5"])
    assert report["rate_zero_expurgated"] == pytest.approx(0.0, abs=1e-12)
    assert report["converse"] is None


def test_exponents_from_a_matrix_file(runner, tmp_path):
    spec = tmp_path / "bsc.json"
    spec.write_text(json.dumps({"matrix": [[0.9, 0.1], [0.1, 0.9]], "outputs": "01", "name": "bsc"}))
    report = run_json(runner, ["exponents", "--channel", str(spec)])
    assert report["channel"] == "bsc"
    assert report["rate_zero_expurgated"] == pytest.approx(-0.5 * math.log(2 * math.sqrt(0.09)), abs=1e-8)


def test_eps_out_of_range_is_an_input_error(runner):
    result = runner.invoke(cli, ["exponents", "--eps", "1.5"])
    assert result.exit_code == 2
    assert "eps out of range" in result.output


def test_malformed_channel_file(runner, tmp_path):
    spec = tmp_path / "broken.json"
    spec.write_text("{not json")
    result = runner.invoke(cli, ["exponents", "--channel", str(spec)])
    assert result.exit_code == 2


def test_threshold(runner):
    report = run_json(runner, ["threshold"])
    assert report["rate_threshold"] == pytest.approx(0.1865, abs=1e-3)
    assert report["critical_epsilon"] == pytest.approx(0.014935, abs=1e-5)


def test_threshold_above_critical_eps(runner):
    result = runner.invoke(cli, ["threshold", "--eps", "0.1"])
    assert result.exit_code == 2


def test_figures_fig2(runner, tmp_path):
    report = run_json(runner, ["figures", "fig2", "--out-dir", str(tmp_path)])
    assert report["unit"] == "bits"
    assert report["crossing"] == pytest.approx(0.1865, abs=1e-3)
    assert sorted(p.split("/")[-1] for p in report["files"]) == ["mmi-case.dat", "mmi-converse.dat"]
    curve = read_dat(tmp_path / "mmi-case.dat")
    assert curve.label == "mmi-case" and curve.unit == "bits" and curve.abscissa_kind == "rate"
    assert len(curve.samples) == 411
    assert curve.abscissas[-1] == pytest.approx(0.205)


def test_figures_fig1(runner, tmp_path):
    report = run_json(runner, ["figures", "fig1", "--points", "40", "--out-dir", str(tmp_path)])
    assert report["crossing"] is None
    converse = read_dat(tmp_path / "converse.dat")
    random_coding = read_dat(tmp_path / "random-coding.dat")
    assert converse.values[0] == pytest.approx(math.log(2))
    assert random_coding.values[0] == pytest.approx(math.log(2))
    assert len(read_dat(tmp_path / "ml-expurgated.dat").samples) == 39


def test_figures_fig1_beyond_the_critical_eps(runner, tmp_path):
    result = runner.invoke(cli, ["figures", "fig1", "--eps-max", "0.02", "--out-dir", str(tmp_path)])
    assert result.exit_code == 2


def test_dat_files_keep_full_precision(tmp_path):
    curve = ExponentCurve(samples=[(0.0, 1 / 3), (0.1, math.pi)], abscissa_kind="rate", unit="nats", label="x")
    back = read_dat(write_dat(tmp_path / "nested" / "x.dat", curve))
    assert back.samples == curve.samples


def test_counterexample_demo(runner):
    report = run_json(runner, ["counterexample", "--eps", "0.001", "--demo", "4"])
    assert report["separation_applies"] and not report["extracted_subcode"]
    assert (report["n"], report["M"]) == (4, 3)
    assert report["exponent_ceiling"] == pytest.approx(2.420837, abs=1e-5)
    assert report["gap_to_expurgated"] > 0
    assert report["rate_zero_separation"] > 0
    first = report["messages"][0]
    assert (first["message"], first["partner"], first["y_tilde"], first["modified_index"]) == (1, 2, "abad", 3)
    for message in report["messages"]:
        assert message["mi_message"] < message["mi_partner"]
        assert message["error_prob"] >= message["y_tilde_prob"]
        assert message["y_tilde_prob"] == pytest.approx(report["probability_bound"])


def test_counterexample_above_critical_eps_warns(runner):
    result = runner.invoke(cli, ["counterexample", "--eps", "0.02", "--demo", "4"])
    assert result.exit_code == 0
    assert "does not apply" in result.output


def test_counterexample_needs_a_third_codeword(runner, tmp_path):
    path = write_codebook(tmp_path / "cb.txt", "0011", "1100")
    result = runner.invoke(cli, ["counterexample", "--codebook", path])
    assert result.exit_code == 2
    assert "M >= 3" in result.output


def test_counterexample_extracts_a_constant_composition_subcode(runner, tmp_path):
    path = write_codebook(tmp_path / "cb.txt", "0011", "0101", "0110", "0001")
    result = runner.invoke(cli, ["counterexample", "--codebook", path])
    assert result.exit_code == 0, result.output
    assert "subcode" in result.output
    assert '"extracted_subcode": true' in result.output


def test_simulate_ml_on_bsc(runner, tmp_path):
    path = write_codebook(tmp_path / "cb.txt", "0", "1")
    report = run_json(runner, ["simulate", "--family", "bsc", "--eps", "0.1", "--codebook", path, "--decoder", "ml"])
    assert report["report"]["average"] == pytest.approx(0.1)
    assert report["report"]["method"] == "exact_enumeration"
    assert report["empirical_exponent_average"] == pytest.approx(-math.log(0.1))


def test_simulate_monte_carlo_is_reproducible(runner, tmp_path):
    path = write_codebook(tmp_path / "cb.txt", "000", "111")
    args = ["simulate", "--family", "bsc", "--eps", "0.2", "--codebook", path, "--decoder", "ml"]
    args += ["--monte-carlo", "--samples", "4000", "--seed", "3"]
    first, second = runner.invoke(cli, args), runner.invoke(cli, args)
    assert first.exit_code == 0, first.output
    assert first.output == second.output
    report = json.loads(first.output)["report"]
    assert report["n_samples"] == 4000
    assert abs(report["average"] - 0.104) <= 4 * report["half_width"]


def test_simulate_refuses_huge_enumerations(runner):
    result = runner.invoke(cli, ["simulate", "--eps", "0.1", "--demo", "12"])
    assert result.exit_code == 2
    assert "--monte-carlo" in result.output


def test_simulate_metric_decoder_needs_a_metric(runner):
    result = runner.invoke(cli, ["simulate", "--eps", "0.1", "--demo", "4", "--decoder", "max_metric"])
    assert result.exit_code == 2
    assert "needs a metric" in result.output


def test_simulate_needs_a_codebook(runner):
    result = runner.invoke(cli, ["simulate", "--eps", "0.1"])
    assert result.exit_code == 2


@pytest.mark.parametrize("eps", [0.1, 0.9])
def test_appendix_verify(runner, eps):
    report = run_json(runner, ["appendix-verify", "--eps", str(eps)])
    assert report["closed_form"] == pytest.approx(0.2554128, abs=1e-6)
    assert abs(report["gaps"]["bruteforce-closed_form"]) < 5e-3
    assert report["gaps"]["closed_form-expurgated"] == pytest.approx(0.0, abs=1e-12)


def test_appendix_verify_useless_channel(runner):
    report = run_json(runner, ["appendix-verify", "--eps", "0.5"])
    assert report["bruteforce"] == pytest.approx(0.0, abs=1e-12)
    assert report["optimal_gammas"] == [0.5, 0.5]
