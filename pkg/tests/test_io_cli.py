import csv
import json
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import pytest

from dilation_lab import EXACT, FLOAT, TruncatedSeries
from dilation_lab.cli import main, parse_t
from dilation_lab.io import InputError, load_schema, read_series, series_from_json, write_series

SCHEMA = load_schema()


def run(args, out):
    code = main([*args, "--out", str(out), "--timestamp", "1970-01-01T00:00:00+00:00"])
    return code


def report(out, name):
    data = json.loads((Path(out) / f"{name}.json").read_text())
    jsonschema.validate(data, SCHEMA)
    return data


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def files(tmp_path):
    d = tmp_path / "in"
    run(["gen", "monomial", "--degree", "1", "--name", "z.json"], d)
    run(["gen", "monomial", "--degree", "5", "--c", "2"], d)
    run(["gen", "blaschke", "--a", "1/2", "--M", "3", "--name", "b3.json"], d)
    run(["gen", "blaschke", "--a", "1/2", "--M", "12", "--name", "b12.json"], d)
    write_series(d / "zz.json", TruncatedSeries({1: 1, 2: 1}), 0)
    write_series(d / "half.json", TruncatedSeries({1: 1, 2: Fraction(1, 2)}), 0)
    return d


class TestCoefficientFiles:
    def test_round_trip(self, tmp_path):
        f = TruncatedSeries({1: (Fraction(1, 3), -1), 4: 2}, EXACT)
        write_series(tmp_path / "f.json", f, -1)
        g, t = read_series(tmp_path / "f.json")
        assert g == f and t == -1 and g.degree_cap == 4

    def test_float_file(self):
        f, t = series_from_json({"mode": "float", "t": 0.5, "coeffs": [[1.0, 0.0], [0.0, -2.0]]})
        assert f.mode == FLOAT and f.coeff(2) == -2j and t == 0.5

    @pytest.mark.parametrize("bad", [{}, {"mode": "exact", "coeffs": [[1, 0]]}, {"mode": "x", "coeffs": []},
                                     {"mode": "exact", "coeffs": [[1, 0, 0, 1]], "tail_l2_sq": "a"}])
    def test_malformed(self, bad):
        with pytest.raises(InputError):
            series_from_json(bad)


class TestGen:
    def test_blaschke_zero(self, tmp_path):
        run(["gen", "blaschke", "--a", "0", "--M", "4"], tmp_path)
        f, _ = read_series(tmp_path / "blaschke.json")
        assert f.terms == {2: -1}

    def test_blaschke_half(self, files):
        f, _ = read_series(files / "b3.json")
        assert f.terms == {1: Fraction(1, 2), 2: Fraction(-3, 4), 4: Fraction(-3, 8), 8: Fraction(-3, 16)}
        assert f.tail_l2_sq == Fraction(3, 256)

    def test_monomial(self, files):
        f, _ = read_series(files / "monomial.json")
        assert f.terms == {5: 2}

    def test_random_is_seeded(self, tmp_path):
        for d in ("a", "b"):
            run(["gen", "random", "--seed", "11", "--support-size", "4", "--degree-cap", "20"], tmp_path / d)
        assert (tmp_path / "a/random.json").read_bytes() == (tmp_path / "b/random.json").read_bytes()

    def test_blaschke_outside_disk(self, tmp_path):
        assert run(["gen", "blaschke", "--a", "1"], tmp_path) == 1

    def test_dense_cap(self, tmp_path):
        assert run(["gen", "blaschke", "--M", "40"], tmp_path) == 1


class TestCommands:
    def test_ortho_monomial(self, files, tmp_path):
        assert run(["ortho", str(files / "monomial.json"), "--t", "-1"], tmp_path) == 0
        assert report(tmp_path, "ortho")["verdict"] == "all_zero"

    def test_ortho_blaschke_exit_codes(self, files, tmp_path):
        assert run(["ortho", str(files / "b3.json"), "--t", "0"], tmp_path / "small") == 2
        small = report(tmp_path / "small", "ortho")
        assert small["verdict"] == "inconclusive" and small["exit_status"] == 2
        assert run(["ortho", str(files / "b12.json"), "--t", "0"], tmp_path / "large") == 0
        assert report(tmp_path / "large", "ortho")["verdict"] == "all_zero"

    def test_ortho_violation(self, files, tmp_path):
        assert run(["ortho", str(files / "zz.json"), "--t", "-1", "--k-cap", "3"], tmp_path) == 0
        assert report(tmp_path, "ortho")["verdict"] == "violated_at(1,2)"
        assert rows(tmp_path / "residuals.csv")[0] == ["i", "j", "k", "abs_residual", "tail_bound", "status"]

    def test_frame_trend_column(self, files, tmp_path):
        assert run(["frame-bounds", str(files / "z.json"), "--t", "-1", "--probe-cap", "64"], tmp_path) == 0
        body = rows(tmp_path / "bessel_ratios.csv")[1:]
        assert [r[1] for r in body] == [str(Fraction(1, n + 1)) for n in range(1, 65)]
        assert report(tmp_path, "frame_bounds")["verdict"] == "decreasing"

    def test_gram_csv(self, files, tmp_path):
        assert run(["gram", str(files / "zz.json"), "--t", "-1", "--k-cap", "2"], tmp_path) == 0
        assert rows(tmp_path / "gram.csv")[2] == ["1", "2", "1/3", "0", "0.0"]

    def test_inner_and_tau(self, files, tmp_path):
        assert run(["inner", str(files / "b12.json")], tmp_path / "i") == 0
        assert report(tmp_path / "i", "inner")["verdict"] == "all_zero"
        assert run(["tau-sym", str(files / "zz.json"), "--pairs-cap", "6"], tmp_path / "s") == 0
        assert report(tmp_path / "s", "tau_sym")["verdict"] == "identity_holds"

    def test_riesz_histogram(self, files, tmp_path):
        assert run(["riesz-probe", str(files / "half.json"), "--samples", "5000"], tmp_path) == 0
        rep = report(tmp_path, "riesz_probe")
        assert rep["verdict"] == "riesz" and rep["manifest"]["seed"] == 0
        hist = rows(tmp_path / "modulus_histogram.csv")[1:]
        assert sum(int(r[2]) for r in hist) == 5000

    def test_norm_profile(self, files, tmp_path):
        assert run(["norm-profile", str(files / "zz.json"), "--t", "-1", "--k-cap", "4"], tmp_path) == 0
        body = rows(tmp_path / "norm_profile.csv")[1:]
        assert body[0][1] == "5/6" and len(body) == 4

    def test_omega(self, files, tmp_path):
        assert run(["omega-solve", str(files / "zz.json"), str(files / "zz.json"), "--k-cap", "3"], tmp_path) == 0
        assert report(tmp_path, "omega_solve")["result"]["c"] == [[1, 1, 0, 1], [0, 1, 0, 1], [0, 1, 0, 1]]
        assert run(["omega-solve", str(files / "monomial.json"), str(files / "zz.json")], tmp_path / "e") == 1
        assert report(tmp_path / "e", "omega_solve")["verdict"] == "leading_coefficient_zero"

    def test_moment(self, files, tmp_path):
        prob = {"t": 0, "f": "z.json", "lambdas": [1, 1, 1, 1], "k_cap": 4}
        (files / "problem.json").write_text(json.dumps(prob))
        assert run(["moment", str(files / "problem.json")], tmp_path) == 0
        rep = report(tmp_path, "moment")
        assert rep["verdict"] == "isometric"
        assert rep["result"]["operator_norm"]["value"] == pytest.approx(1)

    def test_moment_norm_violation(self, files, tmp_path):
        prob = {"t": 0, "f": "monomial.json", "lambdas": [1, 1], "k_cap": 2}
        (files / "bad.json").write_text(json.dumps(prob))
        assert run(["moment", str(files / "bad.json")], tmp_path) == 1


class TestInputErrors:
    def test_missing_file(self, tmp_path):
        assert run(["gram", str(tmp_path / "nope.json")], tmp_path) == 1

    def test_bad_flag(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["gram"])
        assert err.value.code == 1

    def test_float_to_exact_refused(self, tmp_path):
        write_series(tmp_path / "f.json", TruncatedSeries({1: 1.0}, FLOAT))
        assert run(["gram", str(tmp_path / "f.json"), "--mode", "exact"], tmp_path) == 1

    def test_exact_with_fractional_t(self, files, tmp_path):
        assert run(["gram", str(files / "zz.json"), "--t", "1/2"], tmp_path) == 1
        assert run(["gram", str(files / "zz.json"), "--t", "1/2", "--mode", "float"], tmp_path) == 0

    def test_parse_t(self):
        assert parse_t("-2") == -2 and parse_t("1/2") == 0.5 and parse_t("0.25") == 0.25


def test_reports_are_byte_identical(files, tmp_path):
    names = ("gram.json", "gram.csv", "riesz_probe.json", "modulus_histogram.csv")
    snapshots = []
    for _ in range(2):
        run(["gram", str(files / "b3.json"), "--k-cap", "4"], tmp_path)
        run(["riesz-probe", str(files / "half.json"), "--samples", "2000", "--seed", "5"], tmp_path)
        snapshots.append([(tmp_path / n).read_bytes() for n in names])
    assert snapshots[0] == snapshots[1]


def test_console_script(files, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dilation_lab.cli", "ortho", str(files / "b3.json"),
                           "--out", str(tmp_path)], capture_output=True, text=True, check=False)
    assert proc.returncode == 2
    assert proc.stdout.startswith("inconclusive")
