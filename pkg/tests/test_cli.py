import csv
import json
import math
from importlib import resources

import jsonschema
import pytest

from filtdim.cli import main, parse_measure_spec, parse_scales, parse_schedule_spec


def run(*argv):
    return main(list(argv))


def load_schema(name):
    return json.loads(resources.files("filtdim.schemas").joinpath(name).read_text())


class TestParsers:
    def test_scale_range_expansion(self):
        eps = parse_scales("3^-2..3^-7")
        assert len(eps) == 6
        assert eps[0] == pytest.approx(3.0 ** -2)
        assert eps[-1] == pytest.approx(3.0 ** -7)

    def test_scale_list(self):
        assert list(parse_scales("1,0.5,0.25")) == [1.0, 0.5, 0.25]

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            parse_scales("0.25,0.5")
        with pytest.raises(ValueError):
            parse_scales("2^-2..3^-5")
        with pytest.raises(ValueError):
            parse_scales("2^-5..2^-2")
        with pytest.raises(ValueError):
            parse_scales("abc")

    def test_schedule_specs(self):
        s = parse_schedule_spec("pow:t=2,n=2..64")
        assert s.kind == "power" and s.t == 2.0 and s.n_stop == 64
        s = parse_schedule_spec("geom:n=2..12")
        assert s.kind == "geometric"
        with pytest.raises(ValueError):
            parse_schedule_spec("linear:n=2..12")

    def test_measure_specs(self):
        mu, _ = parse_measure_spec("point:dim=2")
        assert mu.dim == 2 and mu.n_atoms == 1
        mu, _ = parse_measure_spec("two-point")
        assert mu.n_atoms == 2
        mu, _ = parse_measure_spec("cantor:depth=3")
        assert mu.n_atoms == 8
        mu, _ = parse_measure_spec("uniform:dim=2,n=4")
        assert mu.n_atoms == 16
        mu, _ = parse_measure_spec("random:dim=1,n=7,seed=3")
        assert mu.n_atoms == 7
        with pytest.raises(ValueError):
            parse_measure_spec("blob:n=4")
        with pytest.raises(ValueError):
            parse_measure_spec("cantor:depth=3,unknown=1")


class TestGen:
    def test_gen_then_estimate_recovers_cantor_dimension(self, tmp_path):
        mpath = tmp_path / "c10.json"
        out = tmp_path / "est.csv"
        assert run("gen", "--cantor", "depth=10", "--out", str(mpath)) == 0
        assert run("estimate", "--measure", str(mpath), "--kind", "box", "--q", "2",
                   "--scales", "3^-2..3^-7", "--out", str(out), "--no-plot") == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["results"][0]["slope"] == pytest.approx(0.6309, abs=1e-3)

    def test_gen_measure_schema(self, tmp_path):
        mpath = tmp_path / "m.json"
        assert run("gen", "--uniform", "dim=1,n=4", "--out", str(mpath)) == 0
        jsonschema.validate(json.loads(mpath.read_text()), load_schema("measure.schema.json"))

    def test_gen_normalize(self, tmp_path):
        mpath = tmp_path / "m.json"
        assert run("gen", "--two-point", "sep=2", "--normalize", "--out", str(mpath)) == 0
        doc = json.loads(mpath.read_text())
        assert sum(a["w"] for a in doc["atoms"]) == pytest.approx(1.0)

    def test_gen_requires_one_source(self, tmp_path):
        assert run("gen", "--out", str(tmp_path / "m.json")) == 2
        assert run("gen", "--cantor", "depth=2", "--point", "",
                   "--out", str(tmp_path / "m.json")) == 2


class TestDerivativeCheck:
    def test_point_mass_rows(self, tmp_path):
        out = tmp_path / "dc.csv"
        assert run("derivative-check", "--measure", "point", "--q", "2",
                   "--out", str(out), "--no-plot") == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 11
        for row in rows:
            assert float(row["slope"]) == pytest.approx(-0.5, abs=1e-4)
            assert row["bounds_pass"] == "True"
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["all_bounds_pass"] is True
        assert summary["max_fd_residual"] <= 1e-4


class TestSchedule:
    def test_power_summary(self, tmp_path):
        out = tmp_path / "sch.csv"
        assert run("schedule", "--measure", "point", "--q", "2",
                   "--schedule", "pow:t=2,n=2..32", "--out", str(out), "--no-plot") == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["in_I_q"] is True
        assert summary["critical_t"] == pytest.approx(2.0, rel=1e-3)
        assert summary["kind"] == "power" and summary["t"] == 2.0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["diff"] == "" and rows[1]["diff"] != ""

    def test_geometric_summary(self, tmp_path):
        out = tmp_path / "g.csv"
        assert run("schedule", "--measure", "point", "--q", "2",
                   "--schedule", "geom:n=2..12", "--out", str(out), "--no-plot") == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["kind"] == "geometric" and summary["t"] is None
        assert summary["m_hat"] == pytest.approx(0.5 * math.log(2.0), abs=1e-6)


class TestComparePartitions:
    def test_curves_csv(self, tmp_path):
        out = tmp_path / "cmp.csv"
        assert run("compare-partitions", "--measure", "two-point", "--q", "2",
                   "--scales", "2^1..2^-3", "--out", str(out), "--no-plot") == 0
        with open(out) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header[0] == "eps" and set(header[1:]) == {
            "raw", "box", "ball-corr", "ball-leb", "kernel-sum", "kernel-corr", "kernel-leb"}
        assert len(rows) == 5

    def test_subset_of_kinds(self, tmp_path):
        out = tmp_path / "cmp.csv"
        assert run("compare-partitions", "--measure", "two-point", "--q", "2",
                   "--scales", "2^1..2^-3", "--kind", "box", "--kind", "kernel-corr",
                   "--out", str(out), "--no-plot") == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["kinds"] == ["box", "kernel-corr"]


class TestExitCodes:
    def test_empty_measure_is_validation_error(self, tmp_path):
        bad = tmp_path / "empty.json"
        bad.write_text('{"dim": 1, "atoms": []}')
        assert run("estimate", "--measure", str(bad), "--q", "2",
                   "--scales", "2^-1..2^-5", "--out", str(tmp_path / "x.csv")) == 2

    def test_missing_file_is_validation_error(self, tmp_path):
        assert run("estimate", "--measure", str(tmp_path / "nope.json"), "--q", "2",
                   "--scales", "2^-1..2^-5", "--out", str(tmp_path / "x.csv")) == 2

    def test_degenerate_series_is_numeric_error(self, tmp_path):
        assert run("estimate", "--measure", "point", "--q", "2",
                   "--scales", "0.5,0.25", "--out", str(tmp_path / "x.csv")) == 3

    def test_unknown_kind_is_validation_error(self, tmp_path, capsys):
        assert run("estimate", "--measure", "point", "--q", "2", "--scales",
                   "2^-1..2^-5", "--kind", "nope", "--out", str(tmp_path / "x.csv")) == 2

    def test_conflicting_scale_flags(self, tmp_path):
        assert run("estimate", "--measure", "point", "--q", "2",
                   "--scales", "2^-5..2^-1", "--out", str(tmp_path / "x.csv")) == 2


class TestDeterminismAndSchema:
    def test_outputs_byte_stable(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            assert run("estimate", "--measure", "cantor:depth=6", "--q", "2",
                       "--scales", "3^-1..3^-5", "--kind", "box", "--kind", "kernel-corr",
                       "--out", str(out), "--no-plot") == 0
            outs.append(out)
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert outs[0].with_suffix(".json").read_bytes() == outs[1].with_suffix(".json").read_bytes()

    @pytest.mark.parametrize("argv", [
        ("estimate", "--measure", "two-point", "--q", "2", "--scales", "2^-1..2^-5"),
        ("derivative-check", "--measure", "point", "--q", "2"),
        ("schedule", "--measure", "point", "--q", "2", "--schedule", "pow:t=1,n=2..12"),
        ("compare-partitions", "--measure", "two-point", "--q", "2",
         "--scales", "2^-1..2^-5", "--kind", "box"),
    ])
    def test_every_summary_validates_against_schema(self, tmp_path, argv):
        out = tmp_path / "run.csv"
        assert run(*argv, "--out", str(out), "--no-plot") == 0
        doc = json.loads(out.with_suffix(".json").read_text())
        jsonschema.validate(doc, load_schema("summary.schema.json"))

    def test_figures_rendered_alongside_csv(self, tmp_path):
        out = tmp_path / "fig.csv"
        assert run("estimate", "--measure", "two-point", "--q", "2",
                   "--scales", "2^-1..2^-5", "--out", str(out)) == 0
        png = out.with_suffix(".png")
        assert png.exists() and png.stat().st_size > 1000
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestImagePipeline:
    def test_uniform_image_recovers_dimension_two(self, tmp_path):
        # a constant 64x64 image is the uniform grid measure in disguise
        pgm = tmp_path / "flat.pgm"
        pgm.write_bytes(b"P5\n64 64\n255\n" + bytes([255] * 64 * 64))
        out = tmp_path / "img.csv"
        assert run("estimate", "--measure", str(pgm), "--q", "2",
                   "--scales", "2^-1..2^-5", "--out", str(out), "--no-plot") == 0
        summary = json.loads(out.with_suffix(".json").read_text())
        assert summary["results"][0]["slope"] == pytest.approx(2.0, abs=0.05)


class TestFidelityWarning:
    def test_warns_below_atom_spacing(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        assert run("estimate", "--measure", "uniform:dim=1,n=16", "--q", "2",
                   "--scales", "2^-2..2^-8", "--out", str(out), "--no-plot") == 0
        assert "nearest-neighbor" in capsys.readouterr().err
