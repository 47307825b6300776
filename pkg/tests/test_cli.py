import json

import numpy as np
import pytest

from meshgonio.cli import main
from meshgonio.mesh import load_mesh

FROZEN = "2024-05-01T12:00:00+00:00"


@pytest.fixture(scope="module")
def wedge_ply(tmp_path_factory):
    path = tmp_path_factory.mktemp("meshes") / "wedge90.ply"
    code = main(["synth", "wedge", "--angle", "90",
                 "--vertices-per-side", "2000", "--out", str(path)])
    assert code == 0
    return path


def write_spec(path, rows, header="x,y,z,radius,lambda,metric"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n")


class TestSynth:
    def test_truth_sidecar(self, wedge_ply):
        sidecar = wedge_ply.with_suffix(".truth.json")
        truth = json.loads(sidecar.read_text())
        assert truth["angle_deg"] == 90
        mesh = load_mesh(wedge_ply)
        assert len(truth["side"]) == mesh.num_vertices
        assert set(truth["side"]) == {1, 2}

    def test_deterministic_bytes(self, tmp_path):
        outs = []
        for name in ("a.ply", "b.ply"):
            out = tmp_path / name
            assert main(["synth", "rugose", "--angle", "75", "--seed", "3",
                         "--amplitude", "0.05", "--out", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_invalid_angle_is_usage_error(self, tmp_path, capsys):
        code = main(["synth", "wedge", "--angle", "0",
                     "--out", str(tmp_path / "x.ply")])
        assert code == 64
        assert "InvalidSpec" in capsys.readouterr().err

    def test_curved_shape(self, tmp_path):
        out = tmp_path / "c.ply"
        assert main(["synth", "curved", "--angle", "95", "--curve-radius",
                     "3", "--vertices-per-side", "800",
                     "--out", str(out)]) == 0
        assert load_mesh(out).num_vertices > 0


class TestMeasure:
    def test_single_row_right_angle(self, wedge_ply, tmp_path):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0.5,0,0,0.3,2,euclidean"])
        out = tmp_path / "out.csv"
        code = main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(out), "--fixed-timestamp", FROZEN])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 2
        row = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert float(row["theta_deg"]) == pytest.approx(90.0, abs=0.5)
        assert row["method"] == "xyz"
        assert row["timestamp_iso8601"] == FROZEN

    def test_export_replays_exactly(self, wedge_ply, tmp_path):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0.3,0,0,0.3,2,euclidean",
                          "0.7,0,0,0.25,1,euclidean"])
        first = tmp_path / "first.csv"
        assert main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(first),
                     "--fixed-timestamp", FROZEN]) == 0
        # the export CSV is itself a valid spec (column superset)
        second = tmp_path / "second.csv"
        assert main(["measure", "--mesh", str(wedge_ply), "--spec", str(first),
                     "--out", str(second),
                     "--fixed-timestamp", FROZEN]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_partial_failure_exit_code(self, wedge_ply, tmp_path, capsys):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0.5,0,0,0.02,2,euclidean",
                          "0.5,0,0,0.3,2,euclidean"])
        out = tmp_path / "out.csv"
        code = main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(out)])
        assert code == 2
        err = capsys.readouterr().err
        assert "spec line 2" in err and "PatchTooSmall" in err
        assert len(out.read_text().strip().split("\n")) == 2  # header + 1 ok

    def test_colored_output(self, wedge_ply, tmp_path):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0.5,0,0,0.3,2,euclidean"])
        colored = tmp_path / "colored.ply"
        assert main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(tmp_path / "out.csv"),
                     "--colored-out", str(colored)]) == 0
        mesh = load_mesh(colored)
        assert mesh.colors is not None
        assert len(np.unique(mesh.colors, axis=0)) == 3  # base + one pair

    def test_geodesic_metric(self, wedge_ply, tmp_path):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0.5,0,0,0.3,2,geodesic"])
        out = tmp_path / "out.csv"
        assert main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(out)]) == 0
        row = out.read_text().strip().split("\n")[1].split(",")
        header = out.read_text().split("\n")[0].split(",")
        assert float(dict(zip(header, row))["theta_deg"]) == \
            pytest.approx(90.0, abs=0.5)

    def test_missing_mesh(self, tmp_path, capsys):
        spec = tmp_path / "spec.csv"
        write_spec(spec, ["0,0,0,1,2,euclidean"])
        assert main(["measure", "--mesh", str(tmp_path / "nope.ply"),
                     "--spec", str(spec),
                     "--out", str(tmp_path / "o.csv")]) == 66

    def test_missing_spec(self, wedge_ply, tmp_path):
        assert main(["measure", "--mesh", str(wedge_ply),
                     "--spec", str(tmp_path / "nope.csv"),
                     "--out", str(tmp_path / "o.csv")]) == 66

    def test_bad_spec_columns(self, wedge_ply, tmp_path, capsys):
        spec = tmp_path / "spec.csv"
        spec.write_text("a,b\n1,2\n")
        assert main(["measure", "--mesh", str(wedge_ply), "--spec", str(spec),
                     "--out", str(tmp_path / "o.csv")]) == 65
        assert "radius" in capsys.readouterr().err


class TestIov:
    def test_fixture_groups(self, tmp_path, capsys):
        csv_path = tmp_path / "angles.csv"
        csv_path.write_text(
            "break,method,angle_deg\n"
            "b1,man,90\nb1,man,90\nb1,man,90\n"
            "b2,man,10\nb2,man,12\nb2,man,14\n"
            "b3,man,80\nb3,man,110\nb3,man,95\n"
            "b4,man,50\nb4,man,60\n")
        assert main(["iov", str(csv_path)]) == 0
        out = capsys.readouterr().out
        assert "b1 [man]: iov = 0.0000" in out
        assert "b2 [man]: iov = 2.6667" in out
        assert "b3 [man]: iov = 20.0000" in out
        assert "b4 [man]: incomplete" in out
        assert "-- man: n=3" in out
        assert "mean=7.5556" in out

    def test_missing_file(self, tmp_path):
        assert main(["iov", str(tmp_path / "nope.csv")]) == 66

    def test_bad_columns(self, tmp_path, capsys):
        p = tmp_path / "bad.csv"
        p.write_text("foo,bar\n1,2\n")
        assert main(["iov", str(p)]) == 65


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 64

    def test_no_args(self, capsys):
        assert main([]) == 64

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert capsys.readouterr().out.strip()
