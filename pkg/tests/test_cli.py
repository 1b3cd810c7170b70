import csv
import io
import json

import numpy as np
import pytest

from relmagic.cli import HEATMAP_HEADER, RAYS_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_magic_t_json(capsys):
    code, out, _ = run(capsys, "magic", "--state", "T", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    assert doc["value"] == pytest.approx(0.342497, abs=1e-6)
    assert doc["method"] == "analytic-1q"


def test_magic_text_and_verbatim(capsys):
    code, out, _ = run(capsys, "magic", "--state", "T", "--paper-verbatim-t")
    assert code == 0
    assert "value: 0.342497" in out and "printed-formula t: 1.5529" in out


def test_magic_product_expression(capsys):
    code, out, _ = run(capsys, "magic", "--state", "T*T", "--tol", "1e-6", "--format", "json")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.685, abs=3e-3)


@pytest.mark.parametrize("spec", ["Q", "1,2", "2,0,0", "T**"])
def test_magic_malformed(capsys, spec):
    code, _, err = run(capsys, "magic", "--state", spec)
    assert code == 2 and "error" in err


def test_bad_tol_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["magic", "--state", "T", "--tol", "1"])
    assert exc.value.code == 2


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "enumerate", "--n", "1", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 3 and "I/O" in err


def test_enumerate_counts(capsys):
    for n, count in ((1, 6), (2, 60)):
        code, out, _ = run(capsys, "enumerate", "--n", str(n))
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and len(rows) == count + 1
        assert rows[0][:3] == ["label", "re0", "im0"]


def test_heatmap_and_determinism(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, out, _ = run(capsys, "heatmap", "--resolution", "8", "--summary", str(summary))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == HEATMAP_HEADER
    best = max(rows, key=lambda r: float(r["R"]))
    assert float(best["R"]) == pytest.approx(0.342497, abs=1e-6)
    checks = json.loads(summary.read_text())
    assert checks["schema_version"] == 1
    code, again, _ = run(capsys, "heatmap", "--resolution", "8")
    assert again == out


def test_heatmap_resolution_too_small(capsys):
    assert run(capsys, "heatmap", "--resolution", "4")[0] == 2


def test_rays_facet_centroid_is_straight(capsys):
    code, out, _ = run(capsys, "rays", "--face", "+++", "--resolution", "6")
    rows = [r for r in csv.DictReader(io.StringIO(out)) if r["ray"] == "0"]
    assert code == 0 and list(rows[0]) == RAYS_HEADER
    pts = np.array([[float(r[k]) for k in ("rho_x", "rho_y", "rho_z")] for r in rows])
    assert np.allclose(pts[:, 0], pts[:, 1]) and np.allclose(pts[:, 1], pts[:, 2])
    assert np.allclose(pts[-1], np.ones(3) / np.sqrt(3))


def test_rays_edge_midpoint_plane(capsys):
    code, out, _ = run(capsys, "rays", "--face", "1-3", "--c", "0", "--resolution", "4")
    rows = [r for r in csv.DictReader(io.StringIO(out)) if float(r["sigma_x"]) == 0.5]
    assert code == 0
    assert all(float(r["rho_y"]) == 0.0 for r in rows)
    assert float(rows[-1]["rho_x"]) == pytest.approx(1 / np.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("face", ["vertex", "s2", "1-4", "xyz"])
def test_rays_bad_face(capsys, face):
    assert run(capsys, "rays", "--face", face)[0] == 2


def test_witness_modes(capsys):
    code, out, _ = run(capsys, "witness", "--a", "0.5,0.3,0.2:0.5", "--b", "0.2,0.5,0.3:0.5")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "violation" and doc["trace_value"] < 0
    code, out, _ = run(capsys, "witness", "--a", "T", "--b", "T")
    assert json.loads(out)["verdict"] == "none-found"
    code, out, _ = run(capsys, "witness", "--a", "0.5,0,0.5:1:0.3", "--b", "0,0.5,0.5:1:-0.3",
                       "--resolution", "4")
    assert json.loads(out)["mode"] == "edge-edge-conjecture"
    assert run(capsys, "witness", "--a", "bogus", "--b", "T")[0] == 2


def test_angle(capsys):
    code, out, err = run(capsys, "angle", "--resolution", "10")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[0]["alpha"]) == pytest.approx(0.0, abs=1e-12)
    assert json.loads(err)["monotone_increasing"]
    assert run(capsys, "angle", "--resolution", "0")[0] == 2
