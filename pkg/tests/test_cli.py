import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mdmlab.cli import main
from mdmlab.energy import CompactSample, classify_point
from mdmlab.errors import DomainError
from mdmlab.io import InstanceFile, RunManifest, generate_instance, generate_points
from mdmlab.network import Network
from mdmlab.svg import render_svg

SVG = "{http://www.w3.org/2000/svg}"


# generators and files ----------------------------------------------------------------


def test_circle_generator():
    P = generate_points("circle", {"R": 2.0}, 360)
    assert len(P) == 360
    assert np.hypot(*P.T) == pytest.approx(np.full(360, 2.0), rel=1e-15)


def test_segment_pair_generator():
    assert generate_points("segment_pair", {"d": 10.0}).tolist() == [[0.0, 0.0], [10.0, 0.0]]


def test_square_generator():
    P = generate_points("polygon", {"sides": 4, "side": 4.0}, 400)
    assert np.ptp(P, axis=0) == pytest.approx([4.0, 4.0])
    lo, hi = P.min(axis=0), P.max(axis=0)
    # 100 per side; each corner sits on two sides
    for on_side in (np.isclose(P[:, 1], lo[1]), np.isclose(P[:, 0], hi[0]),
                    np.isclose(P[:, 1], hi[1]), np.isclose(P[:, 0], lo[0])):
        assert on_side.sum() == 101


def test_generator_errors():
    with pytest.raises(DomainError):
        generate_points("blob", {})
    with pytest.raises(DomainError):
        generate_points("grid", {"nx": 2, "ny": 2}, 5)


def test_instance_round_trip_exact(rng):
    inst = InstanceFile(0.3, rng.normal(size=(7, 2)) / 3)
    back = InstanceFile.from_json(inst.to_json())
    assert np.array_equal(back.points, inst.points)
    assert back.r == inst.r


def test_recipe_instance_expands():
    a = generate_instance("circle", {"R": 2.0, "jitter": 0.01}, 0.3, 50, seed=4, explicit=False)
    b = generate_instance("circle", {"R": 2.0, "jitter": 0.01}, 0.3, 50, seed=4, explicit=True)
    assert np.array_equal(a.sample_points(), b.sample_points())
    assert "generator" in a.to_dict()


def test_manifest_hash_tracks_config():
    m1 = RunManifest(["solve"], {"seed": 1}, 1, "0.1.0")
    m2 = RunManifest(["solve"], {"seed": 2}, 2, "0.1.0")
    assert m1.config_hash != m2.config_hash
    assert RunManifest.from_dict(json.loads(m1.to_json())).config_hash == m1.config_hash


# svg ---------------------------------------------------------------------------


def _elements(text):
    root = ET.fromstring(text.encode())
    return [(el.tag.replace(SVG, ""), el.get("class")) for el in root]


def test_svg_two_point_counts():
    M = CompactSample([(0.0, 0.0), (10.0, 0.0)], 1.0)
    net = Network.polyline([(1, 0), (9, 0)])
    classes = [classify_point(M, net, v) for v in net.vertices]
    els = _elements(render_svg(net, M, classes))
    assert els.count(("path", "network")) == 1
    assert els.count(("circle", "sample")) == 2
    assert els.count(("circle", "witness")) == 2


def test_svg_single_vertex():
    M = CompactSample([(0.0, 0.0)], 1.0)
    els = _elements(render_svg(Network.point((0, 0)), M))
    assert ("circle", "network") in els


def test_svg_deterministic():
    M = CompactSample([(0.0, 0.0), (10.0, 0.0)], 1.0)
    net = Network.polyline([(1, 0), (9, 0)])
    assert render_svg(net, M) == render_svg(net, M)


# command line ---------------------------------------------------------------------


@pytest.fixture
def triangle_file(tmp_path):
    p = tmp_path / "tri.json"
    h = 3 * math.sqrt(3)
    p.write_text(InstanceFile(0.5, np.array([(0.0, 0.0), (6.0, 0.0), (3.0, h)])).to_json())
    return p


def test_gen_circle(tmp_path):
    out = tmp_path / "c.json"
    assert main(["gen", "--shape", "circle", "--R", "2", "--n", "360", "--r", "0.3", "--out", str(out)]) == 0
    inst = InstanceFile.from_json(out.read_text())
    assert len(inst.sample_points()) == 360 and inst.r == 0.3
    man = json.loads((tmp_path / "c.json.manifest.json").read_text())
    assert man["outputs"][str(out)]


def test_solve_then_verify(triangle_file, tmp_path, capsys):
    sigma = tmp_path / "sigma.json"
    log = tmp_path / "moves.jsonl"
    svg = tmp_path / "s.svg"
    assert main(["solve", "--input", str(triangle_file), "--out", str(sigma), "--log", str(log),
                 "--svg", str(svg), "--seed", "1"]) == 0
    summary = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert summary["feasible"]
    assert summary["length"] == pytest.approx(6 * math.sqrt(3) - 1.5, abs=0.1)
    assert all(json.loads(line)["name"] for line in log.read_text().splitlines())
    report = tmp_path / "rep.json"
    assert main(["verify", "--sigma", str(sigma), "--input", str(triangle_file), "--report", str(report)]) == 0
    assert json.loads(report.read_text())["passed"] is True
    assert main(["energy", "--sigma", str(sigma), "--input", str(triangle_file), "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("# f_m=")


def test_verify_failure_exit_1(triangle_file, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(Network.polyline([(0, 0), (6, 0)]).to_json())
    assert main(["verify", "--sigma", str(bad), "--input", str(triangle_file)]) == 1


def test_usage_errors(triangle_file, monkeypatch):
    assert main(["solve", "--bogus"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["solve", "--input", "/nonexistent.json"]) == 2
    assert main(["solve", "--input", str(triangle_file), "--init", "file"]) == 2
    assert main(["steiner"]) == 2
    assert main(["steiner", "--points", "0,0;1,0;2,0;3,0;4,0;5,1"]) == 2
    monkeypatch.setenv("MDM_THREADS", "many")
    assert main(["gen", "--shape", "circle", "--r", "1"]) == 2


def test_steiner_command(capsys):
    assert main(["steiner", "--points", "0,0;1,0;1,1;0,1"]) == 0
    tree = json.loads(capsys.readouterr().out)
    assert tree["length"] == pytest.approx(1 + math.sqrt(3), rel=1e-10)


def test_plot_command(triangle_file, tmp_path):
    svg = tmp_path / "p.svg"
    assert main(["plot", "--input", str(triangle_file), "--svg", str(svg)]) == 0
    ET.fromstring(svg.read_bytes())


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mdmlab", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
