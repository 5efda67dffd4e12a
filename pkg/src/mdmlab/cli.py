"""Command-line entry point: ``mdm {gen,solve,verify,energy,steiner,plot}``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
Every command that writes files also writes ``<first output>.manifest.json``
with the command line, configuration and sha256 of inputs and outputs.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .energy import CompactSample, Coverage, classify_point, f_m, is_feasible
from .errors import DomainError, NotFoundError, UnsupportedError
from .geom import AngleTolerance
from .io import InstanceFile, RunManifest, dumps, generate_instance, sha256_file, write_text
from .network import Network
from .solver import SolverConfig, solve
from .steiner import steiner_tree_small
from .svg import render_svg
from .verifier import verify


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def threads() -> int:
    """Worker cap from MDM_THREADS (the library itself evaluates serially)."""
    try:
        return max(1, int(os.environ.get("MDM_THREADS", "1")))
    except ValueError:
        raise UsageError("MDM_THREADS must be an integer")


def _load_instance(path, r: float | None) -> CompactSample:
    try:
        inst = InstanceFile.from_json(Path(path).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read instance {path}: {exc}")
    return inst.compact(r)


def _load_network(path) -> Network:
    try:
        return Network.from_json(Path(path).read_text())
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read network {path}: {exc}")


def _manifest(argv, config: dict, seed, inputs, outputs) -> RunManifest:
    return RunManifest(
        list(argv), config, seed, __version__,
        {str(p): sha256_file(p) for p in inputs if p},
        {str(p): sha256_file(p) for p in outputs if p},
    )


def _write_manifest(argv, config, seed, inputs, outputs):
    outputs = [p for p in outputs if p]
    if not outputs:
        return
    m = _manifest(argv, config, seed, inputs, outputs)
    write_text(str(outputs[0]) + ".manifest.json", m.to_json())


def _network_json(net: Network) -> str:
    return dumps(net.to_dict())


# subcommands ----------------------------------------------------------------------


def cmd_gen(a, argv) -> int:
    params = {}
    if a.shape == "circle":
        params = {"R": a.R}
    elif a.shape == "polygon":
        params = {"sides": a.sides, "side": a.side}
    elif a.shape == "segment_pair":
        params = {"d": a.d}
    elif a.shape == "grid":
        params = {"nx": a.nx, "ny": a.ny, "spacing": a.spacing}
    if a.jitter:
        params["jitter"] = a.jitter
    n = a.n if a.shape in ("circle", "polygon") else None
    inst = generate_instance(a.shape, params, a.r, n, a.seed, explicit=not a.recipe)
    text = inst.to_json()
    if a.out:
        write_text(a.out, text)
        _write_manifest(argv, {"shape": a.shape, "params": params, "n": n, "r": a.r, "recipe": a.recipe},
                        a.seed, [], [a.out])
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(a, argv) -> int:
    M = _load_instance(a.input, a.r)
    mode = {"file": "user_network"}.get(a.init, a.init)
    start = None
    if mode == "user_network":
        if not a.init_network:
            raise UsageError("--init file needs --init-network <sigma.json>")
        start = _load_network(a.init_network)
    cfg = SolverConfig(seed=a.seed, max_iters=a.iters, init_mode=mode, resolution=a.resolution)
    res = solve(M, cfg, start)
    net = res.network
    text = _network_json(net)
    if a.out:
        write_text(a.out, text)
    else:
        sys.stdout.write(text)
    if a.log:
        write_text(a.log, "".join(m.to_json() + "\n" for m in res.moves))
    if a.svg:
        write_text(a.svg, render_svg(net, M, _classes(M, net)))
    config = cfg.to_dict() | {"r": M.r, "threads": threads()}
    _write_manifest(argv, config, a.seed, [a.input, a.init_network], [a.out, a.log, a.svg])
    summary = {"length": net.length, "energy": f_m(M, net), "feasible": is_feasible(M, net),
               "converged": res.converged, "iterations": res.iterations, "moves": len(res.moves)}
    sys.stderr.write(json.dumps(summary) + "\n")
    return 0


def _classes(M, net):
    cov = Coverage(M, net)
    return [classify_point(M, net, v, coverage=cov) for v in net.vertices]


def cmd_verify(a, argv) -> int:
    M = _load_instance(a.input, a.r)
    net = _load_network(a.sigma)
    rep = verify(net, M, angle_tol=AngleTolerance.degrees(a.angle_tol), slope_tol=a.slope_tol,
                 convexity=a.convexity, strict=a.strict)
    text = rep.to_json() + "\n"
    if a.report:
        write_text(a.report, text)
        _write_manifest(argv, {"angle_tol": a.angle_tol, "slope_tol": a.slope_tol, "strict": a.strict,
                               "convexity": a.convexity, "r": M.r}, None, [a.sigma, a.input], [a.report])
    else:
        sys.stdout.write(text)
    for c in rep.checks:
        flag = "PASS" if c.passed else ("FAIL" if c.enforced else "note")
        sys.stderr.write(f"{flag:4s} {c.name}\n")
    return 0 if rep.passed else 1


def cmd_energy(a, argv) -> int:
    M = _load_instance(a.input, a.r)
    net = _load_network(a.sigma)
    classes = _classes(M, net)
    rows = [{"vertex": i, "x": float(c.point[0]), "y": float(c.point[1]), "kind": c.kind.value,
             "corresponding": len(c.corresponding)} for i, c in enumerate(classes)]
    if a.format == "csv":
        buf = _io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = f"# f_m={f_m(M, net)!r} feasible={is_feasible(M, net)}\n" + buf.getvalue()
    else:
        text = dumps({"f_m": f_m(M, net), "feasible": is_feasible(M, net), "r": M.r, "points": rows})
    if a.out:
        write_text(a.out, text)
        _write_manifest(argv, {"format": a.format, "r": M.r}, None, [a.sigma, a.input], [a.out])
    else:
        sys.stdout.write(text)
    return 0


def _parse_points(text: str) -> np.ndarray:
    try:
        pts = [tuple(float(v) for v in p.split(",")) for p in text.split(";") if p.strip()]
        return np.array(pts, dtype=float).reshape(-1, 2)
    except ValueError as exc:
        raise UsageError(f"bad --points value: {exc}")


def cmd_steiner(a, argv) -> int:
    if bool(a.terminals) == bool(a.points):
        raise UsageError("give exactly one of --terminals <file.json> or --points 'x,y;x,y;...'")
    if a.terminals:
        data = json.loads(Path(a.terminals).read_text())
        pts = np.asarray(data["terminals"] if isinstance(data, dict) else data, dtype=float).reshape(-1, 2)
    else:
        pts = _parse_points(a.points)
    tree = steiner_tree_small(pts)
    text = dumps(tree.to_dict())
    if a.out:
        write_text(a.out, text)
    else:
        sys.stdout.write(text)
    if a.svg:
        net = Network.build(tree.points, np.array(tree.edges).reshape(-1, 2))
        write_text(a.svg, render_svg(net, CompactSample(pts, 1e-3 * net.scale)))
    _write_manifest(argv, {"terminals": pts.tolist()}, None, [a.terminals], [a.out, a.svg])
    return 0


def cmd_plot(a, argv) -> int:
    M = _load_instance(a.input, a.r)
    net = _load_network(a.sigma) if a.sigma else None
    classes = _classes(M, net) if net is not None else None
    write_text(a.svg, render_svg(net, M, classes))
    _write_manifest(argv, {"r": M.r}, None, [a.sigma, a.input], [a.svg])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdm", description="Maximal distance minimizer laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--shape", required=True, choices=["circle", "polygon", "segment_pair", "grid"])
    g.add_argument("--r", type=float, required=True)
    g.add_argument("--n", type=int, default=None, help="sample count (sampling density knob)")
    g.add_argument("--R", type=float, default=1.0, help="circle radius")
    g.add_argument("--sides", type=int, default=4)
    g.add_argument("--side", type=float, default=1.0)
    g.add_argument("--d", type=float, default=1.0, help="segment_pair distance")
    g.add_argument("--nx", type=int, default=3)
    g.add_argument("--ny", type=int, default=3)
    g.add_argument("--spacing", type=float, default=1.0)
    g.add_argument("--jitter", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--recipe", action="store_true", help="store the generator recipe instead of the points")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="search for a locally minimal covering network")
    s.add_argument("--input", required=True)
    s.add_argument("--r", type=float, default=None, help="override the instance radius")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--iters", type=int, default=200)
    s.add_argument("--init", choices=["mst_shrink", "star", "file"], default="mst_shrink")
    s.add_argument("--init-network", default=None)
    s.add_argument("--resolution", type=float, default=None, help="longest edge kept by the solver")
    s.add_argument("--out")
    s.add_argument("--log")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="grade a network against the regularity properties")
    v.add_argument("--sigma", required=True)
    v.add_argument("--input", required=True)
    v.add_argument("--r", type=float, default=None)
    v.add_argument("--report")
    v.add_argument("--strict", action="store_true", help="also fail on self-intersections")
    v.add_argument("--convexity", action="store_true", help="enable the energetic-arc convexity check")
    v.add_argument("--angle-tol", type=float, default=2.0, help="degrees")
    v.add_argument("--slope-tol", type=float, default=0.05)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("energy", help="energy, feasibility and per-vertex classification")
    e.add_argument("--sigma", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--r", type=float, default=None)
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("--out")
    e.set_defaults(func=cmd_energy)

    t = sub.add_parser("steiner", help="exact Steiner tree of 3 to 5 terminals")
    t.add_argument("--terminals")
    t.add_argument("--points")
    t.add_argument("--out")
    t.add_argument("--svg")
    t.set_defaults(func=cmd_steiner)

    pl = sub.add_parser("plot", help="draw an instance and optionally a network")
    pl.add_argument("--input", required=True)
    pl.add_argument("--sigma")
    pl.add_argument("--r", type=float, default=None)
    pl.add_argument("--svg", required=True)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        threads()
        a = build_parser().parse_args(argv)
        return a.func(a, argv)
    except UsageError as exc:
        sys.stderr.write(f"mdm: error: {exc}\n")
        return 2
    except (DomainError, NotFoundError, UnsupportedError) as exc:
        sys.stderr.write(f"mdm: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"mdm: I/O error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
