"""Command-line entry point: ``relmagic <subcommand>``.

Grid and polyline outputs are CSV, structured reports JSON. Every JSON
document carries ``schema_version``. Exit codes: 0 success, 2 usage,
3 I/O, 4 internal-consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys

import numpy as np

from . import __version__
from .bloch import (
    C_MAX,
    EDGES,
    FACETS,
    VERTICES,
    bloch_from_density,
    classify_boundary,
    density_from_bloch,
    edge_hyperplane,
    edge_point,
    facet_hyperplane,
)
from .family import (
    FACET_CENTROID,
    R_CENTROID,
    T_DIRECTION,
    angle_samples,
    facet_sweep_state,
    fit_angle_model,
    magic_bloch,
    rel_entropy_closed_form,
    t_max,
    t_max_printed,
)
from .optim import closest_stabilizer_1q, relative_entropy_of_magic
from .qmat import check_density, qubit_count, tensor
from .stab import enumerate_pure_stabilizers
from .witness import ConsistencyError, RayComponent, edge_edge_search, find_violation

SCHEMA_VERSION = 1
log = logging.getLogger("relmagic")


class UsageError(Exception):
    pass


SQ2, SQ3 = np.sqrt(2), np.sqrt(3)
NAMED_BLOCH = {
    "T": np.ones(3) / SQ3,
    "H": np.array([1.0, 1.0, 0.0]) / SQ2,
    "Hlike": np.array([1.0, 0.0, 1.0]) / SQ2,
}
PSI2Q = np.array([1, 1, 1, 1j]) / 2


def parse_bloch(text: str) -> np.ndarray:
    parts = [p for p in re.split(r"[,\s]+", text.strip().strip("()[]")) if p]
    try:
        x = np.array([float(p) for p in parts])
    except ValueError:
        raise UsageError(f"not a Bloch triple: {text!r}") from None
    if x.shape != (3,):
        raise UsageError(f"a Bloch vector needs three components: {text!r}")
    if np.linalg.norm(x) > 1 + 1e-12:
        raise UsageError(f"Bloch vector {text!r} is longer than 1")
    return x


def parse_state(spec: str) -> np.ndarray:
    """Density matrix for a named state, Bloch triple or tensor product of those."""
    factors = [f.strip() for f in re.split(r"⊗|\*|\bx\b|&", spec)]
    if not all(factors):
        raise UsageError(f"empty tensor factor in {spec!r}")
    mats = []
    for f in factors:
        if f == "psi2q":
            mats.append(np.outer(PSI2Q, PSI2Q.conj()))
        elif f in NAMED_BLOCH:
            mats.append(density_from_bloch(NAMED_BLOCH[f]))
        else:
            mats.append(density_from_bloch(parse_bloch(f)))
    rho = tensor(*mats)
    if qubit_count(rho.shape[0]) > 3:
        raise UsageError("at most three qubits are supported")
    return rho


COMPONENT_NAMES = {
    "T": (FACET_CENTROID, 0.0),
    "H": (np.array([0.5, 0.5, 0.0]), 0.0),
    "Hlike": (np.array([0.5, 0.0, 0.5]), 0.0),
}


def parse_component(spec: str) -> RayComponent:
    """``T``/``H``/``Hlike`` or ``x1,x2,x3[:t_frac[:c]]`` for a boundary sigma."""
    head, *rest = spec.split(":")
    if head in COMPONENT_NAMES:
        sigma, c = COMPONENT_NAMES[head]
    else:
        sigma, c = parse_bloch(head), 0.0
    try:
        frac = float(rest[0]) if rest else 1.0
        if len(rest) > 1:
            c = float(rest[1])
    except ValueError:
        raise UsageError(f"bad component spec {spec!r}") from None
    if not 0 < frac <= 1:
        raise UsageError("t fraction must lie in (0, 1]")
    try:
        return RayComponent.from_ray(sigma, t_frac=frac, c=c)
    except ValueError as exc:
        raise UsageError(f"component {spec!r}: {exc}") from None


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


def emit_json(doc: dict, path=None) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    fh, close = _open_out(path)
    try:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def emit_table(header, rows, path=None, fmt="csv", meta=None) -> None:
    if fmt == "json":
        emit_json({**(meta or {}), "columns": list(header), "rows": [list(r) for r in rows]}, path)
        return
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    finally:
        if close:
            fh.close()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _matrix_json(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def cmd_magic(args) -> int:
    rho = parse_state(args.state)
    n = qubit_count(rho.shape[0])
    doc = {"command": "magic", "state": args.state, "qubits": n}
    if n == 1:
        x = bloch_from_density(rho)
        value, x_sigma = closest_stabilizer_1q(x)
        doc.update(method="analytic-1q", value=value, closest_bloch=x_sigma.tolist(), gap=0.0)
        if args.paper_verbatim_t and value > 0:
            face = classify_boundary(x_sigma)
            if face.kind == "facet":
                hp = facet_hyperplane(face.id)
                doc.update(t_max=t_max(x_sigma, hp), t_max_printed=t_max_printed(x_sigma, hp))
    else:
        res = relative_entropy_of_magic(rho, args.tol)
        doc.update(
            method="frank-wolfe",
            value=res.value,
            gap=res.gap,
            iterations=res.iterations,
            closest_state=_matrix_json(res.sigma_star),
        )
    if args.format == "json" or args.out:
        emit_json(doc, args.out)
    else:
        print(f"value: {doc['value']:.6f} bits")
        print(f"method: {doc['method']}")
        print(f"gap: {doc['gap']:.3e}")
        if n == 1:
            print("closest stabilizer (Bloch): " + " ".join(f"{v:.6f}" for v in doc["closest_bloch"]))
        else:
            print(f"iterations: {doc['iterations']}")
        if "t_max_printed" in doc:
            print(f"t_max: {doc['t_max']:.6f}  printed-formula t: {doc['t_max_printed']:.6f}")
    return 0


HEATMAP_HEADER = ["kind", "face", "sigma_x", "sigma_y", "sigma_z", "c", "t_max", "rho_x", "rho_y", "rho_z", "R"]


def heatmap_rows(resolution: int) -> list:
    """Pure magic states over the (+++) spherical triangle via the reverse map."""
    rows = []
    hp = facet_hyperplane((1, 1, 1))
    points = [np.array([i, j, resolution - i - j], dtype=float) / resolution
              for i in range(1, resolution) for j in range(1, resolution - i)]
    if resolution % 3:
        # the centroid (T direction) is on the grid only when 3 divides the resolution
        points.insert(0, FACET_CENTROID.copy())
    for x in points:
        tm = t_max(x, hp)
        xr = magic_bloch(x, hp, tm)
        rows.append(["facet", "+++", *x, 0.0, tm, *xr, rel_entropy_closed_form(x, hp, tm)])
    cs = np.linspace(-C_MAX, 0.0, resolution // 2 + 1)
    for edge in [(1, 2), (1, 3), (2, 3)]:
        for i in range(1, resolution):
            x = edge_point(edge, i / resolution)
            for c in cs:
                ehp = edge_hyperplane(edge, c)
                tm = t_max(x, ehp)
                xr = magic_bloch(x, ehp, tm)
                rows.append(
                    ["edge", f"{edge[0]}-{edge[1]}", *x, float(c), tm, *xr, rel_entropy_closed_form(x, ehp, tm)]
                )
    return rows


def heatmap_checks(rows, resolution: int) -> dict:
    vals = np.array([r[-1] for r in rows])
    top = rows[int(np.argmax(vals))]
    x_top = np.array(top[7:10])

    # six-fold symmetry: permuting sigma's coordinates permutes the grid
    index = {}
    for r in rows:
        key = (r[0], tuple(int(round(v * resolution)) for v in r[2:5]), round(r[5], 12))
        index[key] = r[-1]
    sym = 0.0
    for (kind, ijk, c), v in index.items():
        for perm in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]:
            other = index.get((kind, tuple(ijk[p] for p in perm), c))
            if other is not None:
                sym = max(sym, abs(other - v))

    paths = {}
    s_grid = np.linspace(0.0, 1.0, resolution + 1)
    for vid in (1, 2, 3):
        values = []
        for s in s_grid:
            d = (1 - s) * T_DIRECTION + s * VERTICES[vid]
            values.append(closest_stabilizer_1q(d / np.linalg.norm(d))[0])
        diffs = np.diff(values)
        paths[f"T->s{vid}"] = {
            "values": [float(v) for v in values],
            "monotone_nonincreasing": bool(np.all(diffs <= 1e-9)),
        }

    angles = np.arccos(np.clip(np.array([r[7:10] for r in rows]) @ T_DIRECTION, -1, 1))
    bins = np.linspace(0, angles.max() + 1e-12, resolution + 1)
    spread = []
    for lo, hi in zip(bins[:-1], bins[1:]):
        sel = vals[(angles >= lo) & (angles < hi)]
        if sel.size > 1:
            spread.append({"angle_lo": float(lo), "angle_hi": float(hi), "spread": float(sel.max() - sel.min()),
                           "count": int(sel.size)})

    mid = [r for r in rows if r[0] == "edge" and r[1] == "1-3" and abs(r[2] - 0.5) < 1e-12 and r[5] == 0.0]
    return {
        "max_value": float(vals.max()),
        "max_direction": x_top.tolist(),
        "max_angle_from_T": float(np.arccos(np.clip(x_top @ T_DIRECTION, -1, 1))),
        "sixfold_symmetry_residual": sym,
        "paths_to_vertices": paths,
        "edge_midpoint_value": float(mid[0][-1]) if mid else None,
        "radial_spread_max": max((b["spread"] for b in spread), default=0.0),
        "radial_spread": spread,
    }


def cmd_heatmap(args) -> int:
    if args.resolution < 8:
        raise UsageError("heatmap needs --resolution >= 8")
    rows = heatmap_rows(args.resolution)
    emit_table(HEATMAP_HEADER, rows, args.out, args.format, {"command": "heatmap"})
    if args.summary:
        emit_json({"command": "heatmap", "resolution": args.resolution, **heatmap_checks(rows, args.resolution)},
                  args.summary)
    return 0


RAYS_HEADER = ["ray", "face", "sigma_x", "sigma_y", "sigma_z", "c", "t", "rho_x", "rho_y", "rho_z", "r_rho"]


def _face_spec(text: str):
    if text in ("facet", "edge"):
        return text, (1, 1, 1) if text == "facet" else (1, 3)
    if text == "vertex" or re.fullmatch(r"s?[1-6]", text):
        raise UsageError("vertices are pure states and never a closest stabilizer state")
    if re.fullmatch(r"[+-]{3}", text):
        return "facet", tuple(1 if ch == "+" else -1 for ch in text)
    m = re.fullmatch(r"s?([1-6])-s?([1-6])", text)
    if m:
        edge = tuple(sorted((int(m.group(1)), int(m.group(2)))))
        if edge not in EDGES:
            raise UsageError(f"{text} is not an edge of the octahedron")
        return "edge", edge
    raise UsageError(f"unknown face {text!r}")


def rays_rows(kind, face_id, resolution, cs, verbatim=False) -> list:
    rows = []
    ts = np.linspace(0.0, 1.0, resolution + 1)
    samples = []
    if kind == "facet":
        hp = facet_hyperplane(face_id)
        signs = np.array(face_id, dtype=float)
        n = max(resolution // 2, 3)
        for i in range(1, n):
            for j in range(1, n - i):
                samples.append((signs * np.array([i, j, n - i - j]) / n, hp, 0.0))
        samples.insert(0, (signs * FACET_CENTROID, hp, 0.0))
    else:
        n = max(resolution // 2, 2)
        for c in cs:
            hp = edge_hyperplane(face_id, c)
            for i in range(1, n):
                samples.append((edge_point(face_id, i / n), hp, c))
    label = "".join("+" if s > 0 else "-" for s in face_id) if kind == "facet" else f"{face_id[0]}-{face_id[1]}"
    for ray_id, (x, hp, c) in enumerate(samples):
        tm = t_max(x, hp)
        extra = [t_max_printed(x, hp)] if verbatim else []
        for f in ts:
            xr = magic_bloch(x, hp, f * tm)
            rows.append([ray_id, label, *x, float(c), f * tm, *xr, float(np.linalg.norm(xr)), *extra])
    return rows


def cmd_rays(args) -> int:
    kind, face_id = _face_spec(args.face)
    cs = args.c if args.c else [0.0, 1 / np.sqrt(8), 1 / np.sqrt(2)]
    for c in cs:
        if abs(c) > C_MAX + 1e-12:
            raise UsageError(f"|c| = {abs(c)} exceeds 1/sqrt(2)")
    if args.resolution < 2:
        raise UsageError("--resolution must be >= 2")
    rows = rays_rows(kind, face_id, args.resolution, cs, args.paper_verbatim_t)
    header = RAYS_HEADER + (["t_max_printed"] if args.paper_verbatim_t else [])
    emit_table(header, rows, args.out, args.format, {"command": "rays"})
    return 0


def cmd_witness(args) -> int:
    comps = [parse_component(s) for s in [args.a, args.b] + ([args.third] if args.third else [])]
    kinds = [classify_boundary(c.sigma).kind for c in comps]
    doc = {"command": "witness", "components": [a for a in [args.a, args.b, args.third] if a]}
    if len(comps) == 2 and kinds == ["edge", "edge"] and not any(c.commuting for c in comps):
        rep = edge_edge_search(comps[0], comps[1], args.resolution)
        doc.update(mode="edge-edge-conjecture", best_min_trace=rep.best_min_trace, best_c=list(rep.best_c),
                   cells=len(rep.grid), supports_conjecture=rep.supports_conjecture)
    else:
        rep = find_violation(comps, confirm=args.confirm)
        doc.update(mode="theorem" if rep.theorem_class else "exploratory", **rep.as_dict())
    emit_json(doc, args.out)
    return 0


def cmd_angle(args) -> int:
    hi = args.rmax
    if args.resolution < 1 or not R_CENTROID <= hi < 1:
        raise UsageError("empty sweep: need --resolution >= 1 and 1/sqrt(3) <= --rmax < 1")
    rs = np.linspace(R_CENTROID, hi, args.resolution + 1)
    samples = angle_samples(rs)
    rows = [[float(r), float(d), float(a), *facet_sweep_state(r)] for r, (d, a) in zip(rs, samples)]
    header = ["r_sigma", "distance_to_T", "alpha", "sigma_x", "sigma_y", "sigma_z"]
    emit_table(header, rows, args.out, args.format, {"command": "angle"})
    slope, intercept, resid = fit_angle_model(samples)
    fit = {"command": "angle-fit", "slope": slope, "intercept": intercept, "max_residual": resid,
           "monotone_increasing": bool(np.all(np.diff(samples[:, 1]) > 0))}
    if args.summary:
        emit_json(fit, args.summary)
    else:
        print(json.dumps(fit), file=sys.stderr)
    return 0


def cmd_enumerate(args) -> int:
    states = enumerate_pure_stabilizers(args.n)
    dim = 2**args.n
    header = ["label"] + [f"{p}{k}" for k in range(dim) for p in ("re", "im")]
    rows = [[s.label] + [float(v) for z in s.vector for v in (z.real, z.imag)] for s in states]
    emit_table(header, rows, args.out, args.format, {"command": "enumerate", "n": args.n, "count": len(states)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, default=1e-8, help="Frank-Wolfe gap tolerance in bits")
    common.add_argument("--seed", type=int, default=0, help="recorded for reproducibility")
    common.add_argument("--resolution", type=int, default=24)
    common.add_argument("--paper-verbatim-t", action="store_true",
                        help="also report t from the alternative closed-form expression")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="relmagic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("magic", parents=[common], help="relative entropy of magic of a state")
    m.add_argument("--state", required=True, help="T, H, Hlike, psi2q, 'x,y,z', or products like T*T")
    m.set_defaults(func=cmd_magic, format=None)

    h = sub.add_parser("heatmap", parents=[common], help="entropy over the (+++) spherical triangle")
    h.add_argument("--summary", default=None, help="write the symmetry/monotonicity report (json) here")
    h.set_defaults(func=cmd_heatmap)

    r = sub.add_parser("rays", parents=[common], help="polylines x_rho(t) per sampled sigma")
    r.add_argument("--face", default="facet", help="facet | edge | +++ | 1-3 ...")
    r.add_argument("--c", type=float, nargs="+", default=None, help="edge hyperplane parameters")
    r.set_defaults(func=cmd_rays)

    w = sub.add_parser("witness", parents=[common], help="nonadditivity witness for a product")
    w.add_argument("--a", required=True, help="T | H | Hlike | x,y,z[:t_frac[:c]]")
    w.add_argument("--b", required=True)
    w.add_argument("--third", default=None)
    w.add_argument("--confirm", action="store_true", help="run the optimiser on the product")
    w.set_defaults(func=cmd_witness)

    a = sub.add_parser("angle", parents=[common], help="inclination angle vs distance to T")
    a.add_argument("--rmax", type=float, default=0.9)
    a.add_argument("--summary", default=None)
    a.set_defaults(func=cmd_angle)

    e = sub.add_parser("enumerate", parents=[common], help="list pure stabilizer states")
    e.add_argument("--n", type=int, choices=(1, 2, 3), default=1)
    e.set_defaults(func=cmd_enumerate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if not 1e-10 <= args.tol <= 1e-3:
        parser.error("--tol must lie in [1e-10, 1e-3]")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"relmagic: error: {exc}", file=sys.stderr)
        return 2
    except IOError as exc:
        print(f"relmagic: I/O error: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"relmagic: internal consistency failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
