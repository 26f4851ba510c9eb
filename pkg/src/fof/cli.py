"""Command-line benchmark driver.

Subcommands cover mesh<->grid conversion, metric comparison, synthetic
mesh generation, and the three representation-level sweeps (term count,
resolution, coefficient noise) with CSV output.  Every command is
deterministic for fixed flags and seeds.  Exit codes: 0 success, 1
runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import shapes
from .conversion import mesh_to_fof
from .core import FofGrid, resample_grid
from .errors import FofError
from .extraction import fof_to_mesh
from .fileio import read_fof, read_obj, read_ply, write_fof, write_obj, write_ply
from .metrics import chamfer, p2s, psnr, ssim
from .render import encode_normal_map, normal_difference, render_normal_maps

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Invalid arguments detected after parsing; exits with code 2."""


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _parse_scale(text):
    """'1.8m' -> centimeters per normalized unit (the 2-unit cube spans
    the given height)."""
    if text is None:
        return 1.0
    t = text.strip().lower()
    if not t.endswith("m"):
        raise argparse.ArgumentTypeError("scale must look like '1.8m'")
    try:
        meters = float(t[:-1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scale {text!r}")
    return meters * 100.0 / 2.0


def _load_mesh(path):
    if not os.path.exists(path):
        raise UsageError(f"no such file: {path}")
    ext = os.path.splitext(path)[1].lower()
    if ext == ".obj":
        return read_obj(path)
    if ext == ".ply":
        return read_ply(path)
    raise UsageError(f"unknown mesh extension {ext!r} (use .obj or .ply)")


def _save_mesh(path, mesh):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".obj":
        write_obj(path, mesh)
    elif ext == ".ply":
        write_ply(path, mesh)
    else:
        raise UsageError(f"unknown mesh extension {ext!r} (use .obj or .ply)")


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _write_rows(path, header, rows):
    fh, close = _open_out(path)
    try:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    finally:
        if close:
            fh.close()


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _round_trip_metrics(mesh, grid, depth, repair, samples, seed, scale):
    recon = fof_to_mesh(grid, depth=depth, repair=repair)
    if recon.n_triangles == 0:
        return float("nan"), float("nan")
    cd = chamfer(recon, mesh, count=samples, seed=seed) * scale
    ps = p2s(recon, mesh, count=samples, seed=seed) * scale
    return cd, ps


def cmd_convert(args):
    mesh = _load_mesh(args.mesh)
    if args.terms < 1:
        raise UsageError("--terms must be >= 1")
    if args.height < 1 or args.width < 1:
        raise UsageError("--height/--width must be >= 1")
    grid, report = mesh_to_fof(
        mesh, args.height, args.width, args.terms, use_matcher=not args.no_matcher
    )
    write_fof(args.out, grid)
    print(
        f"pixels={report.pixels_total} modified={report.pixels_modified} "
        f"events_dropped={report.events_dropped} "
        f"triangles_skipped={report.triangles_skipped}",
        file=sys.stderr,
    )
    return 0


def cmd_extract(args):
    if not os.path.exists(args.fof):
        raise UsageError(f"no such file: {args.fof}")
    if not 0.0 < args.iso < 1.0:
        raise UsageError("--iso must lie strictly between 0 and 1")
    if args.depth < 2:
        raise UsageError("--depth must be >= 2")
    grid = read_fof(args.fof)
    mesh = fof_to_mesh(
        grid, depth=args.depth, iso=args.iso, repair=args.repair,
        smooth_iters=args.smooth_iters,
    )
    if mesh.n_triangles == 0:
        print("warning: empty iso-surface, writing an empty mesh", file=sys.stderr)
    _save_mesh(args.out, mesh)
    return 0


def cmd_compare(args):
    mesh_a = _load_mesh(args.mesh_a)
    mesh_b = _load_mesh(args.mesh_b)
    scale = _parse_scale(args.scale)
    res = args.render_res
    maps_a = render_normal_maps(mesh_a, res, res)
    maps_b = render_normal_maps(mesh_b, res, res)
    psnrs, ssims = [], []
    for ma, mb in zip(maps_a, maps_b):
        ea, eb = encode_normal_map(ma), encode_normal_map(mb)
        psnrs.append(psnr(ea, eb))
        ssims.append(ssim(ea, eb))
    result = {
        "chamfer": chamfer(mesh_a, mesh_b, count=args.samples, seed=args.seed) * scale,
        "p2s": p2s(mesh_a, mesh_b, count=args.samples, seed=args.seed) * scale,
        "normal_mse": normal_difference(maps_a, maps_b),
        "psnr": float(np.mean(psnrs)),
        "ssim": float(np.mean(ssims)),
    }
    fh, close = _open_out(args.out)
    try:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_nsweep(args):
    scale = _parse_scale(args.scale)
    if not args.terms_list:
        raise UsageError("--terms-list must not be empty")
    if min(args.terms_list) < 1:
        raise UsageError("term counts must be >= 1")
    res = args.res
    rows = []
    per_mesh = {}
    for path in args.meshes:
        mesh = _load_mesh(path)
        # Coefficients are independent per term, so converting once at the
        # largest count and slicing equals converting at each count.
        master, _ = mesh_to_fof(mesh, res, res, max(args.terms_list))
        per_mesh[path] = (mesh, master)
    for terms in args.terms_list:
        vals = []
        for path in args.meshes:
            mesh, master = per_mesh[path]
            grid = FofGrid(master.data[:, :, :terms])
            cd, ps = _round_trip_metrics(
                mesh, grid, res, args.repair, args.samples, args.seed, scale
            )
            rows.append((os.path.basename(path), terms, cd, ps))
            vals.append((cd, ps))
        if len(args.meshes) > 1:
            rows.append(
                ("mean", terms,
                 float(np.mean([v[0] for v in vals])),
                 float(np.mean([v[1] for v in vals])))
            )
    _write_rows(args.out, ("mesh", "terms", "chamfer", "p2s"), rows)
    return 0


def cmd_ressweep(args):
    scale = _parse_scale(args.scale)
    if not args.res_list:
        raise UsageError("--res-list must not be empty")
    if min(args.res_list) < 2:
        raise UsageError("resolutions must be >= 2")
    master_res = args.master_res or max(args.res_list)
    rows = []
    per_mesh = {}
    for path in args.meshes:
        mesh = _load_mesh(path)
        master, _ = mesh_to_fof(mesh, master_res, master_res, args.terms)
        per_mesh[path] = (mesh, master)
    for res in args.res_list:
        vals = []
        for path in args.meshes:
            mesh, master = per_mesh[path]
            grid = resample_grid(master, res, res)
            cd, ps = _round_trip_metrics(
                mesh, grid, res, args.repair, args.samples, args.seed, scale
            )
            rows.append((os.path.basename(path), res, cd, ps))
            vals.append((cd, ps))
        if len(args.meshes) > 1:
            rows.append(
                ("mean", res,
                 float(np.mean([v[0] for v in vals])),
                 float(np.mean([v[1] for v in vals])))
            )
    _write_rows(args.out, ("mesh", "res", "chamfer", "p2s"), rows)
    return 0


def cmd_noisesweep(args):
    scale = _parse_scale(args.scale)
    if not args.levels:
        raise UsageError("--levels must not be empty")
    if min(args.levels) < 0:
        raise UsageError("noise levels are percentages >= 0")
    res = args.res
    mesh = _load_mesh(args.mesh)
    master, _ = mesh_to_fof(mesh, res, res, args.terms)
    rows = []
    for level in args.levels:
        frac = level / 100.0
        cds, pss = [], []
        for seed in args.seeds:
            rng = np.random.default_rng(seed)
            eps = rng.standard_normal(master.data.shape)
            noisy = FofGrid(master.data * (1.0 + frac * eps))
            cd, ps = _round_trip_metrics(
                mesh, noisy, res, args.repair, args.samples, args.seed, scale
            )
            cds.append(cd)
            pss.append(ps)
        rows.append(
            (os.path.basename(args.mesh), level,
             float(np.median(cds)), float(np.median(pss)))
        )
    _write_rows(args.out, ("mesh", "level_pct", "chamfer", "p2s"), rows)
    return 0


def cmd_gen(args):
    if args.shape == "sphere":
        mesh = shapes.icosphere(args.radius, args.subdiv)
    elif args.shape == "open-sphere":
        mesh = shapes.open_sphere(args.radius, args.subdiv, args.drop_frac, args.seed)
    elif args.shape == "torus":
        mesh = shapes.torus(args.major, args.minor, args.seg_major, args.seg_minor)
    elif args.shape == "cube":
        mesh = shapes.box(args.size)
    elif args.shape == "capsule":
        mesh = shapes.capsule(args.radius, args.height, args.segments, args.rings)
    else:  # unreachable through argparse choices
        raise UsageError(f"unknown shape {args.shape!r}")
    _save_mesh(args.out, mesh)
    print(f"{args.shape}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles",
          file=sys.stderr)
    return 0


def cmd_docs(args):
    from .docgen import build_docs

    build_docs(args.outdir)
    print(f"documentation written to {args.outdir}", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fof",
        description="Fourier occupancy field conversions, metrics, and sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="rasterize a mesh into a coefficient grid")
    p.add_argument("mesh", help="input mesh (.obj or .ply)")
    p.add_argument("out", help="output .fof container path")
    p.add_argument("--height", type=int, default=256, help="grid rows (default 256)")
    p.add_argument("--width", type=int, default=256, help="grid columns (default 256)")
    p.add_argument("--terms", type=int, default=128, help="coefficients per pixel (default 128)")
    p.add_argument("--no-matcher", action="store_true",
                   help="disable the discontinuity matcher (robustness ablation)")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("extract", help="extract a mesh from a coefficient grid")
    p.add_argument("fof", help="input .fof container path")
    p.add_argument("out", help="output mesh (.obj or .ply)")
    p.add_argument("--depth", type=int, default=256, help="z samples (default 256)")
    p.add_argument("--iso", type=float, default=0.5, help="iso level in (0,1) (default 0.5)")
    p.add_argument("--repair", choices=("constraint", "smooth", "none"),
                   default="constraint", help="unreliable-vertex repair mode")
    p.add_argument("--smooth-iters", type=int, default=3,
                   help="smoothing rounds for --repair smooth (default 3)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compare", help="metric suite between two meshes (JSON)")
    p.add_argument("mesh_a", help="first mesh")
    p.add_argument("mesh_b", help="second mesh")
    p.add_argument("--samples", type=int, default=100000,
                   help="surface samples per side (default 100000)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--render-res", type=int, default=256,
                   help="normal-map resolution (default 256)")
    p.add_argument("--scale", default=None,
                   help="emit distances in cm for a given cube height, e.g. 1.8m")
    p.add_argument("--out", default="-", help="output path or - for stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("nsweep", help="round-trip error versus coefficient count")
    p.add_argument("meshes", nargs="+", help="input meshes")
    p.add_argument("--terms-list", type=_int_list, default=[8, 16, 32, 64, 128, 256],
                   help="comma-separated term counts (default 8,16,32,64,128,256)")
    p.add_argument("--res", type=int, default=256,
                   help="grid resolution and z samples (default 256)")
    p.add_argument("--repair", choices=("constraint", "smooth", "none"),
                   default="constraint", help="repair mode for extraction")
    p.add_argument("--samples", type=int, default=100000, help="chamfer samples")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--scale", default=None, help="cm conversion, e.g. 1.8m")
    p.add_argument("--out", default="-", help="CSV path or - for stdout")
    p.set_defaults(func=cmd_nsweep)

    p = sub.add_parser("ressweep",
                       help="round-trip error versus evaluation resolution "
                            "(one grid, resampled)")
    p.add_argument("meshes", nargs="+", help="input meshes")
    p.add_argument("--res-list", type=_int_list, default=[16, 32, 64, 128, 256, 512],
                   help="comma-separated resolutions (default 16,...,512)")
    p.add_argument("--terms", type=int, default=128, help="coefficient count (default 128)")
    p.add_argument("--master-res", type=int, default=None,
                   help="resolution of the one converted grid (default max of --res-list)")
    p.add_argument("--repair", choices=("constraint", "smooth", "none"),
                   default="constraint", help="repair mode for extraction")
    p.add_argument("--samples", type=int, default=100000, help="chamfer samples")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--scale", default=None, help="cm conversion, e.g. 1.8m")
    p.add_argument("--out", default="-", help="CSV path or - for stdout")
    p.set_defaults(func=cmd_ressweep)

    p = sub.add_parser("noisesweep", help="round-trip error versus coefficient noise")
    p.add_argument("mesh", help="input mesh")
    p.add_argument("--levels", type=_int_list, default=[0, 5, 10, 15, 20, 25, 30],
                   help="relative noise levels in percent (default 0,5,...,30)")
    p.add_argument("--seeds", type=_int_list, default=[0],
                   help="noise seeds; the median over seeds is reported")
    p.add_argument("--terms", type=int, default=128, help="coefficient count (default 128)")
    p.add_argument("--res", type=int, default=256,
                   help="grid resolution and z samples (default 256)")
    p.add_argument("--repair", choices=("constraint", "smooth", "none"),
                   default="constraint", help="repair mode for extraction")
    p.add_argument("--samples", type=int, default=100000, help="chamfer samples")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--scale", default=None, help="cm conversion, e.g. 1.8m")
    p.add_argument("--out", default="-", help="CSV path or - for stdout")
    p.set_defaults(func=cmd_noisesweep)

    p = sub.add_parser("gen", help="generate a synthetic test mesh")
    p.add_argument("shape", choices=("sphere", "torus", "cube", "capsule", "open-sphere"),
                   help="shape kind")
    p.add_argument("out", help="output mesh (.obj or .ply)")
    p.add_argument("--radius", type=float, default=0.6,
                   help="sphere/capsule radius (default 0.6)")
    p.add_argument("--subdiv", type=int, default=4,
                   help="icosphere subdivisions (default 4)")
    p.add_argument("--drop-frac", type=float, default=0.1,
                   help="open-sphere fraction of faces to delete (default 0.1)")
    p.add_argument("--seed", type=int, default=0, help="open-sphere deletion seed")
    p.add_argument("--major", type=float, default=0.45, help="torus major radius")
    p.add_argument("--minor", type=float, default=0.2, help="torus minor radius")
    p.add_argument("--seg-major", type=int, default=64, help="torus segments around the ring")
    p.add_argument("--seg-minor", type=int, default=48, help="torus segments around the tube")
    p.add_argument("--size", type=float, default=1.0, help="cube edge length")
    p.add_argument("--height", type=float, default=1.0, help="capsule cylinder height")
    p.add_argument("--segments", type=int, default=32, help="capsule radial segments")
    p.add_argument("--rings", type=int, default=8, help="capsule cap rings")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("docs", help="render the repository documentation")
    p.add_argument("outdir", help="output directory")
    p.set_defaults(func=cmd_docs)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FofError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
