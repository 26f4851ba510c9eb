"""Repository documentation, rendered deterministically from source.

The CLI reference is introspected from the argument parser and the
discontinuity-matcher table from its transition dictionary, so the docs
cannot drift from the implementation.  ``build_docs`` fails on broken
internal links.
"""

from __future__ import annotations

import argparse
import os
import re

from .cli import build_parser
from .conversion import MATCHER_STOP, MATCHER_TRANSITIONS
from .core import ENTER
from .fileio import FOF_HEADER_SIZE

__all__ = ["build_docs", "render_pages", "check_links"]


def _matcher_table():
    lines = [
        "| state | symbol | next state | action |",
        "|-------|--------|------------|--------|",
    ]
    for (state, symbol), (nxt, action) in MATCHER_TRANSITIONS.items():
        label = {0: "0 (enter)", 1: "1 (exit)", MATCHER_STOP: "$ (stop)"}[symbol]
        lines.append(f"| {state} | {label} | {nxt} | {action} |")
    return "\n".join(lines)


def _matcher_diagram():
    lines = ["```mermaid", "stateDiagram-v2", "    [*] --> outside"]
    for (state, symbol), (nxt, action) in MATCHER_TRANSITIONS.items():
        if symbol == MATCHER_STOP:
            continue
        label = "0" if symbol == ENTER else "1"
        lines.append(f"    {state} --> {nxt}: {label} / {action}")
    lines.append("    outside --> [*]: $")
    lines.append("    inside --> [*]: $ / drop last emitted")
    lines.append("```")
    return "\n".join(lines)


def _cli_reference():
    parser = build_parser()
    sub_actions = [
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ]
    out = ["# Command-line reference", ""]
    out.append("Exit codes: 0 success, 1 runtime failure, 2 usage error.")
    out.append("")
    for sub in sub_actions:
        for name, sp in sub.choices.items():
            help_text = next(
                (ca.help for ca in sub._choices_actions if ca.dest == name), ""
            )
            out.append(f"## `fof {name}`")
            out.append("")
            out.append(f"{help_text}")
            out.append("")
            out.append("| argument | default | description |")
            out.append("|----------|---------|-------------|")
            for action in sp._actions:
                if isinstance(action, argparse._HelpAction):
                    continue
                if action.option_strings:
                    label = ", ".join(f"`{s}`" for s in action.option_strings)
                else:
                    label = f"`{action.dest}`"
                default = "" if action.default in (None, argparse.SUPPRESS) else repr(action.default)
                out.append(f"| {label} | {default} | {action.help or ''} |")
            out.append("")
    return "\n".join(out)


def render_pages():
    """Return {filename: markdown} for every documentation page."""
    pages = {}

    pages["index.md"] = f"""# Fourier occupancy field toolkit

A triangle mesh is encoded as an H x W grid of cosine-series
coefficients of its per-pixel occupancy signal along the view axis, and
decoded back into a mesh.  The toolkit covers:

* exact closed-form conversion from meshes to coefficient grids
  ([conventions](conventions.md), [matcher](discontinuity-matcher.md)),
* occupancy reconstruction at any sampling resolution, mesh extraction
  with reliability-flagged marching cubes and Laplacian repair,
* geometric and visual metrics (chamfer, point-to-surface, rendered
  normal-map MSE, PSNR, SSIM),
* a benchmark CLI with reproducible sweeps
  ([experiments](experiments.md), [CLI reference](cli.md)),
* a binary container for grids ([container format](container-format.md)).

## Scope

This library implements the geometric representation and conversion
algorithms plus their benchmark harness.  Estimating coefficient grids
from camera images with a learned model, GPU acceleration, and live
capture pipelines are intentionally out of scope; the representation
layer here is what such systems build on.

## Per-pixel signal model

Occupancy along a view ray is 1 inside the solid, 0 outside, and 0.5 on
the surface.  With t_n = n*pi/2 the stored coefficients are

    a_0 = sum_i (z'_i - z_i)
    a_n = (1/t_n) * sum_i [ sin(t_n (z'_i + 1)) - sin(t_n (z_i + 1)) ]

over the ray's inside-intervals (z_i, z'_i), and reconstruction is

    f(z) = a_0 / 2 + sum_n a_n cos(t_n (z + 1)).

The cosine (even-extension) basis keeps the reconstruction free of
wrap-around overshoot at the volume boundary: every basis function has
zero slope at z = +-1.
"""

    pages["container-format.md"] = f"""# Coefficient-grid container format

Extension `.fof`, version 1.  All integers little-endian; the header is
{FOF_HEADER_SIZE} bytes:

| offset | size | field |
|--------|------|-------|
| 0 | 4 | magic `FOF1` |
| 4 | 2 | version, u16 = 1 |
| 6 | 1 | dtype, u8 (0 = float32) |
| 7 | 1 | reserved, u8 = 0 |
| 8 | 4 | H (rows), u32 |
| 12 | 4 | W (columns), u32 |
| 16 | 4 | N (coefficients per pixel), u32 |

The payload is `H * W * N` float32 values, little-endian, row-major
with the coefficient index fastest: value (y, x, n) sits at element
`(y * W + x) * N + n`.  In-memory grids are float64; writing rounds to
nearest-even.  Read -> write -> read is idempotent.

Readers must reject files whose magic, version, or dtype differ, and
report expected versus actual byte counts for truncated payloads.  The
reserved byte is zero in version 1 and is the designated place for
future dtype or compression flags.
"""

    pages["conventions.md"] = """# Coordinate and rasterization conventions

* Geometry is normalized into the cube [-1, 1]^3; `normalize_mesh`
  centers the bounding box and scales uniformly so the largest axis
  touches +-(1 - margin).
* The view direction is +z.  Grid row y increases in raster order
  (downward in a displayed image).
* Pixel (x_pix, y_pix) samples the continuous point
  x = -1 + 2 (x_pix + 0.5) / W, y = -1 + 2 (y_pix + 0.5) / H
  (pixel centers).
* Triangle orientation: counter-clockwise winding faces outward.  A
  triangle whose geometric normal has n_z < 0 faces the camera and
  produces an ENTER event; n_z > 0 produces EXIT.  Triangles with
  n_z = 0 contribute no crossing and are skipped.
* Events at equal depth on one pixel order ENTER before EXIT, so a
  coincident front/back pair cancels instead of corrupting the matcher
  state.  Exactly coincident enter/exit pairs (grazing contacts) are
  cancelled during rasterization.
* Fill rule: a pixel center exactly on a triangle edge belongs to
  exactly one of the two triangles sharing that edge.  For an edge
  vector e of a positively oriented projected triangle the boundary
  counts iff e_v > 0, or e_v = 0 and e_u < 0 (a top-left style rule).
  Edge functions are evaluated canonically per undirected edge so
  adjacent triangles always agree bitwise.
* Interpolated depths are clamped to [-1, 1].
* `resample_grid` reads the grid as a piecewise-constant coefficient
  field: source pixel i owns the half-open slab
  [-1 + 2i/W, -1 + 2(i+1)/W); boundary hits resolve to the
  higher-index pixel.  One converted grid can therefore drive
  extraction at any resolution (see [experiments](experiments.md)).
* Extraction samples z on `linspace(-1, 1, D)`, pads the volume with
  one layer of zeros on all six sides, and contours at iso 0.5 with the
  canonical marching cubes tables.  Vertices on z-parallel grid edges
  are flagged reliable and their z refined by bisection (40 halvings)
  of the per-pixel cosine polynomial; vertices from padding-adjacent
  edges are never flagged reliable.
"""

    pages["discontinuity-matcher.md"] = f"""# Discontinuity matcher

Rasterizing real-world meshes produces per-pixel event sequences that
may start with an exit, repeat orientations (duplicated or overlapping
faces), or end inside the solid (holes).  Integrating such sequences
directly produces floating mass behind the body.  Each pixel's events
are therefore sorted by depth, encoded as symbols (0 = enter, 1 = exit),
terminated with a stop letter `$`, and filtered by a two-state
automaton before integration.

## Transition table

Generated from the implementation (`fof.conversion.MATCHER_TRANSITIONS`);
`match_symbols` is the reference executor and the vectorized buffer
matcher is property-tested against it.

{_matcher_table()}

## State diagram

{_matcher_diagram()}

An event is emitted only when it toggles the inside/outside state; the
stop letter drops a dangling final enter.  Output sequences therefore
alternate enter/exit, begin with an enter, and end with an exit (or are
empty).  The matcher is idempotent, and for watertight, consistently
wound meshes it is a no-op.  After matching, coincident pairs bounding
zero-length intervals are removed so depths increase strictly.

Conversion additionally reports how many pixels were modified and how
many events were dropped, which is a useful watertightness diagnostic:
`fof convert` prints it to stderr.
"""

    pages["experiments.md"] = """# Experiment guide

All sweeps write CSV (stable header, fixed row order) and are
deterministic for fixed flags and seeds.  Distances are in normalized
cube units by default; pass `--scale 1.8m` to emit centimeters under a
1.8 m height normalization.  See the [CLI reference](cli.md) for every
flag.

Synthetic inputs stand in for scanned-body datasets, so the sweeps are
judged on trends (monotonicity, convergence ratios), not on absolute
values from any particular dataset.

## Term-count sweep

    fof gen sphere sphere.obj --radius 0.6 --subdiv 4
    fof nsweep sphere.obj --terms-list 8,16,32,64,128,256 --res 256 --out nsweep.csv

Chamfer error falls steeply and monotonically as the per-pixel
coefficient count grows (two orders of magnitude between 8 and 128
terms on body-scale geometry); past ~128 terms the raster resolution
dominates.  Because coefficients are independent per term, the sweep
converts once at the largest count and slices.

## Resolution sweep (sampling scalability)

    fof ressweep sphere.obj --res-list 16,32,64,128,256,512 --terms 128 --out ressweep.csv

One grid is converted at `--master-res` (default: the largest entry)
and re-evaluated at each resolution by piecewise-constant lookup; no
re-conversion happens.  Chamfer error roughly halves per resolution
doubling while the sampling error dominates.

## Noise sweep

    fof noisesweep sphere.obj --levels 0,5,10,15,20,25,30 --seeds 0,1,2 --out noise.csv

Each coefficient a is perturbed to a * (1 + eps), eps ~ N(0, level^2).
The reported chamfer/p2s are medians over `--seeds`.  Error stays
nearly flat through ~5% noise and grows smoothly after that, which is
what makes the representation usable as a regression target.

## Conversion robustness

    fof gen open-sphere holed.obj --radius 0.6 --subdiv 4 --drop-frac 0.1 --seed 0
    fof convert holed.obj holed.fof            # with matcher
    fof convert holed.obj holed-raw.fof --no-matcher

With the matcher, pixels behind holes lose at most their local chord;
without it, dangling enters extend to the far volume boundary and the
per-pixel thickness coefficient a_0 inflates (floating artifacts).

## Extraction repair

    fof extract grid.fof out.obj --repair constraint   # least squares
    fof extract grid.fof out.obj --repair smooth       # real-time fallback
    fof extract grid.fof out.obj --repair none         # flagged mesh as-is

`constraint` solves min ||(D - A) X||^2 over the unreliable vertices
(reliable ones stay bit-identical); `smooth` runs restricted uniform
Laplacian smoothing and lands within ~1.5x of the constraint solve's
chamfer at a fraction of the cost.

## Metric suite

    fof compare a.obj b.obj --samples 100000 --seed 0 --out metrics.json

Reports chamfer, one-sided point-to-surface, whole-image normal-map
MSE over four yaw views (0/90/180/270 degrees), and PSNR/SSIM of the
encoded normal maps.  Identical meshes give zeros, SSIM 1, and the
PSNR +Infinity sentinel.
"""

    pages["cli.md"] = _cli_reference()
    return pages


_LINK_RE = re.compile(r"\[[^\]]*\]\(([^)]+)\)")


def check_links(pages):
    """Verify that relative markdown links point at existing pages."""
    missing = []
    for name, text in pages.items():
        for target in _LINK_RE.findall(text):
            if target.startswith(("http://", "https://", "#")):
                continue
            base = target.split("#", 1)[0]
            if base and base not in pages:
                missing.append(f"{name}: broken link to {target}")
    return missing


def build_docs(outdir):
    """Render all pages into ``outdir``; raises on broken internal links."""
    pages = render_pages()
    missing = check_links(pages)
    if missing:
        raise RuntimeError("broken documentation links:\n" + "\n".join(missing))
    os.makedirs(outdir, exist_ok=True)
    for name, text in pages.items():
        with open(os.path.join(outdir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return sorted(pages)
