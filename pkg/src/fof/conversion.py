"""Mesh to coefficient-grid conversion.

The pipeline has three stages: rasterize every triangle into per-pixel
depth/orientation events, filter each pixel's event sequence with a
two-state discontinuity matcher, and integrate the resulting
inside-intervals into cosine coefficients in closed form.

For a single inside-interval (z0, z1) the coefficients are

    a_0 = z1 - z0
    a_n = (sin(t_n (z1+1)) - sin(t_n (z0+1))) / t_n,   t_n = n*pi/2,

summed over the pixel's intervals.  The n = 0 term uses the separate
closed form because t_0 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ENTER, EXIT, FofGrid, IntervalBuffer
from .errors import DomainError, PreconditionError
from .raster import raster_chunks

__all__ = [
    "MatchReport",
    "rasterize_events",
    "match_discontinuities",
    "match_symbols",
    "integrate_intervals",
    "mesh_to_fof",
    "MATCHER_STATES",
    "MATCHER_TRANSITIONS",
    "MATCHER_STOP",
]

# Events are chunked for the trigonometric integration stage to bound the
# size of the (events x terms) workspace.
_INTEGRATE_BUDGET = 2_000_000

# The discontinuity matcher.  States track whether the scan position is
# currently inside the solid; an event is emitted only when it toggles the
# state.  On the stop letter, a dangling final ENTER is dropped.  This
# table is the normative definition: the vectorized matcher below and the
# generated documentation are both checked against it.
MATCHER_STATES = ("outside", "inside")
MATCHER_STOP = "$"
MATCHER_TRANSITIONS = {
    ("outside", ENTER): ("inside", "emit"),
    ("outside", EXIT): ("outside", "drop"),
    ("inside", ENTER): ("inside", "drop"),
    ("inside", EXIT): ("outside", "emit"),
    ("outside", MATCHER_STOP): ("outside", "accept"),
    ("inside", MATCHER_STOP): ("outside", "drop last emitted"),
}


@dataclass
class MatchReport:
    """Observability counters for a conversion run."""

    pixels_total: int = 0
    pixels_modified: int = 0
    events_dropped: int = 0
    triangles_skipped: int = 0


def match_symbols(symbols):
    """Run the matcher on a plain ENTER/EXIT symbol sequence.

    Table-driven scalar reference used by tests and documentation; the
    buffer-level matcher is a vectorized equivalent.
    """
    state = "outside"
    out = []
    for s in symbols:
        s = int(s)
        if s not in (ENTER, EXIT):
            raise DomainError(f"unknown symbol {s!r}")
        state, action = MATCHER_TRANSITIONS[(state, s)]
        if action == "emit":
            out.append(s)
    if MATCHER_TRANSITIONS[(state, MATCHER_STOP)][1] != "accept":
        out.pop()  # dangling final ENTER
    return out


def rasterize_events(mesh, height, width):
    """Rasterize a mesh into per-pixel crossing events, sorted by depth.

    Each pixel center covered by a triangle's xy-projection receives one
    event whose depth is the barycentric-interpolated z (clamped to
    [-1, 1]) and whose orientation follows the sign of the triangle's
    geometric normal: n_z < 0 is ENTER, n_z > 0 is EXIT.  Events at equal
    depth sort ENTER before EXIT so coincident front/back pairs cancel.
    """
    buffer, _ = _rasterize(mesh, height, width)
    return buffer


def _rasterize(mesh, height, width):
    if height < 1 or width < 1:
        raise DomainError("raster resolution must be >= 1")
    pix_parts, z_parts, ori_parts = [], [], []
    skipped = 0
    for chunk in raster_chunks(mesh.vertices, mesh.triangles, height, width):
        skipped += chunk["skipped"]
        if len(chunk["pix"]):
            pix_parts.append(chunk["pix"])
            z_parts.append(chunk["z"])
            ori_parts.append(
                np.where(chunk["front"], np.uint8(ENTER), np.uint8(EXIT))
            )
    if pix_parts:
        pix = np.concatenate(pix_parts)
        z = np.concatenate(z_parts)
        ori = np.concatenate(ori_parts)
        order = np.lexsort((ori, z, pix))
        pix, z, ori = pix[order], z[order], ori[order]
        pix, z, ori = _cancel_coincident(pix, z, ori)
        pix, z, ori = _cancel_inverted(pix, z, ori)
    else:
        pix = np.empty(0, np.int64)
        z = np.empty(0, np.float64)
        ori = np.empty(0, np.uint8)
    counts = np.bincount(pix, minlength=height * width)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return IntervalBuffer(height, width, offsets, z, ori), skipped


def _cancel_coincident(pix, z, ori):
    """Cancel ENTER/EXIT pairs at identical depth on the same pixel.

    Such pairs come from rays grazing the surface exactly on a silhouette
    edge (both adjacent triangles claim the pixel); they bound an interval
    of zero length and contribute nothing to any coefficient.  Input must
    be sorted with ENTER before EXIT at equal depth.
    """
    n = len(pix)
    if n == 0:
        return pix, z, ori
    new_run = np.empty(n, dtype=bool)
    new_run[0] = True
    new_run[1:] = (pix[1:] != pix[:-1]) | (z[1:] != z[:-1])
    run_id = np.cumsum(new_run) - 1
    n_runs = int(run_id[-1]) + 1
    entering = ori == ENTER
    n_e = np.bincount(run_id, entering, n_runs).astype(np.int64)
    n_x = np.bincount(run_id, ~entering, n_runs).astype(np.int64)
    m = np.minimum(n_e, n_x)
    if not m.any():
        return pix, z, ori
    pos = np.arange(n) - np.flatnonzero(new_run)[run_id]
    keep = np.where(entering, pos < (n_e - m)[run_id], pos >= (n_e + m)[run_id])
    return pix[keep], z[keep], ori[keep]


# Inverted EXIT/ENTER pairs closer than this are rounding noise from rays
# crossing a fold exactly at a shared edge; genuine gaps are wider by many
# orders of magnitude at any usable raster resolution.
_INVERTED_PAIR_TOL = 1e-12


def _cancel_inverted(pix, z, ori):
    """Cancel adjacent EXIT-then-ENTER pairs separated by at most a few ulps.

    A ray grazing a front/back fold is claimed by both triangles with
    depths that agree only to rounding; when the exit lands first, the
    pair would otherwise masquerade as a phantom interval boundary.
    Adjacent candidates can never overlap (the pattern is X then E), so
    each pass cancels independently; iterate in case cancellation exposes
    new pairs.
    """
    while len(z) >= 2:
        adj = (
            (pix[1:] == pix[:-1])
            & (ori[:-1] == EXIT)
            & (ori[1:] == ENTER)
            & (z[1:] - z[:-1] <= _INVERTED_PAIR_TOL)
        )
        hits = np.flatnonzero(adj)
        if hits.size == 0:
            return pix, z, ori
        keep = np.ones(len(z), dtype=bool)
        keep[hits] = False
        keep[hits + 1] = False
        pix, z, ori = pix[keep], z[keep], ori[keep]
    return pix, z, ori


def _rebuild(buffer, keep, pix):
    counts = np.bincount(pix[keep], minlength=buffer.height * buffer.width)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return (
        IntervalBuffer(
            buffer.height,
            buffer.width,
            offsets,
            buffer.depths[keep],
            buffer.orientations[keep],
        ),
        pix[keep],
    )


def match_discontinuities(buffer):
    """Enforce alternating ENTER/EXIT sequences on every pixel.

    Equivalent to running :func:`match_symbols` on each pixel's sorted
    orientation string, then removing zero-length intervals (coincident
    ENTER/EXIT pairs) so depths come out strictly increasing.  Returns the
    filtered buffer and a :class:`MatchReport`.
    """
    if not buffer.is_sorted():
        raise PreconditionError("events must be sorted by depth within each pixel")
    n_events = buffer.n_events
    report = MatchReport(pixels_total=buffer.height * buffer.width)
    if n_events == 0:
        return buffer, report
    counts_in = buffer.counts()
    pix = buffer.pixel_ids()
    ori = buffer.orientations

    # Keep only run heads: the first event of a pixel and every event whose
    # orientation differs from its predecessor.
    same = np.empty(n_events, dtype=bool)
    same[0] = False
    same[1:] = ori[1:] == ori[:-1]
    same[buffer.offsets[:-1][counts_in > 0]] = False
    out, pix = _rebuild(buffer, ~same, pix)

    # Drop a leading EXIT and a dangling trailing ENTER (stop letter).
    counts = out.counts()
    live = counts > 0
    drop = np.zeros(out.n_events, dtype=bool)
    heads = out.offsets[:-1][live]
    tails = out.offsets[1:][live] - 1
    drop[heads[out.orientations[heads] == EXIT]] = True
    drop[tails[out.orientations[tails] == ENTER]] = True
    out, pix = _rebuild(out, ~drop, pix)

    # Remove zero-length intervals so depths are strictly increasing.
    if out.n_events:
        rel = np.arange(out.n_events) - np.repeat(out.offsets[:-1], out.counts())
        degenerate = np.zeros(out.n_events, dtype=bool)
        starts = (rel[:-1] % 2 == 0) & (out.depths[:-1] == out.depths[1:])
        degenerate[:-1] = starts
        degenerate[1:] |= starts
        if degenerate.any():
            out, pix = _rebuild(out, ~degenerate, pix)

    report.events_dropped = n_events - out.n_events
    report.pixels_modified = int(np.count_nonzero(counts_in != out.counts()))
    return out, report


def _sin_multiples(phase, terms):
    """Matrix S with S[n-1, :] = sin(n * phase) for n = 1 .. terms-1.

    Uses the three-term recurrence sin((n+1)t) = 2 cos(t) sin(nt) -
    sin((n-1)t), which is far cheaper than ``terms`` libm calls and
    accurate to a few ulps times ``terms``.  Row-major layout keeps the
    recurrence and the later per-pixel reductions on contiguous memory.
    """
    out = np.empty((terms - 1, len(phase)), dtype=np.float64)
    if terms <= 1:
        return out
    np.sin(phase, out=out[0])
    if terms > 2:
        twoc = 2.0 * np.cos(phase)
        np.multiply(twoc, out[0], out=out[1])
        for n in range(3, terms):
            np.multiply(twoc, out[n - 2], out=out[n - 1])
            out[n - 1] -= out[n - 3]
    return out


def _segment_sum(values, offsets):
    """Sum ``values`` over the CSR segments described by ``offsets``.

    Handles empty segments; works on (E,) or (E, K) arrays.
    """
    counts = np.diff(offsets)
    out = np.zeros((len(counts),) + values.shape[1:], dtype=values.dtype)
    live = counts > 0
    if values.shape[0] and live.any():
        out[live] = np.add.reduceat(values, offsets[:-1][live], axis=0)
    return out


def _integrate_signed(buffer, terms, signs):
    """Shared integration worker over pre-assigned event signs (+1 adds
    sin(t_n (z+1))/t_n to the pixel, -1 subtracts)."""
    n_pixels = buffer.height * buffer.width
    data = np.zeros((n_pixels, terms), dtype=np.float64)
    counts = buffer.counts()
    covered = np.flatnonzero(counts)
    if covered.size == 0:
        return data
    starts = buffer.offsets[:-1]
    data[covered, 0] = np.add.reduceat(signs * buffer.depths, starts[covered])
    if terms > 1:
        t_n = np.arange(1, terms, dtype=np.float64) * (np.pi / 2.0)
        phase = (buffer.depths + 1.0) * (np.pi / 2.0)
        cum = np.cumsum(counts[covered])
        budget = max(_INTEGRATE_BUDGET // terms, 1)
        k0 = 0
        while k0 < len(covered):
            k1 = int(np.searchsorted(cum, (cum[k0 - 1] if k0 else 0) + budget))
            k1 = min(max(k1, k0 + 1), len(covered))
            sel = covered[k0:k1]
            e0 = starts[sel[0]]
            e1 = buffer.offsets[sel[-1] + 1]
            sines = _sin_multiples(phase[e0:e1], terms)
            sines *= signs[e0:e1]
            seg = np.add.reduceat(sines, starts[sel] - e0, axis=1)
            seg /= t_n[:, None]
            data[sel, 1:] = seg.T
            k0 = k1
    return data


def integrate_intervals(buffer, terms):
    """Closed-form cosine coefficients of a matched interval buffer.

    Requires the alternation invariant (see :func:`match_discontinuities`);
    pixels with no events get all-zero coefficients.
    """
    if terms < 1:
        raise DomainError("terms must be >= 1")
    if buffer.n_events:
        signs = np.where(buffer.orientations == EXIT, 1.0, -1.0)
        data = _integrate_signed(buffer, terms, signs)
    else:
        data = np.zeros((buffer.height * buffer.width, terms), dtype=np.float64)
    return FofGrid(data.reshape(buffer.height, buffer.width, terms))


def _integrate_unmatched(buffer, terms):
    """Pair sorted events positionally and integrate, ignoring orientation.

    This is the non-robust baseline: consecutive events form intervals and
    a dangling final event is closed at z = +1 (which is what produces
    floating mass behind open surfaces).  Exposed only through the
    ``use_matcher=False`` ablation hook.
    """
    n_pixels = buffer.height * buffer.width
    if buffer.n_events == 0:
        return FofGrid(
            np.zeros((buffer.height, buffer.width, terms), dtype=np.float64)
        )
    counts = buffer.counts()
    rel = np.arange(buffer.n_events) - np.repeat(buffer.offsets[:-1], counts)
    signs = np.where(rel % 2 == 1, 1.0, -1.0)
    data = _integrate_signed(buffer, terms, signs)
    # Synthetic exit at z = +1 for odd-count pixels: all a_n terms vanish
    # there (sin(n*pi) = 0), only a_0 picks up the closing depth.
    data[:, 0] += (counts % 2) * 1.0
    return FofGrid(data.reshape(buffer.height, buffer.width, terms))


def mesh_to_fof(mesh, height, width, terms, use_matcher=True):
    """Convert a triangle mesh to an (H, W, N) coefficient grid.

    Returns the grid and a :class:`MatchReport`.  ``use_matcher=False``
    skips the discontinuity matcher (robustness ablation hook); watertight,
    consistently wound meshes produce identical grids either way.
    """
    buffer, skipped = _rasterize(mesh, height, width)
    if use_matcher:
        matched, report = match_discontinuities(buffer)
        fof = integrate_intervals(matched, terms)
    else:
        report = MatchReport(pixels_total=height * width)
        fof = _integrate_unmatched(buffer, terms)
    report.triangles_skipped = skipped
    return fof, report
