"""Orthographic triangle rasterization over pixel centers.

Triangles are projected onto the xy-plane (view direction +z) and tested
against pixel centers with exact edge functions.  Pixels whose center lies
exactly on a triangle edge are resolved with a top-left style rule so that
two triangles sharing an edge never both claim the pixel: for an edge
vector e of a positively oriented triangle, the boundary belongs to the
triangle iff e_v > 0, or e_v == 0 and e_u < 0.  The rule accepts exactly
one of e and -e, which is what makes shared edges unambiguous.
"""

from __future__ import annotations

import numpy as np

__all__ = ["raster_chunks"]

# Upper bound on candidate (triangle, pixel) pairs held in memory at once.
_CHUNK_BUDGET = 4_000_000


def _to_pixel_units(xy, height, width):
    """Map [-1, 1]^2 coordinates to pixel units where centers are integers."""
    u = (xy[:, 0] + 1.0) * (width / 2.0) - 0.5
    v = (xy[:, 1] + 1.0) * (height / 2.0) - 0.5
    return u, v


def _boundary_accept(eu, ev):
    return (ev > 0.0) | ((ev == 0.0) & (eu < 0.0))


def raster_chunks(vertices, triangles, height, width):
    """Yield covered-pixel chunks for a triangle soup.

    Yields dicts with, per accepted (triangle, pixel-center) pair:

    * ``pix``: linear pixel index (v * width + u)
    * ``z``: barycentric-interpolated depth, clamped to [-1, 1]
    * ``front``: True where the geometric normal has n_z < 0
      (front-facing under the +z view direction)
    * ``tri``: index into ``triangles``
    * ``wa, wb, wc``: normalized barycentric weights of the pair, in the
      original corner order of the triangle

    The final yield also reports ``skipped``: the number of triangles with
    zero projected area (degenerate or silhouette-parallel), which
    contribute no crossing along +z and are ignored.
    """
    tris = np.asarray(triangles, dtype=np.int64)
    n_tri = len(tris)
    if n_tri == 0 or len(vertices) == 0:
        yield {
            "pix": np.empty(0, np.int64),
            "z": np.empty(0, np.float64),
            "front": np.empty(0, bool),
            "tri": np.empty(0, np.int64),
            "wa": np.empty(0, np.float64),
            "wb": np.empty(0, np.float64),
            "wc": np.empty(0, np.float64),
            "skipped": 0,
        }
        return

    u, v = _to_pixel_units(vertices, height, width)
    zs = vertices[:, 2]
    ua, ub, uc = u[tris[:, 0]], u[tris[:, 1]], u[tris[:, 2]]
    va, vb, vc = v[tris[:, 0]], v[tris[:, 1]], v[tris[:, 2]]

    # Twice the signed projected area; its sign equals the sign of n_z.
    area2 = (ub - ua) * (vc - va) - (vb - va) * (uc - ua)
    skipped = int(np.count_nonzero(area2 == 0.0))
    front = area2 < 0.0

    iu0 = np.maximum(np.ceil(np.minimum(np.minimum(ua, ub), uc)), 0.0)
    iu1 = np.minimum(np.floor(np.maximum(np.maximum(ua, ub), uc)), width - 1.0)
    iv0 = np.maximum(np.ceil(np.minimum(np.minimum(va, vb), vc)), 0.0)
    iv1 = np.minimum(np.floor(np.maximum(np.maximum(va, vb), vc)), height - 1.0)
    nu = np.maximum(iu1 - iu0 + 1.0, 0.0).astype(np.int64)
    nv = np.maximum(iv1 - iv0 + 1.0, 0.0).astype(np.int64)
    counts = nu * nv
    counts[area2 == 0.0] = 0

    live = np.flatnonzero(counts)
    if live.size == 0:
        yield {
            "pix": np.empty(0, np.int64),
            "z": np.empty(0, np.float64),
            "front": np.empty(0, bool),
            "tri": np.empty(0, np.int64),
            "wa": np.empty(0, np.float64),
            "wb": np.empty(0, np.float64),
            "wc": np.empty(0, np.float64),
            "skipped": skipped,
        }
        return

    # Split live triangles into chunks bounded by candidate count.
    cum = np.cumsum(counts[live])
    boundaries = [0]
    budget = _CHUNK_BUDGET
    for i, c in enumerate(cum):
        if c > budget:
            boundaries.append(i + 1)
            budget = c + _CHUNK_BUDGET
    if boundaries[-1] != len(live):
        boundaries.append(len(live))

    for chunk_no in range(len(boundaries) - 1):
        sel = live[boundaries[chunk_no] : boundaries[chunk_no + 1]]
        cnt = counts[sel]
        total = int(cnt.sum())
        rep = np.repeat(np.arange(len(sel)), cnt)
        starts = np.concatenate(([0], np.cumsum(cnt)))
        k = np.arange(total) - starts[rep]
        nu_r = nu[sel][rep]
        cu = iu0[sel][rep] + (k % nu_r)
        cv = iv0[sel][rep] + (k // nu_r)

        # Corners reordered so the projected area is positive; zb/zc and the
        # original-order weights are mapped back through the same swap.
        swap = area2[sel] < 0.0
        pa_u, pa_v = ua[sel], va[sel]
        pb_u = np.where(swap, uc[sel], ub[sel])
        pb_v = np.where(swap, vc[sel], vb[sel])
        pc_u = np.where(swap, ub[sel], uc[sel])
        pc_v = np.where(swap, vb[sel], vc[sel])
        abs_area = np.abs(area2[sel])

        # Edge functions are evaluated canonically per undirected edge
        # (lexicographically smaller endpoint as base, sign applied per
        # triangle), so the two triangles sharing an edge always see
        # bit-consistent values and shared-edge decisions never disagree.
        def edge_fn(p1u, p1v, p2u, p2v):
            flip = (p1u > p2u) | ((p1u == p2u) & (p1v > p2v))
            bu = np.where(flip, p2u, p1u)
            bv = np.where(flip, p2v, p1v)
            du = np.where(flip, p1u, p2u) - bu
            dv = np.where(flip, p1v, p2v) - bv
            sgn = np.where(flip, -1.0, 1.0)
            w = sgn[rep] * (du[rep] * (cv - bv[rep]) - dv[rep] * (cu - bu[rep]))
            return w

        acc_a = _boundary_accept(pc_u - pb_u, pc_v - pb_v)
        acc_b = _boundary_accept(pa_u - pc_u, pa_v - pc_v)
        acc_c = _boundary_accept(pb_u - pa_u, pb_v - pa_v)

        wa = edge_fn(pb_u, pb_v, pc_u, pc_v)
        wb = edge_fn(pc_u, pc_v, pa_u, pa_v)
        wc = edge_fn(pa_u, pa_v, pb_u, pb_v)
        inside = (
            ((wa > 0.0) | ((wa == 0.0) & acc_a[rep]))
            & ((wb > 0.0) | ((wb == 0.0) & acc_b[rep]))
            & ((wc > 0.0) | ((wc == 0.0) & acc_c[rep]))
        )

        idx = np.flatnonzero(inside)
        rep_i = rep[idx]
        tri_local = sel[rep_i]
        denom = abs_area[rep_i]
        wa_n = wa[idx] / denom
        wb_n = wb[idx] / denom
        wc_n = wc[idx] / denom

        za = zs[tris[tri_local, 0]]
        zb = np.where(swap[rep_i], zs[tris[tri_local, 2]], zs[tris[tri_local, 1]])
        zc = np.where(swap[rep_i], zs[tris[tri_local, 1]], zs[tris[tri_local, 2]])
        z = wa_n * za + wb_n * zb + wc_n * zc

        # Pixel centers exactly on an edge or vertex get a canonical depth
        # that is bit-identical no matter which triangle claims them, so
        # grazing front/back pairs cancel instead of leaving ulp-sized
        # phantom intervals.
        zw = np.stack([wa[idx] == 0.0, wb[idx] == 0.0, wc[idx] == 0.0], axis=1)
        n_zero = zw.sum(axis=1)
        on_edge = np.flatnonzero(n_zero == 1)
        if on_edge.size:
            cu_c = np.stack([pa_u[rep_i], pb_u[rep_i], pc_u[rep_i]], axis=1)[on_edge]
            cv_c = np.stack([pa_v[rep_i], pb_v[rep_i], pc_v[rep_i]], axis=1)[on_edge]
            zz_c = np.stack([za, zb, zc], axis=1)[on_edge]
            opp = np.argmax(zw[on_edge], axis=1)
            rows = np.arange(len(on_edge))
            i1, i2 = (opp + 1) % 3, (opp + 2) % 3
            pu, qu = cu_c[rows, i1], cu_c[rows, i2]
            pv, qv = cv_c[rows, i1], cv_c[rows, i2]
            pz, qz = zz_c[rows, i1], zz_c[rows, i2]
            flip = (pu > qu) | ((pu == qu) & (pv > qv))
            pu, qu = np.where(flip, qu, pu), np.where(flip, pu, qu)
            pv, qv = np.where(flip, qv, pv), np.where(flip, pv, qv)
            pz, qz = np.where(flip, qz, pz), np.where(flip, pz, qz)
            xu, xv = cu[idx][on_edge], cv[idx][on_edge]
            t = ((xu - pu) * (qu - pu) + (xv - pv) * (qv - pv)) / (
                (qu - pu) ** 2 + (qv - pv) ** 2
            )
            z[on_edge] = pz + t * (qz - pz)
        on_vertex = np.flatnonzero(n_zero == 2)
        if on_vertex.size:
            hit = np.argmin(zw[on_vertex], axis=1)
            zz_c = np.stack([za, zb, zc], axis=1)[on_vertex]
            z[on_vertex] = zz_c[np.arange(len(on_vertex)), hit]
        z = np.clip(z, -1.0, 1.0)

        pix = (cv[idx] * width + cu[idx]).astype(np.int64)
        # Map swapped weights back to original corner order (b <-> c).
        wb_out = np.where(swap[rep_i], wc_n, wb_n)
        wc_out = np.where(swap[rep_i], wb_n, wc_n)
        yield {
            "pix": pix,
            "z": z,
            "front": front[tri_local],
            "tri": tri_local,
            "wa": wa_n,
            "wb": wb_out,
            "wc": wc_out,
            "skipped": skipped if chunk_no == len(boundaries) - 2 else 0,
        }
