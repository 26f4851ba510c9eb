"""Independent reference implementations used to validate the package.

Everything here is deliberately written against the mathematical
definitions (quadrature, rewrite systems, parity ray casting), not
against the production code paths it checks.
"""

from __future__ import annotations

import math

import numpy as np

ENTER, EXIT = 0, 1


# ---------------------------------------------------------------------------
# Adaptive Simpson quadrature of interval-indicator cosine moments
# ---------------------------------------------------------------------------

def _simpson(f, a, fa, b, fb, m, fm):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a, b, tol, max_depth=60):
    """Textbook recursive adaptive Simpson with Richardson correction."""

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = _simpson(f, a, fa, m, fm, lm, flm)
        right = _simpson(f, m, fm, b, fb, rm, frm)
        if depth >= max_depth or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return recurse(a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1) + recurse(
            m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1
        )

    m = 0.5 * (a + b)
    fa, fb, fm = f(a), f(b), f(m)
    whole = _simpson(f, a, fa, b, fb, m, fm)
    return recurse(a, fa, b, fb, m, fm, whole, tol, 0)


def adaptive_simpson_cos_batch(t, a, b, tol=1e-12, max_rounds=64):
    """Integrals of cos(t_k (z + 1)) over [a_k, b_k], all panels at once.

    A vectorized panel queue: every round bisects the unconverged panels,
    applying the same accept rule and tolerance halving as the scalar
    recursion.  Returns one value per input panel.
    """
    t = np.asarray(t, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)

    def f(t_, z):
        return np.cos(t_ * (z + 1.0))

    owner = np.arange(len(t))
    result = np.zeros(len(t))
    pa, pb, pt = a.copy(), b.copy(), t.copy()
    fa, fb = f(pt, pa), f(pt, pb)
    pm = 0.5 * (pa + pb)
    fm = f(pt, pm)
    whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb)
    ptol = np.full(len(t), tol)

    for _ in range(max_rounds):
        if len(owner) == 0:
            break
        lm = 0.5 * (pa + pm)
        rm = 0.5 * (pm + pb)
        flm = f(pt, lm)
        frm = f(pt, rm)
        left = (pm - pa) / 6.0 * (fa + 4.0 * flm + fm)
        right = (pb - pm) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        done = np.abs(delta) <= 15.0 * ptol
        np.add.at(result, owner[done], (left + right + delta / 15.0)[done])
        live = ~done
        owner = np.concatenate([owner[live], owner[live]])
        pt = np.concatenate([pt[live], pt[live]])
        pa, pb, pm, fa, fb, fm, whole, ptol = (
            np.concatenate([pa[live], pm[live]]),
            np.concatenate([pm[live], pb[live]]),
            np.concatenate([lm[live], rm[live]]),
            np.concatenate([fa[live], fm[live]]),
            np.concatenate([fm[live], fb[live]]),
            np.concatenate([flm[live], frm[live]]),
            np.concatenate([left[live], right[live]]),
            np.concatenate([ptol[live] / 2.0, ptol[live] / 2.0]),
        )
    else:
        raise RuntimeError("quadrature did not converge within the round budget")
    return result


def quadrature_coefficients(intervals, terms, tol=1e-12):
    """Cosine coefficients of an interval-union indicator, by quadrature."""
    out = np.zeros(terms)
    for z0, z1 in intervals:
        out[0] += z1 - z0
    if terms > 1 and intervals:
        t = np.arange(1, terms) * (math.pi / 2.0)
        for z0, z1 in intervals:
            out[1:] += adaptive_simpson_cos_batch(
                t, np.full(terms - 1, z0), np.full(terms - 1, z1), tol
            )
    return out


# ---------------------------------------------------------------------------
# Event-sequence matcher as a rewrite system
# ---------------------------------------------------------------------------

def reference_match(symbols):
    """Fixpoint rewrite: drop leading exits, collapse equal-neighbor runs
    to their first element, then drop a trailing enter."""
    s = [int(v) for v in symbols]
    changed = True
    while changed:
        changed = False
        while s and s[0] == EXIT:
            s.pop(0)
            changed = True
        for i in range(len(s) - 1):
            if s[i] == s[i + 1]:
                del s[i + 1]
                changed = True
                break
    if s and s[-1] == ENTER:
        s.pop()
    return s


def is_alternating(symbols):
    s = list(symbols)
    if not s:
        return True
    if s[0] != ENTER or s[-1] != EXIT:
        return False
    return all(s[i] != s[i + 1] for i in range(len(s) - 1))


# ---------------------------------------------------------------------------
# Analytic sphere helpers
# ---------------------------------------------------------------------------

def sphere_chord(radius, x, y):
    """Inside-interval of the ray through (x, y), or None outside the disk."""
    rho2 = x * x + y * y
    if rho2 >= radius * radius:
        return None
    h = math.sqrt(radius * radius - rho2)
    return (-h, h)


def sphere_coefficients(radius, x, y, terms):
    """Exact cosine coefficients of a sphere's occupancy at one pixel."""
    chord = sphere_chord(radius, x, y)
    out = np.zeros(terms)
    if chord is None:
        return out
    z0, z1 = chord
    out[0] = z1 - z0
    if terms > 1:
        t = np.arange(1, terms) * (math.pi / 2.0)
        out[1:] = (np.sin(t * (z1 + 1.0)) - np.sin(t * (z0 + 1.0))) / t
    return out


# ---------------------------------------------------------------------------
# Brute-force parity voxelization (floor oracle for the round-trip gate)
# ---------------------------------------------------------------------------

def voxelize_parity(mesh, resolution, z_samples):
    """Occupancy samples by counting ray/triangle crossings per pixel.

    Pixel-center rays run along +z; a crossing is counted when the ray
    hits a triangle's strict interior (rays are nudged by a tiny
    irrational offset to dodge shared-edge degeneracies).  A sample is
    inside when the number of crossings behind it is odd.  Returns
    (resolution, resolution, len(z_samples)) float64 of 0.0 / 1.0.
    """
    xs = -1.0 + 2.0 * (np.arange(resolution) + 0.5) / resolution + 1.31e-9
    ys = -1.0 + 2.0 * (np.arange(resolution) + 0.5) / resolution + 2.71e-9
    corners = mesh.corners()
    crossings = [[[] for _ in range(resolution)] for _ in range(resolution)]
    for tri in corners:
        (x0, y0, z0), (x1, y1, z1), (x2, y2, z2) = tri
        den = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if den == 0.0:
            continue
        ix = np.flatnonzero((xs > min(x0, x1, x2)) & (xs < max(x0, x1, x2)))
        iy = np.flatnonzero((ys > min(y0, y1, y2)) & (ys < max(y0, y1, y2)))
        if not len(ix) or not len(iy):
            continue
        gx, gy = np.meshgrid(xs[ix], ys[iy], indexing="xy")
        w0 = ((x1 - gx) * (y2 - gy) - (y1 - gy) * (x2 - gx)) / den
        w1 = ((x2 - gx) * (y0 - gy) - (y2 - gy) * (x0 - gx)) / den
        w2 = 1.0 - w0 - w1
        hit = (w0 > 0) & (w1 > 0) & (w2 > 0)
        if not hit.any():
            continue
        zc = w0 * z0 + w1 * z1 + w2 * z2
        hy, hx = np.nonzero(hit)
        for yy, xx in zip(hy, hx):
            crossings[iy[yy]][ix[xx]].append(zc[yy, xx])
    volume = np.zeros((resolution, resolution, len(z_samples)))
    zg = np.asarray(z_samples)
    for yy in range(resolution):
        for xx in range(resolution):
            cl = crossings[yy][xx]
            if not cl:
                continue
            cl = np.sort(np.asarray(cl))
            behind = np.searchsorted(cl, zg, side="right")
            volume[yy, xx] = (behind % 2).astype(np.float64)
    return volume


# ---------------------------------------------------------------------------
# Misc small oracles
# ---------------------------------------------------------------------------

def direct_field_eval(coeffs, z):
    """Scalar partial cosine sum, the slow way."""
    total = 0.5 * coeffs[0]
    for n in range(1, len(coeffs)):
        total += coeffs[n] * math.cos(n * math.pi * (z + 1.0) / 2.0)
    return total


def point_triangle_distance_search(point, tri, steps=400):
    """Distance by dense barycentric grid search plus local refinement.

    Independent of the closed-form region classification; accurate to
    roughly (edge length / steps)**2 near the minimum, which the tests
    account for.
    """
    point = np.asarray(point, dtype=np.float64)
    a, b, c = (np.asarray(v, dtype=np.float64) for v in tri)

    def dist_at(u, v):
        p = a + u * (b - a) + v * (c - a)
        return np.linalg.norm(p - point)

    best = (0.0, 0.0, dist_at(0.0, 0.0))
    lo_u, hi_u, lo_v, hi_v = 0.0, 1.0, 0.0, 1.0
    for _ in range(6):
        us = np.linspace(lo_u, hi_u, steps // 6 + 2)
        best_local = None
        for u in us:
            vs = np.linspace(lo_v, min(hi_v, 1.0 - u), steps // 6 + 2)
            for v in vs:
                if u + v > 1.0 + 1e-15:
                    continue
                d = dist_at(u, v)
                if best_local is None or d < best_local[2]:
                    best_local = (u, v, d)
        if best_local is None:
            break
        best = best_local
        span_u = (hi_u - lo_u) / (steps // 6)
        span_v = (hi_v - lo_v) / (steps // 6)
        lo_u = max(0.0, best[0] - span_u)
        hi_u = min(1.0, best[0] + span_u)
        lo_v = max(0.0, best[1] - span_v)
        hi_v = min(1.0, best[1] + span_v)
    return best[2]
