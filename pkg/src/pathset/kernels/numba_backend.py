"""JIT-compiled geometry and relaxation kernels.

Polygons arrive packed: ``verts`` is an (n, 2) float64 array of vertices for
all polygons concatenated, ``offs`` an (m+1,) int64 array of slice bounds.
Polygons are convex with CCW vertex order; callers guarantee this.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def _pt_seg(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        ex = px - ax
        ey = py - ay
        return (ex * ex + ey * ey) ** 0.5, ax, ay
    t = ((px - ax) * dx + (py - ay) * dy) / l2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    cx = ax + t * dx
    cy = ay + t * dy
    ex = px - cx
    ey = py - cy
    return (ex * ex + ey * ey) ** 0.5, cx, cy


@njit(cache=True)
def _cross(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@njit(cache=True)
def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
    # proper crossing only: interiors straddle strictly
    d1 = _cross(ax, ay, bx, by, cx, cy)
    d2 = _cross(ax, ay, bx, by, dx, dy)
    d3 = _cross(cx, cy, dx, dy, ax, ay)
    d4 = _cross(cx, cy, dx, dy, bx, by)
    if ((d1 > 0.0 and d2 < 0.0) or (d1 < 0.0 and d2 > 0.0)) and (
        (d3 > 0.0 and d4 < 0.0) or (d3 < 0.0 and d4 > 0.0)
    ):
        return True
    return False


@njit(cache=True)
def _seg_seg_dist(ax, ay, bx, by, cx, cy, dx, dy):
    if _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    d0, _, _ = _pt_seg(ax, ay, cx, cy, dx, dy)
    d1, _, _ = _pt_seg(bx, by, cx, cy, dx, dy)
    d2, _, _ = _pt_seg(cx, cy, ax, ay, bx, by)
    d3, _, _ = _pt_seg(dx, dy, ax, ay, bx, by)
    d = d0
    if d1 < d:
        d = d1
    if d2 < d:
        d = d2
    if d3 < d:
        d = d3
    return d


@njit(cache=True)
def _poly_contains(px, py, verts, s, e, strict):
    for i in range(s, e):
        j = i + 1 if i + 1 < e else s
        cr = (verts[j, 0] - verts[i, 0]) * (py - verts[i, 1]) - (
            verts[j, 1] - verts[i, 1]
        ) * (px - verts[i, 0])
        if strict:
            if cr <= 0.0:
                return False
        else:
            if cr < 0.0:
                return False
    return True


@njit(cache=True)
def _pt_poly_dist(px, py, verts, s, e):
    if _poly_contains(px, py, verts, s, e, False):
        return 0.0
    best = np.inf
    for i in range(s, e):
        j = i + 1 if i + 1 < e else s
        d, _, _ = _pt_seg(px, py, verts[i, 0], verts[i, 1], verts[j, 0], verts[j, 1])
        if d < best:
            best = d
    return best


@njit(cache=True)
def point_clearance(px, py, verts, offs, width, height):
    b = px
    if width - px < b:
        b = width - px
    if py < b:
        b = py
    if height - py < b:
        b = height - py
    if b < 0.0:
        return 0.0
    d = b
    for k in range(offs.shape[0] - 1):
        dk = _pt_poly_dist(px, py, verts, offs[k], offs[k + 1])
        if dk < d:
            d = dk
    return d


@njit(cache=True)
def points_clearance(pts, verts, offs, width, height):
    n = pts.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        out[i] = point_clearance(pts[i, 0], pts[i, 1], verts, offs, width, height)
    return out


@njit(cache=True)
def segment_clearance(ax, ay, bx, by, verts, offs):
    mx = 0.5 * (ax + bx)
    my = 0.5 * (ay + by)
    best = np.inf
    for k in range(offs.shape[0] - 1):
        s = offs[k]
        e = offs[k + 1]
        if _poly_contains(ax, ay, verts, s, e, True):
            return -1.0
        if _poly_contains(bx, by, verts, s, e, True):
            return -1.0
        if _poly_contains(mx, my, verts, s, e, True):
            return -1.0
        for i in range(s, e):
            j = i + 1 if i + 1 < e else s
            if _segments_cross(
                ax, ay, bx, by, verts[i, 0], verts[i, 1], verts[j, 0], verts[j, 1]
            ):
                return -1.0
            d = _seg_seg_dist(
                ax, ay, bx, by, verts[i, 0], verts[i, 1], verts[j, 0], verts[j, 1]
            )
            if d < best:
                best = d
    return best


@njit(cache=True)
def segments_clearance(a, b, verts, offs):
    n = a.shape[0]
    out = np.empty(n, np.float64)
    for i in range(n):
        out[i] = segment_clearance(a[i, 0], a[i, 1], b[i, 0], b[i, 1], verts, offs)
    return out


@njit(cache=True)
def nearest_index(xs, ys, n, qx, qy):
    best = np.inf
    bi = -1
    for i in range(n):
        dx = xs[i] - qx
        dy = ys[i] - qy
        d = dx * dx + dy * dy
        if d < best:
            best = d
            bi = i
    return bi


@njit(cache=True)
def radius_indices(xs, ys, n, qx, qy, radius):
    r2 = radius * radius
    cnt = 0
    for i in range(n):
        dx = xs[i] - qx
        dy = ys[i] - qy
        if dx * dx + dy * dy <= r2:
            cnt += 1
    out = np.empty(cnt, np.int64)
    j = 0
    for i in range(n):
        dx = xs[i] - qx
        dy = ys[i] - qy
        if dx * dx + dy * dy <= r2:
            out[j] = i
            j += 1
    return out


@njit(cache=True)
def edges_min_crossed_width(a, b, psegs, pwidths):
    n = a.shape[0]
    m = psegs.shape[0]
    out = np.full(n, np.inf)
    for i in range(n):
        for k in range(m):
            if _segments_cross(
                a[i, 0], a[i, 1], b[i, 0], b[i, 1],
                psegs[k, 0], psegs[k, 1], psegs[k, 2], psegs[k, 3],
            ):
                if pwidths[k] < out[i]:
                    out[i] = pwidths[k]
    return out


@njit(cache=True)
def body_obstacle_witness(pa, pb, verts, offs):
    # returns [d, px, py, qx, qy]: p on the body segments, q on an obstacle
    out = np.empty(5, np.float64)
    out[0] = np.inf
    out[1] = np.nan
    out[2] = np.nan
    out[3] = np.nan
    out[4] = np.nan
    n = pa.shape[0]
    for t in range(n):
        ax = pa[t, 0]
        ay = pa[t, 1]
        bx = pb[t, 0]
        by = pb[t, 1]
        for k in range(offs.shape[0] - 1):
            s = offs[k]
            e = offs[k + 1]
            if _poly_contains(ax, ay, verts, s, e, False):
                out[0] = 0.0
                out[1] = ax
                out[2] = ay
                out[3] = ax
                out[4] = ay
                return out
            if _poly_contains(bx, by, verts, s, e, False):
                out[0] = 0.0
                out[1] = bx
                out[2] = by
                out[3] = bx
                out[4] = by
                return out
            for i in range(s, e):
                j = i + 1 if i + 1 < e else s
                cx = verts[i, 0]
                cy = verts[i, 1]
                dx = verts[j, 0]
                dy = verts[j, 1]
                if _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
                    out[0] = 0.0
                    out[1] = 0.5 * (ax + bx)
                    out[2] = 0.5 * (ay + by)
                    out[3] = out[1]
                    out[4] = out[2]
                    return out
                d0, w0x, w0y = _pt_seg(ax, ay, cx, cy, dx, dy)
                if d0 < out[0]:
                    out[0] = d0
                    out[1] = ax
                    out[2] = ay
                    out[3] = w0x
                    out[4] = w0y
                d1, w1x, w1y = _pt_seg(bx, by, cx, cy, dx, dy)
                if d1 < out[0]:
                    out[0] = d1
                    out[1] = bx
                    out[2] = by
                    out[3] = w1x
                    out[4] = w1y
                d2, w2x, w2y = _pt_seg(cx, cy, ax, ay, bx, by)
                if d2 < out[0]:
                    out[0] = d2
                    out[1] = w2x
                    out[2] = w2y
                    out[3] = cx
                    out[4] = cy
                d3, w3x, w3y = _pt_seg(dx, dy, ax, ay, bx, by)
                if d3 < out[0]:
                    out[0] = d3
                    out[1] = w3x
                    out[2] = w3y
                    out[3] = dx
                    out[4] = dy
    return out


@njit(cache=True)
def _project_out(px, py, verts, offs, width, height):
    for k in range(offs.shape[0] - 1):
        s = offs[k]
        e = offs[k + 1]
        if _poly_contains(px, py, verts, s, e, True):
            best = np.inf
            bx = px
            by = py
            for i in range(s, e):
                j = i + 1 if i + 1 < e else s
                d, cx, cy = _pt_seg(
                    px, py, verts[i, 0], verts[i, 1], verts[j, 0], verts[j, 1]
                )
                if d < best:
                    best = d
                    bx = cx
                    by = cy
            px = bx
            py = by
    if px < 0.0:
        px = 0.0
    elif px > width:
        px = width
    if py < 0.0:
        py = 0.0
    elif py > height:
        py = height
    return px, py


@njit(cache=True)
def relax_springs(pos, si, sj, rest, stiff, free, iters, damping, verts, offs, width, height):
    n = pos.shape[0]
    m = si.shape[0]
    disp = np.zeros((n, 2), np.float64)
    for _ in range(iters):
        for t in range(n):
            disp[t, 0] = 0.0
            disp[t, 1] = 0.0
        for k in range(m):
            i = si[k]
            j = sj[k]
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            ln = (dx * dx + dy * dy) ** 0.5
            if ln < 1e-12:
                continue
            c = stiff[k] * (ln - rest[k]) / ln
            if free[i] and free[j]:
                disp[i, 0] += 0.5 * c * dx
                disp[i, 1] += 0.5 * c * dy
                disp[j, 0] -= 0.5 * c * dx
                disp[j, 1] -= 0.5 * c * dy
            elif free[i]:
                disp[i, 0] += c * dx
                disp[i, 1] += c * dy
            elif free[j]:
                disp[j, 0] -= c * dx
                disp[j, 1] -= c * dy
        for t in range(n):
            if free[t]:
                px = pos[t, 0] + damping * disp[t, 0]
                py = pos[t, 1] + damping * disp[t, 1]
                px, py = _project_out(px, py, verts, offs, width, height)
                pos[t, 0] = px
                pos[t, 1] = py
