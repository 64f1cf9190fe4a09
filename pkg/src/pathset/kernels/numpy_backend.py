"""Vectorized numpy fallback for the JIT kernels.

Same signatures and semantics as ``numba_backend``; used when numba is
unavailable or when ``PATHSET_PURE_NUMPY=1`` forces it.
"""

import numpy as np

BACKEND_NAME = "numpy"


def _poly_edges(verts, offs, k):
    s, e = offs[k], offs[k + 1]
    vi = verts[s:e]
    vj = np.roll(vi, -1, axis=0)
    return vi, vj


def _contains(pts, vi, vj, strict):
    # pts (n,2) vs one polygon's edges; convex CCW
    cr = (vj[:, 0] - vi[:, 0]) * (pts[:, None, 1] - vi[:, 1]) - (
        vj[:, 1] - vi[:, 1]
    ) * (pts[:, None, 0] - vi[:, 0])
    if strict:
        return (cr > 0.0).all(axis=1)
    return (cr >= 0.0).all(axis=1)


def _pt_seg_dist(pts, a, b):
    # pts (n,2), a/b (m,2) -> (n,m)
    ab = b - a
    l2 = (ab * ab).sum(axis=1)
    l2safe = np.where(l2 <= 0.0, 1.0, l2)
    ap = pts[:, None, :] - a[None, :, :]
    t = (ap * ab[None, :, :]).sum(axis=2) / l2safe[None, :]
    t = np.where(l2[None, :] <= 0.0, 0.0, np.clip(t, 0.0, 1.0))
    c = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = pts[:, None, :] - c
    return np.sqrt((d * d).sum(axis=2))


def _pt_poly_dist(pts, vi, vj):
    d = _pt_seg_dist(pts, vi, vj).min(axis=1)
    inside = _contains(pts, vi, vj, False)
    return np.where(inside, 0.0, d)


def points_clearance(pts, verts, offs, width, height):
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    b = np.minimum.reduce(
        [pts[:, 0], width - pts[:, 0], pts[:, 1], height - pts[:, 1]]
    )
    d = b.copy()
    for k in range(offs.shape[0] - 1):
        vi, vj = _poly_edges(verts, offs, k)
        d = np.minimum(d, _pt_poly_dist(pts, vi, vj))
    return np.where(b < 0.0, 0.0, d)


def point_clearance(px, py, verts, offs, width, height):
    return float(
        points_clearance(np.array([[px, py]]), verts, offs, width, height)[0]
    )


def _cross3(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def segments_clearance(a, b, verts, offs):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    n = a.shape[0]
    res = np.full(n, np.inf)
    pen = np.zeros(n, dtype=bool)
    mid = 0.5 * (a + b)
    for k in range(offs.shape[0] - 1):
        vi, vj = _poly_edges(verts, offs, k)
        pen |= _contains(a, vi, vj, True)
        pen |= _contains(b, vi, vj, True)
        pen |= _contains(mid, vi, vj, True)
        d1 = _cross3(a[:, None, 0], a[:, None, 1], b[:, None, 0], b[:, None, 1], vi[None, :, 0], vi[None, :, 1])
        d2 = _cross3(a[:, None, 0], a[:, None, 1], b[:, None, 0], b[:, None, 1], vj[None, :, 0], vj[None, :, 1])
        d3 = _cross3(vi[None, :, 0], vi[None, :, 1], vj[None, :, 0], vj[None, :, 1], a[:, None, 0], a[:, None, 1])
        d4 = _cross3(vi[None, :, 0], vi[None, :, 1], vj[None, :, 0], vj[None, :, 1], b[:, None, 0], b[:, None, 1])
        proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
            ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
        )
        pen |= proper.any(axis=1)
        dm = np.minimum(
            np.minimum(_pt_seg_dist(a, vi, vj), _pt_seg_dist(b, vi, vj)),
            np.minimum(_pt_seg_dist(vi, a, b).T, _pt_seg_dist(vj, a, b).T),
        )
        dm = np.where(proper, 0.0, dm)
        res = np.minimum(res, dm.min(axis=1))
    return np.where(pen, -1.0, res)


def segment_clearance(ax, ay, bx, by, verts, offs):
    return float(
        segments_clearance(
            np.array([[ax, ay]]), np.array([[bx, by]]), verts, offs
        )[0]
    )


def nearest_index(xs, ys, n, qx, qy):
    dx = xs[:n] - qx
    dy = ys[:n] - qy
    return int(np.argmin(dx * dx + dy * dy)) if n > 0 else -1


def radius_indices(xs, ys, n, qx, qy, radius):
    dx = xs[:n] - qx
    dy = ys[:n] - qy
    return np.nonzero(dx * dx + dy * dy <= radius * radius)[0].astype(np.int64)


def edges_min_crossed_width(a, b, psegs, pwidths):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    n = a.shape[0]
    if psegs.shape[0] == 0:
        return np.full(n, np.inf)
    cx, cy = psegs[None, :, 0], psegs[None, :, 1]
    dx, dy = psegs[None, :, 2], psegs[None, :, 3]
    ax, ay = a[:, None, 0], a[:, None, 1]
    bx, by = b[:, None, 0], b[:, None, 1]
    d1 = _cross3(ax, ay, bx, by, cx, cy)
    d2 = _cross3(ax, ay, bx, by, dx, dy)
    d3 = _cross3(cx, cy, dx, dy, ax, ay)
    d4 = _cross3(cx, cy, dx, dy, bx, by)
    proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
        ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
    )
    w = np.where(proper, pwidths[None, :], np.inf)
    return w.min(axis=1)


def _pt_seg_witness(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    l2 = dx * dx + dy * dy
    if l2 <= 0.0:
        return np.hypot(px - ax, py - ay), ax, ay
    t = min(max(((px - ax) * dx + (py - ay) * dy) / l2, 0.0), 1.0)
    cx = ax + t * dx
    cy = ay + t * dy
    return np.hypot(px - cx, py - cy), cx, cy


def body_obstacle_witness(pa, pb, verts, offs):
    out = np.array([np.inf, np.nan, np.nan, np.nan, np.nan])
    n = pa.shape[0]
    for t in range(n):
        ax, ay = pa[t, 0], pa[t, 1]
        bx, by = pb[t, 0], pb[t, 1]
        seg_pts = np.array([[ax, ay], [bx, by]])
        for k in range(offs.shape[0] - 1):
            vi, vj = _poly_edges(verts, offs, k)
            ins = _contains(seg_pts, vi, vj, False)
            if ins[0]:
                return np.array([0.0, ax, ay, ax, ay])
            if ins[1]:
                return np.array([0.0, bx, by, bx, by])
            d1 = _cross3(ax, ay, bx, by, vi[:, 0], vi[:, 1])
            d2 = _cross3(ax, ay, bx, by, vj[:, 0], vj[:, 1])
            d3 = _cross3(vi[:, 0], vi[:, 1], vj[:, 0], vj[:, 1], ax, ay)
            d4 = _cross3(vi[:, 0], vi[:, 1], vj[:, 0], vj[:, 1], bx, by)
            proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
                ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
            )
            if proper.any():
                mx, my = 0.5 * (ax + bx), 0.5 * (ay + by)
                return np.array([0.0, mx, my, mx, my])
            for i in range(vi.shape[0]):
                d0, w0x, w0y = _pt_seg_witness(ax, ay, vi[i, 0], vi[i, 1], vj[i, 0], vj[i, 1])
                if d0 < out[0]:
                    out[:] = (d0, ax, ay, w0x, w0y)
                d1s, w1x, w1y = _pt_seg_witness(bx, by, vi[i, 0], vi[i, 1], vj[i, 0], vj[i, 1])
                if d1s < out[0]:
                    out[:] = (d1s, bx, by, w1x, w1y)
                d2s, w2x, w2y = _pt_seg_witness(vi[i, 0], vi[i, 1], ax, ay, bx, by)
                if d2s < out[0]:
                    out[:] = (d2s, w2x, w2y, vi[i, 0], vi[i, 1])
                d3s, w3x, w3y = _pt_seg_witness(vj[i, 0], vj[i, 1], ax, ay, bx, by)
                if d3s < out[0]:
                    out[:] = (d3s, w3x, w3y, vj[i, 0], vj[i, 1])
    return out


def relax_springs(pos, si, sj, rest, stiff, free, iters, damping, verts, offs, width, height):
    n = pos.shape[0]
    freemask = free.astype(bool)
    fi = freemask[si]
    fj = freemask[sj]
    wi = np.where(fi & fj, 0.5, np.where(fi, 1.0, 0.0))
    wj = np.where(fi & fj, 0.5, np.where(fj, 1.0, 0.0))
    for _ in range(iters):
        d = pos[sj] - pos[si]
        ln = np.sqrt((d * d).sum(axis=1))
        ok = ln >= 1e-12
        c = np.where(ok, stiff * (ln - rest) / np.where(ok, ln, 1.0), 0.0)
        corr = c[:, None] * d
        disp = np.zeros((n, 2))
        np.add.at(disp, si, wi[:, None] * corr)
        np.add.at(disp, sj, -wj[:, None] * corr)
        pos[freemask] += damping * disp[freemask]
        for k in range(offs.shape[0] - 1):
            vi, vj = _poly_edges(verts, offs, k)
            inside = _contains(pos, vi, vj, True) & freemask
            if inside.any():
                idx = np.nonzero(inside)[0]
                dmat = _pt_seg_dist(pos[idx], vi, vj)
                best = dmat.argmin(axis=1)
                ab = vj - vi
                l2 = (ab * ab).sum(axis=1)
                l2safe = np.where(l2 <= 0.0, 1.0, l2)
                for row, node in enumerate(idx):
                    e = best[row]
                    t = ((pos[node] - vi[e]) @ ab[e]) / l2safe[e]
                    t = min(max(t, 0.0), 1.0)
                    pos[node] = vi[e] + t * ab[e]
        pos[freemask] = np.column_stack(
            [
                np.clip(pos[freemask, 0], 0.0, width),
                np.clip(pos[freemask, 1], 0.0, height),
            ]
        )
