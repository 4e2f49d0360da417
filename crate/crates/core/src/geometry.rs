//! Planar polyline utilities: distances, Hausdorff distance, inside tests,
//! self-intersection, arc-length resampling and contour extraction.

use crate::model::{Point, ScalarField};

#[inline]
fn dist2(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    if l2 == 0.0 {
        return dist2(p, a).sqrt();
    }
    let s = ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0);
    dist2(p, [a[0] + s * ab[0], a[1] + s * ab[1]]).sqrt()
}

/// Distance from `p` to a polyline; `closed` joins the last vertex to the first.
pub fn polyline_distance(p: Point, pts: &[Point], closed: bool) -> f64 {
    match pts.len() {
        0 => f64::INFINITY,
        1 => dist2(p, pts[0]).sqrt(),
        n => {
            let segs = if closed { n } else { n - 1 };
            (0..segs)
                .map(|k| point_segment_distance(p, pts[k], pts[(k + 1) % n]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Distance from `p` to a segment soup.
pub fn segments_distance(p: Point, segs: &[[Point; 2]]) -> f64 {
    segs.iter()
        .map(|s| point_segment_distance(p, s[0], s[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff_points(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let one_sided = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist2(*p, *q)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
            .sqrt()
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Hausdorff distance between two closed polylines, measured from the
/// vertices of each to the segments of the other.
pub fn hausdorff_closed(a: &[Point], b: &[Point]) -> f64 {
    let one_sided = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| polyline_distance(*p, y, true))
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Hausdorff distance between a segment soup and a closed polyline.
pub fn hausdorff_segments_closed(segs: &[[Point; 2]], curve: &[Point]) -> f64 {
    if segs.is_empty() || curve.is_empty() {
        return f64::INFINITY;
    }
    let a = segs
        .iter()
        .flat_map(|s| s.iter())
        .map(|p| polyline_distance(*p, curve, true))
        .fold(0.0f64, f64::max);
    let b = curve
        .iter()
        .map(|p| segments_distance(*p, segs))
        .fold(0.0f64, f64::max);
    a.max(b)
}

/// Signed area, positive for counter-clockwise polygons.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|k| {
            let (p, q) = (pts[k], pts[(k + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

/// Even-odd inside test for a closed polygon.
pub fn inside_polygon(p: Point, pts: &[Point]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// True when two non-adjacent edges of the closed polygon cross.
pub fn self_intersects(pts: &[Point]) -> bool {
    let n = pts.len();
    if n < 4 {
        return false;
    }
    // Bounding boxes prune most pairs.
    let boxes: Vec<[f64; 4]> = (0..n)
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])]
        })
        .collect();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (bi, bj) = (boxes[i], boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return true;
            }
        }
    }
    false
}

/// Total length of a closed polyline.
pub fn perimeter(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|k| dist2(pts[k], pts[(k + 1) % n]).sqrt()).sum()
}

/// `n` points equally spaced in arc length along a closed polyline, starting
/// at the first vertex.
pub fn resample_closed(pts: &[Point], n: usize) -> Vec<Point> {
    let m = pts.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for k in 0..m {
        let l = dist2(pts[k], pts[(k + 1) % m]).sqrt();
        cum.push(cum[k] + l);
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let s = total * i as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] < s {
            seg += 1;
        }
        let l = cum[seg + 1] - cum[seg];
        let w = if l > 0.0 { (s - cum[seg]) / l } else { 0.0 };
        let (a, b) = (pts[seg], pts[(seg + 1) % m]);
        out.push([a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]);
    }
    out
}

// Barry-Goldman evaluation of the chordal Catmull-Rom segment between p1 and
// p2 at fraction `w` of its parameter interval.
fn chordal_catmull_rom(p0: Point, p1: Point, p2: Point, p3: Point, w: f64) -> Point {
    let t0 = 0.0;
    let t1 = t0 + dist2(p0, p1).sqrt().max(1e-300);
    let t2 = t1 + dist2(p1, p2).sqrt().max(1e-300);
    let t3 = t2 + dist2(p2, p3).sqrt().max(1e-300);
    let t = t1 + w * (t2 - t1);
    let lerp = |a: Point, b: Point, ta: f64, tb: f64| {
        let (x, y) = ((tb - t) / (tb - ta), (t - ta) / (tb - ta));
        [x * a[0] + y * b[0], x * a[1] + y * b[1]]
    };
    let a1 = lerp(p0, p1, t0, t1);
    let a2 = lerp(p1, p2, t1, t2);
    let a3 = lerp(p2, p3, t2, t3);
    let b1 = lerp(a1, a2, t0, t2);
    let b2 = lerp(a2, a3, t1, t3);
    lerp(b1, b2, t1, t2)
}

/// `n` points equally spaced in chord length along the periodic chordal
/// Catmull-Rom curve through the vertices of a closed polyline. Unlike
/// [`resample_closed`] the new points do not cut corners at second order.
pub fn resample_closed_smooth(pts: &[Point], n: usize) -> Vec<Point> {
    let m = pts.len();
    if m < 4 {
        return resample_closed(pts, n);
    }
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for k in 0..m {
        let l = dist2(pts[k], pts[(k + 1) % m]).sqrt();
        cum.push(cum[k] + l);
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for i in 0..n {
        let s = total * i as f64 / n as f64;
        while seg + 1 < m && cum[seg + 1] < s {
            seg += 1;
        }
        let l = cum[seg + 1] - cum[seg];
        let w = if l > 0.0 { (s - cum[seg]) / l } else { 0.0 };
        let p0 = pts[(seg + m - 1) % m];
        let p1 = pts[seg];
        let p2 = pts[(seg + 1) % m];
        let p3 = pts[(seg + 2) % m];
        out.push(chordal_catmull_rom(p0, p1, p2, p3, w));
    }
    out
}

/// Largest ratio between adjacent edge lengths of a closed polyline.
pub fn spacing_ratio(pts: &[Point]) -> f64 {
    let n = pts.len();
    let lens: Vec<f64> = (0..n).map(|k| dist2(pts[k], pts[(k + 1) % n]).sqrt()).collect();
    let lmax = lens.iter().copied().fold(0.0, f64::max);
    let lmin = lens.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    }
}

// Edge keys identify the grid edge carrying a contour vertex: horizontal
// edges (i,j)-(i+1,j) and vertical edges (i,j)-(i,j+1).
type EdgeKey = (usize, usize, bool);

fn crossing(field: &ScalarField, a: (usize, usize), b: (usize, usize), level: f64) -> Point {
    let g = &field.grid;
    let (fa, fb) = (field.at(a.0, a.1), field.at(b.0, b.1));
    let w = (level - fa) / (fb - fa);
    let (pa, pb) = (g.center(a.0, a.1), g.center(b.0, b.1));
    [pa[0] + w * (pb[0] - pa[0]), pa[1] + w * (pb[1] - pa[1])]
}

fn contour_with_keys(field: &ScalarField, level: f64) -> Vec<([Point; 2], [EdgeKey; 2])> {
    let g = &field.grid;
    let mut out = Vec::new();
    if g.dim != 2 {
        return out;
    }
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let v = [
                field.at(i, j),
                field.at(i + 1, j),
                field.at(i + 1, j + 1),
                field.at(i, j + 1),
            ];
            let above: Vec<bool> = v.iter().map(|&x| x >= level).collect();
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            // Cell edges in order: bottom, right, top, left.
            let keys: [EdgeKey; 4] = [(i, j, true), (i + 1, j, false), (i, j + 1, true), (i, j, false)];
            let cut: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            let pt = |e: usize| crossing(field, corners[e], corners[(e + 1) % 4], level);
            match cut.len() {
                2 => out.push(([pt(cut[0]), pt(cut[1])], [keys[cut[0]], keys[cut[1]]])),
                4 => {
                    // Saddle: the cell average decides which corners connect.
                    let center_above = v.iter().sum::<f64>() / 4.0 >= level;
                    let pairs = if center_above == above[0] {
                        [(0, 1), (2, 3)]
                    } else {
                        [(3, 0), (1, 2)]
                    };
                    for (a, b) in pairs {
                        out.push(([pt(a), pt(b)], [keys[a], keys[b]]));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Marching-squares segments of the `level` contour of a 2D cell field,
/// using the cell centers as lattice nodes.
pub fn contour_segments(field: &ScalarField, level: f64) -> Vec<[Point; 2]> {
    contour_with_keys(field, level).into_iter().map(|(s, _)| s).collect()
}

/// Contour segments chained into polylines; closed loops are returned
/// without repeating the first vertex, sorted by decreasing length.
pub fn contour_loops(field: &ScalarField, level: f64) -> Vec<Vec<Point>> {
    use std::collections::HashMap;
    let segs = contour_with_keys(field, level);
    let mut by_key: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (k, (_, keys)) in segs.iter().enumerate() {
        for key in keys {
            by_key.entry(*key).or_default().push(k);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut loops = Vec::new();
    for start in 0..segs.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let mut pts = vec![segs[start].0[0], segs[start].0[1]];
        let first_key = segs[start].1[0];
        let mut key = segs[start].1[1];
        loop {
            let next = by_key
                .get(&key)
                .and_then(|v| v.iter().copied().find(|&k| !used[k]));
            let Some(k) = next else { break };
            used[k] = true;
            let (s, keys) = &segs[k];
            if keys[0] == key {
                pts.push(s[1]);
                key = keys[1];
            } else {
                pts.push(s[0]);
                key = keys[0];
            }
        }
        if key == first_key {
            pts.pop();
        }
        loops.push(pts);
    }
    loops.sort_by(|a, b| perimeter(b).total_cmp(&perimeter(a)));
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Boundary, Domain, Grid};
    use std::f64::consts::PI;

    fn circle(r: f64, n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn segment_distance_cases() {
        assert_eq!(point_segment_distance([0.5, 1.0], [0.0, 0.0], [1.0, 0.0]), 1.0);
        assert_eq!(point_segment_distance([2.0, 0.0], [0.0, 0.0], [1.0, 0.0]), 1.0);
        assert_eq!(point_segment_distance([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]), 5.0);
    }

    #[test]
    fn concentric_circles() {
        let a = circle(1.0, 256);
        let b = circle(1.5, 300);
        assert!((hausdorff_closed(&a, &b) - 0.5).abs() < 1e-3);
        assert!((signed_area(&a) - PI).abs() < 1e-3);
        assert!(inside_polygon([0.2, 0.1], &a));
        assert!(!inside_polygon([1.2, 0.0], &a));
        assert!(!self_intersects(&a));
    }

    #[test]
    fn figure_eight_self_intersects() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(self_intersects(&pts));
    }

    #[test]
    fn resampling_is_uniform() {
        let mut pts = circle(1.0, 64);
        pts.insert(1, [0.9999, 0.01]);
        let r = resample_closed(&pts, 100);
        assert!(spacing_ratio(&r) < 1.05);
        assert!(hausdorff_closed(&r, &pts) < 2e-2);
    }

    #[test]
    fn smooth_resampling_stays_on_circle() {
        let pts: Vec<Point> = (0..200)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.3 * (k as f64 * 0.7).sin()) / 200.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let r = resample_closed_smooth(&pts, 200);
        for p in &r {
            let e = (p[0].hypot(p[1]) - 1.0).abs();
            assert!(e < 1e-6, "{e}");
        }
        assert!(spacing_ratio(&r) < 1.01);
    }

    #[test]
    fn contour_of_cone_is_circle() {
        let d = Domain::rectangle([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let g = Grid::new(&d, &[80, 80]).unwrap();
        let f = ScalarField::from_fn(g, Boundary::NoFlux, |x| x[0].hypot(x[1]));
        let loops = contour_loops(&f, 0.5);
        assert_eq!(loops.len(), 1);
        let c = &loops[0];
        for p in c {
            assert!((p[0].hypot(p[1]) - 0.5).abs() < 2e-3);
        }
        assert!(!self_intersects(c));
        assert!((perimeter(c) - PI).abs() < 1e-2);
        let segs = contour_segments(&f, 0.5);
        assert!(hausdorff_segments_closed(&segs, &circle(0.5, 400)) < 3e-3);
    }
}
