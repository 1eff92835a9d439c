//! Planar domains described by their boundary: signed distance, nearest-point
//! projection, and an arc-length parametrization of each boundary loop (the
//! node-spacing dynamics slides boundary nodes along that parametrization).
//!
//! Presets cover the domains used throughout the studies; arbitrary simple
//! polygons can be supplied programmatically or loaded from a vertex-list file.

use crate::error::{Error, Result};
use crate::vec2::{Aabb, Vec2};
use std::fs;
use std::path::Path;

/// One closed boundary component.
#[derive(Debug, Clone)]
pub enum BoundaryLoop {
    /// Closed polyline; the last vertex connects back to the first.
    /// Stored counterclockwise.
    Polyline(Vec<Vec2>),
    /// Full circle, parametrized counterclockwise from angle 0.
    Circle { center: Vec2, radius: f64 },
}

impl BoundaryLoop {
    pub fn length(&self) -> f64 {
        match self {
            BoundaryLoop::Polyline(v) => {
                let n = v.len();
                (0..n).map(|i| v[i].dist(v[(i + 1) % n])).sum()
            }
            BoundaryLoop::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
        }
    }

    /// Arc lengths at which polyline vertices sit (empty for a circle).
    /// Starts at 0.0 for the first vertex; does not repeat the closing value.
    pub fn vertex_params(&self) -> Vec<f64> {
        match self {
            BoundaryLoop::Polyline(v) => {
                let mut s = 0.0;
                let mut out = Vec::with_capacity(v.len());
                for i in 0..v.len() {
                    out.push(s);
                    s += v[i].dist(v[(i + 1) % v.len()]);
                }
                out
            }
            BoundaryLoop::Circle { .. } => Vec::new(),
        }
    }

    /// Point at arc length `s` (wrapped into [0, length)).
    pub fn point_at(&self, s: f64) -> Vec2 {
        let total = self.length();
        let s = s.rem_euclid(total);
        match self {
            BoundaryLoop::Polyline(v) => {
                let n = v.len();
                let mut acc = 0.0;
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let seg = a.dist(b);
                    if s <= acc + seg || i == n - 1 {
                        let t = if seg > 0.0 { (s - acc) / seg } else { 0.0 };
                        return a + (b - a) * t.clamp(0.0, 1.0);
                    }
                    acc += seg;
                }
                v[0]
            }
            BoundaryLoop::Circle { center, radius } => {
                let ang = s / radius;
                *center + Vec2::new(radius * ang.cos(), radius * ang.sin())
            }
        }
    }

    /// Unit tangent at arc length `s`, in the direction of increasing `s`.
    pub fn tangent_at(&self, s: f64) -> Vec2 {
        let total = self.length();
        let s = s.rem_euclid(total);
        match self {
            BoundaryLoop::Polyline(v) => {
                let n = v.len();
                let mut acc = 0.0;
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let seg = a.dist(b);
                    if s < acc + seg || i == n - 1 {
                        return (b - a)
                            .try_normalize(1e-300)
                            .unwrap_or(Vec2::new(1.0, 0.0));
                    }
                    acc += seg;
                }
                Vec2::new(1.0, 0.0)
            }
            BoundaryLoop::Circle { radius, .. } => {
                let ang = s / radius;
                Vec2::new(-ang.sin(), ang.cos())
            }
        }
    }

    /// Nearest boundary point to `p`: returns (point, arc length, distance).
    pub fn nearest(&self, p: Vec2) -> (Vec2, f64, f64) {
        match self {
            BoundaryLoop::Polyline(v) => {
                let n = v.len();
                let mut best = (v[0], 0.0, p.dist(v[0]));
                let mut acc = 0.0;
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let ab = b - a;
                    let seg = ab.norm();
                    let t = if seg > 0.0 {
                        ((p - a).dot(ab) / (seg * seg)).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let q = a + ab * t;
                    let d = p.dist(q);
                    if d < best.2 {
                        best = (q, acc + t * seg, d);
                    }
                    acc += seg;
                }
                best
            }
            BoundaryLoop::Circle { center, radius } => {
                let rel = p - *center;
                let r = rel.norm();
                if r < 1e-300 {
                    // Every boundary point is equidistant from the center;
                    // pick angle 0 so the result is deterministic.
                    return (*center + Vec2::new(*radius, 0.0), 0.0, *radius);
                }
                let q = *center + rel * (*radius / r);
                let ang = rel.y.atan2(rel.x).rem_euclid(2.0 * std::f64::consts::PI);
                (q, ang * radius, (r - radius).abs())
            }
        }
    }

    /// Even-odd containment of `p` with respect to this loop alone.
    fn crosses(&self, p: Vec2) -> bool {
        match self {
            BoundaryLoop::Polyline(v) => {
                let n = v.len();
                let mut inside = false;
                let mut j = n - 1;
                for i in 0..n {
                    let (a, b) = (v[i], v[j]);
                    if (a.y > p.y) != (b.y > p.y) {
                        let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                        if p.x < x_cross {
                            inside = !inside;
                        }
                    }
                    j = i;
                }
                inside
            }
            BoundaryLoop::Circle { center, radius } => p.dist(*center) < *radius,
        }
    }
}

/// A bounded planar domain: boundary loops, the corner points that must become
/// mesh nodes, and a bounding box. Immutable once built.
#[derive(Debug, Clone)]
pub struct DomainGeometry {
    name: String,
    loops: Vec<BoundaryLoop>,
    corners: Vec<Vec2>,
    bbox: Aabb,
}

impl DomainGeometry {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn corners(&self) -> &[Vec2] {
        &self.corners
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    /// Signed distance to the boundary: negative inside, positive outside,
    /// zero on the boundary. Exact for these piecewise-linear/circular loops.
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        let dist = self
            .loops
            .iter()
            .map(|l| l.nearest(p).2)
            .fold(f64::INFINITY, f64::min);
        if dist == 0.0 {
            return 0.0;
        }
        let inside = self
            .loops
            .iter()
            .fold(false, |acc, l| acc ^ l.crosses(p));
        if inside {
            -dist
        } else {
            dist
        }
    }

    pub fn is_inside(&self, p: Vec2) -> bool {
        self.signed_distance(p) < 0.0
    }

    /// Nearest boundary point to `p` (over all loops). Interior, exterior and
    /// on-boundary inputs all work; ties broken by loop order.
    pub fn project_to_boundary(&self, p: Vec2) -> Vec2 {
        let mut best: Option<(Vec2, f64)> = None;
        for l in &self.loops {
            let (q, _, d) = l.nearest(p);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((q, d));
            }
        }
        best.expect("domain has at least one loop").0
    }

    /// Nearest boundary point with its loop index and arc-length parameter.
    pub fn project_with_param(&self, p: Vec2) -> (usize, f64, Vec2) {
        let mut best: Option<(usize, f64, Vec2, f64)> = None;
        for (i, l) in self.loops.iter().enumerate() {
            let (q, s, d) = l.nearest(p);
            if best.map_or(true, |(_, _, _, bd)| d < bd) {
                best = Some((i, s, q, d));
            }
        }
        let (i, s, q, _) = best.expect("domain has at least one loop");
        (i, s, q)
    }

    /// Named preset domains. Accepts `snake_case` or `kebab-case`.
    pub fn preset(name: &str) -> Result<DomainGeometry> {
        let root3 = 3.0_f64.sqrt();
        match name.replace('-', "_").as_str() {
            "equilateral_triangle" => Self::polygon(
                "equilateral_triangle",
                vec![
                    Vec2::new(0.0, 0.0),
                    Vec2::new(1.0, 0.0),
                    Vec2::new(0.5, 0.5 * root3),
                ],
            ),
            "unit_circle" => {
                let center = Vec2::ZERO;
                let radius = 1.0;
                Ok(DomainGeometry {
                    name: "unit_circle".into(),
                    loops: vec![BoundaryLoop::Circle { center, radius }],
                    corners: Vec::new(),
                    bbox: Aabb::new(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0)),
                })
            }
            "regular_pentagon" => {
                // Circumradius 1, one vertex at (0, 1), counterclockwise.
                let verts = (0..5)
                    .map(|k| {
                        let ang = std::f64::consts::FRAC_PI_2
                            + k as f64 * 2.0 * std::f64::consts::PI / 5.0;
                        Vec2::new(ang.cos(), ang.sin())
                    })
                    .collect();
                Self::polygon("regular_pentagon", verts)
            }
            "l_shape" => Self::polygon(
                // (-1,1)^2 minus the closed quadrant [0,1] x [-1,0];
                // re-entrant corner at the origin.
                "l_shape",
                vec![
                    Vec2::new(0.0, 0.0),
                    Vec2::new(1.0, 0.0),
                    Vec2::new(1.0, 1.0),
                    Vec2::new(-1.0, 1.0),
                    Vec2::new(-1.0, -1.0),
                    Vec2::new(0.0, -1.0),
                ],
            ),
            "square3" => Self::polygon(
                "square3",
                vec![
                    Vec2::new(-3.0, -3.0),
                    Vec2::new(3.0, -3.0),
                    Vec2::new(3.0, 3.0),
                    Vec2::new(-3.0, 3.0),
                ],
            ),
            other => Err(Error::Geometry(format!(
                "unknown preset domain '{other}' (expected equilateral_triangle, \
                 unit_circle, regular_pentagon, l_shape or square3)"
            ))),
        }
    }

    /// Simple-polygon domain. Vertices may be given in either orientation;
    /// they are stored counterclockwise. Every vertex becomes a corner.
    pub fn polygon(name: &str, mut verts: Vec<Vec2>) -> Result<DomainGeometry> {
        if verts.len() < 3 {
            return Err(Error::Geometry(format!(
                "polygon '{name}' needs at least 3 vertices, got {}",
                verts.len()
            )));
        }
        for (i, v) in verts.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Geometry(format!(
                    "polygon '{name}' vertex {i} is not finite"
                )));
            }
        }
        let n = verts.len();
        for i in 0..n {
            if verts[i].dist(verts[(i + 1) % n]) == 0.0 {
                return Err(Error::Geometry(format!(
                    "polygon '{name}' has coincident consecutive vertices at index {i}"
                )));
            }
        }
        let area2: f64 = (0..n)
            .map(|i| verts[i].cross(verts[(i + 1) % n]))
            .sum();
        if area2 == 0.0 {
            return Err(Error::Geometry(format!(
                "polygon '{name}' is degenerate (zero area)"
            )));
        }
        if area2 < 0.0 {
            verts.reverse();
        }
        if let Some((i, j)) = first_self_intersection(&verts) {
            return Err(Error::Geometry(format!(
                "polygon '{name}' self-intersects (edges {i} and {j})"
            )));
        }
        let bbox = Aabb::from_points(verts.iter().copied()).unwrap();
        Ok(DomainGeometry {
            name: name.to_string(),
            corners: verts.clone(),
            loops: vec![BoundaryLoop::Polyline(verts)],
            bbox,
        })
    }

    /// Loads a polygon domain from a plain-text file: one `x y` pair per line,
    /// `#` comments and blank lines ignored, loop closed implicitly. The file
    /// stem becomes the domain name.
    pub fn from_polygon_file(path: &Path) -> Result<DomainGeometry> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut verts = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (xs, ys) = (it.next(), it.next());
            match (xs, ys, it.next()) {
                (Some(xs), Some(ys), None) => {
                    let x: f64 = xs.parse().map_err(|_| {
                        Error::Geometry(format!(
                            "{}:{}: bad x coordinate '{xs}'",
                            path.display(),
                            lineno + 1
                        ))
                    })?;
                    let y: f64 = ys.parse().map_err(|_| {
                        Error::Geometry(format!(
                            "{}:{}: bad y coordinate '{ys}'",
                            path.display(),
                            lineno + 1
                        ))
                    })?;
                    verts.push(Vec2::new(x, y));
                }
                _ => {
                    return Err(Error::Geometry(format!(
                        "{}:{}: expected 'x y', got '{line}'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "polygon".to_string());
        Self::polygon(&name, verts)
    }

    /// Total boundary length over all loops.
    pub fn boundary_length(&self) -> f64 {
        self.loops.iter().map(|l| l.length()).sum()
    }
}

/// Proper-crossing test between non-adjacent polygon edges. Touching at shared
/// endpoints is fine; anything else is a self-intersection.
fn first_self_intersection(verts: &[Vec2]) -> Option<(usize, usize)> {
    let n = verts.len();
    let orient = |a: Vec2, b: Vec2, c: Vec2| ((b - a).cross(c - a)).signum();
    for i in 0..n {
        let (a1, a2) = (verts[i], verts[(i + 1) % n]);
        for j in (i + 1)..n {
            // Skip adjacent edges (they share a vertex by construction).
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (b1, b2) = (verts[j], verts[(j + 1) % n]);
            let d1 = orient(b1, b2, a1);
            let d2 = orient(b1, b2, a2);
            let d3 = orient(a1, a2, b1);
            let d4 = orient(a1, a2, b2);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Containment oracle kept deliberately separate from the library path:
    // counts upward edge crossings of a rightward ray.
    fn even_odd_oracle(verts: &[Vec2], p: Vec2) -> bool {
        let n = verts.len();
        let mut count = 0;
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let (lo, hi) = if a.y < b.y { (a, b) } else { (b, a) };
            if p.y >= lo.y && p.y < hi.y {
                let t = (p.y - lo.y) / (hi.y - lo.y);
                let x = lo.x + t * (hi.x - lo.x);
                if x > p.x {
                    count += 1;
                }
            }
        }
        count % 2 == 1
    }

    #[test]
    fn circle_signed_distance() {
        let c = DomainGeometry::preset("unit_circle").unwrap();
        assert_eq!(c.signed_distance(Vec2::ZERO), -1.0);
        assert_eq!(c.signed_distance(Vec2::new(2.0, 0.0)), 1.0);
        assert!(c.signed_distance(Vec2::new(1.0, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn square3_center_distance() {
        let s = DomainGeometry::preset("square3").unwrap();
        assert_eq!(s.signed_distance(Vec2::ZERO), -3.0);
        assert_eq!(s.corners().len(), 4);
    }

    #[test]
    fn circle_projection() {
        let c = DomainGeometry::preset("unit_circle").unwrap();
        let q = c.project_to_boundary(Vec2::new(0.0, 0.25));
        assert!(q.dist(Vec2::new(0.0, 1.0)) < 1e-15);
        // Center is equidistant from everything; result must still be fixed.
        let q0 = c.project_to_boundary(Vec2::ZERO);
        assert_eq!(q0, Vec2::new(1.0, 0.0));
        let q2 = c.project_to_boundary(Vec2::new(3.0, 4.0));
        assert!(q2.dist(Vec2::new(0.6, 0.8)) < 1e-15);
    }

    #[test]
    fn triangle_preset_shape() {
        let t = DomainGeometry::preset("equilateral_triangle").unwrap();
        let c = t.corners();
        assert_eq!(c.len(), 3);
        assert_eq!(c[0], Vec2::ZERO);
        assert_eq!(c[1], Vec2::new(1.0, 0.0));
        assert!((c[2].dist(c[0]) - 1.0).abs() < 1e-15);
        assert!((c[2].dist(c[1]) - 1.0).abs() < 1e-15);
        assert!((t.boundary_length() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pentagon_circumradius_one() {
        let p = DomainGeometry::preset("regular_pentagon").unwrap();
        assert_eq!(p.corners().len(), 5);
        assert!(p.corners()[0].dist(Vec2::new(0.0, 1.0)) < 1e-15);
        for v in p.corners() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        let side = p.corners()[0].dist(p.corners()[1]);
        assert!((side - 2.0 * (std::f64::consts::PI / 5.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn l_shape_orientation() {
        let l = DomainGeometry::preset("l_shape").unwrap();
        assert_eq!(l.corners().len(), 6);
        // Removed quadrant is outside, opposite quadrant is inside.
        assert!(l.signed_distance(Vec2::new(0.5, -0.5)) > 0.0);
        assert!(l.signed_distance(Vec2::new(-0.5, 0.5)) < 0.0);
        assert!(l.signed_distance(Vec2::new(0.5, 0.5)) < 0.0);
        assert!(l.signed_distance(Vec2::new(-0.5, -0.5)) < 0.0);
        // Re-entrant corner is a boundary point.
        assert!(l.signed_distance(Vec2::ZERO).abs() < 1e-15);
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(DomainGeometry::preset("hexagon").is_err());
    }

    #[test]
    fn degenerate_polygons_rejected() {
        let col = DomainGeometry::polygon(
            "line",
            vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)],
        );
        assert!(col.is_err());
        let bowtie = DomainGeometry::polygon(
            "bowtie",
            vec![
                Vec2::ZERO,
                Vec2::new(1.0, 1.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
        );
        assert!(bowtie.is_err());
        assert!(DomainGeometry::polygon("pair", vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn sdf_sign_matches_independent_even_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in ["equilateral_triangle", "regular_pentagon", "l_shape", "square3"] {
            let dom = DomainGeometry::preset(name).unwrap();
            let verts = dom.corners().to_vec();
            let bb = dom.bbox();
            let mut checked = 0;
            while checked < 10_000 {
                let p = Vec2::new(
                    rng.random_range(bb.min.x - 0.5..bb.max.x + 0.5),
                    rng.random_range(bb.min.y - 0.5..bb.max.y + 0.5),
                );
                let sd = dom.signed_distance(p);
                if sd.abs() <= 1e-12 {
                    continue; // too close to the boundary to have a stable sign
                }
                assert_eq!(sd < 0.0, even_odd_oracle(&verts, p), "{name} at {p:?}");
                checked += 1;
            }
        }
    }

    #[test]
    fn circle_sign_matches_radius_test() {
        let dom = DomainGeometry::preset("unit_circle").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let p = Vec2::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let sd = dom.signed_distance(p);
            if sd.abs() <= 1e-12 {
                continue;
            }
            assert_eq!(sd < 0.0, p.norm() < 1.0);
        }
    }

    #[test]
    fn projection_idempotent_and_on_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for name in [
            "equilateral_triangle",
            "unit_circle",
            "regular_pentagon",
            "l_shape",
            "square3",
        ] {
            let dom = DomainGeometry::preset(name).unwrap();
            let bb = dom.bbox();
            let tol = 1e-9 * bb.diameter();
            for _ in 0..2000 {
                let p = Vec2::new(
                    rng.random_range(bb.min.x - 1.0..bb.max.x + 1.0),
                    rng.random_range(bb.min.y - 1.0..bb.max.y + 1.0),
                );
                let q = dom.project_to_boundary(p);
                assert!(dom.signed_distance(q).abs() <= tol, "{name}: sdf(q) off");
                let q2 = dom.project_to_boundary(q);
                assert!(q.dist(q2) <= tol, "{name}: projection moved a boundary point");
            }
        }
    }

    #[test]
    fn loop_parametrization_roundtrip() {
        let dom = DomainGeometry::preset("l_shape").unwrap();
        let lp = &dom.loops()[0];
        let total = lp.length();
        assert!((total - 8.0).abs() < 1e-12);
        for k in 0..64 {
            let s = total * k as f64 / 64.0;
            let p = lp.point_at(s);
            let (_, s_back, d) = lp.nearest(p);
            assert!(d < 1e-12);
            // Arc length is recovered up to loop wrap.
            let diff = (s_back - s).abs().min(total - (s_back - s).abs());
            assert!(diff < 1e-9, "s={s} s_back={s_back}");
        }
        let t = lp.tangent_at(0.5);
        assert!(t.dist(Vec2::new(1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn polygon_file_roundtrip() {
        let dir = std::env::temp_dir().join("bubblemesh-geomtest");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tri.poly.txt");
        std::fs::write(&path, "# a triangle\n0 0\n2 0\n\n1 1.5\n").unwrap();
        let dom = DomainGeometry::from_polygon_file(&path).unwrap();
        assert_eq!(dom.corners().len(), 3);
        assert!(dom.is_inside(Vec2::new(1.0, 0.5)));
        let bad = dir.join("bad.txt");
        std::fs::write(&bad, "0 0\n1 oops\n2 2\n").unwrap();
        assert!(DomainGeometry::from_polygon_file(&bad).is_err());
        let short = dir.join("short.txt");
        std::fs::write(&short, "0 0\n1 1\n").unwrap();
        assert!(DomainGeometry::from_polygon_file(&short).is_err());
    }
}
