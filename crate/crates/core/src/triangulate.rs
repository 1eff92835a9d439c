//! Delaunay triangulation of a point set (incremental Bowyer-Watson with
//! exact-sign predicates), clipping against a domain, and mesh file formats.
//!
//! The triangulation carries full topology: unique edges with their incident
//! triangles, per-triangle edge indices, and boundary flags. Downstream code
//! (quality statistics, P2 edge DOFs) relies on that, so `TriMesh::new`
//! validates and rebuilds it rather than trusting the caller.

use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::vec2::{Aabb, Vec2};
use robust::{incircle, orient2d, Coord};
use std::collections::HashMap;
use std::path::Path;

fn co(p: Vec2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Sign of the orientation of (a, b, c): positive when counterclockwise.
/// Exact: adaptive-precision determinant evaluation.
pub fn orientation(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    orient2d(co(a), co(b), co(c))
}

/// Positive when `p` lies strictly inside the circumcircle of the
/// counterclockwise triangle (a, b, c). Exact sign.
pub fn in_circumcircle(a: Vec2, b: Vec2, c: Vec2, p: Vec2) -> f64 {
    incircle(co(a), co(b), co(c), co(p))
}

/// Circumcenter and circumradius of a triangle; `None` when the points are
/// (nearly) collinear.
pub fn circumcircle(a: Vec2, b: Vec2, c: Vec2) -> Option<(Vec2, f64)> {
    let d = 2.0 * (b - a).cross(c - a);
    let scale = (b - a).norm_sq().max((c - a).norm_sq());
    if d.abs() <= 1e-14 * scale {
        return None;
    }
    let ab = (b - a).norm_sq();
    let ac = (c - a).norm_sq();
    let ux = ((c.y - a.y) * ab - (b.y - a.y) * ac) / d;
    let uy = ((b.x - a.x) * ac - (c.x - a.x) * ab) / d;
    let center = Vec2::new(a.x + ux, a.y + uy);
    Some((center, center.dist(a)))
}

/// Undirected mesh edge with its incident triangles (1 = boundary edge).
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    /// Node indices, sorted so `nodes[0] < nodes[1]`.
    pub nodes: [usize; 2],
    pub tris: [Option<usize>; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tris[1].is_none()
    }
}

/// Triangle mesh with precomputed topology. Triangles are counterclockwise.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub nodes: Vec<Vec2>,
    pub tris: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// `tri_edges[t][k]` is the edge opposite local vertex `k` of triangle `t`.
    pub tri_edges: Vec<[usize; 3]>,
    pub boundary_node: Vec<bool>,
}

impl TriMesh {
    /// Builds a mesh from raw node/triangle lists: checks indices, enforces
    /// counterclockwise orientation (flipping where needed), rejects
    /// zero-area triangles and non-manifold edges, and derives edge topology.
    pub fn new(nodes: Vec<Vec2>, mut tris: Vec<[usize; 3]>) -> Result<TriMesh> {
        if tris.is_empty() {
            return Err(Error::EmptyMesh("mesh has no triangles".into()));
        }
        for (t, tri) in tris.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nodes.len() {
                    return Err(Error::DegenerateInput(format!(
                        "triangle {t} references node {v} out of {}",
                        nodes.len()
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateInput(format!(
                    "triangle {t} has repeated vertices {tri:?}"
                )));
            }
            let o = orientation(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if o == 0.0 {
                return Err(Error::DegenerateInput(format!(
                    "triangle {t} {tri:?} is degenerate (zero area)"
                )));
            }
            if o < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut edges: Vec<Edge> = Vec::with_capacity(tris.len() * 3 / 2);
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(tris.len() * 2);
        let mut tri_edges = vec![[usize::MAX; 3]; tris.len()];
        for (t, tri) in tris.iter().enumerate() {
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        nodes: [key.0, key.1],
                        tris: [None, None],
                    });
                    edges.len() - 1
                });
                tri_edges[t][k] = e;
                let slots = &mut edges[e].tris;
                if slots[0].is_none() {
                    slots[0] = Some(t);
                } else if slots[1].is_none() {
                    slots[1] = Some(t);
                } else {
                    return Err(Error::DegenerateInput(format!(
                        "edge {:?} is shared by more than two triangles",
                        key
                    )));
                }
            }
        }

        let mut boundary_node = vec![false; nodes.len()];
        for e in &edges {
            if e.is_boundary() {
                boundary_node[e.nodes[0]] = true;
                boundary_node[e.nodes[1]] = true;
            }
        }

        Ok(TriMesh {
            nodes,
            tris,
            edges,
            tri_edges,
            boundary_node,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_tris(&self) -> usize {
        self.tris.len()
    }

    pub fn tri_points(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.tris[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area is positive by construction; returned unsigned.
    pub fn tri_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.tri_points(t);
        (a + b + c) / 3.0
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].nodes;
        self.nodes[a].dist(self.nodes[b])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.tris.len()).map(|t| self.tri_area(t)).sum()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(self.nodes.iter().copied()).expect("mesh has nodes")
    }

    /// For an interior edge, the two vertices opposite it (one per triangle).
    pub fn opposite_vertices(&self, e: usize) -> Option<(usize, usize)> {
        let edge = &self.edges[e];
        let t2 = edge.tris[1]?;
        let t1 = edge.tris[0].expect("first slot filled before second");
        let opp = |t: usize| {
            self.tris[t]
                .iter()
                .copied()
                .find(|v| *v != edge.nodes[0] && *v != edge.nodes[1])
                .expect("triangle contains its edge")
        };
        Some((opp(t1), opp(t2)))
    }

    /// Keeps triangles whose centroid lies strictly inside the domain, then
    /// compacts nodes to those still referenced. Clipping a clipped mesh
    /// again changes nothing.
    pub fn clip_to_domain(&self, geom: &DomainGeometry) -> Result<TriMesh> {
        let kept: Vec<[usize; 3]> = (0..self.tris.len())
            .filter(|&t| geom.signed_distance(self.centroid(t)) < 0.0)
            .map(|t| self.tris[t])
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyMesh(format!(
                "no triangle centroid lies inside domain '{}'",
                geom.name()
            )));
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        let mut tris = Vec::with_capacity(kept.len());
        for tri in &kept {
            let mut out = [0usize; 3];
            for (k, &v) in tri.iter().enumerate() {
                if remap[v] == usize::MAX {
                    remap[v] = nodes.len();
                    nodes.push(self.nodes[v]);
                }
                out[k] = remap[v];
            }
            tris.push(out);
        }
        TriMesh::new(nodes, tris)
    }

    /// Uniform right-triangle mesh of the unit square: `n x n` cells, each
    /// split along the same diagonal. Handy as a known-good solver input.
    pub fn structured_unit_square(n: usize) -> Result<TriMesh> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "structured mesh needs at least one cell per side".into(),
            ));
        }
        let np = n + 1;
        let mut nodes = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                nodes.push(Vec2::new(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        let id = |i: usize, j: usize| j * np + i;
        let mut tris = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TriMesh::new(nodes, tris)
    }
}

// ---------------------------------------------------------------------------
// Bowyer-Watson
// ---------------------------------------------------------------------------

const NO_NB: u32 = u32::MAX;

struct BwTri {
    v: [usize; 3],
    /// Neighbor across the edge opposite local vertex k.
    nb: [u32; 3],
    alive: bool,
}

/// Delaunay triangulation of `points`. Exact predicates decide every
/// orientation/in-circle question, so near-degenerate inputs are safe;
/// exactly cocircular groups keep whichever diagonal the insertion order
/// produced first (runs are reproducible since insertion order is a pure
/// function of the coordinates).
///
/// Errors: fewer than 3 points, all points collinear, or duplicates
/// (reported with their index pairs).
pub fn delaunay(points: &[Vec2]) -> Result<TriMesh> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "triangulation needs at least 3 points, got {}",
            points.len()
        )));
    }
    for (i, p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "point {i} is not finite"
            )));
        }
    }
    let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(points.len());
    let mut dups = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if let Some(&j) = seen.get(&(p.x.to_bits(), p.y.to_bits())) {
            dups.push((j, i));
        } else {
            seen.insert((p.x.to_bits(), p.y.to_bits()), i);
        }
    }
    if !dups.is_empty() {
        return Err(Error::DuplicatePoints(dups));
    }
    // Distinct points are all collinear iff every consecutive triple through
    // point 0 is collinear.
    if (1..points.len() - 1)
        .all(|i| orientation(points[0], points[i], points[i + 1]) == 0.0)
    {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }

    let n = points.len();
    let bbox = Aabb::from_points(points.iter().copied()).unwrap();
    let center = bbox.center();
    let scale = 1.0e6 * bbox.diameter().max(1e-12);

    // Working point list: inputs followed by the three far-away helper
    // vertices whose triangles are stripped at the end.
    let mut pts = points.to_vec();
    for k in 0..3 {
        let ang = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
        pts.push(center + Vec2::new(scale * ang.cos(), scale * ang.sin()));
    }

    let mut tris: Vec<BwTri> = Vec::with_capacity(2 * n + 16);
    tris.push(BwTri {
        v: [n, n + 1, n + 2],
        nb: [NO_NB; 3],
        alive: true,
    });

    // Insert in spatial-grid order so successive points are close and the
    // walk from the previous cavity is short.
    let order = grid_order(points, bbox);

    let mut hint: u32 = 0;
    let mut cavity: Vec<u32> = Vec::new();
    let mut cavity_mark: Vec<u64> = vec![0; 64];
    let mut boundary: Vec<(usize, usize, u32)> = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    let mut ring: HashMap<usize, (usize, u32)> = HashMap::new();

    for (round, &pi) in order.iter().enumerate() {
        let p = pts[pi];
        let start = locate(&pts, &tris, hint, p).map_err(|detail| {
            Error::DegenerateInput(format!("point location failed at point {pi}: {detail}"))
        })?;

        // Cavity = connected set of triangles whose open circumdisk holds p.
        cavity.clear();
        boundary.clear();
        stack.clear();
        if cavity_mark.len() < tris.len() {
            cavity_mark.resize(tris.len() * 2, 0);
        }
        let stamp = round as u64 + 1;
        stack.push(start);
        cavity_mark[start as usize] = stamp;
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for k in 0..3 {
                let nb = tris[t as usize].nb[k];
                let (a, b) = (
                    tris[t as usize].v[(k + 1) % 3],
                    tris[t as usize].v[(k + 2) % 3],
                );
                if nb == NO_NB {
                    boundary.push((a, b, NO_NB));
                    continue;
                }
                if cavity_mark[nb as usize] == stamp {
                    continue;
                }
                let tv = &tris[nb as usize].v;
                if in_circumcircle(pts[tv[0]], pts[tv[1]], pts[tv[2]], p) > 0.0 {
                    cavity_mark[nb as usize] = stamp;
                    stack.push(nb);
                } else {
                    boundary.push((a, b, nb));
                }
            }
        }

        for &t in &cavity {
            tris[t as usize].alive = false;
        }

        // Fan p to every boundary edge. Boundary edges are directed with the
        // cavity on their left, so (p, a, b) is counterclockwise.
        ring.clear();
        let base = tris.len() as u32;
        for (slot, &(a, b, outer)) in boundary.iter().enumerate() {
            let t = base + slot as u32;
            tris.push(BwTri {
                v: [pi, a, b],
                nb: [outer, NO_NB, NO_NB],
                alive: true,
            });
            if outer != NO_NB {
                let ot = &mut tris[outer as usize];
                for k in 0..3 {
                    let (oa, ob) = (ot.v[(k + 1) % 3], ot.v[(k + 2) % 3]);
                    if (oa == b && ob == a) || (oa == a && ob == b) {
                        ot.nb[k] = t;
                    }
                }
            }
            if ring.insert(a, (b, t)).is_some() {
                return Err(Error::DegenerateInput(format!(
                    "pinched insertion cavity at point {pi}"
                )));
            }
        }
        // Link consecutive fan triangles: (p, a, b) is followed
        // counterclockwise by the fan triangle starting at `b`.
        for (slot, &(_, b, _)) in boundary.iter().enumerate() {
            let t = base + slot as u32;
            let (_, t_next) = ring[&b];
            // Edge (b, p) of t is shared with t_next (its (p, b, .) edge).
            tris[t as usize].nb[1] = t_next; // opposite local vertex 1
            tris[t_next as usize].nb[2] = t; // opposite local vertex 2 of next
        }
        hint = base;

        if cavity_mark.len() < tris.len() {
            cavity_mark.resize(tris.len() * 2, 0);
        }
    }

    let final_tris: Vec<[usize; 3]> = tris
        .iter()
        .filter(|t| t.alive && t.v.iter().all(|&v| v < n))
        .map(|t| t.v)
        .collect();
    if final_tris.is_empty() {
        return Err(Error::DegenerateInput(
            "triangulation produced no triangles".into(),
        ));
    }
    TriMesh::new(points.to_vec(), final_tris)
}

/// Row-major spatial-grid insertion order (ties by index). Deterministic for
/// a given point set.
fn grid_order(points: &[Vec2], bbox: Aabb) -> Vec<usize> {
    let n = points.len();
    let g = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
    let w = bbox.width().max(1e-300);
    let h = bbox.height().max(1e-300);
    let mut keyed: Vec<(usize, usize)> = (0..n)
        .map(|i| {
            let cx = (((points[i].x - bbox.min.x) / w) * g as f64) as usize;
            let cy = (((points[i].y - bbox.min.y) / h) * g as f64) as usize;
            let cx = cx.min(g - 1);
            let cy = cy.min(g - 1);
            // Serpentine rows keep consecutive cells adjacent.
            let col = if cy % 2 == 0 { cx } else { g - 1 - cx };
            (cy * g + col, i)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Visibility walk from `hint` to a triangle containing `p` (possibly on its
/// boundary). Terminates on Delaunay triangulations; capped as a safeguard.
fn locate(pts: &[Vec2], tris: &[BwTri], hint: u32, p: Vec2) -> std::result::Result<u32, String> {
    let mut t = hint;
    if !tris[t as usize].alive {
        // Hints always point at freshly created triangles, but be safe.
        t = tris
            .iter()
            .position(|x| x.alive)
            .map(|i| i as u32)
            .ok_or("no alive triangle")?;
    }
    let cap = 8 * tris.len() + 64;
    for _ in 0..cap {
        let tv = &tris[t as usize];
        let mut crossed = false;
        for k in 0..3 {
            let a = pts[tv.v[(k + 1) % 3]];
            let b = pts[tv.v[(k + 2) % 3]];
            if orientation(a, b, p) < 0.0 {
                let nb = tv.nb[k];
                if nb == NO_NB {
                    return Err("walked off the triangulation".into());
                }
                t = nb;
                crossed = true;
                break;
            }
        }
        if !crossed {
            return Ok(t);
        }
    }
    Err("walk exceeded step cap".into())
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Writes node coordinates: `count 2 0 1` header, then 1-based
/// `index x y boundary-marker` lines. Coordinates use the shortest
/// representation that round-trips exactly.
pub fn write_node_file(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} 2 0 1\n", mesh.n_nodes()));
    for (i, p) in mesh.nodes.iter().enumerate() {
        let marker = if mesh.boundary_node[i] { 1 } else { 0 };
        out.push_str(&format!("{} {} {} {}\n", i + 1, p.x, p.y, marker));
    }
    write_atomic(path, out.as_bytes())
}

/// Writes triangle connectivity: `count 3 0` header, then 1-based
/// `index n1 n2 n3` lines.
pub fn write_ele_file(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} 3 0\n", mesh.n_tris()));
    for (t, tri) in mesh.tris.iter().enumerate() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            t + 1,
            tri[0] + 1,
            tri[1] + 1,
            tri[2] + 1
        ));
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(no, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((no + 1, line))
        }
    })
}

fn format_err(path: &Path, line: usize, what: impl Into<String>) -> Error {
    Error::MeshFormat {
        path: path.to_path_buf(),
        detail: format!("line {line}: {}", what.into()),
    }
}

/// Reads a node file written by [`write_node_file`] (or compatible tools):
/// returns coordinates; attribute columns are skipped, markers ignored
/// (boundary flags are recomputed from the triangulation).
pub fn read_node_file(path: &Path) -> Result<Vec<Vec2>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut it = data_lines(&text);
    let (hline, header) = it
        .next()
        .ok_or_else(|| format_err(path, 0, "empty node file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 2 {
        return Err(format_err(path, hline, "header needs at least 'count dim'"));
    }
    let count: usize = head[0]
        .parse()
        .map_err(|_| format_err(path, hline, "bad node count"))?;
    let dim: usize = head[1]
        .parse()
        .map_err(|_| format_err(path, hline, "bad dimension"))?;
    if dim != 2 {
        return Err(format_err(path, hline, format!("expected dimension 2, got {dim}")));
    }
    let mut nodes = vec![None::<Vec2>; count];
    for (lineno, line) in it {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 3 {
            return Err(format_err(path, lineno, "expected 'index x y ...'"));
        }
        let idx: usize = cols[0]
            .parse()
            .map_err(|_| format_err(path, lineno, "bad node index"))?;
        if idx == 0 || idx > count {
            return Err(format_err(path, lineno, format!("node index {idx} out of 1..={count}")));
        }
        let x: f64 = cols[1]
            .parse()
            .map_err(|_| format_err(path, lineno, "bad x coordinate"))?;
        let y: f64 = cols[2]
            .parse()
            .map_err(|_| format_err(path, lineno, "bad y coordinate"))?;
        nodes[idx - 1] = Some(Vec2::new(x, y));
    }
    nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.ok_or_else(|| format_err(path, 0, format!("node {} missing", i + 1))))
        .collect()
}

/// Reads triangle connectivity written by [`write_ele_file`]; 1-based indices
/// are converted back to 0-based.
pub fn read_ele_file(path: &Path, n_nodes: usize) -> Result<Vec<[usize; 3]>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut it = data_lines(&text);
    let (hline, header) = it
        .next()
        .ok_or_else(|| format_err(path, 0, "empty element file"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.is_empty() {
        return Err(format_err(path, hline, "missing header"));
    }
    let count: usize = head[0]
        .parse()
        .map_err(|_| format_err(path, hline, "bad element count"))?;
    if head.len() > 1 && head[1] != "3" {
        return Err(format_err(path, hline, "only 3-node triangles supported"));
    }
    let mut tris = vec![None::<[usize; 3]>; count];
    for (lineno, line) in it {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 4 {
            return Err(format_err(path, lineno, "expected 'index n1 n2 n3'"));
        }
        let idx: usize = cols[0]
            .parse()
            .map_err(|_| format_err(path, lineno, "bad element index"))?;
        if idx == 0 || idx > count {
            return Err(format_err(path, lineno, format!("element index {idx} out of 1..={count}")));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            let v: usize = cols[k + 1]
                .parse()
                .map_err(|_| format_err(path, lineno, "bad node reference"))?;
            if v == 0 || v > n_nodes {
                return Err(format_err(path, lineno, format!("node reference {v} out of 1..={n_nodes}")));
            }
            tri[k] = v - 1;
        }
        tris[idx - 1] = Some(tri);
    }
    tris.into_iter()
        .enumerate()
        .map(|(i, t)| t.ok_or_else(|| format_err(path, 0, format!("element {} missing", i + 1))))
        .collect()
}

/// Reads a `.node`/`.ele` pair into a validated mesh.
pub fn read_mesh(node_path: &Path, ele_path: &Path) -> Result<TriMesh> {
    let nodes = read_node_file(node_path)?;
    let tris = read_ele_file(ele_path, nodes.len())?;
    TriMesh::new(nodes, tris)
}

/// Renders the mesh edges into a standalone SVG (y is flipped so the plot
/// matches mathematical orientation).
pub fn write_svg(path: &Path, mesh: &TriMesh) -> Result<()> {
    let bb = mesh.bbox();
    let margin = 0.02 * bb.diameter().max(1e-12);
    let w = bb.width() + 2.0 * margin;
    let h = bb.height() + 2.0 * margin;
    let px = 900.0;
    let scale = px / w.max(h);
    let map = |p: Vec2| {
        (
            (p.x - bb.min.x + margin) * scale,
            (bb.max.y - p.y + margin) * scale,
        )
    };
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.2} {:.2}\">\n",
        w * scale,
        h * scale,
        w * scale,
        h * scale
    ));
    out.push_str(&format!(
        "<g stroke=\"#335\" stroke-width=\"{:.3}\" stroke-linecap=\"round\" fill=\"none\">\n",
        (0.0015 * px).max(0.3)
    ));
    for e in &mesh.edges {
        let (x1, y1) = map(mesh.nodes[e.nodes[0]]);
        let (x2, y2) = map(mesh.nodes[e.nodes[1]]);
        out.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>\n"
        ));
    }
    out.push_str("</g>\n</svg>\n");
    write_atomic(path, out.as_bytes())
}
