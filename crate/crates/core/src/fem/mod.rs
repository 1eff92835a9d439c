//! Lagrange finite elements (degree 1 and 2) for the Poisson problem
//! `-laplace(u) = f` with Dirichlet data on the whole boundary, plus the
//! norms and convergence-order helpers used by the experiment harness.
//!
//! Degrees of freedom: P1 uses mesh nodes; P2 uses mesh nodes followed by
//! one midpoint per unique edge (dof index `n_nodes + edge_index`).

pub mod quadrature;
pub mod sparse;

use crate::error::{Error, Result};
use crate::triangulate::TriMesh;
use crate::vec2::Vec2;
use quadrature::{QuadRule, CENTROID, DEG2, DEG4, DEG6};
use sparse::{jacobi_pcg, CgStats, Coo, Csr};

/// Continuous Lagrange space on triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FemSpace {
    P1,
    P2,
}

impl FemSpace {
    pub fn degree(self) -> usize {
        match self {
            FemSpace::P1 => 1,
            FemSpace::P2 => 2,
        }
    }

    pub fn n_local(self) -> usize {
        match self {
            FemSpace::P1 => 3,
            FemSpace::P2 => 6,
        }
    }

    /// Quadrature that integrates this space's stiffness integrand exactly
    /// on straight triangles.
    fn stiffness_rule(self) -> QuadRule {
        match self {
            FemSpace::P1 => CENTROID,
            FemSpace::P2 => DEG2,
        }
    }
}

/// Shape function values at a reference point. Local ordering: vertices
/// 0..3, then (for P2) the midpoint of the edge opposite each vertex.
fn shape_values(space: FemSpace, xi: f64, eta: f64) -> [f64; 6] {
    let l = [1.0 - xi - eta, xi, eta];
    let mut n = [0.0; 6];
    match space {
        FemSpace::P1 => {
            n[..3].copy_from_slice(&l);
        }
        FemSpace::P2 => {
            for k in 0..3 {
                n[k] = l[k] * (2.0 * l[k] - 1.0);
                n[3 + k] = 4.0 * l[(k + 1) % 3] * l[(k + 2) % 3];
            }
        }
    }
    n
}

/// Reference-coordinate gradients of the shape functions.
fn shape_gradients(space: FemSpace, xi: f64, eta: f64) -> [[f64; 2]; 6] {
    const GL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
    let l = [1.0 - xi - eta, xi, eta];
    let mut g = [[0.0; 2]; 6];
    match space {
        FemSpace::P1 => {
            g[..3].copy_from_slice(&GL);
        }
        FemSpace::P2 => {
            for k in 0..3 {
                let s = 4.0 * l[k] - 1.0;
                g[k] = [s * GL[k][0], s * GL[k][1]];
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                g[3 + k] = [
                    4.0 * (l[a] * GL[b][0] + l[b] * GL[a][0]),
                    4.0 * (l[a] * GL[b][1] + l[b] * GL[a][1]),
                ];
            }
        }
    }
    g
}

/// Total number of degrees of freedom.
pub fn n_dofs(mesh: &TriMesh, space: FemSpace) -> usize {
    match space {
        FemSpace::P1 => mesh.n_nodes(),
        FemSpace::P2 => mesh.n_nodes() + mesh.edges.len(),
    }
}

/// Global dofs of triangle `t` in local order.
pub fn element_dofs(mesh: &TriMesh, space: FemSpace, t: usize) -> ([usize; 6], usize) {
    let v = mesh.tris[t];
    let mut d = [0usize; 6];
    d[0] = v[0];
    d[1] = v[1];
    d[2] = v[2];
    match space {
        FemSpace::P1 => (d, 3),
        FemSpace::P2 => {
            for k in 0..3 {
                d[3 + k] = mesh.n_nodes() + mesh.tri_edges[t][k];
            }
            (d, 6)
        }
    }
}

/// Coordinates of a dof (node position, or edge midpoint for P2 edge dofs).
pub fn dof_position(mesh: &TriMesh, space: FemSpace, dof: usize) -> Vec2 {
    if dof < mesh.n_nodes() {
        mesh.nodes[dof]
    } else {
        debug_assert_eq!(space, FemSpace::P2);
        let e = &mesh.edges[dof - mesh.n_nodes()];
        0.5 * (mesh.nodes[e.nodes[0]] + mesh.nodes[e.nodes[1]])
    }
}

/// Marks dofs on the domain boundary (where Dirichlet data applies).
pub fn dirichlet_flags(mesh: &TriMesh, space: FemSpace) -> Vec<bool> {
    let mut flags: Vec<bool> = mesh.boundary_node.clone();
    if space == FemSpace::P2 {
        flags.extend(mesh.edges.iter().map(|e| e.is_boundary()));
    }
    flags
}

/// Evaluates a function at every dof position (the nodal interpolant).
pub fn interpolate(mesh: &TriMesh, space: FemSpace, u: impl Fn(Vec2) -> f64) -> Vec<f64> {
    (0..n_dofs(mesh, space))
        .map(|d| u(dof_position(mesh, space, d)))
        .collect()
}

/// Geometry of the affine map from the reference triangle: columns of the
/// Jacobian, its determinant (twice the area for CCW triangles), and the
/// corner.
struct AffineMap {
    p0: Vec2,
    c1: Vec2,
    c2: Vec2,
    det: f64,
}

impl AffineMap {
    fn new(pts: [Vec2; 3]) -> Self {
        let c1 = pts[1] - pts[0];
        let c2 = pts[2] - pts[0];
        AffineMap { p0: pts[0], c1, c2, det: c1.cross(c2) }
    }

    fn point(&self, xi: f64, eta: f64) -> Vec2 {
        self.p0 + xi * self.c1 + eta * self.c2
    }

    /// Pushes a reference gradient forward: `grad_x = J^{-T} grad_ref`.
    fn grad(&self, g: [f64; 2]) -> Vec2 {
        Vec2::new(
            (g[0] * self.c2.y - g[1] * self.c1.y) / self.det,
            (-g[0] * self.c2.x + g[1] * self.c1.x) / self.det,
        )
    }

    fn area(&self) -> f64 {
        0.5 * self.det
    }
}

/// Element stiffness matrix `K_ij = int_K grad(N_i) . grad(N_j)`.
/// Returns the matrix (top-left `n x n` block used) and `n`.
pub fn local_stiffness(pts: [Vec2; 3], space: FemSpace) -> ([[f64; 6]; 6], usize) {
    let map = AffineMap::new(pts);
    let n = space.n_local();
    let rule = space.stiffness_rule();
    let mut k = [[0.0; 6]; 6];
    for (q, w) in rule.points.iter().zip(rule.weights) {
        let gref = shape_gradients(space, q[0], q[1]);
        let mut gx = [Vec2::ZERO; 6];
        for i in 0..n {
            gx[i] = map.grad(gref[i]);
        }
        let scale = w * map.area();
        for i in 0..n {
            for j in 0..n {
                k[i][j] += scale * gx[i].dot(gx[j]);
            }
        }
    }
    (k, n)
}

/// Assembled Poisson system restricted to free (non-Dirichlet) dofs.
pub struct PoissonSystem {
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    /// Free-index -> global-dof mapping.
    pub free: Vec<usize>,
    pub dirichlet: Vec<bool>,
    /// Full-length vector holding boundary data at Dirichlet dofs, 0 elsewhere.
    pub boundary_values: Vec<f64>,
    pub space: FemSpace,
}

impl PoissonSystem {
    /// Expands a free-dof solution to the full dof vector, boundary data
    /// included.
    pub fn scatter(&self, free_solution: &[f64]) -> Vec<f64> {
        assert_eq!(free_solution.len(), self.free.len());
        let mut full = self.boundary_values.clone();
        for (k, &d) in self.free.iter().enumerate() {
            full[d] = free_solution[k];
        }
        full
    }
}

/// Assembles stiffness matrix and load vector for `-laplace(u) = f`,
/// `u = g` on the boundary. Dirichlet dofs are eliminated symmetrically:
/// their columns are moved to the right-hand side.
pub fn assemble_poisson(
    mesh: &TriMesh,
    space: FemSpace,
    f: &dyn Fn(Vec2) -> f64,
    g: &dyn Fn(Vec2) -> f64,
) -> Result<PoissonSystem> {
    // Load rule matched to the element: centroid for P1, 3-point for P2.
    let rule = match space {
        FemSpace::P1 => &CENTROID,
        FemSpace::P2 => &DEG2,
    };
    assemble_poisson_rule(mesh, space, f, g, rule)
}

/// [`assemble_poisson`] with an explicit load quadrature rule.
pub fn assemble_poisson_rule(
    mesh: &TriMesh,
    space: FemSpace,
    f: &dyn Fn(Vec2) -> f64,
    g: &dyn Fn(Vec2) -> f64,
    load_rule: &QuadRule,
) -> Result<PoissonSystem> {
    let nd = n_dofs(mesh, space);
    let dirichlet = dirichlet_flags(mesh, space);
    let mut free_index = vec![usize::MAX; nd];
    let mut free = Vec::new();
    for d in 0..nd {
        if !dirichlet[d] {
            free_index[d] = free.len();
            free.push(d);
        }
    }
    let mut boundary_values = vec![0.0; nd];
    for d in 0..nd {
        if dirichlet[d] {
            boundary_values[d] = g(dof_position(mesh, space, d));
        }
    }

    // Shape values at load-rule points, cached once.
    let load_shapes: Vec<[f64; 6]> = load_rule
        .points
        .iter()
        .map(|q| shape_values(space, q[0], q[1]))
        .collect();

    let mut coo = Coo::new(free.len());
    let mut rhs = vec![0.0; free.len()];
    for t in 0..mesh.n_tris() {
        let pts = mesh.tri_points(t);
        let (k, n) = local_stiffness(pts, space);
        let (dofs, _) = element_dofs(mesh, space, t);
        let map = AffineMap::new(pts);

        let mut load = [0.0; 6];
        for ((q, w), shp) in load_rule.points.iter().zip(load_rule.weights).zip(&load_shapes) {
            let fval = f(map.point(q[0], q[1])) * w * map.area();
            for i in 0..n {
                load[i] += fval * shp[i];
            }
        }

        for i in 0..n {
            let gi = dofs[i];
            if dirichlet[gi] {
                continue;
            }
            let fi = free_index[gi];
            rhs[fi] += load[i];
            for j in 0..n {
                let gj = dofs[j];
                if dirichlet[gj] {
                    rhs[fi] -= k[i][j] * boundary_values[gj];
                } else {
                    coo.push(fi, free_index[gj], k[i][j]);
                }
            }
        }
    }

    Ok(PoissonSystem {
        matrix: coo.to_csr(),
        rhs,
        free,
        dirichlet,
        boundary_values,
        space,
    })
}

/// Relative residual tolerance for the linear solve.
pub const CG_REL_TOL: f64 = 1e-10;

/// A solved Poisson problem: values at every dof plus solver statistics.
pub struct FemSolution {
    pub values: Vec<f64>,
    pub n_free: usize,
    pub cg: CgStats,
}

/// Assembles and solves `-laplace(u) = f`, `u = g` on the boundary.
pub fn solve_poisson(
    mesh: &TriMesh,
    space: FemSpace,
    f: &dyn Fn(Vec2) -> f64,
    g: &dyn Fn(Vec2) -> f64,
) -> Result<FemSolution> {
    let sys = assemble_poisson(mesh, space, f, g)?;
    let max_iter = 10 * sys.free.len().max(1);
    let (x, cg) = jacobi_pcg(&sys.matrix, &sys.rhs, CG_REL_TOL, max_iter)?;
    Ok(FemSolution { values: sys.scatter(&x), n_free: sys.free.len(), cg })
}

/// Evaluates `sum(coeff_i N_i)` and its gradient at a reference point of
/// triangle `t`.
fn eval_discrete(
    mesh: &TriMesh,
    space: FemSpace,
    coeffs: &[f64],
    t: usize,
    map: &AffineMap,
    xi: f64,
    eta: f64,
) -> (f64, Vec2) {
    let (dofs, n) = element_dofs(mesh, space, t);
    let shp = shape_values(space, xi, eta);
    let grd = shape_gradients(space, xi, eta);
    let mut value = 0.0;
    let mut grad = Vec2::ZERO;
    for i in 0..n {
        let c = coeffs[dofs[i]];
        value += c * shp[i];
        grad += c * map.grad(grd[i]);
    }
    (value, grad)
}

fn h1_diff_impl(mesh: &TriMesh, space: FemSpace, a: &[f64], b: &[f64], l2_part: bool) -> f64 {
    let nd = n_dofs(mesh, space);
    assert_eq!(a.len(), nd);
    assert_eq!(b.len(), nd);
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let rule = DEG4;
    let mut acc = 0.0;
    for t in 0..mesh.n_tris() {
        let map = AffineMap::new(mesh.tri_points(t));
        for (q, w) in rule.points.iter().zip(rule.weights) {
            let (v, g) = eval_discrete(mesh, space, &diff, t, &map, q[0], q[1]);
            acc += w * map.area() * (if l2_part { v * v } else { 0.0 } + g.norm_sq());
        }
    }
    acc.sqrt()
}

/// Full H1 norm of the difference of two discrete functions,
/// `sqrt(|a-b|_H1^2)` including the L2 part. Exact for P2 (degree-4 rule).
pub fn h1_norm_diff(mesh: &TriMesh, space: FemSpace, a: &[f64], b: &[f64]) -> f64 {
    h1_diff_impl(mesh, space, a, b, true)
}

/// H1 seminorm (gradient part only) of the difference of two discrete
/// functions.
pub fn h1_seminorm_diff(mesh: &TriMesh, space: FemSpace, a: &[f64], b: &[f64]) -> f64 {
    h1_diff_impl(mesh, space, a, b, false)
}

/// Full H1 norm of `u_h - u` against an exact solution, by degree-6
/// quadrature.
pub fn h1_error_vs_exact(
    mesh: &TriMesh,
    space: FemSpace,
    coeffs: &[f64],
    u: &dyn Fn(Vec2) -> f64,
    grad_u: &dyn Fn(Vec2) -> Vec2,
) -> f64 {
    assert_eq!(coeffs.len(), n_dofs(mesh, space));
    let rule = DEG6;
    let mut acc = 0.0;
    for t in 0..mesh.n_tris() {
        let map = AffineMap::new(mesh.tri_points(t));
        for (q, w) in rule.points.iter().zip(rule.weights) {
            let (v, g) = eval_discrete(mesh, space, coeffs, t, &map, q[0], q[1]);
            let x = map.point(q[0], q[1]);
            let dv = v - u(x);
            let dg = g - grad_u(x);
            acc += w * map.area() * (dv * dv + dg.norm_sq());
        }
    }
    acc.sqrt()
}

/// Observed convergence order between two refinement levels:
/// `ln(e_coarse / e_fine) / ln(h_coarse / h_fine)`.
pub fn convergence_order(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}

/// A manufactured Poisson problem: exact solution, its gradient, and the
/// matching right-hand side `f = -laplace(u)`.
#[derive(Clone, Copy)]
pub struct BenchmarkProblem {
    pub name: &'static str,
    pub u: fn(Vec2) -> f64,
    pub grad_u: fn(Vec2) -> Vec2,
    pub f: fn(Vec2) -> f64,
}

impl std::fmt::Debug for BenchmarkProblem {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "BenchmarkProblem({})", self.name)
    }
}

const PI: f64 = std::f64::consts::PI;
const TWO_PI: f64 = std::f64::consts::TAU;

fn cos_sin_u(p: Vec2) -> f64 {
    (TWO_PI * p.x).cos() * (TWO_PI * p.y).sin()
}
fn cos_sin_grad(p: Vec2) -> Vec2 {
    Vec2::new(
        -TWO_PI * (TWO_PI * p.x).sin() * (TWO_PI * p.y).sin(),
        TWO_PI * (TWO_PI * p.x).cos() * (TWO_PI * p.y).cos(),
    )
}
fn cos_sin_f(p: Vec2) -> f64 {
    2.0 * TWO_PI * TWO_PI * cos_sin_u(p)
}

fn sin_sin_u(p: Vec2) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}
fn sin_sin_grad(p: Vec2) -> Vec2 {
    Vec2::new(
        PI * (PI * p.x).cos() * (PI * p.y).sin(),
        PI * (PI * p.x).sin() * (PI * p.y).cos(),
    )
}
fn sin_sin_f(p: Vec2) -> f64 {
    2.0 * PI * PI * sin_sin_u(p)
}

fn exp_u(p: Vec2) -> f64 {
    (p.x + p.y).exp()
}
fn exp_grad(p: Vec2) -> Vec2 {
    let e = (p.x + p.y).exp();
    Vec2::new(e, e)
}
fn exp_f(p: Vec2) -> f64 {
    -2.0 * (p.x + p.y).exp()
}

/// Polar angle measured counterclockwise from the positive x axis,
/// wrapped to `[0, 2 pi)`.
fn wrapped_angle(p: Vec2) -> f64 {
    let a = p.y.atan2(p.x);
    if a < 0.0 {
        a + TWO_PI
    } else {
        a
    }
}

fn corner_u(p: Vec2) -> f64 {
    let r = p.norm();
    if r == 0.0 {
        return 0.0;
    }
    let phi = wrapped_angle(p);
    r.powf(2.0 / 3.0) * (2.0 / 3.0 * phi).sin()
}
fn corner_grad(p: Vec2) -> Vec2 {
    let r = p.norm();
    if r == 0.0 {
        return Vec2::ZERO;
    }
    let phi = wrapped_angle(p);
    let u_r = 2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 / 3.0 * phi).sin();
    let u_t = 2.0 / 3.0 * r.powf(-1.0 / 3.0) * (2.0 / 3.0 * phi).cos();
    let (s, c) = phi.sin_cos();
    Vec2::new(c * u_r - s * u_t, s * u_r + c * u_t)
}
fn zero_f(_: Vec2) -> f64 {
    0.0
}

impl BenchmarkProblem {
    /// `u = cos(2 pi x) sin(2 pi y)`, `f = 8 pi^2 u`.
    pub fn cos_sin() -> Self {
        BenchmarkProblem { name: "cos_sin", u: cos_sin_u, grad_u: cos_sin_grad, f: cos_sin_f }
    }

    /// `u = sin(pi x) sin(pi y)`, `f = 2 pi^2 u`.
    pub fn sin_sin() -> Self {
        BenchmarkProblem { name: "sin_sin", u: sin_sin_u, grad_u: sin_sin_grad, f: sin_sin_f }
    }

    /// `u = exp(x + y)`, `f = -2 exp(x + y)`.
    pub fn exp_sum() -> Self {
        BenchmarkProblem { name: "exp", u: exp_u, grad_u: exp_grad, f: exp_f }
    }

    /// Harmonic corner singularity `u = r^(2/3) sin(2 phi / 3)` with the
    /// angle wrapped to `[0, 2 pi)`; vanishes on both edges meeting at the
    /// re-entrant corner of the L-shaped domain, `f = 0`.
    pub fn corner() -> Self {
        BenchmarkProblem { name: "corner", u: corner_u, grad_u: corner_grad, f: zero_f }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "cos_sin" => Some(Self::cos_sin()),
            "sin_sin" => Some(Self::sin_sin()),
            "exp" => Some(Self::exp_sum()),
            "corner" => Some(Self::corner()),
            _ => None,
        }
    }

    /// The problem conventionally paired with each built-in domain.
    pub fn for_domain(domain: &str) -> Option<Self> {
        match domain {
            "equilateral_triangle" => Some(Self::cos_sin()),
            "unit_circle" => Some(Self::sin_sin()),
            "regular_pentagon" => Some(Self::exp_sum()),
            "l_shape" => Some(Self::corner()),
            _ => None,
        }
    }

    /// Finite-difference consistency check of `grad_u` and `f` against `u`
    /// at the given points. `tol` is relative to the local magnitudes.
    pub fn validate_at(&self, points: &[Vec2], tol: f64) -> Result<()> {
        for &p in points {
            let h = 3e-4 * (1.0 + p.norm());
            let dx = Vec2::new(h, 0.0);
            let dy = Vec2::new(0.0, h);
            let u = self.u;
            let fd_grad = Vec2::new(
                (u(p + dx) - u(p - dx)) / (2.0 * h),
                (u(p + dy) - u(p - dy)) / (2.0 * h),
            );
            let g = (self.grad_u)(p);
            let gscale = g.norm().max(1.0);
            if (fd_grad - g).norm() > tol * gscale {
                return Err(Error::InvalidArgument(format!(
                    "problem {}: gradient mismatch at ({}, {}): analytic {:?}, finite-difference {:?}",
                    self.name, p.x, p.y, g, fd_grad
                )));
            }
            let lap = (u(p + dx) + u(p - dx) + u(p + dy) + u(p - dy) - 4.0 * u(p)) / (h * h);
            let f = (self.f)(p);
            let fscale = f.abs().max(lap.abs()).max(1.0);
            if (lap + f).abs() > tol * fscale {
                return Err(Error::InvalidArgument(format!(
                    "problem {}: -laplace(u) = {} but f = {f} at ({}, {})",
                    self.name, -lap, p.x, p.y
                )));
            }
        }
        Ok(())
    }
}

/// Writes dof values as `index value` lines (vertex dofs first, then edge
/// midpoints for P2). Values round-trip exactly.
pub fn write_solution(path: &std::path::Path, values: &[f64]) -> Result<()> {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i} {v:e}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangulate::TriMesh;

    fn unit_right_triangle() -> TriMesh {
        TriMesh::new(
            vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn p1_stiffness_reference_triangle() {
        let (k, n) = local_stiffness(
            [Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            FemSpace::P1,
        );
        assert_eq!(n, 3);
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (k[i][j] - want[i][j]).abs() < 1e-14,
                    "K[{i}][{j}] = {}, want {}",
                    k[i][j],
                    want[i][j]
                );
            }
        }
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_symmetric() {
        // Constants are in both spaces, so K annihilates the all-ones vector.
        let pts = [Vec2::new(0.3, -0.1), Vec2::new(1.7, 0.4), Vec2::new(0.5, 2.1)];
        for space in [FemSpace::P1, FemSpace::P2] {
            let (k, n) = local_stiffness(pts, space);
            for i in 0..n {
                let row: f64 = (0..n).map(|j| k[i][j]).sum();
                assert!(row.abs() < 1e-12, "row {i} sums to {row}");
                for j in 0..n {
                    assert!((k[i][j] - k[j][i]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn p1_hat_function_h1_norm() {
        // On the unit right triangle the hat at the right-angle vertex has
        // |grad|^2 = 2 over area 1/2 and integral of N^2 = 1/12.
        let mesh = unit_right_triangle();
        let hat = vec![1.0, 0.0, 0.0];
        let zero = vec![0.0; 3];
        let got = h1_norm_diff(&mesh, FemSpace::P1, &hat, &zero);
        let want = (1.0 + 1.0 / 12.0_f64).sqrt();
        assert!((got - want).abs() < 1e-14, "got {got}, want {want}");
    }

    #[test]
    fn quadratic_interpolation_error_of_cubic() {
        // Nodal quadratic interpolation of x^3 on the unit right triangle
        // leaves remainder x^3 - 1.5 x^2 + 0.5 x whose squared full H1 norm
        // is 1/40 + 1/1680 = 43/1680.
        let mesh = unit_right_triangle();
        let vals = interpolate(&mesh, FemSpace::P2, |p| p.x * p.x * p.x);
        // Frozen dof values: vertices (0,0),(1,0),(0,1) then midpoints of
        // the edges opposite each vertex.
        let want_vals = [0.0, 1.0, 0.0, 0.125, 0.0, 0.125];
        for (got, want) in vals.iter().zip(want_vals) {
            assert!((got - want).abs() < 1e-15);
        }
        let err = h1_error_vs_exact(
            &mesh,
            FemSpace::P2,
            &vals,
            &|p| p.x * p.x * p.x,
            &|p| Vec2::new(3.0 * p.x * p.x, 0.0),
        );
        let want = (43.0 / 1680.0_f64).sqrt();
        assert!((err - want).abs() < 1e-13, "got {err}, want {want}");
    }

    #[test]
    fn patch_test_linear_p1() {
        let mesh = TriMesh::structured_unit_square(5).unwrap();
        let u = |p: Vec2| 1.0 + 2.0 * p.x - 3.0 * p.y;
        let sol = solve_poisson(&mesh, FemSpace::P1, &|_| 0.0, &u).unwrap();
        let ui = interpolate(&mesh, FemSpace::P1, u);
        let err = h1_norm_diff(&mesh, FemSpace::P1, &sol.values, &ui);
        assert!(err < 1e-8, "P1 patch test error {err}");
    }

    #[test]
    fn patch_test_quadratic_p2() {
        let mesh = TriMesh::structured_unit_square(4).unwrap();
        let u = |p: Vec2| p.x * p.x + p.x * p.y + p.y * p.y - p.x;
        let sol = solve_poisson(&mesh, FemSpace::P2, &|_| -4.0, &u).unwrap();
        let ui = interpolate(&mesh, FemSpace::P2, u);
        let err = h1_norm_diff(&mesh, FemSpace::P2, &sol.values, &ui);
        assert!(err < 1e-8, "P2 patch test error {err}");
        // And the discrete solution matches the exact one to quadrature
        // accuracy, since u is in the space.
        let exact = h1_error_vs_exact(
            &mesh,
            FemSpace::P2,
            &sol.values,
            &u,
            &|p| Vec2::new(2.0 * p.x + p.y - 1.0, p.x + 2.0 * p.y),
        );
        assert!(exact < 1e-8, "P2 exact-solution error {err}");
    }

    #[test]
    fn dirichlet_dof_counts_on_structured_square() {
        let mesh = TriMesh::structured_unit_square(4).unwrap();
        let p1 = dirichlet_flags(&mesh, FemSpace::P1);
        assert_eq!(p1.iter().filter(|&&b| b).count(), 16);
        let p2 = dirichlet_flags(&mesh, FemSpace::P2);
        assert_eq!(p2.len(), n_dofs(&mesh, FemSpace::P2));
        assert_eq!(p2.iter().filter(|&&b| b).count(), 32);
        assert_eq!(n_dofs(&mesh, FemSpace::P2), 25 + 56);
    }

    #[test]
    fn structured_convergence_orders() {
        let prob = BenchmarkProblem {
            name: "pi_sin_sin",
            u: |p| (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin(),
            grad_u: |p| {
                let pi = std::f64::consts::PI;
                Vec2::new(
                    pi * (pi * p.x).cos() * (pi * p.y).sin(),
                    pi * (pi * p.x).sin() * (pi * p.y).cos(),
                )
            },
            f: |p| {
                let pi = std::f64::consts::PI;
                2.0 * pi * pi * (pi * p.x).sin() * (pi * p.y).sin()
            },
        };
        for (space, want) in [(FemSpace::P1, 1.0), (FemSpace::P2, 2.0)] {
            let mut errs = Vec::new();
            for n in [8usize, 16, 32] {
                let mesh = TriMesh::structured_unit_square(n).unwrap();
                let sol = solve_poisson(&mesh, space, &prob.f, &prob.u).unwrap();
                errs.push((
                    1.0 / n as f64,
                    h1_error_vs_exact(&mesh, space, &sol.values, &prob.u, &prob.grad_u),
                ));
            }
            for w in errs.windows(2) {
                let order = convergence_order(w[0].1, w[1].1, w[0].0, w[1].0);
                assert!(
                    (order - want).abs() < 0.15,
                    "{space:?}: order {order}, want about {want}"
                );
            }
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric_and_cg_converges() {
        let mesh = TriMesh::structured_unit_square(12).unwrap();
        let prob = BenchmarkProblem::sin_sin();
        let sys = assemble_poisson(&mesh, FemSpace::P2, &prob.f, &prob.u).unwrap();
        assert!(sys.matrix.max_asymmetry() < 1e-12);
        let sol = solve_poisson(&mesh, FemSpace::P2, &prob.f, &prob.u).unwrap();
        assert!(sol.cg.relative_residual <= CG_REL_TOL);
        assert!(sol.n_free > 0);
    }

    #[test]
    fn convergence_order_reference_values() {
        let o = convergence_order(1.81e-1, 4.30e-2, 0.2, 0.1);
        assert!((o - 2.074).abs() < 5e-3, "got {o}");
        let o2 = convergence_order(8.93e-3, 1.14e-3, 0.2, 0.1);
        assert!((o2 - 2.970).abs() < 5e-3, "got {o2}");
    }

    #[test]
    fn benchmark_problems_are_consistent() {
        let tri_pts = [Vec2::new(0.4, 0.3), Vec2::new(0.61, 0.22), Vec2::new(0.5, 0.5)];
        BenchmarkProblem::cos_sin().validate_at(&tri_pts, 1e-4).unwrap();
        let circ_pts = [Vec2::new(0.2, -0.3), Vec2::new(-0.5, 0.1), Vec2::new(0.0, 0.6)];
        BenchmarkProblem::sin_sin().validate_at(&circ_pts, 1e-4).unwrap();
        BenchmarkProblem::exp_sum().validate_at(&circ_pts, 1e-4).unwrap();
        // Corner problem: keep clear of the singularity and the two cut
        // edges (positive x axis, negative y axis).
        let corner_pts = [
            Vec2::new(0.3, 0.4),
            Vec2::new(-0.5, 0.5),
            Vec2::new(-0.6, -0.4),
            Vec2::new(-0.05, 0.9),
        ];
        BenchmarkProblem::corner().validate_at(&corner_pts, 1e-3).unwrap();
        // Boundary traces vanish on both edges at the re-entrant corner.
        assert!(corner_u(Vec2::new(0.7, 0.0)).abs() < 1e-15);
        assert!(corner_u(Vec2::new(0.0, -0.8)).abs() < 1e-10);
        assert_eq!(corner_u(Vec2::ZERO), 0.0);
        assert!(BenchmarkProblem::by_name("nope").is_none());
        assert_eq!(BenchmarkProblem::for_domain("unit_circle").unwrap().name, "sin_sin");
    }

    #[test]
    fn interpolation_positions() {
        let mesh = unit_right_triangle();
        assert_eq!(n_dofs(&mesh, FemSpace::P1), 3);
        assert_eq!(n_dofs(&mesh, FemSpace::P2), 6);
        // P2 edge dofs sit at edge midpoints.
        for e in 0..3 {
            let d = 3 + e;
            let pos = dof_position(&mesh, FemSpace::P2, d);
            let edge = &mesh.edges[e];
            let mid = 0.5 * (mesh.nodes[edge.nodes[0]] + mesh.nodes[edge.nodes[1]]);
            assert_eq!(pos, mid);
        }
    }
}
