// Hierarchical chaining test: level 0 from scratch, each finer level seeded
// from the refined previous mesh (nodes + edge midpoints). Circle domain,
// pi-scaled sin product solution.
use bubblemesh_core::bubbles::{BubbleSystem, OuterParams};
use bubblemesh_core::fem::{assemble_poisson, h1_norm_diff, interpolate, FemSpace};
use bubblemesh_core::fem::sparse::jacobi_pcg;
use bubblemesh_core::geometry::DomainGeometry;
use bubblemesh_core::metrics::mesh_report;
use bubblemesh_core::sizing::SizeField;
use bubblemesh_core::triangulate::{delaunay, TriMesh};
use bubblemesh_core::Vec2;

const PI: f64 = std::f64::consts::PI;

fn u(p: Vec2) -> f64 {
    (PI * p.x).sin() * (PI * p.y).sin()
}
fn f(p: Vec2) -> f64 {
    2.0 * PI * PI * u(p)
}

fn solve(mesh: &TriMesh, space: FemSpace) -> f64 {
    let sys = assemble_poisson(mesh, space, &f, &u).unwrap();
    let (x, _) = jacobi_pcg(&sys.matrix, &sys.rhs, 1e-12, 10 * sys.rhs.len().max(1)).unwrap();
    let u_h = sys.scatter(&x);
    let u_i = interpolate(mesh, space, u);
    h1_norm_diff(mesh, space, &u_h, &u_i)
}

fn main() {
    let levels: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let sizes = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let geom = DomainGeometry::preset("unit_circle").unwrap();
    let mut prev: Option<TriMesh> = None;
    let mut errs: Vec<(f64, f64)> = Vec::new();
    for (k, &h) in sizes.iter().take(levels).enumerate() {
        let t0 = std::time::Instant::now();
        let size = SizeField::constant(h).unwrap();
        let (sys, stats, mesh, rep) = match &prev {
            None => {
                let mut best: Option<(
                    BubbleSystem,
                    bubblemesh_core::bubbles::OuterStats,
                    TriMesh,
                    bubblemesh_core::metrics::MeshReport,
                )> = None;
                for k in 0..8u64 {
                    let mut sys = BubbleSystem::initialize(&geom, &size, 42 + k).unwrap();
                    let stats = sys.outer_loop(&OuterParams::default()).unwrap();
                    let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
                    let rep = mesh_report(&mesh, &size).unwrap();
                    if best.as_ref().map_or(true, |(_, _, _, b)| rep.q_avg > b.q_avg) {
                        best = Some((sys, stats, mesh, rep));
                    }
                }
                best.unwrap()
            }
            Some(m) => {
                let mut interior = Vec::new();
                let mut boundary = Vec::new();
                for (i, &p) in m.nodes.iter().enumerate() {
                    if m.boundary_node[i] {
                        boundary.push(p);
                    } else {
                        interior.push(p);
                    }
                }
                for e in &m.edges {
                    let mid = 0.5 * (m.nodes[e.nodes[0]] + m.nodes[e.nodes[1]]);
                    if e.is_boundary() {
                        boundary.push(mid);
                    } else {
                        interior.push(mid);
                    }
                }
                let mut sys =
                    BubbleSystem::initialize_seeded(&geom, &size, &interior, &boundary).unwrap();
                let stats = sys.outer_loop(&OuterParams::default()).unwrap();
                let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
                let rep = mesh_report(&mesh, &size).unwrap();
                (sys, stats, mesh, rep)
            }
        };
        let _ = &sys;
        let e1 = solve(&mesh, FemSpace::P1);
        let e2 = solve(&mesh, FemSpace::P2);
        let (o1, o2) = if k > 0 {
            let (p1, p2) = errs[k - 1];
            ((p1 / e1).log2(), (p2 / e2).log2())
        } else {
            (f64::NAN, f64::NAN)
        };
        errs.push((e1, e2));
        let line = format!(
            "h={h}: n={} rounds={} best_eps={:.3} q={:.4} h_err={:.3e} rel={:.3e} opp={:.3e} | p1 {:.3e} ({:.2}) p2 {:.3e} ({:.2}) [{:.0}s]",
            mesh.nodes.len(),
            stats.rounds,
            stats.best_epsilon,
            rep.q_avg,
            rep.h_err,
            rep.h_err / h,
            rep.opposite_edge_diff_mean / h,
            e1,
            o1,
            e2,
            o2,
            t0.elapsed().as_secs_f64()
        );
        println!("{line}");
        prev = Some(mesh);
    }
}
