// Scratch probe (not part of the public surface).
use bubblemesh_core::bubbles::{BubbleSystem, OuterParams};
use bubblemesh_core::fem::quadrature::{CENTROID, DEG2};
use bubblemesh_core::fem::sparse::jacobi_pcg;
use bubblemesh_core::fem::{
    assemble_poisson_rule, convergence_order, h1_norm_diff, interpolate, quadrature::QuadRule,
    FemSpace,
};
use bubblemesh_core::geometry::DomainGeometry;
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

fn solve(mesh: &TriMesh, space: FemSpace, rule: &QuadRule) -> Vec<f64> {
    let sys = assemble_poisson_rule(mesh, space, &f, &u, rule).unwrap();
    let (x, _) = jacobi_pcg(&sys.matrix, &sys.rhs, 1e-12, 10 * sys.rhs.len().max(1)).unwrap();
    sys.scatter(&x)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let levels: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let geom = DomainGeometry::preset("unit_circle").unwrap();
    let sizes = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let mut prev = [0.0; 2];
    let mut prev_h = 0.0;
    for (lvl, &h) in sizes.iter().take(levels).enumerate() {
        let size = SizeField::constant(h).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 42).unwrap();
        sys.outer_loop(&OuterParams::default()).unwrap();
        let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
        let mut errs = [0.0; 2];
        for (col, (space, rule)) in
            [(FemSpace::P1, &CENTROID), (FemSpace::P2, &DEG2)].iter().enumerate()
        {
            let u_h = solve(&mesh, *space, rule);
            let u_i = interpolate(&mesh, *space, u);
            errs[col] = h1_norm_diff(&mesh, *space, &u_h, &u_i);
        }
        let ord = |i: usize| {
            if lvl == 0 {
                "-".to_string()
            } else {
                format!("{:.2}", convergence_order(prev[i], errs[i], prev_h, h))
            }
        };
        println!("h={h}: p1 {:.3e} ({}) p2 {:.3e} ({})", errs[0], ord(0), errs[1], ord(1));
        prev = errs;
        prev_h = h;
    }
}
