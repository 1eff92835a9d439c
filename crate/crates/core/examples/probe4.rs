// Scratch probe (not part of the public surface).
use bubblemesh_core::bubbles::{BubbleSystem, OuterParams};
use bubblemesh_core::fem::quadrature::{DEG2, DEG6};
use bubblemesh_core::fem::sparse::jacobi_pcg;
use bubblemesh_core::fem::{
    assemble_poisson_rule, convergence_order, h1_norm_diff, interpolate, quadrature::QuadRule,
    BenchmarkProblem, FemSpace,
};
use bubblemesh_core::geometry::DomainGeometry;
use bubblemesh_core::sizing::SizeField;
use bubblemesh_core::triangulate::{delaunay, TriMesh};

fn solve(mesh: &TriMesh, space: FemSpace, p: &BenchmarkProblem, rule: &QuadRule) -> Vec<f64> {
    let sys = assemble_poisson_rule(mesh, space, &p.f, &p.u, rule).unwrap();
    let (x, _) = jacobi_pcg(&sys.matrix, &sys.rhs, 1e-12, 10 * sys.rhs.len().max(1)).unwrap();
    sys.scatter(&x)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let domain = args.get(1).map(String::as_str).unwrap_or("equilateral_triangle");
    let levels: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(4);
    let geom = DomainGeometry::preset(domain).unwrap();
    let p = BenchmarkProblem::for_domain(domain).unwrap();
    let sizes = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let mut prev: Option<[f64; 4]> = None;
    let mut prev_h = 0.0;
    for &h in sizes.iter().take(levels) {
        let size = SizeField::constant(h).unwrap();
        let mut sys = BubbleSystem::initialize(&geom, &size, 42).unwrap();
        sys.outer_loop(&OuterParams::default()).unwrap();
        let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();

        let mut errs = [0.0; 4];
        for (col, (space, rule)) in [
            (FemSpace::P1, &DEG6),
            (FemSpace::P1, &CENTROID_RULE),
            (FemSpace::P2, &EDGE_MID),
            (FemSpace::P2, &DEG2),
        ]
        .iter()
        .enumerate()
        {
            let u_h = solve(&mesh, *space, &p, rule);
            let u_i = interpolate(&mesh, *space, p.u);
            errs[col] = h1_norm_diff(&mesh, *space, &u_h, &u_i);
        }
        let ord = |i: usize| {
            prev.map(|pv| format!("{:.2}", convergence_order(pv[i], errs[i], prev_h, h)))
                .unwrap_or_else(|| "-".into())
        };
        println!(
            "h={h}: p1_exact {:.3e} ({}) p1_cent {:.3e} ({}) p2_edgemid {:.3e} ({}) p2_deg2 {:.3e} ({})",
            errs[0], ord(0), errs[1], ord(1), errs[2], ord(2), errs[3], ord(3)
        );
        prev = Some(errs);
        prev_h = h;
    }
}

const CENTROID_RULE: QuadRule = bubblemesh_core::fem::quadrature::CENTROID;

const EDGE_MID: QuadRule = QuadRule {
    points: &[[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    degree: 2,
};
