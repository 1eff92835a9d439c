// Seed sweep at a single scratch level: quality spread of the coarse root.
use bubblemesh_core::bubbles::{BubbleSystem, OuterParams};
use bubblemesh_core::geometry::DomainGeometry;
use bubblemesh_core::metrics::mesh_report;
use bubblemesh_core::sizing::SizeField;
use bubblemesh_core::triangulate::delaunay;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let domain = args.get(1).map(|s| s.as_str()).unwrap_or("unit_circle");
    let h: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.2);
    let n_seeds: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10);
    let geom = DomainGeometry::preset(domain).unwrap();
    let size = SizeField::constant(h).unwrap();
    for seed in 0..n_seeds {
        let mut sys = BubbleSystem::initialize(&geom, &size, seed).unwrap();
        let stats = sys.outer_loop(&OuterParams::default()).unwrap();
        let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
        let rep = mesh_report(&mesh, &size).unwrap();
        println!(
            "seed={seed}: n={} rounds={} best_eps={:.3} q_avg={:.4} q_min={:.3} h_err={:.3e} var={:.2e} max={:.3e} mean={:.4}",
            mesh.nodes.len(),
            stats.rounds,
            stats.best_epsilon,
            rep.q_avg,
            rep.q_min,
            rep.h_err,
            rep.edge_var,
            rep.max_edge_err,
            rep.edge_mean,
        );
    }
}
