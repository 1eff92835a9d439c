// Scratch pipeline probe (not part of the public surface).
use bubblemesh_core::bubbles::{BubbleSystem, OuterParams};
use bubblemesh_core::geometry::DomainGeometry;
use bubblemesh_core::metrics::mesh_report;
use bubblemesh_core::sizing::SizeField;
use bubblemesh_core::triangulate::delaunay;

fn run(domain: &str, h: f64) {
    let t0 = std::time::Instant::now();
    let geom = DomainGeometry::preset(domain).unwrap();
    let size = SizeField::constant(h).unwrap();
    let mut sys = BubbleSystem::initialize(&geom, &size, 42).unwrap();
    let n0 = sys.n_bubbles();
    let stats = sys.outer_loop(&OuterParams::default()).unwrap();
    let mesh = delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
    let rep = mesh_report(&mesh, &size).unwrap();
    println!(
        "{domain} h={h}: N0={n0} N={} rounds={} best={} ins={} del={} [{:?}]",
        sys.n_bubbles(),
        stats.rounds,
        stats.best_round,
        stats.n_inserted,
        stats.n_deleted,
        t0.elapsed()
    );
    println!("  eps: {:?}", stats.eps_history.iter().map(|e| (e * 1000.0).round() / 1000.0).collect::<Vec<_>>());
    println!("  pop: {:?} steps: {:?} conv: {:?}", stats.populations, stats.inner_steps, stats.inner_converged);
    println!(
        "  mesh: tris={} q_avg={:.4} q_min={:.3} edge_mean={:.4} edge_var={:.2e} h_err={:.2e} max_err={:.2e} opp={:.2e}",
        rep.n_tris, rep.q_avg, rep.q_min, rep.edge_mean, rep.edge_var, rep.h_err, rep.max_edge_err,
        rep.opposite_edge_diff_mean
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    if which == "all" || which == "tri" {
        run("equilateral_triangle", 0.1);
    }
    if which == "all" || which == "circ" {
        run("unit_circle", 0.1);
    }
    if which == "all" || which == "pent" {
        run("regular_pentagon", 0.1);
    }
    if which == "all" || which == "l" {
        run("l_shape", 0.1);
    }
}
