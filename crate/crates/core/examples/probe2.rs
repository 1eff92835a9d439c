// Scratch probe: parameter sweep for outer-loop robustness across seeds.
use bubblemesh_core::bubbles::{BubbleSystem, InnerParams, OuterParams};
use bubblemesh_core::geometry::DomainGeometry;
use bubblemesh_core::metrics::mesh_report;
use bubblemesh_core::sizing::SizeField;
use bubblemesh_core::triangulate::delaunay;

fn main() {
    let geom = DomainGeometry::preset("unit_circle").unwrap();
    let size = SizeField::constant(0.1).unwrap();
    for churn in [0.05f64, 0.10] {
        for td in [0.05f64, 0.08] {
            for ti in [-0.35f64, -0.45, -0.55] {
                let mut traj_pass = 0;
                let mut mesh_pass = 0;
                let mut lines = Vec::new();
                for seed in 0..6u64 {
                    let mut sys = BubbleSystem::initialize(&geom, &size, seed).unwrap();
                    let params = OuterParams {
                        inner: InnerParams::default(),
                        max_rounds: 20,
                        churn_frac: churn,
                        theta_del: td,
                        theta_ins: ti,
                    };
                    let stats = sys.outer_loop(&params).unwrap();
                    let eps = &stats.eps_history;
                    let ok = eps.len() >= 3
                        && eps[1] < eps[0]
                        && eps[2] < eps[1]
                        && stats.best_epsilon <= 0.6 * eps[0];
                    if ok {
                        traj_pass += 1;
                    }
                    let mesh =
                        delaunay(&sys.positions()).unwrap().clip_to_domain(&geom).unwrap();
                    let rep = mesh_report(&mesh, &size).unwrap();
                    let m_ok = rep.edge_mean >= 0.09
                        && rep.edge_mean <= 0.105
                        && rep.h_err <= 0.014
                        && rep.max_edge_err <= 0.03
                        && rep.edge_var <= 1e-4;
                    if m_ok {
                        mesh_pass += 1;
                    }
                    lines.push(format!(
                        "    s{seed} {}{} {}",
                        if ok { 'T' } else { '.' },
                        if m_ok { 'M' } else { '.' },
                        eps.iter().map(|e| format!("{e:.2}")).collect::<Vec<_>>().join(" ")
                    ));
                }
                println!("churn {churn} td {td} ti {ti}: traj {traj_pass}/6 mesh {mesh_pass}/6");
                for l in lines {
                    println!("{l}");
                }
            }
        }
    }
}
