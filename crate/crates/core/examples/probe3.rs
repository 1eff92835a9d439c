// Scratch probe (not part of the public surface).
use bubblemesh_core::harness::{run_experiment, summary_text, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let domain = args.get(1).map(String::as_str).unwrap_or("unit_circle");
    let n_sizes: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut config = ExperimentConfig::new(domain);
    config.sizes.truncate(n_sizes);
    let t0 = std::time::Instant::now();
    let report = run_experiment(&config).unwrap();
    println!("{}", summary_text(&report));
    println!("[{:?}]", t0.elapsed());
}
