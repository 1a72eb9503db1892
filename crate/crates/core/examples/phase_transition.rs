//! Empirical recovery rate against sparsity for l1 and lq, printed as CSV.

use sparse_ric::harness::{phase_csv, run_phase, ExperimentConfig};
use sparse_ric::qfuncs::QValue;
use sparse_ric::solvers::Method;

fn main() -> sparse_ric::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let methods = vec![Method::L1, Method::Lq(QValue::half())];
    let config = ExperimentConfig::new(2024, 12, 24, 7, trials, methods);
    let cells = run_phase(&config)?;
    print!("{}", phase_csv(&cells));
    Ok(())
}
