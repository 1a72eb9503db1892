//! Null space property checks: exact LP-based verdicts for l1 and sampled
//! counterexample search for q < 1.

use sparse_ric::harness::{gen_matrix, MatrixModel};
use sparse_ric::qfuncs::QValue;
use sparse_ric::solvers::{nsp_check, nsp_check_with, NspParams, NspStrategy};

fn main() -> sparse_ric::Result<()> {
    for seed in 0..6 {
        let phi = gen_matrix(seed, 6, 10, MatrixModel::Gaussian)?;
        for k in 1..=2 {
            let exact = nsp_check(&phi, k, QValue::one(), NspStrategy::ExhaustiveL1)?;
            let params = NspParams {
                seed,
                ..NspParams::default()
            };
            let heur = nsp_check_with(&phi, k, QValue::half(), NspStrategy::Heuristic, &params)?;
            println!(
                "seed {seed} k={k}: l1 {:?} (margin {:+.4}); q=1/2 search {:?} (margin {:+.4})",
                exact.status, exact.margin, heur.status, heur.margin
            );
        }
    }
    Ok(())
}
