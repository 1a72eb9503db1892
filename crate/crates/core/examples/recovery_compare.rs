//! l0, l1 and lq recovery of the same planted sparse signal as sparsity grows.

use sparse_ric::harness::{gen_matrix, gen_sparse_signal, MatrixModel, SignalModel};
use sparse_ric::qfuncs::QValue;
use sparse_ric::solvers::{recover_and_compare, IrlsParams, Method, RecoveryProblem};

fn main() -> sparse_ric::Result<()> {
    let phi = gen_matrix(3, 8, 20, MatrixModel::Gaussian)?;
    let methods = [
        Method::L0,
        Method::L1,
        Method::Lq(QValue::half()),
        Method::Lq(QValue::new(0.2)?),
    ];
    let irls = IrlsParams::default();
    println!("k  method  q      exact  rel.error   objective");
    for k in 1..=4 {
        let x0 = gen_sparse_signal(100 + k as u64, 20, k, SignalModel::GaussianSupportUniform)?;
        let prob = RecoveryProblem::new(phi.clone(), phi.mul_vec(&x0))?;
        let report = recover_and_compare(&prob, &x0, &methods, &irls)?;
        for o in &report.outcomes {
            let q = o.q.map(|q| q.to_string()).unwrap_or_else(|| "-".into());
            println!(
                "{k}  {:<6}  {q:<5}  {:<5}  {:.3e}  {:.4}",
                o.method, o.exact, o.error, o.objective
            );
        }
    }
    Ok(())
}
