//! Exact RIC/ROC of small Gaussian matrices and certification against the sufficient conditions.

use sparse_ric::harness::{gen_matrix, MatrixModel};
use sparse_ric::qfuncs::{BoundSpec, QValue};
use sparse_ric::rip::{certify, ric, ric_sequence, roc, roc_vs_ric_probe, Condition};

fn main() -> sparse_ric::Result<()> {
    let mut phi = gen_matrix(42, 8, 16, MatrixModel::Gaussian)?;
    phi.normalize_columns();

    for (k, d) in ric_sequence(&phi, 4)?.iter().enumerate() {
        println!("δ_{} = {d:.6}", k + 1);
    }
    let r = ric(&phi, 2)?;
    println!("δ_2 attained on columns {:?}", r.witness_support);
    let t = roc(&phi, 1, 2)?;
    println!("θ_1,2 = {:.6}  witness {:?}", t.theta, t.witness);
    let p = roc_vs_ric_probe(&phi, 2)?;
    println!(
        "θ_2,2 = {:.4} <= {} · δ_2 = {:.4}? {}",
        p.theta,
        p.factor,
        p.factor * p.delta,
        p.holds
    );

    for (q, which) in [
        (QValue::one(), Condition::Corollary1),
        (QValue::half(), Condition::Theorem1),
        (QValue::half(), Condition::Tau),
    ] {
        let spec = BoundSpec::new(q, 1, 2.0, 2.0)?;
        let c = certify(&phi, &spec, which)?;
        println!(
            "{which:?} q={q}: need δ_{} < {:.4}, measured {:.4} -> {:?}",
            c.bound.ric_order, c.bound.bound, c.measured_delta, c.verdict
        );
    }

    let mut tall = gen_matrix(42, 14, 16, MatrixModel::Gaussian)?;
    tall.normalize_columns();
    let c = certify(
        &tall,
        &BoundSpec::new(QValue::one(), 1, 2.0, 2.0)?,
        Condition::Corollary1,
    )?;
    println!("14x16: δ_2 = {:.4} -> {:?}", c.measured_delta, c.verdict);
    Ok(())
}
