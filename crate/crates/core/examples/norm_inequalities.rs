//! Residuals of the lq/l1 norm inequalities on random and extremal vectors, and
//! the tail chain that underlies the recovery bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_ric::harness::gen_test_vector;
use sparse_ric::norms::{lemma2_residual, lemma2_witness, prop1_check, tail_chain};
use sparse_ric::qfuncs::QValue;

fn main() -> sparse_ric::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [0.1, 0.5, 0.9, 1.0] {
        let q = QValue::new(q)?;
        let mut min_l1 = f64::INFINITY;
        let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
        for i in 0..20_000 {
            let x = gen_test_vector(7, i, rng.random_range(1..=32));
            min_l1 = min_l1.min(lemma2_residual(&x, q)?);
            if x.iter().any(|v| *v != 0.0) {
                let (l, h) = prop1_check(&x, q)?;
                lo = lo.min(l);
                hi = hi.min(h);
            }
        }
        let w = lemma2_witness(8, q)?;
        println!(
            "q={:<4} min residuals: l1 bound {min_l1:.3e}, lower {lo:.3e}, upper {hi:.3e}; witness {:?} -> {:.1e}",
            q.to_string(),
            w,
            lemma2_residual(&w, q)?
        );
    }

    let h = [3.0, -2.5, 0.4, 0.3, -0.2, 0.1, 0.05, 0.0];
    let chain = tail_chain(&h, 2, QValue::half())?;
    println!("\ntail chain for {h:?}, k=2, q=1/2:");
    println!(
        "  applicable={} alpha={:.4} g={} tail_l1={:.4} slack={:.4}",
        chain.applicable, chain.alpha, chain.g, chain.tail_l1, chain.slack
    );
    println!("  block residuals {:?}", chain.block_residuals);
    Ok(())
}
