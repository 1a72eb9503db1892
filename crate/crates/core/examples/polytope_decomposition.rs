//! Writes a vector in the capped l1 ball as a convex combination of s-sparse
//! vectors that stay within the cap and the support of the input.

use sparse_ric::polytope::{decompose, PolytopeSpec};

fn main() -> sparse_ric::Result<()> {
    let spec = PolytopeSpec::new(1.0, 2)?;
    for v in [
        vec![0.9, -0.6, 0.3, 0.2],
        vec![0.5, 0.5, 0.5, 0.5],
        vec![1.0, 0.0, -0.4, 0.0],
    ] {
        let d = decompose(&v, &spec)?;
        d.verify(&v, &spec).expect("decomposition invariants");
        println!("v = {v:?}  (alpha = 1, s = 2): {} terms", d.terms.len());
        for t in &d.terms {
            println!("  {:.6} × {:?}", t.lambda, t.u);
        }
    }
    match decompose(&[1.0, 1.0, 1.0], &spec) {
        Err(e) => println!("outside the polytope: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
