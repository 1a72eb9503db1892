//! Sufficient RIC conditions for several (q, k, t) and the two limit tables.

use sparse_ric::qfuncs::{table2, table2_csv, table3, table3_csv, theorem1_bound, theorem2_bound, BoundSpec, QValue};

fn main() -> sparse_ric::Result<()> {
    println!("q      k  t   order  bound      formula");
    for q in [
        QValue::zero_plus(),
        QValue::new(0.3)?,
        QValue::half(),
        QValue::new(0.9)?,
        QValue::one(),
    ] {
        for k in [1, 3, 5] {
            for t in [2.0, 3.0] {
                let r = theorem1_bound(&BoundSpec::new(q, k, t, 2.0)?)?;
                println!(
                    "{:<6} {k}  {t}  δ_{:<4} {:.6}   {}",
                    q.to_string(),
                    r.ric_order,
                    r.bound,
                    r.formula
                );
            }
        }
    }
    let r = theorem2_bound(QValue::half(), 3)?;
    println!("\nδ_{} < {:.6} ({})", r.ric_order, r.bound, r.formula);

    println!("\n{}", table2_csv(&table2(4)?));
    println!("{}", table3_csv(&table3(6)?));
    Ok(())
}
