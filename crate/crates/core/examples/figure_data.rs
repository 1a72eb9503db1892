//! Curves of p(q), c(q), g(q, k) and the δ_2k bound over q ∈ [0, 1], written as CSV files.

use sparse_ric::qfuncs::{fig_data, Figure};

fn main() -> sparse_ric::Result<()> {
    let dir = std::env::temp_dir().join("sparse-ric-figures");
    std::fs::create_dir_all(&dir)?;
    for (i, name) in [(1u8, "p"), (2, "c"), (3, "g"), (4, "delta2k")] {
        let data = fig_data(Figure::from_index(i)?, 101)?;
        let mut text = String::from("q,value\n");
        for (q, v) in &data {
            text.push_str(&format!("{q},{v}\n"));
        }
        let path = dir.join(format!("{name}.csv"));
        std::fs::write(&path, text)?;
        let (first, last) = (data[0], data[data.len() - 1]);
        println!(
            "{name:8} {:>3} points  q=0: {:.6}  q=1: {:.6}  -> {}",
            data.len(),
            first.1,
            last.1,
            path.display()
        );
    }
    Ok(())
}
