use serde::Serialize;

use super::DenseMatrix;
use crate::error::{domain, Result};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// `min cᵀx  s.t.  A x = b, x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: DenseMatrix,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: DenseMatrix, rhs: Vec<f64>) -> Result<Self> {
        if objective.len() != constraints.cols() {
            return domain(format!(
                "objective has {} coefficients but the constraint matrix has {} columns",
                objective.len(),
                constraints.cols()
            ));
        }
        if rhs.len() != constraints.rows() {
            return domain(format!(
                "right-hand side has {} entries but the constraint matrix has {} rows",
                rhs.len(),
                constraints.rows()
            ));
        }
        if objective.iter().chain(&rhs).any(|v| !v.is_finite()) {
            return domain("non-finite LP data");
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal basic solution; empty unless `status` is optimal.
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    /// `m` rows of `B⁻¹ [A | I | b]`.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Total structural + artificial columns; rhs lives at index `width`.
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (row, &bv) in self.t.iter().zip(&self.basis) {
            let cb = cost[bv];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Primal simplex with Bland's rule over columns `< allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..allowed).find(|&j| d[j] < -PIVOT_TOL && !self.basis.contains(&j)) else {
                return Ok(true);
            };
            let rhs = self.width;
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = row[enter];
                if a > PIVOT_TOL {
                    let ratio = row[rhs] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= PIVOT_TOL * (1.0 + br.abs());
                            if (!tie && ratio < br) || (tie && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter),
                None => return Ok(false),
            }
        }
        domain("simplex pivot limit reached")
    }
}

/// Dense two-phase simplex method with Bland's anti-cycling rule.
pub fn simplex_solve(lp: &LinearProgram) -> Result<LpSolution> {
    let a = &lp.constraints;
    let (m, n) = (a.rows(), a.cols());
    let width = n + m;

    let mut t = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for j in 0..n {
            row[j] = sign * a[(i, j)];
        }
        row[n + i] = 1.0;
        row[width] = sign * lp.rhs[i];
        t.push(row);
    }
    let mut tab = Tableau {
        t,
        basis: (n..n + m).collect(),
        width,
    };

    // phase 1: minimize the sum of artificials
    let mut phase1 = vec![0.0; width + 1];
    for c in phase1.iter_mut().take(width).skip(n) {
        *c = 1.0;
    }
    tab.optimize(&phase1, width)?;
    let infeasibility: f64 = tab
        .t
        .iter()
        .zip(&tab.basis)
        .filter(|(_, &b)| b >= n)
        .map(|(row, _)| row[width])
        .sum();
    let b_scale = 1.0 + lp.rhs.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
    if infeasibility > 1e-9 * b_scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
        });
    }

    // drive remaining (zero-level) artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            let col = (0..n).find(|&j| tab.t[i][j].abs() > 1e-9);
            match col {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut cost = lp.objective.clone();
    cost.resize(width + 1, 0.0);
    if !tab.optimize(&cost, n)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NEG_INFINITY,
        });
    }

    let mut x = vec![0.0; n];
    for (row, &bv) in tab.t.iter().zip(&tab.basis) {
        if bv < n {
            x[bv] = row[width].max(0.0);
        }
    }
    let objective = x.iter().zip(&lp.objective).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lp(c: Vec<f64>, rows: &[Vec<f64>], b: Vec<f64>) -> LinearProgram {
        LinearProgram::new(c, DenseMatrix::from_rows(rows).unwrap(), b).unwrap()
    }

    #[test]
    fn simple_equality() {
        let sol = simplex_solve(&lp(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![1.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let sol = simplex_solve(&lp(vec![1.0, 1.0], &[vec![1.0, 1.0]], vec![-1.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let sol = simplex_solve(&lp(vec![-1.0, 0.0], &[vec![1.0, -1.0]], vec![0.0])).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let sol = simplex_solve(&lp(
            vec![2.0, 1.0, 3.0],
            &[vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]],
            vec![1.0, 2.0],
        ))
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-12);
        assert_eq!(sol.x, vec![0.0, 1.0, 0.0]);
    }

    // Independent oracle: enumerate every basis, solve by Gaussian elimination,
    // keep the best nonnegative basic solution.
    fn vertex_enumeration(a: &DenseMatrix, b: &[f64], c: &[f64]) -> Option<f64> {
        let (m, n) = (a.rows(), a.cols());
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            let mut aug: Vec<Vec<f64>> = (0..m)
                .map(|i| idx.iter().map(|&j| a[(i, j)]).chain([b[i]]).collect())
                .collect();
            let mut ok = true;
            for col in 0..m {
                let p = (col..m)
                    .max_by(|&x, &y| aug[x][col].abs().total_cmp(&aug[y][col].abs()))
                    .unwrap();
                if aug[p][col].abs() < 1e-10 {
                    ok = false;
                    break;
                }
                aug.swap(col, p);
                for r in 0..m {
                    if r != col {
                        let f = aug[r][col] / aug[col][col];
                        for k in col..=m {
                            aug[r][k] -= f * aug[col][k];
                        }
                    }
                }
            }
            if ok {
                let xb: Vec<f64> = (0..m).map(|i| aug[i][m] / aug[i][i]).collect();
                if xb.iter().all(|&v| v >= -1e-9) {
                    let obj: f64 = idx.iter().zip(&xb).map(|(&j, v)| c[j] * v).sum();
                    best = Some(best.map_or(obj, |bst: f64| bst.min(obj)));
                }
            }
            // next combination
            let mut i = m;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < n - m + i {
                    idx[i] += 1;
                    for k in (i + 1)..m {
                        idx[k] = idx[k - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for _ in 0..300 {
            let m = rng.random_range(1..=3);
            let n = rng.random_range(m + 1..=6);
            let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = DenseMatrix::new(m, n, data).unwrap();
            // feasible by construction
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let b = a.mul_vec(&x0);
            // positive costs keep the program bounded
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
            let sol = simplex_solve(&LinearProgram::new(c.clone(), a.clone(), b.clone()).unwrap()).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal);
            let oracle = vertex_enumeration(&a, &b, &c).unwrap();
            assert!(
                (sol.objective - oracle).abs() < 1e-8 * (1.0 + oracle.abs()),
                "{} vs {oracle}",
                sol.objective
            );
            let resid = a.mul_vec(&sol.x);
            for (u, v) in resid.iter().zip(&b) {
                assert!((u - v).abs() < 1e-9);
            }
            checked += 1;
        }
        assert_eq!(checked, 300);
    }
}
