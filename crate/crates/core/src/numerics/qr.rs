use super::{dot, DenseMatrix};
use crate::error::{domain, Error, Result};

/// Normal-equation pivot threshold: a column is dependent when
/// `R_ii^2 <= 1e-12 * max_j ||a_j||^2`.
const PIVOT_TOL: f64 = 1e-12;

/// Full Householder factorization `A P = Q R`.
#[derive(Debug, Clone)]
pub struct Qr {
    /// Orthogonal `m x m` factor.
    pub q: DenseMatrix,
    /// Upper-trapezoidal `m x n` factor.
    pub r: DenseMatrix,
    /// Column permutation: column `j` of `A P` is column `perm[j]` of `A`.
    pub perm: Vec<usize>,
}

impl Qr {
    /// Numerical rank: leading diagonal entries of `R` above the pivot threshold.
    pub fn rank(&self, a_col_sq_max: f64) -> usize {
        let k = self.r.rows().min(self.r.cols());
        (0..k)
            .take_while(|&i| self.r[(i, i)].powi(2) > PIVOT_TOL * a_col_sq_max)
            .count()
    }
}

/// Householder QR with optional greedy column pivoting (largest remaining norm first).
pub fn householder_qr(a: &DenseMatrix, pivot: bool) -> Qr {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);

    for k in 0..steps {
        if pivot {
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..n {
                let norm: f64 = (k..m).map(|i| r[(i, j)].powi(2)).sum();
                if norm > best_norm {
                    best_norm = norm;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
        }

        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = dot(&v, &v).sqrt();
        if alpha == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * alpha;
        let vnorm2 = dot(&v, &v);

        // R <- (I - 2 v vᵀ / vᵀv) R on rows k..m
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                r[(i, j)] -= s * v[i - k];
            }
        }
        r[(k, k)] = -sign * alpha;
        for i in (k + 1)..m {
            r[(i, k)] = 0.0;
        }
        // Q <- Q H
        for row in 0..m {
            let s: f64 = (k..m).map(|i| q[(row, i)] * v[i - k]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                q[(row, i)] -= s * v[i - k];
            }
        }
    }
    Qr { q, r, perm }
}

fn max_col_sq(a: &DenseMatrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].powi(2)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Minimizes `||A x - b||_2` for `A` of full column rank.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return domain(format!("right-hand side has length {}, expected {m}", b.len()));
    }
    if m < n {
        return Err(Error::RankDeficient(format!(
            "{m}x{n} system cannot have full column rank"
        )));
    }
    let qr = householder_qr(a, false);
    let scale = max_col_sq(a);
    if scale == 0.0 || qr.rank(scale) < n {
        return Err(Error::RankDeficient("columns are linearly dependent".into()));
    }
    let qtb = qr.q.tr_mul_vec(b);
    Ok(back_substitute(&qr.r, &qtb[..n]))
}

/// Minimum Euclidean norm solution of the consistent system `B x = y` with `B`
/// of full row rank.
pub fn min_norm_solve(b: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (b.rows(), b.cols());
    if y.len() != m {
        return domain(format!("right-hand side has length {}, expected {m}", y.len()));
    }
    if m > n {
        return Err(Error::RankDeficient(format!(
            "{m}x{n} system cannot have full row rank"
        )));
    }
    // Bᵀ = Q R  =>  x = Q_1 R⁻ᵀ y
    let bt = b.transpose();
    let qr = householder_qr(&bt, false);
    let scale = max_col_sq(&bt);
    if scale == 0.0 || qr.rank(scale) < m {
        return Err(Error::RankDeficient("rows are linearly dependent".into()));
    }
    let mut z = vec![0.0; m];
    for i in 0..m {
        let s: f64 = (0..i).map(|j| qr.r[(j, i)] * z[j]).sum();
        z[i] = (y[i] - s) / qr.r[(i, i)];
    }
    Ok((0..n).map(|row| (0..m).map(|j| qr.q[(row, j)] * z[j]).sum()).collect())
}

/// Orthonormal basis (as columns) of the null space of a wide matrix.
pub fn null_space_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = (a.rows(), a.cols());
    if m >= n {
        return domain(format!("null space basis requires m < n, got {m}x{n}"));
    }
    // Aᵀ P = Q R; the trailing n - rank columns of Q span range(Aᵀ)^⊥ = N(A).
    let at = a.transpose();
    let qr = householder_qr(&at, true);
    let scale = max_col_sq(&at);
    let rank = if scale == 0.0 { 0 } else { qr.rank(scale) };
    let cols: Vec<usize> = (rank..n).collect();
    Ok(qr.q.select_columns(&cols))
}

fn back_substitute(r: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (rhs[i] - s) / r[(i, i)];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::norm2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        DenseMatrix::new(m, n, data).unwrap()
    }

    #[test]
    fn qr_reconstructs_with_pivoting() {
        let a = gaussian(5, 7, 1);
        let qr = householder_qr(&a, true);
        let qtq = qr.q.transpose().matmul(&qr.q);
        let recon = qr.q.matmul(&qr.r);
        let ap = a.select_columns(&qr.perm);
        for i in 0..5 {
            for j in 0..5 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((qtq[(i, j)] - e).abs() < 1e-13);
            }
            for j in 0..7 {
                assert!((recon[(i, j)] - ap[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn least_squares_identity_and_consistent() {
        let x = least_squares(&DenseMatrix::identity(3), &[1.0, -2.0, 0.5]).unwrap();
        for (a, b) in x.iter().zip([1.0, -2.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
        let a = gaussian(7, 3, 2);
        let truth = [0.3, -1.2, 2.0];
        let b = a.mul_vec(&truth);
        let x = least_squares(&a, &b).unwrap();
        for (got, want) in x.iter().zip(truth) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn least_squares_residual_is_orthogonal_to_columns() {
        let a = gaussian(9, 4, 3);
        let b: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let x = least_squares(&a, &b).unwrap();
        let ax = a.mul_vec(&x);
        let resid: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let at_r = a.tr_mul_vec(&resid);
        assert!(norm2(&at_r) < 1e-9);
    }

    #[test]
    fn least_squares_flags_rank_deficiency() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(
            least_squares(&a, &[1.0, 2.0, 3.0]),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn min_norm_solution_is_feasible_and_in_row_space() {
        let b = gaussian(3, 8, 4);
        let y = [1.0, 0.0, -1.0];
        let x = min_norm_solve(&b, &y).unwrap();
        let bx = b.mul_vec(&x);
        for (u, v) in bx.iter().zip(y) {
            assert!((u - v).abs() < 1e-12);
        }
        // x ⟂ N(B)
        let ns = null_space_basis(&b).unwrap();
        assert!(norm2(&ns.tr_mul_vec(&x)) < 1e-12);
    }

    #[test]
    fn null_space_of_row_vector() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let ns = null_space_basis(&a).unwrap();
        assert_eq!((ns.rows(), ns.cols()), (2, 1));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((ns[(0, 0)].abs() - s).abs() < 1e-15);
        assert!((ns[(0, 0)] + ns[(1, 0)]).abs() < 1e-15);
        assert!(null_space_basis(&DenseMatrix::identity(2)).is_err());
    }

    #[test]
    fn null_space_of_random_and_rank_deficient() {
        let a = gaussian(3, 6, 5);
        let ns = null_space_basis(&a).unwrap();
        assert_eq!(ns.cols(), 3);
        let defect = a.matmul(&ns);
        assert!(defect.max_abs() < 1e-10);
        let gram = ns.transpose().matmul(&ns);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-10);
            }
        }
        // duplicate row: rank 2, null space of dimension 3 for a 3x5
        let mut rows: Vec<Vec<f64>> = (0..2).map(|i| gaussian(1, 5, 10 + i).row(0).to_vec()).collect();
        rows.push(rows[0].clone());
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let ns = null_space_basis(&a).unwrap();
        assert_eq!(ns.cols(), 3);
        assert!(a.matmul(&ns).max_abs() < 1e-10);
    }
}
