use super::DenseMatrix;
use crate::error::{domain, Result};

/// Largest symmetric matrix accepted by the Jacobi kernels.
pub const MAX_EIG_DIM: usize = 64;

const SYMMETRY_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `G = V diag(values) Vᵀ`, values ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: DenseMatrix,
}

/// Cyclic Jacobi iteration on a symmetric matrix.
///
/// Sweeps over all off-diagonal pairs, annihilating each with a plane
/// rotation, until the off-diagonal Frobenius norm drops to
/// `1e-14 * ||G||_F`.
pub fn sym_eigen(g: &DenseMatrix) -> Result<SymEigen> {
    check_symmetric(g)?;
    let n = g.rows();
    let mut a = g.clone();
    // symmetrize exactly; rotations assume a[(p,q)] == a[(q,p)]
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = avg;
            a[(j, i)] = avg;
        }
    }
    let mut v = DenseMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = OFF_DIAGONAL_TOL * scale;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Rutishauser's formulation: t = sgn(theta) / (|theta| + sqrt(theta^2 + 1))
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = v.select_columns(&order);
    Ok(SymEigen { values, vectors })
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn sym_eig_extremes(g: &DenseMatrix) -> Result<(f64, f64)> {
    let n = g.rows();
    if n == 1 && g.cols() == 1 {
        return Ok((g[(0, 0)], g[(0, 0)]));
    }
    if n == 2 && g.cols() == 2 {
        check_symmetric(g)?;
        // closed form is both faster and exact to rounding
        let (a, b, d) = (g[(0, 0)], 0.5 * (g[(0, 1)] + g[(1, 0)]), g[(1, 1)]);
        let mean = 0.5 * (a + d);
        let radius = (0.5 * (a - d)).hypot(b);
        return Ok((mean - radius, mean + radius));
    }
    let eig = sym_eigen(g)?;
    Ok((eig.values[0], eig.values[n - 1]))
}

/// Largest singular value, from the extreme eigenvalue of the smaller Gram matrix.
pub fn op_norm(a: &DenseMatrix) -> Result<f64> {
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let gram = if a.rows() < a.cols() {
        a.matmul(&a.transpose())
    } else {
        a.transpose().matmul(a)
    };
    let (_, lmax) = sym_eig_extremes(&gram)?;
    Ok(lmax.max(0.0).sqrt())
}

fn check_symmetric(g: &DenseMatrix) -> Result<()> {
    if g.rows() != g.cols() {
        return domain(format!("expected a square matrix, got {}x{}", g.rows(), g.cols()));
    }
    if g.rows() > MAX_EIG_DIM {
        return domain(format!(
            "symmetric eigensolver is capped at {MAX_EIG_DIM}x{MAX_EIG_DIM}"
        ));
    }
    if !g.is_symmetric(SYMMETRY_TOL) {
        return domain("matrix is not symmetric");
    }
    Ok(())
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.random_range(-1.0..1.0);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    #[test]
    fn identity_and_diagonal() {
        for n in 1..6 {
            assert_eq!(sym_eig_extremes(&DenseMatrix::identity(n)).unwrap(), (1.0, 1.0));
        }
        let (lo, hi) = sym_eig_extremes(&DenseMatrix::diag(&[2.0, 5.0, 3.0])).unwrap();
        assert_eq!((lo, hi), (2.0, 5.0));
    }

    #[test]
    fn two_by_two_matches_quadratic_formula() {
        for c in [-0.9, -0.3, 0.0, 0.25, 0.7] {
            let g = DenseMatrix::from_rows(&[vec![1.0, c], vec![c, 1.0]]).unwrap();
            let (lo, hi) = sym_eig_extremes(&g).unwrap();
            assert!((lo - (1.0 - f64::abs(c))).abs() < 1e-15);
            assert!((hi - (1.0 + f64::abs(c))).abs() < 1e-15);
            // the general path must agree with the closed form
            let eig = sym_eigen(&g).unwrap();
            assert!((eig.values[0] - lo).abs() < 1e-14);
            assert!((eig.values[1] - hi).abs() < 1e-14);
        }
    }

    // Roots of the characteristic cubic via the trigonometric method.
    fn cubic_eigenvalues(g: &DenseMatrix) -> [f64; 3] {
        let p1 = g[(0, 1)].powi(2) + g[(0, 2)].powi(2) + g[(1, 2)].powi(2);
        let q = (g[(0, 0)] + g[(1, 1)] + g[(2, 2)]) / 3.0;
        let p2 = (g[(0, 0)] - q).powi(2) + (g[(1, 1)] - q).powi(2) + (g[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = g.clone();
        for i in 0..3 {
            b[(i, i)] -= q;
        }
        let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)])
            - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
            + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
        let r = (det / p.powi(3) / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let e2 = 3.0 * q - e1 - e3;
        let mut out = [e1, e2, e3];
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn random_three_by_three_matches_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_symmetric(3, &mut rng);
            let eig = sym_eigen(&g).unwrap();
            let roots = cubic_eigenvalues(&g);
            for (a, b) in eig.values.iter().zip(roots.iter()) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_symmetric(12, &mut rng);
        let eig = sym_eigen(&g).unwrap();
        let v = &eig.vectors;
        let recon = v.matmul(&DenseMatrix::diag(&eig.values)).matmul(&v.transpose());
        for i in 0..12 {
            for j in 0..12 {
                assert!((recon[(i, j)] - g[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        let g = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(sym_eig_extremes(&g).is_err());
        assert!(sym_eigen(&DenseMatrix::identity(MAX_EIG_DIM + 1)).is_err());
    }

    fn power_iteration_norm(a: &DenseMatrix) -> f64 {
        let ata = a.transpose().matmul(a);
        let mut x = vec![1.0; a.cols()];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += 0.01 * i as f64;
        }
        let mut lambda = 0.0;
        for _ in 0..10_000 {
            let y = ata.mul_vec(&x);
            let n = super::super::norm2(&y);
            lambda = n / super::super::norm2(&x);
            x = y.iter().map(|v| v / n).collect();
        }
        lambda.sqrt()
    }

    #[test]
    fn op_norm_cases() {
        assert_eq!(op_norm(&DenseMatrix::zeros(3, 2)).unwrap(), 0.0);
        assert!((op_norm(&DenseMatrix::diag(&[3.0, -7.0])).unwrap() - 7.0).abs() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, c) in [(4, 6), (6, 4), (5, 5)] {
            let data = (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = DenseMatrix::new(r, c, data).unwrap();
            let got = op_norm(&a).unwrap();
            assert!((got - power_iteration_norm(&a)).abs() < 1e-8 * got);
            assert!((got - op_norm(&a.transpose()).unwrap()).abs() < 1e-10 * got);
        }
    }
}
