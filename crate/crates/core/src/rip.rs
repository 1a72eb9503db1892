//! Exact restricted isometry and restricted orthogonality constants by
//! exhaustive support enumeration, and certification of the sufficient
//! recovery conditions from [`crate::qfuncs`] against them.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::{op_norm, sym_eig_extremes, DenseMatrix, MAX_EIG_DIM};
use crate::qfuncs::{corollary1_bound, tau_bound, theorem1_bound, theorem2_bound, BoundResult, BoundSpec};

/// Default cap on the number of supports (or support pairs) examined.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

/// Supports handed to one rayon task.
const CHUNK: u128 = 2048;

/// `RIC_BUDGET` if set to a valid integer, otherwise [`DEFAULT_BUDGET`].
pub fn default_budget() -> u128 {
    std::env::var("RIC_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
fn unrank(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut x = 0;
    for i in 0..k {
        loop {
            let count = binomial(n - x - 1, k - i - 1);
            if rank < count {
                break;
            }
            rank -= count;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    out
}

/// Advances to the next `k`-subset of `0..n` in lexicographic order.
fn next_subset(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Larger value wins; equal values go to the lexicographically smaller key.
fn better<K: Ord>(a: (f64, K), b: (f64, K)) -> (f64, K) {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Parallel arg-max of `f` over all `k`-subsets of `0..n`. Deterministic.
fn max_over_subsets<F>(n: usize, k: usize, f: F) -> Result<(f64, Vec<usize>)>
where
    F: Fn(&[usize]) -> Result<(f64, Vec<usize>)> + Sync,
{
    let total = binomial(n, k);
    let chunks = total.div_ceil(CHUNK);
    (0..chunks as u64)
        .into_par_iter()
        .map(|c| {
            let start = c as u128 * CHUNK;
            let len = CHUNK.min(total - start);
            let mut s = unrank(n, k, start);
            let mut best: Option<(f64, Vec<usize>)> = None;
            for step in 0..len {
                let cand = f(&s)?;
                best = Some(match best {
                    None => cand,
                    Some(b) => better(b, cand),
                });
                if step + 1 < len {
                    next_subset(&mut s, n);
                }
            }
            Ok::<_, Error>(best)
        })
        .try_reduce(
            || None,
            |a, b| {
                Ok(match (a, b) {
                    (Some(a), Some(b)) => Some(better(a, b)),
                    (a, None) => a,
                    (None, b) => b,
                })
            },
        )?
        .ok_or_else(|| Error::Domain("no supports to enumerate".into()))
}

fn check_budget(required: u128, budget: u128) -> Result<()> {
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicResult {
    pub k: usize,
    pub delta: f64,
    pub witness_support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocResult {
    pub k1: usize,
    pub k2: usize,
    pub theta: f64,
    pub witness: (Vec<usize>, Vec<usize>),
}

/// `max(λ_max(G_S) - 1, 1 - λ_min(G_S))` for the Gram submatrix on `s`.
pub fn support_deviation(phi: &DenseMatrix, s: &[usize]) -> Result<f64> {
    let (lmin, lmax) = sym_eig_extremes(&phi.gram_block(s, s))?;
    Ok((lmax - 1.0).max(1.0 - lmin))
}

pub fn ric(phi: &DenseMatrix, k: usize) -> Result<RicResult> {
    ric_with_budget(phi, k, default_budget())
}

pub fn ric_with_budget(phi: &DenseMatrix, k: usize, budget: u128) -> Result<RicResult> {
    let n = phi.cols();
    if k == 0 || k > n {
        return domain(format!("RIC order must lie in 1..={n}, got {k}"));
    }
    if k > MAX_EIG_DIM {
        return domain(format!("RIC order {k} exceeds the eigensolver limit {MAX_EIG_DIM}"));
    }
    check_budget(binomial(n, k), budget)?;
    let (delta, witness_support) = max_over_subsets(n, k, |s| Ok((support_deviation(phi, s)?, s.to_vec())))?;
    Ok(RicResult {
        k,
        delta,
        witness_support,
    })
}

pub fn roc(phi: &DenseMatrix, k1: usize, k2: usize) -> Result<RocResult> {
    roc_with_budget(phi, k1, k2, default_budget())
}

pub fn roc_with_budget(phi: &DenseMatrix, k1: usize, k2: usize, budget: u128) -> Result<RocResult> {
    let n = phi.cols();
    if k1 == 0 || k2 == 0 || k1 + k2 > n {
        return domain(format!(
            "ROC orders need k1, k2 >= 1 and k1 + k2 <= {n}, got ({k1}, {k2})"
        ));
    }
    check_budget(binomial(n, k1).saturating_mul(binomial(n - k1, k2)), budget)?;
    // the witness key concatenates S1 and S2 so ties break lexicographically on the pair
    let (theta, key) = max_over_subsets(n, k1, |s1| {
        let rest: Vec<usize> = (0..n).filter(|j| !s1.contains(j)).collect();
        let mut idx: Vec<usize> = (0..k2).collect();
        let mut best: Option<(f64, Vec<usize>)> = None;
        loop {
            let s2: Vec<usize> = idx.iter().map(|&i| rest[i]).collect();
            let value = op_norm(&phi.gram_block(s1, &s2))?;
            let cand = (value, s1.iter().chain(&s2).copied().collect());
            best = Some(match best {
                None => cand,
                Some(b) => better(b, cand),
            });
            if !next_subset(&mut idx, rest.len()) {
                break;
            }
        }
        Ok(best.expect("at least one complementary support"))
    })?;
    let witness = (key[..k1].to_vec(), key[k1..].to_vec());
    Ok(RocResult { k1, k2, theta, witness })
}

/// `δ_1, …, δ_{k_max}`.
pub fn ric_sequence(phi: &DenseMatrix, k_max: usize) -> Result<Vec<f64>> {
    let budget = default_budget();
    (1..=k_max)
        .map(|k| Ok(ric_with_budget(phi, k, budget)?.delta))
        .collect()
}

/// Whether `δ_k` is nondecreasing in `k` up to `k_max`, within 1e-10.
pub fn check_monotonicity(phi: &DenseMatrix, k_max: usize) -> Result<bool> {
    let seq = ric_sequence(phi, k_max)?;
    Ok(seq.windows(2).all(|w| w[1] >= w[0] - 1e-10))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Theorem1,
    Corollary1,
    Theorem2,
    Tau,
}

impl std::str::FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem1" | "t1" => Ok(Condition::Theorem1),
            "corollary1" | "sharp" => Ok(Condition::Corollary1),
            "theorem2" | "t2" => Ok(Condition::Theorem2),
            "tau" => Ok(Condition::Tau),
            other => Err(Error::Parse(format!("unknown condition '{other}'"))),
        }
    }
}

impl Condition {
    pub fn bound(self, spec: &BoundSpec) -> Result<BoundResult> {
        match self {
            Condition::Theorem1 => theorem1_bound(spec),
            Condition::Corollary1 => corollary1_bound(spec.q, spec.k, spec.t),
            Condition::Theorem2 => theorem2_bound(spec.q, spec.k),
            Condition::Tau => tau_bound(spec.q, spec.k, spec.tau, false),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub spec: BoundSpec,
    pub bound: BoundResult,
    pub measured_delta: f64,
    pub verdict: Verdict,
}

/// Measures `δ` at the order the chosen condition needs and compares strictly.
pub fn certify(phi: &DenseMatrix, spec: &BoundSpec, which: Condition) -> Result<BoundCertificate> {
    let bound = which.bound(spec)?;
    let order = usize::try_from(bound.ric_order).unwrap_or(usize::MAX);
    if order > phi.cols() {
        return domain(format!(
            "condition needs δ of order {order} but the matrix has {} columns",
            phi.cols()
        ));
    }
    let measured_delta = ric(phi, order)?.delta;
    let verdict = if measured_delta < bound.bound {
        Verdict::Satisfied
    } else {
        Verdict::Violated
    };
    Ok(BoundCertificate {
        spec: *spec,
        bound,
        measured_delta,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RocRicProbe {
    pub k: usize,
    pub theta: f64,
    pub delta: f64,
    /// `2` for even `k`, `2k / sqrt(k^2 - 1)` for odd `k`.
    pub factor: f64,
    pub holds: bool,
}

/// Empirical check of `θ_{k,k} <= factor · δ_k`.
pub fn roc_vs_ric_probe(phi: &DenseMatrix, k: usize) -> Result<RocRicProbe> {
    if k < 2 {
        return domain(format!("probe needs k >= 2, got {k}"));
    }
    let theta = roc(phi, k, k)?.theta;
    let delta = ric(phi, k)?.delta;
    let kf = k as f64;
    let factor = if k.is_multiple_of(2) {
        2.0
    } else {
        2.0 * kf / (kf * kf - 1.0).sqrt()
    };
    let holds = theta <= factor * delta + 1e-10;
    Ok(RocRicProbe {
        k,
        theta,
        delta,
        factor,
        holds,
    })
}
