//! Sparse recovery at desk scale: exhaustive `l0`, LP-based `l1`, IRLS for
//! `lq`, and a null space property checker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::norms::{head_tail, lq_q};
use crate::numerics::{
    least_squares, min_norm_solve, norm2, null_space_basis, simplex_solve, DenseMatrix, LinearProgram, LpStatus,
};
use crate::qfuncs::QValue;
use crate::rip::{binomial, default_budget};

/// An underdetermined system `Φx = y`.
#[derive(Debug, Clone)]
pub struct RecoveryProblem {
    phi: DenseMatrix,
    y: Vec<f64>,
}

impl RecoveryProblem {
    pub fn new(phi: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        if phi.rows() >= phi.cols() {
            return domain(format!("expected m < n, got {}x{}", phi.rows(), phi.cols()));
        }
        if y.len() != phi.rows() {
            return domain(format!("y has length {}, expected {}", y.len(), phi.rows()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return domain("y has non-finite entries");
        }
        Ok(Self { phi, y })
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        let px = self.phi.mul_vec(x);
        px.iter().zip(&self.y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }

    fn feasibility_tol(&self) -> f64 {
        1e-8 * (1.0 + norm2(&self.y))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverResult {
    pub x_hat: Vec<f64>,
    pub residual: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SolverResult {
    fn new(prob: &RecoveryProblem, x_hat: Vec<f64>, objective: f64, iterations: usize, converged: bool) -> Self {
        let residual = prob.residual(&x_hat);
        Self {
            x_hat,
            residual,
            objective,
            iterations,
            converged,
        }
    }
}

/// Sparsest solution among supports of size `<= k_cap`, first in lexicographic order.
pub fn l0_solve(prob: &RecoveryProblem, k_cap: usize) -> Result<SolverResult> {
    let (m, n) = (prob.phi.rows(), prob.phi.cols());
    let k_cap = k_cap.min(n);
    let required: u128 = (0..=k_cap).map(|j| binomial(n, j)).fold(0, u128::saturating_add);
    let budget = default_budget();
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    let tol = prob.feasibility_tol();
    if norm2(&prob.y) <= tol {
        return Ok(SolverResult::new(prob, vec![0.0; n], 0.0, 1, true));
    }
    let mut tried = 1;
    // more than m columns are always dependent
    for j in 1..=k_cap.min(m) {
        let total = binomial(n, j) as u64;
        let hit = (0..total).into_par_iter().find_map_first(|rank| {
            let s = unrank_subset(n, j, rank);
            let x_s = least_squares(&prob.phi.select_columns(&s), &prob.y).ok()?;
            let mut x = vec![0.0; n];
            for (&i, v) in s.iter().zip(&x_s) {
                x[i] = *v;
            }
            (prob.residual(&x) <= tol).then_some(x)
        });
        if let Some(x) = hit {
            // count supports up to the hit in a later pass would be costly; report the full level
            tried += total as usize;
            let l0 = x.iter().filter(|v| **v != 0.0).count() as f64;
            return Ok(SolverResult::new(prob, x, l0, tried, true));
        }
        tried += total as usize;
    }
    Ok(SolverResult::new(prob, vec![0.0; n], 0.0, tried, false))
}

fn unrank_subset(n: usize, k: usize, mut rank: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut x = 0;
    for i in 0..k {
        loop {
            let count = binomial(n - x - 1, k - i - 1) as u64;
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

/// Minimum `l1` solution via the split LP `min 1ᵀ(u + v)  s.t.  Φu − Φv = y, u, v >= 0`.
pub fn l1_solve(prob: &RecoveryProblem) -> Result<SolverResult> {
    let (m, n) = (prob.phi.rows(), prob.phi.cols());
    let mut data = Vec::with_capacity(m * 2 * n);
    for i in 0..m {
        data.extend_from_slice(prob.phi.row(i));
        data.extend(prob.phi.row(i).iter().map(|v| -v));
    }
    let a = DenseMatrix::new(m, 2 * n, data)?;
    let sol = simplex_solve(&LinearProgram::new(vec![1.0; 2 * n], a, prob.y.clone())?)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible("Φx = y has no solution".into())),
        LpStatus::Unbounded => unreachable!("the l1 objective is bounded below"),
    }
    let x: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
    let objective = x.iter().map(|v| v.abs()).sum();
    Ok(SolverResult::new(prob, x, objective, 1, true))
}

/// Settings for iteratively reweighted least squares.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IrlsParams {
    pub eps0: f64,
    pub decay: f64,
    pub eps_min: f64,
    pub inner_iters: usize,
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IrlsParams {
    fn default() -> Self {
        Self {
            eps0: 1.0,
            decay: 0.5,
            eps_min: 1e-8,
            inner_iters: 50,
            tol: 1e-9,
            restarts: 5,
            seed: 0,
        }
    }
}

/// `Φ diag(d)^{1/2}` applied as a column scaling.
fn scale_columns(phi: &DenseMatrix, sqrt_d: &[f64]) -> DenseMatrix {
    let (m, n) = (phi.rows(), phi.cols());
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        data.extend(phi.row(i).iter().zip(sqrt_d).map(|(a, s)| a * s));
    }
    DenseMatrix::new(m, n, data).expect("scaled matrix stays finite")
}

/// Minimizer of `Σ x_j^2 / d_j` subject to `Φx = y`.
fn weighted_min_norm(prob: &RecoveryProblem, d: &[f64]) -> Result<Vec<f64>> {
    let sqrt_d: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let z = min_norm_solve(&scale_columns(&prob.phi, &sqrt_d), &prob.y)?;
    Ok(z.iter().zip(&sqrt_d).map(|(a, b)| a * b).collect())
}

/// Best-so-far objective after each ε stage, per restart.
#[derive(Debug, Clone, Serialize)]
pub struct IrlsTrace {
    pub stage_best: Vec<Vec<f64>>,
}

pub fn lq_solve(prob: &RecoveryProblem, q: QValue, params: &IrlsParams) -> Result<SolverResult> {
    lq_solve_traced(prob, q, params).map(|(r, _)| r)
}

/// IRLS for `min ||x||_q^q  s.t.  Φx = y`, also returning the per-stage objectives.
///
/// The first run starts from the `l1` solution at a small `ε`, the second
/// from the minimum-norm solution, the rest from random positive weightings.
/// The best polished iterate over all runs is returned.
pub fn lq_solve_traced(prob: &RecoveryProblem, q: QValue, params: &IrlsParams) -> Result<(SolverResult, IrlsTrace)> {
    let qe = match q.exponent() {
        Some(e) if e > 0.0 => e,
        _ => return domain(format!("lq_solve needs q in (0, 1], got {q}")),
    };
    if !(params.eps0 > 0.0 && params.eps_min > 0.0 && params.decay > 0.0 && params.decay < 1.0) {
        return domain("IRLS needs eps0, eps_min > 0 and decay in (0, 1)");
    }
    let n = prob.phi.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<IrlsRun> = None;
    let mut iterations = 0;
    let mut trace = IrlsTrace { stage_best: Vec::new() };

    for restart in 0..params.restarts.max(1) {
        let (start, eps) = match restart {
            0 => {
                let x = l1_solve(prob)?.x_hat;
                let top = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                (x, (1e-3 * top).clamp(params.eps_min, params.eps0))
            }
            1 => (weighted_min_norm(prob, &vec![1.0; n])?, params.eps0),
            _ => {
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                (weighted_min_norm(prob, &w)?, params.eps0)
            }
        };
        let run = irls_run(prob, q, qe, params, start, eps)?;
        iterations += run.iterations;
        trace.stage_best.push(run.stages.clone());
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let b = best.expect("at least one restart");
    Ok((
        SolverResult::new(prob, b.x, b.objective, iterations, b.converged),
        trace,
    ))
}

struct IrlsRun {
    x: Vec<f64>,
    objective: f64,
    stages: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn irls_run(
    prob: &RecoveryProblem,
    q: QValue,
    qe: f64,
    params: &IrlsParams,
    start: Vec<f64>,
    eps0: f64,
) -> Result<IrlsRun> {
    let mut x = start;
    let mut best = (lq_q(&x, q), x.clone());
    let mut stages = Vec::new();
    let mut iterations = 0;
    let mut eps = eps0;
    let mut converged;
    let mut stalled = false;
    loop {
        converged = false;
        for _ in 0..params.inner_iters {
            let d: Vec<f64> = x.iter().map(|v| (v * v + eps * eps).powf(1.0 - qe / 2.0)).collect();
            // tiny weights can make the scaled system numerically rank deficient once x is sparse
            let next = match weighted_min_norm(prob, &d) {
                Ok(v) => v,
                Err(Error::RankDeficient(_)) => {
                    stalled = true;
                    break;
                }
                Err(e) => return Err(e),
            };
            iterations += 1;
            let change = norm2(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            let scale = 1.0 + norm2(&x);
            x = next;
            let obj = lq_q(&x, q);
            if obj < best.0 {
                best = (obj, x.clone());
            }
            if change <= params.tol.max(eps.sqrt() / 100.0) * scale {
                converged = true;
                break;
            }
        }
        stages.push(best.0);
        if stalled || eps <= params.eps_min {
            break;
        }
        eps = (eps * params.decay).max(params.eps_min);
    }
    if let Some(p) = polish(prob, &best.1) {
        let obj = lq_q(&p, q);
        if obj <= best.0 {
            best = (obj, p);
            if let Some(last) = stages.last_mut() {
                *last = obj;
            }
        }
    }
    Ok(IrlsRun {
        x: best.1,
        objective: best.0,
        stages,
        iterations,
        converged: converged || stalled,
    })
}

/// Least squares restricted to the numerically significant entries of `x`, if it is feasible.
fn polish(prob: &RecoveryProblem, x: &[f64]) -> Option<Vec<f64>> {
    let top = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return None;
    }
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > 1e-6 * top).collect();
    if support.len() > prob.phi.rows() {
        return None;
    }
    let xs = least_squares(&prob.phi.select_columns(&support), &prob.y).ok()?;
    let mut out = vec![0.0; x.len()];
    for (&j, v) in support.iter().zip(xs) {
        out[j] = v;
    }
    (prob.residual(&out) <= prob.feasibility_tol()).then_some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NspStatus {
    Verified,
    Falsified,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct NspVerdict {
    pub status: NspStatus,
    pub counterexample: Option<Vec<f64>>,
    /// Exhaustive: `min_S,σ ||h_{S^c}||_1 − 1` over null vectors with `σᵀh_S = 1`.
    /// Heuristic: `−max (||h_max(k)||_q^q − ||h_−max(k)||_q^q)` over sampled unit null vectors.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NspStrategy {
    ExhaustiveL1,
    Heuristic,
}

impl std::str::FromStr for NspStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive_l1" | "exhaustive" => Ok(NspStrategy::ExhaustiveL1),
            "heuristic" => Ok(NspStrategy::Heuristic),
            other => Err(Error::Parse(format!("unknown NSP strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NspParams {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for NspParams {
    fn default() -> Self {
        Self {
            restarts: 64,
            iters: 300,
            seed: 0,
        }
    }
}

/// `||h_max(k)||_q^q − ||h_−max(k)||_q^q`.
pub fn nsp_gap(h: &[f64], k: usize, q: QValue) -> Result<f64> {
    let split = head_tail(h, k)?;
    Ok(lq_q(&split.head, q) - lq_q(&split.tail, q))
}

pub fn nsp_check(phi: &DenseMatrix, k: usize, q: QValue, strategy: NspStrategy) -> Result<NspVerdict> {
    nsp_check_with(phi, k, q, strategy, &NspParams::default())
}

pub fn nsp_check_with(
    phi: &DenseMatrix,
    k: usize,
    q: QValue,
    strategy: NspStrategy,
    params: &NspParams,
) -> Result<NspVerdict> {
    let (m, n) = (phi.rows(), phi.cols());
    if m >= n {
        return domain(format!("null space property needs m < n, got {m}x{n}"));
    }
    if k == 0 || k >= n {
        return domain(format!("k must lie in 1..{n}, got {k}"));
    }
    match strategy {
        NspStrategy::ExhaustiveL1 => {
            if !(q.is_one() && q.mode() == crate::qfuncs::QMode::Exact) {
                return domain(format!("the exhaustive check is for q = 1, got {q}"));
            }
            nsp_exhaustive_l1(phi, k)
        }
        NspStrategy::Heuristic => {
            if q.exponent().is_none() {
                return domain("the heuristic check needs q > 0");
            }
            nsp_heuristic(phi, k, q, params)
        }
    }
}

fn nsp_exhaustive_l1(phi: &DenseMatrix, k: usize) -> Result<NspVerdict> {
    let (m, n) = (phi.rows(), phi.cols());
    let signs = 1u64 << (k - 1);
    let required = binomial(n, k).saturating_mul(signs as u128);
    let budget = default_budget();
    if required > budget {
        return Err(Error::Budget { required, budget });
    }
    // h = u − v; rows: Φu − Φv = 0 and σᵀ(u_S − v_S) = 1
    let build = |s: &[usize], sigma: u64| -> Result<LinearProgram> {
        let mut data = Vec::with_capacity((m + 1) * 2 * n);
        for i in 0..m {
            data.extend_from_slice(phi.row(i));
            data.extend(phi.row(i).iter().map(|v| -v));
        }
        let mut last = vec![0.0; 2 * n];
        for (pos, &j) in s.iter().enumerate() {
            // the first sign is fixed to + (h and −h are equivalent)
            let sg = if pos > 0 && (sigma >> (pos - 1)) & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            last[j] = sg;
            last[n + j] = -sg;
        }
        data.extend(last);
        let mut cost = vec![1.0; 2 * n];
        for &j in s {
            cost[j] = 0.0;
            cost[n + j] = 0.0;
        }
        let mut rhs = vec![0.0; m + 1];
        rhs[m] = 1.0;
        LinearProgram::new(cost, DenseMatrix::new(m + 1, 2 * n, data)?, rhs)
    };

    let total = binomial(n, k) as u64;
    let per_support: Vec<Option<(f64, Vec<f64>)>> = (0..total)
        .into_par_iter()
        .map(|rank| {
            let s = unrank_subset(n, k, rank);
            let mut best: Option<(f64, Vec<f64>)> = None;
            for sigma in 0..signs {
                let sol = simplex_solve(&build(&s, sigma)?)?;
                if sol.status != LpStatus::Optimal {
                    continue;
                }
                if best.as_ref().is_none_or(|b| sol.objective < b.0) {
                    let h = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
                    best = Some((sol.objective, h));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut margin = f64::INFINITY;
    let mut witness = None;
    for (v, h) in per_support.into_iter().flatten() {
        if v < margin {
            margin = v - 0.0;
            witness = Some(h);
        }
    }
    margin -= 1.0;
    if margin <= 1e-10 {
        Ok(NspVerdict {
            status: NspStatus::Falsified,
            counterexample: witness,
            margin,
        })
    } else {
        Ok(NspVerdict {
            status: NspStatus::Verified,
            counterexample: None,
            margin,
        })
    }
}

fn nsp_heuristic(phi: &DenseMatrix, k: usize, q: QValue, params: &NspParams) -> Result<NspVerdict> {
    let basis = null_space_basis(phi)?;
    let (n, d) = (basis.rows(), basis.cols());
    if d == 0 {
        return Ok(NspVerdict {
            status: NspStatus::Unknown,
            counterexample: None,
            margin: f64::INFINITY,
        });
    }
    let qe = q.exponent().expect("checked by caller");
    let f = |z: &[f64]| -> f64 {
        let h = basis.mul_vec(z);
        nsp_gap(&h, k, q).expect("k < n")
    };
    let normalize = |z: &mut Vec<f64>| {
        let nz = norm2(z);
        z.iter_mut().for_each(|v| *v /= nz);
    };

    let runs: Vec<(f64, Vec<f64>)> = (0..params.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(r as u64);
            let mut z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            normalize(&mut z);
            let mut fz = f(&z);
            let mut step = 0.5;
            for _ in 0..params.iters {
                let h = basis.mul_vec(&z);
                let split = head_tail(&h, k).expect("k < n");
                let grad_h: Vec<f64> = (0..n)
                    .map(|j| {
                        let (v, sgn) = if split.head[j] != 0.0 {
                            (split.head[j], 1.0)
                        } else {
                            (split.tail[j], -1.0)
                        };
                        sgn * qe * v.abs().max(1e-6).powf(qe - 1.0) * v.signum()
                    })
                    .collect();
                let mut g = basis.tr_mul_vec(&grad_h);
                let radial: f64 = g.iter().zip(&z).map(|(a, b)| a * b).sum();
                g.iter_mut().zip(&z).for_each(|(a, b)| *a -= radial * b);
                let gn = norm2(&g);
                if gn < 1e-14 {
                    break;
                }
                let mut moved = false;
                while step > 1e-12 {
                    let mut cand: Vec<f64> = z.iter().zip(&g).map(|(a, b)| a + step * b / gn).collect();
                    normalize(&mut cand);
                    let fc = f(&cand);
                    if fc > fz {
                        z = cand;
                        fz = fc;
                        step = (step * 2.0).min(1.0);
                        moved = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            (fz, basis.mul_vec(&z))
        })
        .collect();

    // first maximum in restart order
    let (best_f, best_h) = runs
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one restart");
    if best_f >= -1e-10 {
        Ok(NspVerdict {
            status: NspStatus::Falsified,
            counterexample: Some(best_h),
            margin: -best_f,
        })
    } else {
        Ok(NspVerdict {
            status: NspStatus::Unknown,
            counterexample: None,
            margin: -best_f,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    L0,
    L1,
    Lq(QValue),
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::L0 => f.write_str("l0"),
            Method::L1 => f.write_str("l1"),
            Method::Lq(_) => f.write_str("lq"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodOutcome {
    pub method: String,
    pub q: Option<QValue>,
    pub exact: bool,
    pub error: f64,
    pub objective: f64,
    pub residual: f64,
    pub x_hat: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub outcomes: Vec<MethodOutcome>,
}

impl RecoveryReport {
    pub fn get(&self, method: &str) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

/// `||x̂ − x||_2 <= 1e-6 (1 + ||x||_2)`.
pub fn is_exact(x_hat: &[f64], x_true: &[f64]) -> bool {
    let diff: Vec<f64> = x_hat.iter().zip(x_true).map(|(a, b)| a - b).collect();
    norm2(&diff) <= 1e-6 * (1.0 + norm2(x_true))
}

pub fn run_method(prob: &RecoveryProblem, method: Method, irls: &IrlsParams) -> Result<SolverResult> {
    match method {
        Method::L0 => l0_solve(prob, prob.phi.rows()),
        Method::L1 => l1_solve(prob),
        Method::Lq(q) => lq_solve(prob, q, irls),
    }
}

pub fn recover_and_compare(
    prob: &RecoveryProblem,
    x_true: &[f64],
    methods: &[Method],
    irls: &IrlsParams,
) -> Result<RecoveryReport> {
    if x_true.len() != prob.phi.cols() {
        return domain(format!(
            "x_true has length {}, expected {}",
            x_true.len(),
            prob.phi.cols()
        ));
    }
    let r = prob.residual(x_true);
    if r > 1e-10 * (1.0 + norm2(&prob.y)) {
        return domain(format!("Φ x_true differs from y by {r:e}"));
    }
    let outcomes = methods
        .iter()
        .map(|&m| {
            let res = run_method(prob, m, irls)?;
            let diff: Vec<f64> = res.x_hat.iter().zip(x_true).map(|(a, b)| a - b).collect();
            Ok(MethodOutcome {
                method: m.to_string(),
                q: match m {
                    Method::Lq(q) => Some(q),
                    _ => None,
                },
                exact: res.converged && is_exact(&res.x_hat, x_true),
                error: norm2(&diff),
                objective: res.objective,
                residual: res.residual,
                x_hat: res.x_hat,
            })
        })
        .collect::<Result<_>>()?;
    Ok(RecoveryReport { outcomes })
}
