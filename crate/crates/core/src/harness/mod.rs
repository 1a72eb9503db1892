//! Deterministic instance generation, matrix/vector CSV files and
//! phase-transition experiments. The command line front end lives in [`cli`].

pub mod cli;

use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numerics::DenseMatrix;
use crate::qfuncs::QValue;
use crate::solvers::{is_exact, run_method, IrlsParams, Method, RecoveryProblem};

const STREAM_MATRIX: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_TRIAL: u64 = 3;
const STREAM_VECTOR: u64 = 4;

/// Words reserved per keyed draw; a normal sample uses far fewer.
const WORDS_PER_INDEX: u128 = 256;

/// ChaCha8 positioned at `(seed, stream, index)`. Every key gets its own
/// block of the keystream, so draws do not depend on evaluation order.
pub fn keyed_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(index as u128 * WORDS_PER_INDEX);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixModel {
    /// i.i.d. `N(0, 1/m)`
    #[default]
    Gaussian,
}

/// `m x n` matrix whose entry `(i, j)` depends only on `(seed, i, j)`.
pub fn gen_matrix(seed: u64, m: usize, n: usize, model: MatrixModel) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return domain(format!("matrix dimensions must be positive, got {m}x{n}"));
    }
    let MatrixModel::Gaussian = model;
    let sd = 1.0 / (m as f64).sqrt();
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let key = ((i as u64) << 32) | j as u64;
            let z: f64 = StandardNormal.sample(&mut keyed_rng(seed, STREAM_MATRIX, key));
            data.push(sd * z);
        }
    }
    DenseMatrix::new(m, n, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModel {
    /// uniformly random support, standard normal values
    #[default]
    GaussianSupportUniform,
}

/// `k`-sparse vector of length `n`.
pub fn gen_sparse_signal(seed: u64, n: usize, k: usize, model: SignalModel) -> Result<Vec<f64>> {
    if k == 0 || k > n {
        return domain(format!("sparsity must lie in 1..={n}, got {k}"));
    }
    let SignalModel::GaussianSupportUniform = model;
    let mut rng = keyed_rng(seed, STREAM_SIGNAL, 0);
    let support = rand::seq::index::sample(&mut rng, n, k);
    let mut x = vec![0.0; n];
    for i in support.iter() {
        // a zero draw would break ||x||_0 = k
        let mut v: f64 = 0.0;
        while v == 0.0 {
            v = StandardNormal.sample(&mut rng);
        }
        x[i] = v;
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorModel {
    Gaussian,
    /// Student t with 2 degrees of freedom
    HeavyTailed,
    /// about a third of the entries zeroed
    Sparse,
    /// entries drawn from a handful of magnitudes, so ties are common
    Tied,
}

/// Test vector for inequality sweeps; the model cycles with `index`.
pub fn gen_test_vector(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let models = [
        VectorModel::Gaussian,
        VectorModel::HeavyTailed,
        VectorModel::Sparse,
        VectorModel::Tied,
    ];
    gen_vector(seed, index, n, models[(index % 4) as usize])
}

pub fn gen_vector(seed: u64, index: u64, n: usize, model: VectorModel) -> Vec<f64> {
    let mut rng = keyed_rng(seed, STREAM_VECTOR, index);
    match model {
        VectorModel::Gaussian => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
        VectorModel::HeavyTailed => {
            let t = StudentT::new(2.0).expect("valid degrees of freedom");
            (0..n).map(|_| t.sample(&mut rng)).collect()
        }
        VectorModel::Sparse => (0..n)
            .map(|_| {
                if rng.random_bool(1.0 / 3.0) {
                    0.0
                } else {
                    StandardNormal.sample(&mut rng)
                }
            })
            .collect(),
        VectorModel::Tied => {
            let levels = [0.0, 0.5, 1.0, 2.0];
            (0..n)
                .map(|_| {
                    let v = levels[rng.random_range(0..levels.len())];
                    if rng.random_bool(0.5) {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Header line `m,n`, then one line per row. Values use the shortest
/// representation that parses back to the identical `f64`.
pub fn write_matrix_csv(a: &DenseMatrix) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record([a.rows().to_string(), a.cols().to_string()])
        .expect("in-memory write");
    for i in 0..a.rows() {
        w.write_record(a.row(i).iter().map(|v| v.to_string()))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn read_matrix_csv(text: &str) -> Result<DenseMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .map_err(csv_err)?;
    if header.len() != 2 {
        return Err(Error::Parse(format!(
            "header must be 'm,n', got {} fields",
            header.len()
        )));
    }
    let dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad dimension '{s}'")))
    };
    let (m, n) = (dim(&header[0])?, dim(&header[1])?);
    let mut data = Vec::with_capacity(m * n);
    let mut rows = 0;
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != n {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {n}",
                rows + 1,
                rec.len()
            )));
        }
        for f in rec.iter() {
            let v: f64 = f.parse().map_err(|_| Error::Parse(format!("bad number '{f}'")))?;
            data.push(v);
        }
        rows += 1;
    }
    if rows != m {
        return Err(Error::Parse(format!("expected {m} rows, found {rows}")));
    }
    DenseMatrix::new(m, n, data).map_err(|e| Error::Parse(e.to_string()))
}

/// Vectors are stored as a single column (`len,1`).
pub fn write_vector_csv(x: &[f64]) -> String {
    write_matrix_csv(&DenseMatrix::new(x.len(), 1, x.to_vec()).expect("finite vector"))
}

/// Accepts either an `m x 1` or a `1 x m` matrix file.
pub fn read_vector_csv(text: &str) -> Result<Vec<f64>> {
    let a = read_matrix_csv(text)?;
    if a.cols() != 1 && a.rows() != 1 {
        return Err(Error::Parse(format!(
            "expected a vector, got a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    Ok(a.as_slice().to_vec())
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_matrix_csv(&std::fs::read_to_string(path)?)
}

pub fn save_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    std::fs::write(path, write_matrix_csv(a))?;
    Ok(())
}

pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_vector_csv(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub irls: IrlsParams,
    pub normalize_columns: bool,
}

impl ExperimentConfig {
    pub fn new(seed: u64, m: usize, n: usize, k_max: usize, trials: usize, methods: Vec<Method>) -> Self {
        Self {
            seed,
            m,
            n,
            k_min: 1,
            k_max,
            trials,
            methods,
            irls: IrlsParams::default(),
            normalize_columns: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub k: usize,
    pub method: String,
    pub q: String,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Seeds of the matrix and signal used by trial `trial` at sparsity `k`.
pub fn trial_seeds(seed: u64, k: usize, trial: usize) -> (u64, u64) {
    let mut rng = keyed_rng(seed, STREAM_TRIAL, ((k as u64) << 32) | trial as u64);
    (rng.next_u64(), rng.next_u64())
}

/// A planted instance `(Φ, x₀, y = Φx₀)` for one trial.
pub fn trial_instance(config: &ExperimentConfig, k: usize, trial: usize) -> Result<(DenseMatrix, Vec<f64>, Vec<f64>)> {
    let (ms, xs) = trial_seeds(config.seed, k, trial);
    let mut phi = gen_matrix(ms, config.m, config.n, MatrixModel::Gaussian)?;
    if config.normalize_columns {
        phi.normalize_columns();
    }
    let x0 = gen_sparse_signal(xs, config.n, k, SignalModel::GaussianSupportUniform)?;
    let y = phi.mul_vec(&x0);
    Ok((phi, x0, y))
}

/// Empirical exact-recovery rates per `(k, method)`. Trials share instances across methods.
pub fn run_phase(config: &ExperimentConfig) -> Result<Vec<PhaseCell>> {
    if config.m >= config.n {
        return domain(format!("phase experiments need m < n, got {}x{}", config.m, config.n));
    }
    if config.k_min == 0 || config.k_min > config.k_max || config.k_max > config.n {
        return domain(format!(
            "k range {}..={} is invalid for n = {}",
            config.k_min, config.k_max, config.n
        ));
    }
    if config.methods.is_empty() {
        return domain("no recovery method selected");
    }
    let mut cells = Vec::new();
    for k in config.k_min..=config.k_max {
        let outcomes: Vec<Vec<bool>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let (phi, x0, y) = trial_instance(config, k, trial)?;
                let prob = RecoveryProblem::new(phi, y)?;
                config
                    .methods
                    .iter()
                    .map(|&method| match run_method(&prob, method, &config.irls) {
                        Ok(r) => Ok(r.converged && is_exact(&r.x_hat, &x0)),
                        // an ill-conditioned draw is a failed trial, not an aborted experiment
                        Err(Error::RankDeficient(_)) | Err(Error::Infeasible(_)) => Ok(false),
                        Err(e) => Err(e),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (mi, method) in config.methods.iter().enumerate() {
            let successes = outcomes.iter().filter(|o| o[mi]).count();
            let rate = if config.trials == 0 {
                0.0
            } else {
                successes as f64 / config.trials as f64
            };
            cells.push(PhaseCell {
                k,
                method: method.to_string(),
                q: match method {
                    Method::Lq(q) => q.to_string(),
                    Method::L1 => QValue::one().to_string(),
                    Method::L0 => QValue::zero_plus().to_string(),
                },
                trials: config.trials,
                successes,
                rate,
            });
        }
    }
    cells.sort_by(|a, b| (a.k, &a.method, &a.q).cmp(&(b.k, &b.method, &b.q)));
    Ok(cells)
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c).expect("in-memory write");
    }
    if cells.is_empty() {
        w.write_record(["k", "method", "q", "trials", "successes", "rate"])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// `{:.8}` with trailing zeros removed.
pub fn fmt_scalar(x: f64) -> String {
    let s = format!("{x:.8}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
