//! `sparse-ric` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 budget refusal.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::{fmt_scalar, load_matrix, load_vector, phase_csv, run_phase, write_vector_csv, ExperimentConfig};
use crate::error::{Error, Result};
use crate::norms::{lemma2_residual, prop1_check};
use crate::numerics::DenseMatrix;
use crate::polytope::{decompose, PolytopeSpec};
use crate::qfuncs::{
    c_q, fig_data, g, gamma, mu, p_q, sharp_bound, table2, table2_csv, table3, table3_csv, tau_bound, theorem1_bound,
    theorem2_bound, BoundResult, BoundSpec, Figure, QValue,
};
use crate::rip::{certify, ric, ric_sequence, roc, Condition};
use crate::solvers::{nsp_check_with, run_method, IrlsParams, Method, NspParams, NspStrategy, RecoveryProblem};

#[derive(Parser, Debug)]
#[command(
    name = "sparse-ric",
    version,
    about = "RIC bounds for lq minimization and desk-scale sparse recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Enumeration budget (supports, support pairs or LPs); overrides RIC_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u128>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one of the scalar functions p(q), c(q), g(q,k), mu(t,θ), gamma(ρ,θ,t).
    Fn(FnArgs),
    /// Evaluate a sufficient RIC condition.
    Bounds(BoundsArgs),
    /// Limit table of δ_{τk} bounds for τ = 2, 3, 4.
    Table2 {
        #[arg(long, default_value_t = 4)]
        kmax: u64,
    },
    /// Table of δ_k bounds through the orthogonality constant.
    Table3 {
        #[arg(long, default_value_t = 10)]
        kmax: u64,
    },
    /// Curve data: 1 = p(q), 2 = c(q), 3 = g(q,1), 4 = δ_2 bound.
    Figdata {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Exact restricted isometry constant δ_k.
    Ric {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        k: usize,
    },
    /// Exact restricted orthogonality constant θ_{k1,k2}.
    Roc {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        k1: usize,
        #[arg(long)]
        k2: usize,
    },
    /// Check a sufficient condition against the measured δ.
    Certify {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        bound: BoundParams,
        #[arg(long, default_value = "corollary1")]
        which: Condition,
    },
    /// Null space property check.
    Nsp {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value = "1")]
        q: QValue,
        #[arg(long, default_value = "exhaustive_l1")]
        strategy: NspStrategy,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve Φx = y with l0, l1 or lq minimization.
    Recover {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodName::L1)]
        method: MethodName,
        #[arg(long, default_value = "1/2")]
        q: QValue,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical recovery rates over random instances.
    Phase {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Repeat to compare several methods on the same instances.
        #[arg(long, value_enum, default_values_t = vec![MethodName::L1])]
        method: Vec<MethodName>,
        #[arg(long, default_value = "1/2")]
        q: QValue,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        normalize_columns: bool,
    },
    /// Split v ∈ T(α, s) into s-sparse pieces.
    Decompose {
        /// Comma-separated entries.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        s: usize,
    },
    /// Inequality residuals and RIC monotonicity.
    Check {
        #[arg(value_enum)]
        which: CheckKind,
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long, default_value = "1/2")]
        q: QValue,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long)]
        normalize_columns: bool,
    },
}

#[derive(Args, Debug)]
struct FnArgs {
    #[arg(value_enum)]
    which: FnKind,
    #[arg(long, default_value = "1/2")]
    q: QValue,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FnKind {
    Pq,
    Cq,
    G,
    Mu,
    Gamma,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(value_enum)]
    which: BoundKind,
    #[command(flatten)]
    params: BoundParams,
    /// For `tau`: use θ = g(q,1), valid for every k.
    #[arg(long)]
    uniform: bool,
}

#[derive(Args, Debug)]
struct BoundParams {
    #[arg(long, default_value = "1")]
    q: QValue,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long, default_value_t = 2.0)]
    t: f64,
    #[arg(long, default_value_t = 2.0)]
    tau: f64,
}

impl BoundParams {
    fn spec(&self) -> Result<BoundSpec> {
        BoundSpec::new(self.q, self.k, self.t, self.tau)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoundKind {
    T1,
    Tau,
    T2,
    Sharp,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    normalize_columns: bool,
}

impl MatrixArgs {
    fn load(&self) -> Result<DenseMatrix> {
        load_with(&self.matrix, self.normalize_columns)
    }
}

fn load_with(path: &PathBuf, normalize: bool) -> Result<DenseMatrix> {
    let mut a = load_matrix(path)?;
    if normalize {
        a.normalize_columns();
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodName {
    L0,
    L1,
    Lq,
}

impl MethodName {
    fn with_q(self, q: QValue) -> Method {
        match self {
            MethodName::L0 => Method::L0,
            MethodName::L1 => Method::L1,
            MethodName::Lq => Method::Lq(q),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckKind {
    Lemma2,
    Prop1,
    Monotone,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Some(b) = cli.budget {
        std::env::set_var("RIC_BUDGET", b.to_string());
    }
    let result = execute(&cli).and_then(|text| match &cli.out {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => Ok(out.write_all(text.as_bytes())?),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Budget { .. } => 3,
                _ => 2,
            }
        }
    }
}

fn usage(msg: &str) -> Error {
    Error::Domain(format!("missing argument: {msg}"))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{t}'")))
        })
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_idx(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn jsonl<T: Serialize>(rows: &[T]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("serializable") + "\n")
        .collect()
}

fn bound_text(r: &BoundResult, format: Format) -> String {
    match format {
        Format::Jsonl => jsonl(&[r]),
        Format::Csv => format!(
            "ric_order,bound,formula\n{},{},{}\n",
            r.ric_order,
            fmt_scalar(r.bound),
            r.formula
        ),
    }
}

fn execute(cli: &Cli) -> Result<String> {
    let format = cli.format;
    let scalar = |x: f64| match format {
        Format::Csv => format!("{}\n", fmt_scalar(x)),
        Format::Jsonl => format!("{}\n", serde_json::json!({ "value": x })),
    };
    Ok(match &cli.command {
        Command::Fn(a) => {
            let v = match a.which {
                FnKind::Pq => p_q(a.q),
                FnKind::Cq => c_q(a.q),
                FnKind::G => g(a.q, a.k)?,
                FnKind::Mu => mu(
                    a.t.ok_or_else(|| usage("--t"))?,
                    a.theta.ok_or_else(|| usage("--theta"))?,
                )?,
                FnKind::Gamma => gamma(
                    a.rho.ok_or_else(|| usage("--rho"))?,
                    a.theta.ok_or_else(|| usage("--theta"))?,
                    a.t.ok_or_else(|| usage("--t"))?,
                )?,
            };
            scalar(v)
        }
        Command::Bounds(a) => match a.which {
            BoundKind::Sharp => scalar(sharp_bound(a.params.t)?),
            BoundKind::T1 => bound_text(&theorem1_bound(&a.params.spec()?)?, format),
            BoundKind::Tau => bound_text(&tau_bound(a.params.q, a.params.k, a.params.tau, a.uniform)?, format),
            BoundKind::T2 => bound_text(&theorem2_bound(a.params.q, a.params.k)?, format),
        },
        Command::Table2 { kmax } => {
            let rows = table2(*kmax)?;
            match format {
                Format::Csv => table2_csv(&rows),
                Format::Jsonl => jsonl(&rows),
            }
        }
        Command::Table3 { kmax } => {
            let rows = table3(*kmax)?;
            match format {
                Format::Csv => table3_csv(&rows),
                Format::Jsonl => jsonl(&rows),
            }
        }
        Command::Figdata { figure, points } => {
            let data = fig_data(Figure::from_index(*figure)?, *points)?;
            match format {
                Format::Csv => {
                    let mut s = String::from("q,value\n");
                    for (q, v) in data {
                        s += &format!("{q},{v}\n");
                    }
                    s
                }
                Format::Jsonl => jsonl(
                    &data
                        .iter()
                        .map(|(q, v)| serde_json::json!({"q": q, "value": v}))
                        .collect::<Vec<_>>(),
                ),
            }
        }
        Command::Ric { matrix, k } => {
            let r = ric(&matrix.load()?, *k)?;
            match format {
                Format::Csv => format!(
                    "k,delta,witness\n{},{},{}\n",
                    r.k,
                    r.delta,
                    join_idx(&r.witness_support)
                ),
                Format::Jsonl => jsonl(&[r]),
            }
        }
        Command::Roc { matrix, k1, k2 } => {
            let r = roc(&matrix.load()?, *k1, *k2)?;
            match format {
                Format::Csv => format!(
                    "k1,k2,theta,witness1,witness2\n{},{},{},{},{}\n",
                    r.k1,
                    r.k2,
                    r.theta,
                    join_idx(&r.witness.0),
                    join_idx(&r.witness.1)
                ),
                Format::Jsonl => jsonl(&[r]),
            }
        }
        Command::Certify { matrix, bound, which } => {
            let c = certify(&matrix.load()?, &bound.spec()?, *which)?;
            match format {
                Format::Csv => format!(
                    "formula,q,k,ric_order,bound,measured_delta,verdict\n{},{},{},{},{},{},{}\n",
                    c.bound.formula,
                    c.spec.q,
                    c.spec.k,
                    c.bound.ric_order,
                    c.bound.bound,
                    c.measured_delta,
                    serde_json::to_value(c.verdict)
                        .expect("serializable")
                        .as_str()
                        .unwrap_or_default()
                ),
                Format::Jsonl => jsonl(&[c]),
            }
        }
        Command::Nsp {
            matrix,
            k,
            q,
            strategy,
            seed,
        } => {
            let params = NspParams {
                seed: *seed,
                ..NspParams::default()
            };
            let v = nsp_check_with(&matrix.load()?, *k, *q, *strategy, &params)?;
            match format {
                Format::Csv => format!(
                    "status,margin,counterexample\n{},{},{}\n",
                    serde_json::to_value(v.status)
                        .expect("serializable")
                        .as_str()
                        .unwrap_or_default(),
                    v.margin,
                    v.counterexample
                        .as_deref()
                        .map(|h| join(h).replace(',', " "))
                        .unwrap_or_default()
                ),
                Format::Jsonl => jsonl(&[v]),
            }
        }
        Command::Recover {
            matrix,
            y,
            method,
            q,
            seed,
        } => {
            let prob = RecoveryProblem::new(matrix.load()?, load_vector(y)?)?;
            let irls = IrlsParams {
                seed: *seed,
                ..IrlsParams::default()
            };
            let r = run_method(&prob, method.with_q(*q), &irls)?;
            match format {
                Format::Csv => write_vector_csv(&r.x_hat),
                Format::Jsonl => jsonl(&[r]),
            }
        }
        Command::Phase {
            m,
            n,
            kmax,
            kmin,
            trials,
            method,
            q,
            seed,
            normalize_columns,
        } => {
            let mut methods: Vec<Method> = method.iter().map(|mn| mn.with_q(*q)).collect();
            methods.dedup();
            let mut cfg = ExperimentConfig::new(*seed, *m, *n, *kmax, *trials, methods);
            cfg.k_min = *kmin;
            cfg.normalize_columns = *normalize_columns;
            let cells = run_phase(&cfg)?;
            match format {
                Format::Csv => phase_csv(&cells),
                Format::Jsonl => jsonl(&cells),
            }
        }
        Command::Decompose { v, alpha, s } => {
            let v = parse_list(v)?;
            let d = decompose(&v, &PolytopeSpec::new(*alpha, *s)?)?;
            match format {
                Format::Csv => {
                    let header: Vec<String> = (0..v.len()).map(|i| format!("u{i}")).collect();
                    let mut text = format!("lambda,{}\n", header.join(","));
                    for t in &d.terms {
                        text += &format!("{},{}\n", t.lambda, join(&t.u));
                    }
                    text
                }
                Format::Jsonl => jsonl(&d.terms),
            }
        }
        Command::Check {
            which,
            v,
            q,
            matrix,
            kmax,
            normalize_columns,
        } => match which {
            CheckKind::Lemma2 => scalar(lemma2_residual(
                &parse_list(v.as_deref().ok_or_else(|| usage("--v"))?)?,
                *q,
            )?),
            CheckKind::Prop1 => {
                let (lo, hi) = prop1_check(&parse_list(v.as_deref().ok_or_else(|| usage("--v"))?)?, *q)?;
                match format {
                    Format::Csv => format!("lower,upper\n{},{}\n", fmt_scalar(lo), fmt_scalar(hi)),
                    Format::Jsonl => format!("{}\n", serde_json::json!({"lower": lo, "upper": hi})),
                }
            }
            CheckKind::Monotone => {
                let a = load_with(matrix.as_ref().ok_or_else(|| usage("--matrix"))?, *normalize_columns)?;
                let seq = ric_sequence(&a, *kmax)?;
                let mut ok = true;
                let mut text = String::from("k,delta,nondecreasing\n");
                for (i, d) in seq.iter().enumerate() {
                    if i > 0 && *d < seq[i - 1] - 1e-10 {
                        ok = false;
                    }
                    text += &format!("{},{},{}\n", i + 1, d, ok);
                }
                text
            }
        },
    })
}
