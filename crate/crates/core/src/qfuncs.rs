//! Scalar bound functions for lq minimization, `0 < q <= 1`.
//!
//! The central quantities are
//!
//! * `c(q) = q^(q/(q-1))`, the block-size multiplier, extended by continuity
//!   to `c(0) = 1` and `c(1) = e`;
//! * `p(q) = q^(q/(1-q)) - q^(1/(1-q))`, the slack constant of the sharpened
//!   `l1`/`lq` norm inequality, with `p(0) = 1` and `p(1) = 0`;
//! * `g(q, k) = ⌈c k⌉^(1-1/q) k^(1/q) + p ⌈c k⌉`, which collapses to `k` when
//!   `c k` is an integer and is at most `k + p` otherwise;
//! * `mu(t, theta)` and `gamma(rho, theta, t)`, which combine into the RIC
//!   bounds on `δ_{g(t-1)+k}`, `δ_{τk}` and `δ_k`.
//!
//! One-sided limits `q -> 0+`, `q -> 1/2+` and `q -> 1-` are represented
//! explicitly by [`QValue`] and always evaluated in closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Relative tolerance under which `c(q) k` counts as an integer.
pub const INTEGER_SNAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    Exact,
    /// `q -> 0+`
    ZeroPlus,
    /// `q -> 1/2+`
    HalfPlus,
    /// `q -> 1-`
    OneMinus,
}

/// A validated exponent `q ∈ [0, 1]`, possibly standing for a one-sided limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValue {
    q: f64,
    mode: QMode,
}

impl QValue {
    /// Exact exponent. `q = 0` is only meaningful as a limit and is stored as `0+`.
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return domain(format!("q must lie in [0, 1], got {q}"));
        }
        if q == 0.0 {
            return Ok(Self::zero_plus());
        }
        Ok(Self { q, mode: QMode::Exact })
    }

    pub const fn zero_plus() -> Self {
        Self {
            q: 0.0,
            mode: QMode::ZeroPlus,
        }
    }

    pub const fn half_plus() -> Self {
        Self {
            q: 0.5,
            mode: QMode::HalfPlus,
        }
    }

    pub const fn one_minus() -> Self {
        Self {
            q: 1.0,
            mode: QMode::OneMinus,
        }
    }

    pub const fn one() -> Self {
        Self {
            q: 1.0,
            mode: QMode::Exact,
        }
    }

    pub const fn half() -> Self {
        Self {
            q: 0.5,
            mode: QMode::Exact,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn mode(&self) -> QMode {
        self.mode
    }

    /// True when this is `q = 1` exactly or the `1-` limit.
    pub fn is_one(&self) -> bool {
        self.q == 1.0
    }

    /// Exponent usable in `|x|^q` sums. `None` for the `0+` limit.
    pub fn exponent(&self) -> Option<f64> {
        match self.mode {
            QMode::ZeroPlus => None,
            _ => Some(self.q),
        }
    }
}

impl fmt::Display for QValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mode {
            QMode::Exact => write!(f, "{}", self.q),
            QMode::ZeroPlus => f.write_str("0+"),
            QMode::HalfPlus => f.write_str("1/2+"),
            QMode::OneMinus => f.write_str("1-"),
        }
    }
}

impl Serialize for QValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for QValue {
    type Err = Error;

    /// Accepts decimals (`0.5`), fractions (`2/3`) and the limit forms
    /// `0+`, `1/2+` (or `0.5+`) and `1-`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_num = |t: &str| -> Result<f64> {
            if let Some((a, b)) = t.split_once('/') {
                let a: f64 = a
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad q value '{s}'")))?;
                let b: f64 = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad q value '{s}'")))?;
                Ok(a / b)
            } else {
                t.parse().map_err(|_| Error::Parse(format!("bad q value '{s}'")))
            }
        };
        if let Some(base) = s.strip_suffix('+') {
            return match parse_num(base)? {
                v if v == 0.0 => Ok(Self::zero_plus()),
                v if v == 0.5 => Ok(Self::half_plus()),
                v => domain(format!(
                    "one-sided limit from above is only defined at 0 and 1/2, got {v}"
                )),
            };
        }
        if let Some(base) = s.strip_suffix('-') {
            return match parse_num(base)? {
                v if v == 1.0 => Ok(Self::one_minus()),
                v => domain(format!("one-sided limit from below is only defined at 1, got {v}")),
            };
        }
        Self::new(parse_num(s)?)
    }
}

/// `q^(q/(q-1))`, nondecreasing from 1 at `q = 0` to `e` at `q = 1`.
pub fn c_q(q: QValue) -> f64 {
    match q.mode {
        QMode::ZeroPlus => 1.0,
        QMode::OneMinus => std::f64::consts::E,
        QMode::HalfPlus => 2.0,
        QMode::Exact if q.q == 1.0 => std::f64::consts::E,
        QMode::Exact => {
            let q = q.q;
            (q * q.ln() / (q - 1.0)).exp()
        }
    }
}

/// `q^(q/(1-q)) - q^(1/(1-q))`, nonincreasing and convex from 1 to 0.
pub fn p_q(q: QValue) -> f64 {
    match q.mode {
        QMode::ZeroPlus => 1.0,
        QMode::OneMinus => 0.0,
        QMode::HalfPlus => 0.25,
        QMode::Exact if q.q == 1.0 => 0.0,
        QMode::Exact => {
            let q = q.q;
            let lq = q.ln() / (1.0 - q);
            (q * lq).exp() - lq.exp()
        }
    }
}

/// Rounds `x` to the nearest integer if it is within the integer-snap tolerance.
fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= INTEGER_SNAP_TOL * x.abs().max(1.0)).then_some(r)
}

/// `⌈x⌉` with integer snapping, so that `2.0000000000000004` maps to 2.
pub fn snapped_ceil(x: f64) -> u64 {
    snap(x).unwrap_or_else(|| x.ceil()) as u64
}

/// Block size `⌈c(q) k⌉`.
///
/// At `1/2+` this is the smallest integer strictly above `2k`.
pub fn block_size(q: QValue, k: u64) -> u64 {
    match q.mode {
        QMode::ZeroPlus => k + 1,
        QMode::HalfPlus => 2 * k + 1,
        _ => snapped_ceil(c_q(q) * k as f64),
    }
}

/// Whether `c(q) k` is an integer (within the snap tolerance).
pub fn ck_is_integer(q: QValue, k: u64) -> bool {
    match q.mode {
        QMode::Exact if q.q < 1.0 => snap(c_q(q) * k as f64).is_some(),
        _ => false,
    }
}

/// `g(q, k) = ⌈c k⌉^(1-1/q) k^(1/q) + p ⌈c k⌉`.
pub fn g(q: QValue, k: u64) -> Result<f64> {
    if k == 0 {
        return domain("sparsity k must be at least 1");
    }
    let kf = k as f64;
    Ok(match q.mode {
        QMode::ZeroPlus => kf + 1.0,
        QMode::OneMinus => kf,
        QMode::HalfPlus => {
            let b = (2 * k + 1) as f64;
            kf * kf / b + 0.25 * b
        }
        QMode::Exact if q.q == 1.0 => kf,
        QMode::Exact => {
            let b = block_size(q, k) as f64;
            // b * (k/b)^(1/q) avoids overflow of k^(1/q) for small q
            b * (kf / b).powf(1.0 / q.q) + p_q(q) * b
        }
    })
}

/// `mu(t, theta) = (sqrt((t + theta - 1)(t - 1)) + 1 - t) / theta`.
pub fn mu(t: f64, theta: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return domain(format!("t must exceed 1, got {t}"));
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return domain(format!("theta must be positive, got {theta}"));
    }
    Ok((((t + theta - 1.0) * (t - 1.0)).sqrt() + 1.0 - t) / theta)
}

/// `gamma(rho, theta) = (rho - rho^2) / (1/2 - rho + rho^2 (1 + theta / (2(t - 1))))`.
pub fn gamma(rho: f64, theta: f64, t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return domain(format!("t must exceed 1, got {t}"));
    }
    if !(rho >= 0.0) || !(theta >= 0.0) {
        return domain(format!(
            "rho and theta must be nonnegative, got rho={rho}, theta={theta}"
        ));
    }
    let denom = 0.5 - rho + rho * rho * (1.0 + theta / (2.0 * (t - 1.0)));
    if !(denom > 0.0) {
        return domain(format!("gamma denominator is not positive ({denom})"));
    }
    Ok((rho - rho * rho) / denom)
}

/// `gamma(mu(t, theta), theta)`, the composite that every δ_{tk}-type bound uses.
pub fn gamma_mu(t: f64, theta: f64) -> Result<f64> {
    gamma(mu(t, theta)?, theta, t)
}

/// `sqrt((t - 1) / t)`.
pub fn sharp_bound(t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return domain(format!("t must exceed 1, got {t}"));
    }
    Ok(((t - 1.0) / t).sqrt())
}

/// Which result a bound was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    /// `δ_{g(t-1)+k} < gamma(mu(t, g/k), g/k)`
    Theorem1,
    /// `δ_{tk} < sqrt((t-1)/t)` when `g(q, k) = k`
    Corollary1,
    /// `δ_{τk}` form with `θ = g(q,k)/k`
    Tau,
    /// `δ_{τk}` form with `θ = g(q,1)`, uniform in `k`
    TauUniform,
    /// `δ_k` bound through the restricted orthogonality constant
    Theorem2,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formula::Theorem1 => "theorem1",
            Formula::Corollary1 => "corollary1",
            Formula::Tau => "tau",
            Formula::TauUniform => "tau_uniform",
            Formula::Theorem2 => "theorem2",
        })
    }
}

/// Parameters of a bound evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSpec {
    pub q: QValue,
    pub k: u64,
    pub t: f64,
    pub tau: f64,
}

impl BoundSpec {
    pub fn new(q: QValue, k: u64, t: f64, tau: f64) -> Result<Self> {
        if k == 0 {
            return domain("sparsity k must be at least 1");
        }
        if !(t > 1.0) || !(tau > 1.0) {
            return domain(format!("t and tau must exceed 1, got t={t}, tau={tau}"));
        }
        Ok(Self { q, k, t, tau })
    }
}

/// A sufficient condition `δ_{ric_order} < bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub ric_order: u64,
    pub bound: f64,
    pub formula: Formula,
}

pub fn theorem1_bound(spec: &BoundSpec) -> Result<BoundResult> {
    let g = g(spec.q, spec.k)?;
    let theta = g / spec.k as f64;
    // a fractional order g(t-1) is lifted to the next integer; the bound at t still applies
    let ric_order = snapped_ceil(g * (spec.t - 1.0)) + spec.k;
    let bound = gamma_mu(spec.t, theta)?;
    Ok(BoundResult {
        ric_order,
        bound,
        formula: Formula::Theorem1,
    })
}

/// `δ_{⌈tk⌉} < sqrt((t-1)/t)`, valid for `q = 1` or when `c(q) k` is an integer.
pub fn corollary1_bound(q: QValue, k: u64, t: f64) -> Result<BoundResult> {
    if k == 0 {
        return domain("sparsity k must be at least 1");
    }
    if !(q.is_one() || ck_is_integer(q, k)) {
        return domain(format!(
            "corollary requires q = 1 or an integer c(q)k; q = {q}, k = {k} gives {}",
            c_q(q) * k as f64
        ));
    }
    let bound = sharp_bound(t)?;
    let ric_order = snapped_ceil(t * k as f64);
    Ok(BoundResult {
        ric_order,
        bound,
        formula: Formula::Corollary1,
    })
}

/// Bound on `δ_{τk}`; `uniform` selects the `k`-free variant built on `g(q, 1)`.
pub fn tau_bound(q: QValue, k: u64, tau: f64, uniform: bool) -> Result<BoundResult> {
    if k == 0 {
        return domain("sparsity k must be at least 1");
    }
    if !(tau > 1.0) || !tau.is_finite() {
        return domain(format!("tau must exceed 1, got {tau}"));
    }
    let order = tau * k as f64;
    let Some(ric_order) = snap(order) else {
        return domain(format!("tau * k = {order} is not an integer"));
    };
    let theta = if uniform { g(q, 1)? } else { g(q, k)? / k as f64 };
    let t = 1.0 + (tau - 1.0) / theta;
    let bound = gamma_mu(t, theta)?;
    let formula = if uniform { Formula::TauUniform } else { Formula::Tau };
    Ok(BoundResult {
        ric_order: ric_order as u64,
        bound,
        formula,
    })
}

/// Bound on `δ_k` for even `k >= 2` or odd `k >= 3`.
pub fn theorem2_bound(q: QValue, k: u64) -> Result<BoundResult> {
    if k < 2 {
        return domain(format!("the δ_k bound needs k >= 2, got {k}"));
    }
    let gc = snapped_ceil(g(q, k)?) as f64;
    let kf = k as f64;
    let bound = if k.is_multiple_of(2) {
        1.0 / (1.0 + 2.0 * gc / kf)
    } else {
        1.0 / (1.0 + 2.0 * gc / (kf * kf - 1.0).sqrt())
    };
    Ok(BoundResult {
        ric_order: k,
        bound,
        formula: Formula::Theorem2,
    })
}

/// One row of the `δ_{2k}, δ_{3k}, δ_{4k}` limit table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table2Row {
    pub tau: u64,
    pub k0: u64,
    pub q: QValue,
    pub bound: f64,
}

/// Limits `q -> 0+` and `q -> 1/2+` of the `δ_{τk}` bound for `τ ∈ {2,3,4}`, `k = k0`.
pub fn table2(k_max: u64) -> Result<Vec<Table2Row>> {
    if k_max == 0 {
        return domain("k_max must be at least 1");
    }
    let mut rows = Vec::new();
    for tau in 2..=4u64 {
        for k0 in 1..=k_max {
            for q in [QValue::zero_plus(), QValue::half_plus()] {
                let bound = tau_bound(q, k0, tau as f64, false)?.bound;
                rows.push(Table2Row { tau, k0, q, bound });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table3Row {
    pub k: u64,
    pub q: QValue,
    pub bound: f64,
}

/// `δ_k` bounds for `k = 2..=k_max` at `q ∈ {0+, 1/2, 1/2+, 1}`.
pub fn table3(k_max: u64) -> Result<Vec<Table3Row>> {
    if k_max < 3 {
        return domain("k_max must be at least 3");
    }
    let mut rows = Vec::new();
    for k in 2..=k_max {
        for q in [QValue::zero_plus(), QValue::half(), QValue::half_plus(), QValue::one()] {
            rows.push(Table3Row {
                k,
                q,
                bound: theorem2_bound(q, k)?.bound,
            });
        }
    }
    Ok(rows)
}

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from("tau,k0,q,bound,bound_4dp\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{:.4}\n", r.tau, r.k0, r.q, r.bound, r.bound));
    }
    out
}

pub fn table3_csv(rows: &[Table3Row]) -> String {
    let mut out = String::from("k,q,bound,bound_4dp\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:.4}\n", r.k, r.q, r.bound, r.bound));
    }
    out
}

/// The four sampled curves: `p(q)`, `c(q)`, `g(q, 1)` and the uniform `δ_{2k}` bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Pq,
    Cq,
    G1,
    Delta2k,
}

impl Figure {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Figure::Pq),
            2 => Ok(Figure::Cq),
            3 => Ok(Figure::G1),
            4 => Ok(Figure::Delta2k),
            _ => domain(format!("figure index must be 1..=4, got {i}")),
        }
    }

    pub fn value(self, q: QValue) -> Result<f64> {
        match self {
            Figure::Pq => Ok(p_q(q)),
            Figure::Cq => Ok(c_q(q)),
            Figure::G1 => g(q, 1),
            Figure::Delta2k => Ok(tau_bound(q, 1, 2.0, true)?.bound),
        }
    }
}

/// Samples a figure on a uniform grid of `points` values.
///
/// Curves on `[0, 1]` use `q_i = i / (points - 1)` with `q = 0` read as the
/// `0+` limit; the `δ_{2k}` curve lives on `(0, 1]` and uses `q_i = i / points`.
pub fn fig_data(fig: Figure, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return domain("need at least two grid points");
    }
    let grid: Vec<f64> = match fig {
        Figure::Delta2k => (1..=points).map(|i| i as f64 / points as f64).collect(),
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    };
    grid.into_iter().map(|q| Ok((q, fig.value(QValue::new(q)?)?))).collect()
}
