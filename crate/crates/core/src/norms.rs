//! lq quasi-norms, head/tail splits and the sharpened `l1` bounds.
//!
//! The residual functions return `RHS - LHS` of an inequality, so a
//! nonnegative value means the inequality holds for that input.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::qfuncs::{g, p_q, QValue};

/// `Σ |x_j|^q`, or `||x||_0` at the `0+` limit.
pub fn lq_q(x: &[f64], q: QValue) -> f64 {
    match q.exponent() {
        None => x.iter().filter(|v| **v != 0.0).count() as f64,
        Some(e) if e == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Some(e) => x.iter().map(|v| v.abs().powf(e)).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormStats {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `min_i |x_i|` over all entries, zeros included.
    pub lminf: f64,
}

pub fn norm_stats(x: &[f64]) -> NormStats {
    let l0 = x.iter().filter(|v| **v != 0.0).count();
    let l1 = x.iter().map(|v| v.abs()).sum();
    let l2 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let linf = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let lminf = if x.is_empty() {
        0.0
    } else {
        x.iter().fold(f64::INFINITY, |m: f64, v| m.min(v.abs()))
    };
    NormStats {
        l0,
        l1,
        l2,
        linf,
        lminf,
    }
}

fn exponent_in_unit_interval(q: QValue) -> Result<f64> {
    q.exponent()
        .ok_or_else(|| crate::Error::Domain("q must lie in (0, 1]; the 0+ limit has no norm".into()))
}

/// `(mean_j |x_j|^q)^(1/q)`, so that `||x||_q n^(1 - 1/q) = n * power_mean`.
fn power_mean(x: &[f64], q: f64) -> f64 {
    let n = x.len() as f64;
    if q == 1.0 {
        return x.iter().map(|v| v.abs()).sum::<f64>() / n;
    }
    // factor out the maximum so small q cannot underflow the mean
    let top = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if top == 0.0 {
        return 0.0;
    }
    let mean = x.iter().map(|v| (v.abs() / top).powf(q)).sum::<f64>() / n;
    top * mean.powf(1.0 / q)
}

/// `||x||_q n^(1-1/q) + p_q n (||x||_∞ - ||x||_{-∞}) - ||x||_1`; never negative.
pub fn lemma2_residual(x: &[f64], q: QValue) -> Result<f64> {
    let e = exponent_in_unit_interval(q)?;
    if x.is_empty() {
        return domain("empty vector");
    }
    let n = x.len() as f64;
    let s = norm_stats(x);
    Ok(n * power_mean(x, e) + p_q(q) * n * (s.linf - s.lminf) - s.l1)
}

fn support(x: &[f64]) -> Vec<f64> {
    x.iter().copied().filter(|v| *v != 0.0).collect()
}

/// Same inequality with `n` replaced by `||x||_0` and the minimum taken over the support.
pub fn lemma2_support_residual(x: &[f64], q: QValue) -> Result<f64> {
    let e = exponent_in_unit_interval(q)?;
    let xs = support(x);
    if xs.is_empty() {
        return domain("zero vector");
    }
    let n0 = xs.len() as f64;
    let s = norm_stats(&xs);
    Ok(n0 * power_mean(&xs, e) + p_q(q) * n0 * (s.linf - s.lminf) - s.l1)
}

/// Slacks of `||x||_0^(1-1/q) ||x||_q <= ||x||_1 <= (||x||_0^(1-1/q) + p_q ||x||_0) ||x||_q`.
pub fn prop1_check(x: &[f64], q: QValue) -> Result<(f64, f64)> {
    let e = exponent_in_unit_interval(q)?;
    let xs = support(x);
    if xs.is_empty() {
        return domain("zero vector");
    }
    let n0 = xs.len() as f64;
    let l1: f64 = xs.iter().map(|v| v.abs()).sum();
    let scaled = n0 * power_mean(&xs, e);
    let lq_norm = scaled * n0.powf(1.0 / e - 1.0);
    let lower = l1 - scaled;
    let upper = scaled + p_q(q) * n0 * lq_norm - l1;
    Ok((lower, upper))
}

/// A vector with `r = round(q^(q/(1-q)) n)` leading ones and zeros elsewhere,
/// which nearly attains equality in the sharpened `l1` bound.
pub fn lemma2_witness(n: usize, q: QValue) -> Result<Vec<f64>> {
    let e = exponent_in_unit_interval(q)?;
    if n == 0 {
        return domain("n must be positive");
    }
    let frac = if e == 1.0 {
        1.0 / std::f64::consts::E
    } else {
        e.powf(e / (1.0 - e))
    };
    let r = ((frac * n as f64).round() as usize).clamp(1, n);
    Ok((0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect())
}

/// `h = head + tail` where `head` keeps the `k` largest magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadTailSplit {
    pub head: Vec<f64>,
    pub tail: Vec<f64>,
    pub k: usize,
}

/// Indices sorted by decreasing magnitude, equal magnitudes by ascending index.
fn magnitude_order(h: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..h.len()).collect();
    idx.sort_by(|&a, &b| h[b].abs().total_cmp(&h[a].abs()).then(a.cmp(&b)));
    idx
}

pub fn head_tail(h: &[f64], k: usize) -> Result<HeadTailSplit> {
    if k == 0 || k > h.len() {
        return domain(format!("k must lie in 1..={}, got {k}", h.len()));
    }
    let mut head = vec![0.0; h.len()];
    let mut tail = h.to_vec();
    for &i in magnitude_order(h).iter().take(k) {
        head[i] = h[i];
        tail[i] = 0.0;
    }
    Ok(HeadTailSplit { head, tail, k })
}

/// Splits `tail` into consecutive blocks of the `block_size` next-largest entries.
pub fn block_partition(tail: &[f64], block_size: usize) -> Result<Vec<Vec<f64>>> {
    if block_size == 0 {
        return domain("block size must be positive");
    }
    let nonzero: Vec<usize> = magnitude_order(tail).into_iter().filter(|&i| tail[i] != 0.0).collect();
    Ok(nonzero
        .chunks(block_size)
        .map(|chunk| {
            let mut b = vec![0.0; tail.len()];
            for &i in chunk {
                b[i] = tail[i];
            }
            b
        })
        .collect())
}

/// Terms of the tail bound `||h_{-max(k)}||_1 <= g(q,k) α`, `α = k^(-1/q) ||h_max(k)||_q`.
#[derive(Debug, Clone, Serialize)]
pub struct TailChain {
    /// Whether `||h_max(k)||_q^q >= ||h_{-max(k)}||_q^q`, the regime in which the bound is claimed.
    pub applicable: bool,
    pub alpha: f64,
    pub g: f64,
    pub tail_l1: f64,
    /// `g α - ||tail||_1`
    pub slack: f64,
    /// Per-block residuals of the sharpened `l1` bound at block length `⌈c k⌉`.
    pub block_residuals: Vec<f64>,
}

pub fn tail_chain(h: &[f64], k: usize, q: QValue) -> Result<TailChain> {
    let e = exponent_in_unit_interval(q)?;
    let split = head_tail(h, k)?;
    let head_q = lq_q(&split.head, q);
    let tail_q = lq_q(&split.tail, q);
    let kf = k as f64;
    let alpha = (head_q / kf).powf(1.0 / e);
    let gk = g(q, k as u64)?;
    let tail_l1: f64 = split.tail.iter().map(|v| v.abs()).sum();
    let bs = crate::qfuncs::block_size(q, k as u64) as usize;
    let mut block_residuals = Vec::new();
    for block in block_partition(&split.tail, bs)? {
        // each block is read as a length-bs vector, short blocks padded with zeros
        let mut entries: Vec<f64> = block.iter().copied().filter(|v| *v != 0.0).collect();
        entries.resize(bs, 0.0);
        block_residuals.push(lemma2_residual(&entries, q)?);
    }
    Ok(TailChain {
        applicable: head_q >= tail_q,
        alpha,
        g: gk,
        tail_l1,
        slack: gk * alpha - tail_l1,
        block_residuals,
    })
}
