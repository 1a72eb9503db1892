//! Sparse convex decomposition of the polytope
//! `T(α, s) = { v : ||v||_∞ <= α, ||v||_1 <= sα }`.
//!
//! Every `v ∈ T(α, s)` is a convex combination of vectors from
//! `U(α, s, v)`: vectors supported inside `supp(v)`, at most `s`-sparse, with
//! `||u||_1 = ||v||_1` and `||u||_∞ <= α`. [`decompose`] builds such a
//! combination explicitly.

use serde::Serialize;

use crate::error::{domain, Result};

/// Relative feasibility tolerance on the cap and mass constraints.
pub const FEAS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolytopeSpec {
    pub alpha: f64,
    pub s: usize,
}

impl PolytopeSpec {
    pub fn new(alpha: f64, s: usize) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("alpha must be positive, got {alpha}"));
        }
        if s == 0 {
            return domain("s must be at least 1");
        }
        Ok(Self { alpha, s })
    }

    fn cap_tol(&self) -> f64 {
        self.alpha * (1.0 + FEAS_TOL)
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

fn l0(v: &[f64]) -> usize {
    v.iter().filter(|x| **x != 0.0).count()
}

pub fn in_t(v: &[f64], spec: &PolytopeSpec) -> bool {
    linf(v) <= spec.cap_tol() && l1(v) <= spec.s as f64 * spec.cap_tol()
}

pub fn in_u(u: &[f64], spec: &PolytopeSpec, v: &[f64]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let support_ok = u.iter().zip(v).all(|(a, b)| *a == 0.0 || *b != 0.0);
    let mass = l1(v);
    support_ok
        && l0(u) <= spec.s
        && (l1(u) - mass).abs() <= 1e-9 * mass.max(1.0)
        && linf(u) <= spec.alpha + 1e-12 * spec.alpha.max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub lambda: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub terms: Vec<Term>,
}

impl Decomposition {
    /// Checks every invariant of the decomposition against `v`, reporting the first failure.
    pub fn verify(&self, v: &[f64], spec: &PolytopeSpec) -> std::result::Result<(), String> {
        let total: f64 = self.terms.iter().map(|t| t.lambda).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(format!("weights sum to {total}"));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !(0.0..=1.0).contains(&t.lambda) {
                return Err(format!("term {i}: weight {} outside [0, 1]", t.lambda));
            }
            if !in_u(&t.u, spec, v) {
                return Err(format!("term {i}: {:?} is not in U(α, s, v)", t.u));
            }
        }
        for j in 0..v.len() {
            let r: f64 = self.terms.iter().map(|t| t.lambda * t.u[j]).sum();
            if (r - v[j]).abs() > 1e-9 {
                return Err(format!("entry {j}: reconstruction {r} vs {}", v[j]));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Zero,
    Capped,
    Free,
}

/// Convex decomposition of `v ∈ T(α, s)` into vectors of `U(α, s, v)`.
///
/// Works on the magnitudes of the support. At each step the current
/// remainder `w` lies in the relative interior of a face of the capped
/// simplex `{w >= 0, w <= α, Σw = ||v||_1}`. A vertex `u` of that face is formed
/// by keeping capped coordinates at `α` and water-filling the remaining mass
/// into the largest free coordinates; then the largest `λ` with
/// `(w - λu)/(1 - λ)` still feasible is taken, which pins at least one more
/// coordinate to 0 or `α`. The loop ends once the remainder is `s`-sparse, so
/// there are at most `||v||_0 + 1` terms.
pub fn decompose(v: &[f64], spec: &PolytopeSpec) -> Result<Decomposition> {
    if v.iter().any(|x| !x.is_finite()) {
        return domain("vector has non-finite entries");
    }
    let (inf, mass) = (linf(v), l1(v));
    if inf > spec.cap_tol() {
        return domain(format!("||v||_inf = {inf} exceeds alpha = {}", spec.alpha));
    }
    if mass > spec.s as f64 * spec.cap_tol() {
        return domain(format!(
            "||v||_1 = {mass} exceeds s*alpha = {}",
            spec.s as f64 * spec.alpha
        ));
    }
    if l0(v) <= spec.s {
        return Ok(Decomposition {
            terms: vec![Term {
                lambda: 1.0,
                u: v.to_vec(),
            }],
        });
    }

    let alpha = spec.alpha;
    let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    let signs: Vec<f64> = support.iter().map(|&i| v[i].signum()).collect();
    let mut w: Vec<f64> = support.iter().map(|&i| v[i].abs().min(alpha)).collect();
    let mut slot: Vec<Slot> = w
        .iter()
        .map(|&x| {
            if x >= alpha * (1.0 - FEAS_TOL) {
                Slot::Capped
            } else {
                Slot::Free
            }
        })
        .collect();
    for (x, s) in w.iter_mut().zip(&slot) {
        if *s == Slot::Capped {
            *x = alpha;
        }
    }

    let expand = |mag: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for ((&i, &m), &sg) in support.iter().zip(mag).zip(&signs) {
            out[i] = sg * m;
        }
        out
    };

    let mut terms = Vec::new();
    let mut remaining = 1.0;
    for _ in 0..=support.len() {
        if w.iter().filter(|x| **x > 0.0).count() <= spec.s {
            terms.push(Term {
                lambda: remaining,
                u: expand(&w),
            });
            return Ok(Decomposition { terms });
        }

        let u = face_vertex(&w, &slot, mass, spec);

        let mut lambda = 1.0;
        let mut pinned = None;
        for i in 0..w.len() {
            if slot[i] != Slot::Free {
                continue;
            }
            if u[i] > w[i] {
                let r = w[i] / u[i];
                if r < lambda {
                    lambda = r;
                    pinned = Some((i, Slot::Zero));
                }
            } else if u[i] < w[i] {
                let r = (alpha - w[i]) / (alpha - u[i]);
                if r < lambda {
                    lambda = r;
                    pinned = Some((i, Slot::Capped));
                }
            }
        }
        // the remainder is (numerically) the vertex itself; dividing by 1 - λ would only amplify round-off
        let Some((j, to)) = pinned.filter(|_| 1.0 - lambda > 1e-9) else {
            terms.push(Term {
                lambda: remaining,
                u: expand(&u),
            });
            return Ok(Decomposition { terms });
        };

        terms.push(Term {
            lambda: remaining * lambda,
            u: expand(&u),
        });
        remaining *= 1.0 - lambda;
        for i in 0..w.len() {
            if slot[i] == Slot::Free {
                w[i] = ((w[i] - lambda * u[i]) / (1.0 - lambda)).clamp(0.0, alpha);
                if w[i] <= FEAS_TOL * alpha {
                    w[i] = 0.0;
                    slot[i] = Slot::Zero;
                } else if w[i] >= alpha * (1.0 - FEAS_TOL) {
                    w[i] = alpha;
                    slot[i] = Slot::Capped;
                }
            }
        }
        w[j] = if to == Slot::Zero { 0.0 } else { alpha };
        slot[j] = to;
    }
    domain("decomposition did not terminate")
}

/// Capped coordinates stay at `α`; the rest of the mass fills free
/// coordinates in decreasing order of `w` (ties by index), at most `s` nonzeros.
fn face_vertex(w: &[f64], slot: &[Slot], mass: f64, spec: &PolytopeSpec) -> Vec<f64> {
    let alpha = spec.alpha;
    let mut u = vec![0.0; w.len()];
    let mut used = 0;
    let mut left = mass;
    for i in 0..w.len() {
        if slot[i] == Slot::Capped {
            u[i] = alpha;
            used += 1;
            left -= alpha;
        }
    }
    let mut free: Vec<usize> = (0..w.len()).filter(|&i| slot[i] == Slot::Free).collect();
    free.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    for i in free {
        if used >= spec.s || left <= FEAS_TOL * alpha {
            break;
        }
        let take = left.min(alpha);
        u[i] = take;
        left -= take;
        used += 1;
    }
    u
}
