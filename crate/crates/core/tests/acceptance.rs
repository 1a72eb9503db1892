//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

#![allow(clippy::approx_constant)]

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparse_ric::harness::{
    gen_matrix, gen_sparse_signal, gen_test_vector, write_matrix_csv, write_vector_csv, MatrixModel, SignalModel,
};
use sparse_ric::norms::{lemma2_residual, lemma2_support_residual, prop1_check};
use sparse_ric::numerics::{householder_qr, DenseMatrix};
use sparse_ric::polytope::{decompose, in_u, PolytopeSpec, Term};
use sparse_ric::qfuncs::{
    fig_data, g, gamma, gamma_mu, mu, p_q, sharp_bound, table2, table3, BoundSpec, Figure, QMode, QValue,
};
use sparse_ric::rip::{certify, check_monotonicity, ric, roc, Condition, Verdict};
use sparse_ric::solvers::{is_exact, l0_solve, l1_solve, lq_solve, nsp_check, IrlsParams, NspStatus, RecoveryProblem};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-ric"))
}

fn cli_stdout(args: &[&str]) -> Result<String, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

/// Printed constants are 4-decimal truncations of the exact values.
fn truncate4(x: f64) -> f64 {
    (x * 1e4).floor() / 1e4
}

fn bound_reproduction() -> Outcome {
    for (t, printed) in [(2.0f64, 0.7071), (3.0, 0.8164), (4.0, 0.8660)] {
        let text = cli_stdout(&["bounds", "sharp", "--t", &t.to_string()])?;
        let v: f64 = text.trim().parse().map_err(|_| format!("unparsable output {text:?}"))?;
        let exact = ((t - 1.0) / t).sqrt();
        check((v - exact).abs() < 1e-8, || {
            format!("sharp t={t}: cli {v} vs closed form {exact}")
        })?;
        check((truncate4(v) - printed).abs() <= 5e-5, || {
            format!("sharp t={t}: {v} vs {printed}")
        })?;
    }

    let t2 = table2(4).map_err(|e| e.to_string())?;
    let cell = |tau: u64, k0: u64, mode: QMode| {
        t2.iter()
            .find(|r| r.tau == tau && r.k0 == k0 && r.q.mode() == mode)
            .map(|r| r.bound)
            .ok_or_else(|| format!("missing cell tau={tau} k0={k0}"))
    };
    let a = cell(2, 2, QMode::ZeroPlus)?;
    let b = cell(2, 1, QMode::HalfPlus)?;
    check((a - 0.5547).abs() <= 5e-4, || format!("δ_2k cell (k0=2, 0+) = {a}"))?;
    check((b - 0.6782).abs() <= 5e-4, || format!("δ_2k cell (k0=1, 1/2+) = {b}"))?;
    let csv = cli_stdout(&["table2", "--kmax", "4"])?;
    check(csv.contains("0.5547") && csv.contains("0.6782"), || {
        "table2 CLI output lacks the cells".into()
    })?;

    let t3 = table3(10).map_err(|e| e.to_string())?;
    for r in &t3 {
        let q_is_half_or_one = r.q.mode() == QMode::Exact && (r.q.value() == 0.5 || r.q.value() == 1.0);
        if q_is_half_or_one && r.k % 2 == 0 {
            check((r.bound - 1.0 / 3.0).abs() <= 1e-9, || {
                format!("δ_k bound q={} k={} = {}", r.q, r.k, r.bound)
            })?;
        }
    }
    let c = t3
        .iter()
        .find(|r| r.k == 3 && r.q == QValue::half())
        .map(|r| r.bound)
        .ok_or("missing q=1/2, k=3")?;
    check((c - 0.3203).abs() <= 5e-4, || format!("δ_3 bound at q=1/2 = {c}"))?;
    Ok(format!("sharp bounds, δ_2k cells {a:.4}/{b:.4}, δ_3 cell {c:.4}"))
}

fn function_identities() -> Outcome {
    let p = p_q(QValue::half());
    check((p - 0.25).abs() <= 1e-12, || format!("p(1/2) = {p}"))?;
    for k in 1..=100 {
        let v = g(QValue::half(), k).map_err(|e| e.to_string())?;
        check((v - k as f64).abs() <= 1e-9, || format!("g(1/2, {k}) = {v}"))?;
    }
    let v = g(QValue::new(2.0 / 3.0).map_err(|e| e.to_string())?, 4).map_err(|e| e.to_string())?;
    check((v - 4.0).abs() <= 1e-9, || format!("g(2/3, 4) = {v}"))?;
    let mut worst: f64 = 0.0;
    for i in 1..=1000 {
        let t = 1.0 + 9.0 * i as f64 / 1000.0;
        let lhs = gamma(mu(t, 1.0).map_err(|e| e.to_string())?, 1.0, t).map_err(|e| e.to_string())?;
        let rhs = sharp_bound(t).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs());
    }
    check(worst <= 1e-10, || {
        format!("gamma(mu(t,1),1,t) deviates from sqrt((t-1)/t) by {worst:e}")
    })?;
    Ok(format!("max |gamma - sharp| = {worst:.1e}"))
}

fn inequality_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::INFINITY;
    for i in 0..100_000u64 {
        let n = rng.random_range(1..=64);
        let q = QValue::new(rng.random_range(0.01..=1.0)).map_err(|e| e.to_string())?;
        let x = gen_test_vector(17, i, n);
        let r_l1 = lemma2_residual(&x, q).map_err(|e| e.to_string())?;
        check(r_l1 >= -1e-10, || {
            format!("sharpened l1 bound fails: {r_l1:e} at q={q}, x={x:?}")
        })?;
        worst = worst.min(r_l1);
        if x.iter().any(|v| *v != 0.0) {
            let r_supp = lemma2_support_residual(&x, q).map_err(|e| e.to_string())?;
            let (lo, hi) = prop1_check(&x, q).map_err(|e| e.to_string())?;
            check(r_supp >= -1e-10 && lo >= -1e-10 && hi >= -1e-10, || {
                format!("support/two-sided bounds fail: {r_supp:e} {lo:e} {hi:e} at q={q}, x={x:?}")
            })?;
            worst = worst.min(r_supp).min(lo).min(hi);
        }
    }
    let lattice = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut lattice_count = 0;
    for n in 1..=4usize {
        for code in 0..lattice.len().pow(n as u32) {
            let mut c = code;
            let x: Vec<f64> = (0..n)
                .map(|_| {
                    let v = lattice[c % lattice.len()];
                    c /= lattice.len();
                    v
                })
                .collect();
            for qi in 1..=10 {
                let q = QValue::new(qi as f64 / 10.0).map_err(|e| e.to_string())?;
                let r = lemma2_residual(&x, q).map_err(|e| e.to_string())?;
                check(r >= -1e-10, || format!("lattice counterexample {x:?} at q={q}: {r:e}"))?;
                lattice_count += 1;
            }
        }
    }

    for i in 1..=100 {
        let t = 1.0 + 9.0 * i as f64 / 100.0;
        let mut prev = f64::INFINITY;
        for j in 1..=100 {
            let theta = 10.0 * j as f64 / 100.0;
            let v = gamma_mu(t, theta).map_err(|e| e.to_string())?;
            check(v <= prev + 1e-12, || {
                format!("gamma_mu not nonincreasing in theta at t={t}, theta={theta}")
            })?;
            prev = v;
        }
    }
    for j in 1..=100 {
        let theta = 10.0 * j as f64 / 100.0;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=100 {
            let t = 1.0 + 9.0 * i as f64 / 100.0;
            let v = gamma_mu(t, theta).map_err(|e| e.to_string())?;
            check(v >= prev - 1e-12, || {
                format!("gamma_mu not nondecreasing in t at t={t}, theta={theta}")
            })?;
            prev = v;
        }
    }

    for seed in 0..20 {
        for (m, n, kmax) in [(4, 8, 8), (6, 12, 8)] {
            let phi = gen_matrix(1000 + seed, m, n, MatrixModel::Gaussian).map_err(|e| e.to_string())?;
            let ok = check_monotonicity(&phi, kmax).map_err(|e| e.to_string())?;
            check(ok, || format!("δ_k not monotone for seed {seed}, {m}x{n}"))?;
        }
    }
    Ok(format!(
        "10^5 random + {lattice_count} lattice cases, min residual {worst:.2e}; grid and δ_k monotone"
    ))
}

fn polytope_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut max_terms = 0;
    for trial in 0..10_000 {
        let n = rng.random_range(1..=12);
        let s = rng.random_range(1..=n);
        let alpha: f64 = rng.random_range(0.05..10.0);
        let spec = PolytopeSpec::new(alpha, s).map_err(|e| e.to_string())?;
        let mut v: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(-1.5 * alpha..1.5 * alpha)
                }
            })
            .collect();
        v.iter_mut().for_each(|x| *x = x.clamp(-alpha, alpha));
        let mass: f64 = v.iter().map(|x| x.abs()).sum();
        if mass > s as f64 * alpha {
            let f = s as f64 * alpha / mass;
            v.iter_mut().for_each(|x| *x *= f);
        }
        let d = decompose(&v, &spec).map_err(|e| format!("trial {trial}: {e}"))?;
        d.verify(&v, &spec)
            .map_err(|e| format!("trial {trial}: {e}; v={v:?}, {spec:?}"))?;
        check(d.terms.iter().all(|t| in_u(&t.u, &spec, &v)), || {
            format!("trial {trial}: term outside U")
        })?;
        let l0 = v.iter().filter(|x| **x != 0.0).count();
        check(d.terms.len() <= (2 * l0).max(1), || {
            format!("trial {trial}: {} terms", d.terms.len())
        })?;
        if l0 <= s {
            check(
                d.terms
                    == vec![Term {
                        lambda: 1.0,
                        u: v.clone(),
                    }],
                || format!("trial {trial}: sparse input not returned as is"),
            )?;
        }
        max_terms = max_terms.max(d.terms.len());
    }
    Ok(format!("10^4 instances, at most {max_terms} terms"))
}

fn exact_constants() -> Outcome {
    for i in 1..=9 {
        let c = i as f64 / 10.0;
        let phi =
            DenseMatrix::from_rows(&[vec![1.0, c], vec![0.0, (1.0 - c * c).sqrt()]]).map_err(|e| e.to_string())?;
        let d = ric(&phi, 2).map_err(|e| e.to_string())?.delta;
        check((d - c).abs() <= 1e-10, || format!("two-column δ_2 = {d} for c = {c}"))?;
    }
    let square = gen_matrix(55, 6, 6, MatrixModel::Gaussian).map_err(|e| e.to_string())?;
    let q = householder_qr(&square, false).q;
    let frame = q.transpose().select_columns(&[0, 1, 2, 3, 4]);
    for k in 1..=5 {
        let d = ric(&frame, k).map_err(|e| e.to_string())?.delta;
        check(d.abs() <= 1e-12, || format!("orthonormal columns give δ_{k} = {d:e}"))?;
    }
    for seed in 0..5 {
        let phi = gen_matrix(60 + seed, 4, 8, MatrixModel::Gaussian).map_err(|e| e.to_string())?;
        let mut scan: f64 = 0.0;
        for i in 0..8 {
            for j in (i + 1)..8 {
                let v: f64 = (0..4).map(|r| phi[(r, i)] * phi[(r, j)]).sum();
                scan = scan.max(v.abs());
            }
        }
        let t11 = roc(&phi, 1, 1).map_err(|e| e.to_string())?.theta;
        check((t11 - scan).abs() <= 1e-10, || format!("θ_11 {t11} vs scan {scan}"))?;
        for (k1, k2) in [(1, 2), (1, 3), (2, 3)] {
            let a = roc(&phi, k1, k2).map_err(|e| e.to_string())?.theta;
            let b = roc(&phi, k2, k1).map_err(|e| e.to_string())?.theta;
            check((a - b).abs() <= 1e-10, || {
                format!("θ_{k1}{k2} = {a} but θ_{k2}{k1} = {b}")
            })?;
        }
    }
    Ok("two-column, orthonormal, θ symmetry and pairwise scan agree".into())
}

fn recovery_soundness() -> Outcome {
    let spec_for = |k: u64| BoundSpec::new(QValue::one(), k, 2.0, 2.0);
    let irls = IrlsParams::default();
    let half = QValue::half();
    let mut instances = 0;
    let mut certified = 0;
    let mut lq_failures = 0;
    let mut cli_checked = 0;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for normalize in [false, true] {
        for k in [1usize, 2] {
            for trial in 0..500u64 {
                let seed = 10_000 * k as u64 + trial + if normalize { 5_000 } else { 0 };
                let mut phi = gen_matrix(seed, 8, 16, MatrixModel::Gaussian).map_err(|e| e.to_string())?;
                if normalize {
                    phi.normalize_columns();
                }
                let x0 =
                    gen_sparse_signal(seed, 16, k, SignalModel::GaussianSupportUniform).map_err(|e| e.to_string())?;
                let y = phi.mul_vec(&x0);
                instances += 1;
                let spec = spec_for(k as u64).map_err(|e| e.to_string())?;
                let cert = certify(&phi, &spec, Condition::Corollary1).map_err(|e| e.to_string())?;
                if cert.verdict != Verdict::Satisfied {
                    continue;
                }
                certified += 1;
                let prob = RecoveryProblem::new(phi.clone(), y.clone()).map_err(|e| e.to_string())?;
                let l0 = l0_solve(&prob, k).map_err(|e| e.to_string())?;
                check(l0.converged && is_exact(&l0.x_hat, &x0), || {
                    format!("l0 oracle disagrees on seed {seed}")
                })?;
                let l1 = l1_solve(&prob).map_err(|e| e.to_string())?;
                check(is_exact(&l1.x_hat, &x0), || {
                    format!("l1 missed a certified instance (seed {seed}, k {k})")
                })?;
                let lq = lq_solve(&prob, half, &irls).map_err(|e| e.to_string())?;
                if !is_exact(&lq.x_hat, &x0) {
                    lq_failures += 1;
                    eprintln!("lq failure on certified seed {seed}, k {k}");
                }
                if cli_checked < 4 {
                    let mp = dir.path().join(format!("phi{seed}.csv"));
                    let yp = dir.path().join(format!("y{seed}.csv"));
                    std::fs::write(&mp, write_matrix_csv(&phi)).map_err(|e| e.to_string())?;
                    std::fs::write(&yp, write_vector_csv(&y)).map_err(|e| e.to_string())?;
                    let (mp, yp) = (mp.to_string_lossy().into_owned(), yp.to_string_lossy().into_owned());
                    for extra in [vec!["--method", "l1"], vec!["--method", "lq", "--q", "0.5"]] {
                        let mut args = vec!["recover", "--matrix", &mp, "--y", &yp];
                        args.extend(extra.iter().copied());
                        let text = cli_stdout(&args)?;
                        let xh = sparse_ric::harness::read_vector_csv(&text).map_err(|e| e.to_string())?;
                        check(is_exact(&xh, &x0), || format!("CLI {extra:?} missed seed {seed}"))?;
                    }
                    cli_checked += 1;
                }
            }
        }
    }
    check(certified > 0, || {
        "no certified instances; the check would be vacuous".into()
    })?;
    check(lq_failures == 0, || {
        format!("{lq_failures} lq failures on certified instances")
    })?;
    Ok(format!(
        "{instances} instances, {certified} certified, l1 and lq exact on all"
    ))
}

fn nsp_equivalence() -> Outcome {
    let mut verified = 0;
    for seed in 0..20u64 {
        let phi = gen_matrix(7000 + seed, 5, 8, MatrixModel::Gaussian).map_err(|e| e.to_string())?;
        let verdict = nsp_check(&phi, 1, QValue::one(), sparse_ric::solvers::NspStrategy::ExhaustiveL1)
            .map_err(|e| e.to_string())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all = true;
        for j in 0..8 {
            for _ in 0..50 {
                let mut x = vec![0.0; 8];
                x[j] = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
                let prob = RecoveryProblem::new(phi.clone(), phi.mul_vec(&x)).map_err(|e| e.to_string())?;
                if !is_exact(&l1_solve(&prob).map_err(|e| e.to_string())?.x_hat, &x) {
                    all = false;
                }
            }
        }
        let is_verified = verdict.status == NspStatus::Verified;
        check(is_verified == all, || {
            format!(
                "seed {seed}: NSP {:?} (margin {:e}) but battery recovered all = {all}",
                verdict.status, verdict.margin
            )
        })?;
        verified += is_verified as usize;
    }
    Ok(format!(
        "20 matrices, {verified} verified, {} falsified, no disagreement",
        20 - verified
    ))
}

fn figure_data() -> Outcome {
    let ends = |fig: Figure| -> Result<(f64, f64), String> {
        let d = fig_data(fig, 101).map_err(|e| e.to_string())?;
        Ok((d[0].1, d[d.len() - 1].1))
    };
    let (p0, p1) = ends(Figure::Pq)?;
    let (c0, c1) = ends(Figure::Cq)?;
    let (g0, g1) = ends(Figure::G1)?;
    check((p0 - 1.0).abs() <= 1e-9 && p1.abs() <= 1e-9, || {
        format!("p endpoints {p0}, {p1}")
    })?;
    check(
        (c0 - 1.0).abs() <= 1e-9 && (c1 - std::f64::consts::E).abs() <= 1e-9,
        || format!("c endpoints {c0}, {c1}"),
    )?;
    check((g0 - 2.0).abs() <= 1e-9 && (g1 - 1.0).abs() <= 1e-9, || {
        format!("g endpoints {g0}, {g1}")
    })?;
    let d = Figure::Delta2k.value(QValue::half()).map_err(|e| e.to_string())?;
    check((d - 0.707107).abs() <= 1e-6, || format!("δ_2 bound at q=1/2 = {d}"))?;
    let csv = cli_stdout(&["figdata", "4", "--points", "10"])?;
    let at_half = csv
        .lines()
        .find_map(|l| l.strip_prefix("0.5,"))
        .ok_or("figdata 4 has no q = 0.5 row")?
        .parse::<f64>()
        .map_err(|e| e.to_string())?;
    check((at_half - 0.707107).abs() <= 1e-6, || {
        format!("CLI figdata 4 at q=0.5: {at_half}")
    })?;
    Ok(format!("endpoints exact, δ_2 bound at q=1/2 = {d:.6}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("bound reproduction", bound_reproduction, Duration::from_secs(1)),
        ("function identities", function_identities, Duration::from_secs(1)),
        ("inequality suites", inequality_suites, Duration::from_secs(60)),
        (
            "polytope decomposition",
            polytope_decomposition,
            Duration::from_secs(30),
        ),
        ("exact constants", exact_constants, Duration::from_secs(10)),
        ("recovery soundness", recovery_soundness, Duration::from_secs(300)),
        ("nsp equivalence", nsp_equivalence, Duration::from_secs(120)),
        ("figure data", figure_data, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    let mut stdout = std::io::stdout().lock();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (tag, detail) = match outcome {
            Ok(d) if elapsed <= *limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, limit {limit:?}")),
            Err(e) => ("FAIL", e),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        let _ = writeln!(stdout, "criterion {} [{tag}] {name} ({elapsed:.2?}): {detail}", i + 1);
    }
    let _ = stdout.flush();
    if failed > 0 {
        std::process::exit(1);
    }
}
