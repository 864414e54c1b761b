use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use masterfield::corpus::{default_corpus, random_loop};
use masterfield::freeprob::{
    catalan, cumulants_from_moments, enumerate_nc, joint_cumulants_check_conjugation,
    moments_from_cumulants, words_up_to, CumulantTable, TableState,
};
use masterfield::holonomy::{
    braid_words, check_basis_independence, check_braid_invariance, check_gauge_invariance_scalar,
    check_infinite_divisibility, check_refinement, compare_mc, evaluate, GaugeState, HolonomyField,
};
use masterfield::levy::fubm_moment;
use masterfield::mc::MatrixSamplerConfig;
use masterfield::ncalg::{verify_axiom, verify_axiom_with, Axiom, DroppedSummand, ZhangSpec};
use masterfield::planar::{build_graph, lasso_basis, Loop, TreePolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXACT_TOL: f64 = 1e-12;
const CLOSED_FORM_TOL: f64 = 1e-10;
const PROPERTY_TOL: f64 = 1e-10;
const MC_Z: f64 = 3.0;
const MC_N: usize = 64;
const MC_SAMPLES: usize = 400;
const MC_SEED: u64 = 7;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome, String> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed finite sum for the moments of free unitary Brownian motion.
fn biane(t: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut s = 0.0;
    let mut fact = 1.0;
    for j in 0..k {
        if j > 0 {
            fact *= j as f64;
        }
        s += (-t).powi(j as i32) / fact * (k as f64).powi(j as i32 - 1) * binom(k, j + 1);
    }
    (-(k as f64) * t / 2.0).exp() * s
}

/// RK4 on `m_k' = -(k/2) m_k - (k/2) Σ_{j=1}^{k-1} m_j m_{k-j}`, `m_k(0) = 1`.
fn rk4_moments(t: f64, kmax: usize) -> Vec<f64> {
    let rhs = |m: &[f64]| -> Vec<f64> {
        (0..=kmax)
            .map(|k| {
                if k == 0 {
                    return 0.0;
                }
                let conv: f64 = (1..k).map(|j| m[j] * m[k - j]).sum();
                -(k as f64) / 2.0 * (m[k] + conv)
            })
            .collect()
    };
    let steps = (t / 1e-4).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let mut m = vec![1.0; kmax + 1];
    for _ in 0..steps {
        let k1 = rhs(&m);
        let y: Vec<f64> = m.iter().zip(&k1).map(|(a, b)| a + h / 2.0 * b).collect();
        let k2 = rhs(&y);
        let y: Vec<f64> = m.iter().zip(&k2).map(|(a, b)| a + h / 2.0 * b).collect();
        let k3 = rhs(&y);
        let y: Vec<f64> = m.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
        let k4 = rhs(&y);
        for i in 0..=kmax {
            m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    m
}

fn criterion_1() -> Result<Outcome, String> {
    let square = Loop::parse("ENWS").unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.25, 0.5, 1.0, 2.0] {
        let field = HolonomyField::master().with_t_scale(t);
        for k in 1..=6i64 {
            let v = evaluate(&field, &square, k)
                .map_err(|e| e.to_string())?
                .value;
            let m = fubm_moment(t, k).map_err(|e| e.to_string())?;
            worst = worst
                .max((v.re - m).abs())
                .max(v.im.abs())
                .max((v.re - biane(t, k as u64)).abs());
        }
    }
    outcome(
        worst <= EXACT_TOL,
        format!("max |Φ - m_k| = {worst:.2e} (tol {EXACT_TOL:.0e})"),
    )
}

fn criterion_2() -> Result<Outcome, String> {
    let cases = [
        (1.0, 1, (-0.5f64).exp()),
        (1.0, 2, 0.0),
        (2.0, 2, -(-2.0f64).exp()),
    ];
    let mut worst: f64 = 0.0;
    for (t, k, closed) in cases {
        let exact = fubm_moment(t, k).map_err(|e| e.to_string())?;
        let ode = rk4_moments(t, k as usize)[k as usize];
        worst = worst.max((exact - closed).abs()).max((ode - closed).abs());
    }
    outcome(worst <= CLOSED_FORM_TOL, format!("m1(1), m2(1), m2(2): max error {worst:.2e} vs closed form and RK4 (tol {CLOSED_FORM_TOL:.0e})"))
}

fn criterion_3() -> Result<Outcome, String> {
    let field = HolonomyField::master();
    let cases: Vec<(Loop, i64)> = default_corpus()
        .into_iter()
        .flat_map(|l| (1..=3).map(move |k| (l.clone(), k)))
        .collect();
    let cfg = MatrixSamplerConfig::new(MC_N, MC_SAMPLES, MC_SEED);
    let rows = compare_mc(&field, &cases, &cfg, MC_Z).map_err(|e| e.to_string())?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.agrees)
        .map(|r| {
            format!(
                "{} k={} exact {:.5} mc {:.5}±{:.5}",
                r.l, r.k, r.exact, r.estimate.mean.re, r.estimate.stderr
            )
        })
        .collect();
    let worst = rows
        .iter()
        .map(|r| (r.estimate.mean.re - r.exact).abs() / r.estimate.stderr.max(1e-300))
        .fold(0.0, f64::max);
    outcome(
        bad.is_empty(),
        format!(
            "{} cases, N={MC_N}, {MC_SAMPLES} samples, seed {MC_SEED}, workers {}: max |z| = {worst:.2}{}",
            rows.len(),
            cfg.workers,
            if bad.is_empty() { String::new() } else { format!("; outside {MC_Z}σ: {}", bad.join("; ")) }
        ),
    )
}

fn criterion_4() -> Result<Outcome, String> {
    let field = HolonomyField::master();
    let corpus = default_corpus();
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for strands in 1..=4 {
        let braids = braid_words(strands, 4);
        for l in &corpus {
            let rank = masterfield::holonomy::decompose_loop(&field, l)
                .map_err(|e| e.to_string())?
                .areas
                .len();
            let usable: Vec<_> = braids
                .iter()
                .filter(|b| b.strands == strands.min(rank))
                .cloned()
                .collect();
            if strands > rank && strands > 1 {
                continue;
            }
            let r = check_braid_invariance(&field, std::slice::from_ref(l), &usable, 3)
                .map_err(|e| e.to_string())?;
            cases += r.cases.len();
            worst = worst.max(r.max_error());
        }
    }
    outcome(
        worst <= PROPERTY_TOL && cases > 0,
        format!("{cases} evaluations, max error {worst:.2e} (tol {PROPERTY_TOL:.0e})"),
    )
}

fn criterion_5() -> Result<Outcome, String> {
    let field = HolonomyField::master();
    let pairs = [
        (0.0, 0.0),
        (0.5, 0.5),
        (0.3, 0.7),
        (1.0, 1.0),
        (0.25, 1.75),
        (1.5, 0.5),
    ];
    let r = check_infinite_divisibility(&field, &pairs, 5).map_err(|e| e.to_string())?;
    let sharp = r
        .cases
        .iter()
        .find(|c| c.label == "0.3+0.7" && c.k == 2)
        .map(|c| c.lhs.abs().max(c.rhs.abs()))
        .unwrap_or(f64::NAN);
    let lp = |s: &str| Loop::parse(s).unwrap();
    let cuts = vec![
        (lp("EENWWS"), vec![lp("ENWS")]),
        (lp("NENWSS"), vec![lp("NENWSS")]),
        (lp("EENWNWSS"), vec![lp("ENWS"), lp("EENWWS")]),
        (lp("EEENWWWS"), vec![lp("ENWS"), lp("EENWWS")]),
    ];
    let g = check_refinement(&field, &cuts, 5).map_err(|e| e.to_string())?;
    let worst = r.max_error().max(g.max_error());
    outcome(
        worst <= PROPERTY_TOL && sharp <= PROPERTY_TOL,
        format!("{} merges, max error {worst:.2e}, m2 at 0.3+0.7 = {sharp:.1e} (tol {PROPERTY_TOL:.0e})", r.cases.len() + g.cases.len()),
    )
}

fn criterion_6() -> Result<Outcome, String> {
    let field = HolonomyField::master();
    let r = check_gauge_invariance_scalar(
        &field,
        &[0.25, 0.5, 1.0, 2.0],
        5,
        GaugeState { trivial: false },
    )
    .map_err(|e| e.to_string())?;
    let cum = joint_cumulants_check_conjugation(6).map_err(|e| e.to_string())?;
    outcome(
        r.passed() && cum.passed(),
        format!(
            "τ((v u v*)^k) max error {:.2e}; cumulants of v w v* vs w to order 6 exact: {}",
            r.max_error(),
            cum.passed()
        ),
    )
}

fn brute_nc_count(k: usize) -> u64 {
    fn rec(labels: &mut Vec<usize>, k: usize, max: usize, count: &mut u64) {
        if labels.len() == k {
            let crossing = (0..k).any(|a| {
                (a + 1..k).any(|b| {
                    (b + 1..k).any(|c| {
                        (c + 1..k).any(|d| {
                            labels[a] == labels[c]
                                && labels[b] == labels[d]
                                && labels[a] != labels[b]
                        })
                    })
                })
            });
            if !crossing {
                *count += 1;
            }
            return;
        }
        for l in 0..=max {
            labels.push(l);
            rec(labels, k, max.max(l + 1), count);
            labels.pop();
        }
    }
    let mut count = 0;
    rec(&mut Vec::new(), k, 0, &mut count);
    count
}

fn criterion_7() -> Result<Outcome, String> {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in 1..=10 {
        let brute = brute_nc_count(k);
        let lib = enumerate_nc(k).map_err(|e| e.to_string())?.len() as u64;
        if brute != lib || BigInt::from(brute) != catalan(k) {
            ok = false;
            notes.push(format!("k={k}: brute {brute}, library {lib}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alphabet = ['a', 'b'];
    let mut table = CumulantTable::new(8);
    for w in words_up_to(&alphabet, 8) {
        let v = BigRational::new(
            rng.random_range(-9i64..=9).into(),
            rng.random_range(1i64..=5).into(),
        );
        table.values.insert(w, v);
    }
    let moments: BTreeMap<Vec<char>, BigRational> = words_up_to(&alphabet, 8)
        .into_iter()
        .map(|w| {
            let m = moments_from_cumulants(&table, &w)?;
            Ok((w, m))
        })
        .collect::<Result<_, masterfield::freeprob::FreeProbError>>()
        .map_err(|e| e.to_string())?;
    let state = TableState { moments };
    let back = CumulantTable::from_state(&state, &alphabet, 8).map_err(|e| e.to_string())?;
    let roundtrip = back.values == table.values;
    if !roundtrip {
        ok = false;
        notes.push("moment/cumulant round trip differs".into());
    }
    let single = words_up_to(&alphabet, 8)
        .into_iter()
        .all(|w| cumulants_from_moments(&state, &w).ok().as_ref() == table.values.get(&w));
    ok &= single;
    let mut failures = 0;
    for _ in 0..200 {
        let half = rng.random_range(1..=12);
        let l = random_loop(half, &mut rng);
        if l.is_empty() {
            continue;
        }
        let basis = lasso_basis(&build_graph(std::slice::from_ref(&l)).map_err(|e| e.to_string())?);
        let w = basis.decompose(&l).map_err(|e| e.to_string())?;
        let mut rebuilt = Loop::constant();
        for letter in &w.letters {
            let lasso = basis.lassos()[letter.index].to_loop();
            rebuilt = rebuilt.concat(&if letter.exp > 0 {
                lasso
            } else {
                lasso.inverse()
            });
        }
        if rebuilt != l {
            failures += 1;
        }
    }
    ok &= failures == 0;
    outcome(
        ok,
        format!(
            "NC counts = Catalan for k ≤ 10; cumulant round trip to order 8 exact: {}; decompose round trip failures {failures}/200{}",
            roundtrip && single,
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    )
}

fn criterion_8() -> Result<Outcome, String> {
    let mut failures = Vec::new();
    for n in 1..=3 {
        for a in Axiom::ALL {
            let r = verify_axiom(a.name(), n).map_err(|e| e.to_string())?;
            if !r.holds {
                failures.push(format!("{a} n={n}"));
            }
        }
    }
    let bad = DroppedSummand(ZhangSpec::new(2).map_err(|e| e.to_string())?);
    let controls: Vec<_> = [
        Axiom::CounitLeft,
        Axiom::CounitRight,
        Axiom::AntipodeLeft,
        Axiom::AntipodeRight,
    ]
    .into_iter()
    .map(|a| verify_axiom_with(&bad, a))
    .collect();
    let caught = controls
        .iter()
        .all(|r| !r.holds && r.counterexample.is_some());
    let witness = controls
        .first()
        .and_then(|r| r.counterexample.as_ref())
        .map(|c| c.generator.to_string())
        .unwrap_or_default();
    outcome(
        failures.is_empty() && caught,
        format!(
            "27 axiom checks, failures: {}; corrupted Δ rejected by {} of {} controls (first witness {witness})",
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") },
            controls.iter().filter(|r| !r.holds).count(),
            controls.len()
        ),
    )
}

fn criterion_9() -> Result<Outcome, String> {
    let field = HolonomyField::master();
    let r = check_basis_independence(&field, &default_corpus(), TreePolicy::REVERSED, 6)
        .map_err(|e| e.to_string())?;
    outcome(
        r.passed(),
        format!(
            "{} values, max difference {:.2e} (tol {PROPERTY_TOL:.0e})",
            r.cases.len(),
            r.max_error()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Result<Outcome, String>); 9] = [
        ("simple-loop marginal", Duration::from_secs(1), criterion_1),
        (
            "free unitary BM values",
            Duration::from_secs(1),
            criterion_2,
        ),
        ("large-N Monte Carlo", Duration::from_secs(300), criterion_3),
        ("braid invariance", Duration::from_secs(30), criterion_4),
        (
            "infinite divisibility",
            Duration::from_secs(10),
            criterion_5,
        ),
        (
            "scalar gauge invariance",
            Duration::from_secs(60),
            criterion_6,
        ),
        (
            "combinatorial oracles",
            Duration::from_secs(60),
            criterion_7,
        ),
        ("Zhang axioms", Duration::from_secs(10), criterion_8),
        ("basis independence", Duration::from_secs(60), criterion_9),
    ];
    let mut all = true;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "criterion {}: {} [{name}] {detail}; {:.2}s (budget {}s)",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
