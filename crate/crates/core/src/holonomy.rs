//! Holonomy fields on the plane: evaluation of `Φ_ℓ` and the invariance harness.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::freeprob::{
    free_unitary_moment, DynState, FreeProbError, ProductKind, ProductState, State, Tagged,
};
use crate::levy::{state_at, LevyError, Semigroup};
use crate::mc::{
    estimate_wilson_batch, LassoSpec, MatrixSamplerConfig, McError, Observable, WilsonEstimate,
    WilsonJob,
};
use crate::planar::{
    braid_act, build_graph, lasso_basis_with, winding, BraidWord, LassoBasis, LassoWord, Loop,
    Orientation, PlanarError, TreePolicy,
};

pub const EXACT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    FreeProb(#[from] FreeProbError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error("exact evaluation unavailable, use mc")]
    ExactUnavailable,
    #[error("loops are not combinatorially equivalent: {0}")]
    Combinatorics(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolonomyField {
    pub semigroup: Semigroup,
    pub product: ProductKind,
    pub n: usize,
    /// Face areas are multiplied by this before being used as times.
    pub t_scale: f64,
    pub policy: TreePolicy,
    pub orientation: Orientation,
}

impl HolonomyField {
    /// The scalar master field: free unitary Brownian motion, free product.
    pub fn master() -> HolonomyField {
        HolonomyField::new(Semigroup::FreeUnitary, ProductKind::Free)
    }

    pub fn new(semigroup: Semigroup, product: ProductKind) -> HolonomyField {
        HolonomyField {
            semigroup,
            product,
            n: 1,
            t_scale: 1.0,
            policy: TreePolicy::STANDARD,
            orientation: Orientation::Anticlockwise,
        }
    }

    pub fn with_t_scale(mut self, t_scale: f64) -> HolonomyField {
        self.t_scale = t_scale;
        self
    }

    pub fn with_policy(mut self, policy: TreePolicy) -> HolonomyField {
        self.policy = policy;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> HolonomyField {
        self.orientation = orientation;
        self
    }

    pub fn is_exact(&self) -> bool {
        self.n == 1 && self.semigroup.is_exact()
    }

    /// One marginal state per lasso, at the given (unscaled) face areas.
    pub fn marginals(&self, areas: &[f64]) -> Result<Vec<DynState<i32, f64>>, HolonomyError> {
        if !self.is_exact() {
            return Err(HolonomyError::ExactUnavailable);
        }
        areas
            .iter()
            .map(|&a| {
                Ok(Arc::new(state_at(&self.semigroup, a * self.t_scale)?) as DynState<i32, f64>)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldValue {
    pub l: Loop,
    pub k: i64,
    pub value: Complex64,
    /// Standard error of a Monte Carlo estimate.
    pub stderr: Option<f64>,
    pub method: Method,
}

/// A loop written in the lasso basis of a graph, with the face area of each lasso.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub basis: LassoBasis,
    pub word: LassoWord,
    pub areas: Vec<f64>,
}

/// Decomposes `target` in the lasso basis of the graph drawn by `drawn`.
pub fn decompose_on(
    field: &HolonomyField,
    drawn: &[Loop],
    target: &Loop,
) -> Result<Decomposition, HolonomyError> {
    let graph = build_graph(drawn)?;
    let basis = lasso_basis_with(&graph, field.policy, field.orientation);
    let word = basis.decompose(target)?;
    let areas = basis
        .lassos()
        .iter()
        .map(|l| basis.graph().face(l.face_id).area as f64)
        .collect();
    Ok(Decomposition { basis, word, areas })
}

pub fn decompose_loop(field: &HolonomyField, l: &Loop) -> Result<Decomposition, HolonomyError> {
    decompose_on(field, std::slice::from_ref(l), &l.reduce())
}

/// `w^k` as letters of the product: lasso `i` becomes copy `i`, adjacent
/// letters of one copy merge into a single power. Tracial products are
/// also reduced cyclically.
pub fn product_letters(word: &LassoWord, k: i64, product: ProductKind) -> Vec<Tagged<i32>> {
    let w = word.pow(k as i32);
    let mut out: Vec<Tagged<i32>> = Vec::with_capacity(w.len());
    for l in &w.letters {
        push_merged(&mut out, Tagged::new(l.index, l.exp as i32));
    }
    if product != ProductKind::Boolean {
        while out.len() > 1 && out[0].factor == out[out.len() - 1].factor {
            let last = out.pop().expect("nonempty");
            out[0].letter += last.letter;
            if out[0].letter == 0 {
                out.remove(0);
            }
        }
    }
    out
}

fn push_merged(out: &mut Vec<Tagged<i32>>, t: Tagged<i32>) {
    match out.last_mut() {
        Some(top) if top.factor == t.factor => {
            top.letter += t.letter;
            if top.letter == 0 {
                out.pop();
            }
        }
        _ => out.push(t),
    }
}

pub fn evaluate_letters(
    product: ProductKind,
    marginals: &[DynState<i32, f64>],
    letters: &[Tagged<i32>],
) -> Result<f64, HolonomyError> {
    if product == ProductKind::Free {
        return Ok(free_unitary_moment(marginals, letters)?);
    }
    Ok(ProductState {
        kind: product,
        algorithm: Default::default(),
        marginals: marginals.to_vec(),
    }
    .eval(letters)?)
}

pub fn evaluate_word(
    field: &HolonomyField,
    word: &LassoWord,
    areas: &[f64],
    k: i64,
) -> Result<f64, HolonomyError> {
    let marginals = field.marginals(areas)?;
    evaluate_letters(
        field.product,
        &marginals,
        &product_letters(word, k, field.product),
    )
}

fn exact_value(l: &Loop, k: i64, v: f64) -> FieldValue {
    FieldValue {
        l: l.clone(),
        k,
        value: Complex64::new(v, 0.0),
        stderr: None,
        method: Method::Exact,
    }
}

/// `Φ_ℓ(u^k)` for the scalar field.
pub fn evaluate(field: &HolonomyField, l: &Loop, k: i64) -> Result<FieldValue, HolonomyError> {
    if !field.is_exact() {
        return Err(HolonomyError::ExactUnavailable);
    }
    let l = l.reduce();
    if l.is_empty() || k == 0 {
        return Ok(exact_value(&l, k, 1.0));
    }
    let d = decompose_loop(field, &l)?;
    Ok(exact_value(
        &l,
        k,
        evaluate_word(field, &d.word, &d.areas, k)?,
    ))
}

/// Evaluates `target` on the graph drawn by `drawn`, whose faces may subdivide `target`'s.
pub fn evaluate_on(
    field: &HolonomyField,
    drawn: &[Loop],
    target: &Loop,
    k: i64,
) -> Result<FieldValue, HolonomyError> {
    if !field.is_exact() {
        return Err(HolonomyError::ExactUnavailable);
    }
    let target = target.reduce();
    if target.is_empty() || k == 0 {
        return Ok(exact_value(&target, k, 1.0));
    }
    let d = decompose_on(field, drawn, &target)?;
    Ok(exact_value(
        &target,
        k,
        evaluate_word(field, &d.word, &d.areas, k)?,
    ))
}

fn mc_job(field: &HolonomyField, l: &Loop, k: i64) -> Result<WilsonJob, HolonomyError> {
    let l = l.reduce();
    if l.is_empty() || k == 0 {
        return Ok(WilsonJob::trace(Vec::new(), LassoWord::identity()));
    }
    let d = decompose_loop(field, &l)?;
    let lassos = d
        .areas
        .iter()
        .map(|&a| LassoSpec {
            area: a * field.t_scale,
            orientation: field.orientation,
        })
        .collect();
    let observable = match &field.semigroup {
        Semigroup::BlockMc { n, d, .. } => Observable::BlockTrace {
            sizes: vec![*d; *n],
            i: 0,
            j: 0,
        },
        Semigroup::RectangularMc { d, .. } => Observable::BlockTrace {
            sizes: d.clone(),
            i: 0,
            j: 0,
        },
        _ => Observable::Trace,
    };
    Ok(WilsonJob {
        lassos,
        word: d.word.pow(k as i32),
        observable,
        gauge: false,
    })
}

/// Monte Carlo estimates of `Φ_ℓ(u^k)` for every `(ℓ, k)`, all on one set of paths.
pub fn evaluate_mc(
    field: &HolonomyField,
    cases: &[(Loop, i64)],
    cfg: &MatrixSamplerConfig,
) -> Result<Vec<FieldValue>, HolonomyError> {
    let jobs: Vec<WilsonJob> = cases
        .iter()
        .map(|(l, k)| mc_job(field, l, *k))
        .collect::<Result<_, _>>()?;
    let estimates = estimate_wilson_batch(&jobs, cfg)?;
    Ok(cases
        .iter()
        .zip(estimates)
        .map(|((l, k), e)| FieldValue {
            l: l.reduce(),
            k: *k,
            value: e.mean,
            stderr: Some(e.stderr),
            method: Method::Mc,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct McComparison {
    pub l: Loop,
    pub k: i64,
    pub exact: f64,
    pub estimate: WilsonEstimate,
    pub agrees: bool,
}

/// Exact scalar values against the `U(N)` Monte Carlo estimate, `z` standard errors.
pub fn compare_mc(
    field: &HolonomyField,
    cases: &[(Loop, i64)],
    cfg: &MatrixSamplerConfig,
    z: f64,
) -> Result<Vec<McComparison>, HolonomyError> {
    let exact: Vec<f64> = cases
        .iter()
        .map(|(l, k)| Ok(evaluate(field, l, *k)?.value.re))
        .collect::<Result<_, HolonomyError>>()?;
    let mc_field = HolonomyField {
        semigroup: Semigroup::ClassicalMc {
            field: cfg.field,
            size: cfg.n,
        },
        ..field.clone()
    };
    let jobs: Vec<WilsonJob> = cases
        .iter()
        .map(|(l, k)| mc_job(&mc_field, l, *k))
        .collect::<Result<_, _>>()?;
    let estimates = estimate_wilson_batch(&jobs, cfg)?;
    Ok(cases
        .iter()
        .zip(exact)
        .zip(estimates)
        .map(|(((l, k), x), e)| McComparison {
            l: l.reduce(),
            k: *k,
            exact: x,
            estimate: e,
            agrees: e.agrees_with(Complex64::new(x, 0.0), z, 1e-12),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckCase {
    pub label: String,
    pub k: i64,
    pub lhs: f64,
    pub rhs: f64,
}

impl CheckCase {
    pub fn error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub tol: f64,
    pub cases: Vec<CheckCase>,
}

impl CheckReport {
    pub fn new(name: &'static str) -> CheckReport {
        CheckReport {
            name,
            tol: EXACT_TOL,
            cases: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, k: i64, lhs: f64, rhs: f64) {
        self.cases.push(CheckCase {
            label: label.into(),
            k,
            lhs,
            rhs,
        });
    }

    pub fn max_error(&self) -> f64 {
        self.cases.iter().map(CheckCase::error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.error() <= self.tol)
    }

    pub fn first_failure(&self) -> Option<&CheckCase> {
        self.cases.iter().find(|c| c.error() > self.tol)
    }
}

/// All braid words of length at most `max_len` on `strands` strands, shortest first.
pub fn braid_words(strands: usize, max_len: usize) -> Vec<BraidWord> {
    let gens: Vec<i32> = (1..strands as i32).flat_map(|i| [i, -i]).collect();
    let mut out = vec![BraidWord::identity(strands)];
    let mut frontier = vec![Vec::<i32>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &g in &gens {
                let mut v = w.clone();
                v.push(g);
                out.push(BraidWord::from_signed(strands, &v).expect("indices in range"));
                next.push(v);
            }
        }
        frontier = next;
    }
    out
}

/// Rewrites `word` (over basis `c`) in the braided basis `β·c`, together with
/// the face of each braided lasso.
pub fn rebase_braided(
    word: &LassoWord,
    braid: &BraidWord,
) -> Result<(LassoWord, Vec<usize>), HolonomyError> {
    let gens: Vec<LassoWord> = (0..braid.strands).map(LassoWord::generator).collect();
    let back = braid_act(&braid.inverse(), &gens)?;
    Ok((word.substitute(&back).reduced(), braid.permutation()))
}

/// For every loop and braid `β` on its lasso basis `c` (braids on more strands
/// than there are lassos are skipped), evaluates the loop in `c` and in `β·c`.
pub fn check_braid_invariance(
    field: &HolonomyField,
    loops: &[Loop],
    braids: &[BraidWord],
    kmax: i64,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("braid");
    for l in loops {
        let d = decompose_loop(field, l)?;
        let marginals = field.marginals(&d.areas)?;
        let rank = d.areas.len();
        let base: Vec<f64> = (1..=kmax)
            .map(|k| {
                evaluate_letters(
                    field.product,
                    &marginals,
                    &product_letters(&d.word, k, field.product),
                )
            })
            .collect::<Result<_, _>>()?;
        for b in braids.iter().filter(|b| b.strands <= rank.max(1)) {
            let b = BraidWord {
                strands: rank,
                letters: b.letters.clone(),
            };
            let (w, perm) = rebase_braided(&d.word, &b)?;
            let braided: Vec<DynState<i32, f64>> =
                perm.iter().map(|&p| marginals[p].clone()).collect();
            for k in 1..=kmax {
                let v = evaluate_letters(
                    field.product,
                    &braided,
                    &product_letters(&w, k, field.product),
                )?;
                report.push(format!("{l} {b}"), k, base[k as usize - 1], v);
            }
        }
    }
    Ok(report)
}

/// Merged lasso of area `s + t` against the product of lassos of areas `s`, `t`.
pub fn check_infinite_divisibility(
    field: &HolonomyField,
    pairs: &[(f64, f64)],
    kmax: i64,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("divisibility");
    let pair = LassoWord::from_pairs(&[(0, 1), (1, 1)]);
    let single = LassoWord::generator(0);
    for &(s, t) in pairs {
        for k in 1..=kmax {
            let merged = evaluate_word(field, &single, &[s + t], k)?;
            let split = evaluate_word(field, &pair, &[s, t], k)?;
            report.push(format!("{s}+{t}"), k, merged, split);
        }
    }
    Ok(report)
}

/// Each loop evaluated on its own graph and on the graph refined by `cuts`.
pub fn check_refinement(
    field: &HolonomyField,
    cases: &[(Loop, Vec<Loop>)],
    kmax: i64,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("refinement");
    for (l, cuts) in cases {
        let mut drawn = vec![l.clone()];
        drawn.extend(cuts.iter().cloned());
        for k in 1..=kmax {
            let whole = evaluate(field, l, k)?.value.re;
            let refined = evaluate_on(field, &drawn, l, k)?.value.re;
            report.push(l.to_string(), k, whole, refined);
        }
    }
    Ok(report)
}

/// Face areas with the winding number of the loop around each face, sorted.
fn face_profile(l: &Loop, sign: i64) -> Result<Vec<(i64, i64)>, HolonomyError> {
    let g = build_graph(std::slice::from_ref(l))?;
    let mut p: Vec<(i64, i64)> = g
        .faces()
        .iter()
        .map(|f| (f.area, sign * winding(l, f)))
        .collect();
    p.sort_unstable();
    Ok(p)
}

/// Loops whose faces match in area and winding number (up to a global
/// orientation flip, as for mirror images) must have equal `Φ`.
pub fn check_area_invariance(
    field: &HolonomyField,
    pairs: &[(Loop, Loop)],
    kmax: i64,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("area");
    for (a, b) in pairs {
        let (a, b) = (a.reduce(), b.reduce());
        let pa = face_profile(&a, 1)?;
        if pa != face_profile(&b, 1)? && pa != face_profile(&b, -1)? {
            return Err(HolonomyError::Combinatorics(format!(
                "faces of {a} and {b} differ in area or winding"
            )));
        }
        for k in 1..=kmax {
            report.push(
                format!("{a} ~ {b}"),
                k,
                evaluate(field, &a, k)?.value.re,
                evaluate(field, &b, k)?.value.re,
            );
        }
    }
    Ok(report)
}

/// `τ(v^m) = δ_{m0}` (Haar) or `1` (trivial gauge), with `f64` scalars.
#[derive(Clone, Copy, Debug)]
pub struct GaugeState {
    pub trivial: bool,
}

impl State for GaugeState {
    type Letter = i32;
    type Scalar = f64;

    fn eval(&self, word: &[i32]) -> Result<f64, FreeProbError> {
        let m: i32 = word.iter().sum();
        Ok(if self.trivial || m == 0 { 1.0 } else { 0.0 })
    }
}

/// `τ((v u_t v*)^k)` with `v` free from `u_t`, against `m_k(t)`. The word is fed
/// to the free product letter by letter, without merging.
pub fn check_gauge_invariance_scalar(
    field: &HolonomyField,
    times: &[f64],
    kmax: i64,
    gauge: GaugeState,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("gauge");
    for &t in times {
        let u = field.marginals(&[t])?.remove(0);
        let marginals: Vec<DynState<i32, f64>> = vec![Arc::new(gauge), u.clone()];
        for k in 1..=kmax {
            let mut w = Vec::new();
            for _ in 0..k {
                w.extend([Tagged::new(0, 1), Tagged::new(1, 1), Tagged::new(0, -1)]);
            }
            let lhs = evaluate_letters(ProductKind::Free, &marginals, &w)?;
            report.push(format!("t={t}"), k, lhs, u.eval(&[k as i32])?);
        }
    }
    Ok(report)
}

/// `Φ` under two spanning-tree policies.
pub fn check_basis_independence(
    field: &HolonomyField,
    loops: &[Loop],
    other: TreePolicy,
    kmax: i64,
) -> Result<CheckReport, HolonomyError> {
    let mut report = CheckReport::new("basis");
    let alt = field.clone().with_policy(other);
    for l in loops {
        for k in 1..=kmax {
            report.push(
                l.to_string(),
                k,
                evaluate(field, l, k)?.value.re,
                evaluate(&alt, l, k)?.value.re,
            );
        }
    }
    Ok(report)
}
