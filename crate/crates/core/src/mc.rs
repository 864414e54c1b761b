//! Finite-N random-matrix Monte Carlo: Brownian motion on `U(N)` and `O(N)`,
//! block extraction and Wilson-loop estimation over lasso configurations.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::planar::{LassoWord, Orientation};

pub type CMatrix = DMatrix<Complex64>;

pub const MIN_STEPS_PER_UNIT: usize = 50;
pub const DEFAULT_STEPS_PER_UNIT: usize = 200;
pub const UNITARITY_TOL: f64 = 1e-8;
pub const WORKERS_ENV: &str = "MASTERFIELD_WORKERS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("matrix size must be at least 2, got {0}")]
    SizeTooSmall(usize),
    #[error("{steps} steps per unit time is below the minimum {min}")]
    TooFewSteps { steps: usize, min: usize },
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("unitarity defect {0:e} exceeds tolerance")]
    UnitarityDrift(f64),
    #[error("nonconforming dimensions: {0}")]
    Dimension(String),
    #[error("word uses lasso {index} but only {lassos} were given")]
    WordMismatch { index: usize, lassos: usize },
    #[error("at least one sample is required")]
    NoSamples,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Field, String> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            _ => Err(format!("unknown field {s:?}, expected real or complex")),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

/// Worker count from `MASTERFIELD_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSamplerConfig {
    pub n: usize,
    pub field: Field,
    pub steps_per_unit: usize,
    pub seed: u64,
    pub samples: usize,
    pub workers: usize,
}

impl MatrixSamplerConfig {
    pub fn new(n: usize, samples: usize, seed: u64) -> MatrixSamplerConfig {
        MatrixSamplerConfig {
            n,
            field: Field::Complex,
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            seed,
            samples,
            workers: default_workers(),
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.n < 2 {
            return Err(McError::SizeTooSmall(self.n));
        }
        if self.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(McError::TooFewSteps {
                steps: self.steps_per_unit,
                min: MIN_STEPS_PER_UNIT,
            });
        }
        if self.samples == 0 {
            return Err(McError::NoSamples);
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.steps_per_unit as f64
    }
}

/// Independent stream for sample `index`; the same index gives the same stream.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn to_c64(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// `c ← α a b + β c`.
pub fn gemm(alpha: Complex64, a: &CMatrix, b: &CMatrix, beta: Complex64, c: &mut CMatrix) {
    let (m, k) = a.shape();
    let (k2, n) = b.shape();
    assert_eq!(k, k2, "inner dimensions");
    assert_eq!(c.shape(), (m, n), "output dimensions");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        *c *= beta;
        return;
    }
    // SAFETY: Complex64 is repr(C) with (re, im), matching [f64; 2]; all three
    // matrices are dense column-major with the dimensions checked above.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            to_c64(alpha),
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            to_c64(beta),
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    gemm(
        Complex64::new(1.0, 0.0),
        a,
        b,
        Complex64::new(0.0, 0.0),
        &mut c,
    );
    c
}

fn gauss_jordan(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let w = 2 * n;
    // row-major [A | I], reduced in place
    let mut aug = vec![Complex64::new(0.0, 0.0); n * w];
    for i in 0..n {
        for j in 0..n {
            aug[i * w + j] = m[(i, j)];
        }
        aug[i * w + n + i] = Complex64::new(1.0, 0.0);
    }
    for p in 0..n {
        let (before, rest) = aug.split_at_mut(p * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let piv = pivot_row[p].inv();
        for x in pivot_row.iter_mut() {
            *x *= piv;
        }
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[p];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                *x -= f * y;
            }
        }
    }
    CMatrix::from_fn(n, n, |i, j| aug[i * w + n + j])
}

/// Inverse of a matrix whose Hermitian part is positive definite, by
/// recursive Schur complements (no pivoting is needed for that class).
pub fn inverse_accretive(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n <= 8 {
        return gauss_jordan(m);
    }
    let h = n / 2;
    let r = n - h;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let a = m.view((0, 0), (h, h)).into_owned();
    let b = m.view((0, h), (h, r)).into_owned();
    let c = m.view((h, 0), (r, h)).into_owned();
    let mut s = m.view((h, h), (r, r)).into_owned();
    let ai = inverse_accretive(&a);
    let ai_b = matmul(&ai, &b);
    let c_ai = matmul(&c, &ai);
    gemm(-one, &c, &ai_b, one, &mut s);
    let si = inverse_accretive(&s);
    let t = matmul(&ai_b, &si);
    let mut tl = ai;
    gemm(one, &t, &c_ai, one, &mut tl);
    let mut bl = CMatrix::zeros(r, h);
    gemm(-one, &si, &c_ai, zero, &mut bl);
    let mut out = CMatrix::zeros(n, n);
    out.view_mut((0, 0), (h, h)).copy_from(&tl);
    out.view_mut((0, h), (h, r)).copy_from(&(-t));
    out.view_mut((h, 0), (r, h)).copy_from(&bl);
    out.view_mut((h, h), (r, r)).copy_from(&si);
    out
}

/// Largest entry of `U*U − I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = matmul(&u.adjoint(), u);
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn normalized_trace(m: &CMatrix) -> Complex64 {
    m.trace() / m.nrows() as f64
}

/// Brownian motion on `U(N)` (or `O(N)`) advanced by Cayley steps
/// `U ← (I + Z)(I − Z)⁻¹ U`, `Z = (i/2)√h H` with `E|H_ij|² = 1/N`.
#[derive(Clone, Debug)]
pub struct BrownianMotion {
    n: usize,
    field: Field,
    dt: f64,
    t: f64,
    u: CMatrix,
}

impl BrownianMotion {
    pub fn new(cfg: &MatrixSamplerConfig) -> Result<BrownianMotion, McError> {
        if cfg.n < 2 {
            return Err(McError::SizeTooSmall(cfg.n));
        }
        if cfg.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(McError::TooFewSteps {
                steps: cfg.steps_per_unit,
                min: MIN_STEPS_PER_UNIT,
            });
        }
        Ok(BrownianMotion {
            n: cfg.n,
            field: cfg.field,
            dt: cfg.dt(),
            t: 0.0,
            u: CMatrix::identity(cfg.n, cfg.n),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn current(&self) -> &CMatrix {
        &self.u
    }

    fn generator<R: Rng>(&self, h: f64, rng: &mut R) -> CMatrix {
        let n = self.n;
        let sd = (h / n as f64).sqrt();
        let mut z = CMatrix::zeros(n, n);
        match self.field {
            Field::Complex => {
                // Z = (i/2) X with X Hermitian
                let off = sd / std::f64::consts::SQRT_2;
                for j in 0..n {
                    let d: f64 = rng.sample(StandardNormal);
                    z[(j, j)] = Complex64::new(0.0, 0.5 * sd * d);
                    for i in 0..j {
                        let a: f64 = rng.sample(StandardNormal);
                        let b: f64 = rng.sample(StandardNormal);
                        let x = Complex64::new(off * a, off * b);
                        let iz = Complex64::new(0.0, 0.5) * x;
                        z[(i, j)] = iz;
                        z[(j, i)] = -iz.conj();
                    }
                }
            }
            Field::Real => {
                for j in 0..n {
                    for i in 0..j {
                        let a: f64 = rng.sample(StandardNormal);
                        let x = 0.5 * sd * a;
                        z[(i, j)] = Complex64::new(x, 0.0);
                        z[(j, i)] = Complex64::new(-x, 0.0);
                    }
                }
            }
        }
        z
    }

    fn step<R: Rng>(&mut self, h: f64, rng: &mut R) {
        let z = self.generator(h, rng);
        let mut m = -z;
        for i in 0..self.n {
            m[(i, i)] += 1.0;
        }
        let minv = inverse_accretive(&m);
        // (I + Z)(I − Z)⁻¹ = 2(I − Z)⁻¹ − I
        let mut next = self.u.clone();
        gemm(
            Complex64::new(2.0, 0.0),
            &minv,
            &self.u,
            Complex64::new(-1.0, 0.0),
            &mut next,
        );
        self.u = next;
        self.t += h;
    }

    /// Advances to time `target` in steps of `dt`, ending with a partial step.
    pub fn advance_to<R: Rng>(&mut self, target: f64, rng: &mut R) -> Result<(), McError> {
        if target < self.t {
            return Err(McError::NegativeTime(target - self.t));
        }
        let start = self.t;
        let span = target - start;
        let full = (span / self.dt * (1.0 + 1e-12)).floor() as usize;
        for i in 0..full {
            let h = self.dt;
            self.step(h, rng);
            self.t = start + (i + 1) as f64 * h;
        }
        let rest = target - self.t;
        if rest > 1e-14 {
            self.step(rest, rng);
        }
        self.t = target;
        Ok(())
    }
}

/// One sample of the Brownian motion at time `t`.
pub fn sample_ubm<R: Rng>(
    cfg: &MatrixSamplerConfig,
    t: f64,
    rng: &mut R,
) -> Result<CMatrix, McError> {
    if t < 0.0 || t.is_nan() {
        return Err(McError::NegativeTime(t));
    }
    let mut bm = BrownianMotion::new(cfg)?;
    bm.advance_to(t, rng)?;
    let defect = unitarity_defect(bm.current());
    if defect > UNITARITY_TOL {
        return Err(McError::UnitarityDrift(defect));
    }
    Ok(bm.u)
}

/// Haar-distributed unitary (or orthogonal) matrix from a phase-corrected QR.
pub fn sample_haar<R: Rng>(n: usize, field: Field, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        match field {
            Field::Complex => {
                let b: f64 = rng.sample(StandardNormal);
                Complex64::new(a, b) / std::f64::consts::SQRT_2
            }
            Field::Real => Complex64::new(a, 0.0),
        }
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockMode {
    /// `n × n` grid of `d × d` blocks.
    Square { n: usize, d: usize },
    /// Blocks of sizes `d¹, …, dⁿ` along both axes.
    Rectangular(Vec<usize>),
}

impl BlockMode {
    pub fn sizes(&self) -> Vec<usize> {
        match self {
            BlockMode::Square { n, d } => vec![*d; *n],
            BlockMode::Rectangular(d) => d.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BlockFamily {
    pub sizes: Vec<usize>,
    blocks: Vec<CMatrix>,
}

impl BlockFamily {
    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    /// Block `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.sizes.len() + j]
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    sizes
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect()
}

fn check_partition(n: usize, sizes: &[usize]) -> Result<(), McError> {
    if sizes.is_empty() || sizes.contains(&0) || sizes.iter().sum::<usize>() != n {
        return Err(McError::Dimension(format!(
            "blocks {sizes:?} do not partition size {n}"
        )));
    }
    Ok(())
}

pub fn extract_blocks(u: &CMatrix, mode: &BlockMode) -> Result<BlockFamily, McError> {
    let n = u.nrows();
    if u.ncols() != n {
        return Err(McError::Dimension(format!("matrix is {}x{}", n, u.ncols())));
    }
    let sizes = mode.sizes();
    check_partition(n, &sizes)?;
    let off = offsets(&sizes);
    let mut blocks = Vec::with_capacity(sizes.len() * sizes.len());
    for (i, &di) in sizes.iter().enumerate() {
        for (j, &dj) in sizes.iter().enumerate() {
            blocks.push(u.view((off[i], off[j]), (di, dj)).into_owned());
        }
    }
    Ok(BlockFamily { sizes, blocks })
}

/// Diagonal projectors onto the coordinate blocks.
pub fn projectors(sizes: &[usize]) -> Vec<CMatrix> {
    let n: usize = sizes.iter().sum();
    offsets(sizes)
        .into_iter()
        .zip(sizes)
        .map(|(o, &d)| {
            CMatrix::from_fn(n, n, |i, j| {
                if i == j && i >= o && i < o + d {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect()
}

/// Coefficients `c_i = Tr(p_i A p_i) / d_i` of the conditional expectation onto span{p_i}.
pub fn conditional_expectation_rect(
    a: &CMatrix,
    sizes: &[usize],
) -> Result<Vec<Complex64>, McError> {
    if a.nrows() != a.ncols() {
        return Err(McError::Dimension(format!(
            "matrix is {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    check_partition(a.nrows(), sizes)?;
    Ok(offsets(sizes)
        .into_iter()
        .zip(sizes)
        .map(|(o, &d)| (o..o + d).map(|i| a[(i, i)]).sum::<Complex64>() / d as f64)
        .collect())
}

/// `Σ c_i p_i` as a matrix.
pub fn expand_on_projectors(coeffs: &[Complex64], sizes: &[usize]) -> CMatrix {
    let n: usize = sizes.iter().sum();
    let mut m = CMatrix::zeros(n, n);
    for ((o, &d), c) in offsets(sizes).into_iter().zip(sizes).zip(coeffs) {
        for i in o..o + d {
            m[(i, i)] = *c;
        }
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LassoSpec {
    pub area: f64,
    pub orientation: Orientation,
}

impl LassoSpec {
    pub fn anticlockwise(area: f64) -> LassoSpec {
        LassoSpec {
            area,
            orientation: Orientation::Anticlockwise,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Observable {
    /// `tr(W)/N`.
    Trace,
    /// `tr(W(i, j))/d_i` for the block `(i, j)` (0-based, square blocks only).
    BlockTrace {
        sizes: Vec<usize>,
        i: usize,
        j: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WilsonJob {
    pub lassos: Vec<LassoSpec>,
    pub word: LassoWord,
    pub observable: Observable,
    /// Conjugate every lasso holonomy by one shared Haar unitary per sample.
    pub gauge: bool,
}

impl WilsonJob {
    pub fn trace(lassos: Vec<LassoSpec>, word: LassoWord) -> WilsonJob {
        WilsonJob {
            lassos,
            word,
            observable: Observable::Trace,
            gauge: false,
        }
    }

    fn validate(&self, n: usize) -> Result<(), McError> {
        if let Some(l) = self
            .word
            .letters
            .iter()
            .find(|l| l.index >= self.lassos.len())
        {
            return Err(McError::WordMismatch {
                index: l.index,
                lassos: self.lassos.len(),
            });
        }
        if let Some(l) = self.lassos.iter().find(|l| l.area < 0.0 || l.area.is_nan()) {
            return Err(McError::NegativeTime(l.area));
        }
        if let Observable::BlockTrace { sizes, i, j } = &self.observable {
            check_partition(n, sizes)?;
            if *i >= sizes.len() || *j >= sizes.len() || sizes[*i] != sizes[*j] {
                return Err(McError::Dimension(format!(
                    "block ({i}, {j}) of {sizes:?} is not square"
                )));
            }
        }
        Ok(())
    }

    /// Start time of each lasso's increment on the shared path.
    fn starts(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.lassos
            .iter()
            .map(|l| {
                let s = acc;
                acc += l.area;
                s
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WilsonEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

impl WilsonEstimate {
    pub fn from_values(values: &[Complex64]) -> WilsonEstimate {
        let s = values.len();
        let mean = values.iter().sum::<Complex64>() / s as f64;
        let stderr = if s > 1 {
            let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (s - 1) as f64;
            (var / s as f64).sqrt()
        } else {
            0.0
        };
        WilsonEstimate {
            mean,
            stderr,
            samples: s,
        }
    }

    /// Whether `exact` lies within `z` standard errors (absolute slack `floor` for zero-variance estimates).
    pub fn agrees_with(&self, exact: Complex64, z: f64, floor: f64) -> bool {
        (self.mean - exact).norm() <= z * self.stderr + floor
    }
}

fn job_value(
    job: &WilsonJob,
    path: &[(f64, CMatrix)],
    gauge: Option<&CMatrix>,
    n: usize,
) -> Complex64 {
    let at = |t: f64| -> &CMatrix {
        &path
            .iter()
            .find(|(s, _)| *s == t)
            .expect("checkpoint recorded")
            .1
    };
    let starts = job.starts();
    let mut hol: Vec<Option<CMatrix>> = vec![None; job.lassos.len()];
    let mut w = CMatrix::identity(n, n);
    for l in &job.word.letters {
        let h = hol[l.index].get_or_insert_with(|| {
            let spec = job.lassos[l.index];
            let a = starts[l.index];
            let mut inc = matmul(at(a + spec.area), &at(a).adjoint());
            if spec.orientation == Orientation::Clockwise {
                inc = inc.adjoint();
            }
            if let Some(g) = gauge {
                inc = matmul(&matmul(g, &inc), &g.adjoint());
            }
            inc
        });
        let factor = if l.exp > 0 { h.clone() } else { h.adjoint() };
        w = matmul(&w, &factor);
    }
    match &job.observable {
        Observable::Trace => normalized_trace(&w),
        Observable::BlockTrace { sizes, i, j } => {
            let off = offsets(sizes);
            let d = sizes[*i];
            (0..d)
                .map(|r| w[(off[*i] + r, off[*j] + r)])
                .sum::<Complex64>()
                / d as f64
        }
    }
}

fn sample_jobs(
    jobs: &[WilsonJob],
    cfg: &MatrixSamplerConfig,
    index: usize,
) -> Result<Vec<Complex64>, McError> {
    let mut rng = sample_rng(cfg.seed, index as u64);
    let mut times: Vec<f64> = vec![0.0];
    for job in jobs {
        let starts = job.starts();
        for (s, l) in starts.iter().zip(&job.lassos) {
            times.push(*s);
            times.push(s + l.area);
        }
    }
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut bm = BrownianMotion::new(cfg)?;
    let mut path = Vec::with_capacity(times.len());
    for &t in &times {
        bm.advance_to(t, &mut rng)?;
        path.push((t, bm.current().clone()));
    }
    let defect = unitarity_defect(bm.current());
    if defect > UNITARITY_TOL {
        return Err(McError::UnitarityDrift(defect));
    }
    let gauge = if jobs.iter().any(|j| j.gauge) {
        Some(sample_haar(cfg.n, cfg.field, &mut rng))
    } else {
        None
    };
    Ok(jobs
        .iter()
        .map(|j| job_value(j, &path, if j.gauge { gauge.as_ref() } else { None }, cfg.n))
        .collect())
}

/// Runs `f` on every sample index, spread over `workers` threads; results
/// come back in sample order so reductions do not depend on the worker count.
pub fn parallel_samples<T, F>(samples: usize, workers: usize, f: F) -> Result<Vec<T>, McError>
where
    T: Send,
    F: Fn(usize) -> Result<T, McError> + Sync,
{
    let workers = workers.clamp(1, samples.max(1));
    if workers == 1 {
        return (0..samples).map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<Result<T, McError>>> = (0..samples).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..samples)
                        .step_by(workers)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every sample computed"))
        .collect()
}

/// Estimates several Wilson loops on one set of Brownian paths. Within a job
/// the lassos use disjoint time intervals of the path, hence independent
/// holonomies; different jobs reuse the same path.
pub fn estimate_wilson_batch(
    jobs: &[WilsonJob],
    cfg: &MatrixSamplerConfig,
) -> Result<Vec<WilsonEstimate>, McError> {
    cfg.validate()?;
    for j in jobs {
        j.validate(cfg.n)?;
    }
    let per_sample = parallel_samples(cfg.samples, cfg.workers, |i| sample_jobs(jobs, cfg, i))?;
    Ok((0..jobs.len())
        .map(|j| {
            let vals: Vec<Complex64> = per_sample.iter().map(|v| v[j]).collect();
            WilsonEstimate::from_values(&vals)
        })
        .collect())
}

pub fn estimate_wilson(
    lassos: &[LassoSpec],
    word: &LassoWord,
    cfg: &MatrixSamplerConfig,
) -> Result<WilsonEstimate, McError> {
    let job = WilsonJob::trace(lassos.to_vec(), word.clone());
    Ok(estimate_wilson_batch(std::slice::from_ref(&job), cfg)?[0])
}

/// Normalized-trace moments `tr(B^k)/d`, `k = 1..=kmax`, of the diagonal block
/// `(i, i)` of a Brownian motion at time `t`.
pub fn estimate_block_moments(
    cfg: &MatrixSamplerConfig,
    mode: &BlockMode,
    i: usize,
    t: f64,
    kmax: usize,
) -> Result<Vec<WilsonEstimate>, McError> {
    cfg.validate()?;
    check_partition(cfg.n, &mode.sizes())?;
    let per_sample = parallel_samples(cfg.samples, cfg.workers, |s| {
        let mut rng = sample_rng(cfg.seed, s as u64);
        let u = sample_ubm(cfg, t, &mut rng)?;
        let blocks = extract_blocks(&u, mode)?;
        let b = blocks.get(i, i);
        let mut p = b.clone();
        let mut out = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            if k > 1 {
                p = matmul(&p, b);
            }
            out.push(normalized_trace(&p));
        }
        Ok(out)
    })?;
    Ok((0..kmax)
        .map(|k| WilsonEstimate::from_values(&per_sample.iter().map(|v| v[k]).collect::<Vec<_>>()))
        .collect())
}
