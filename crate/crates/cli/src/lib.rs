//! Command-line front end: parses flags, dispatches to the library, emits CSV.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use masterfield::corpus::{cell_cuts, default_corpus, mirror, parse_corpus, rotate_quarter};
use masterfield::freeprob::ProductKind;
use masterfield::holonomy::{
    braid_words, check_area_invariance, check_basis_independence, check_braid_invariance,
    check_gauge_invariance_scalar, check_infinite_divisibility, check_refinement, compare_mc,
    evaluate, evaluate_mc, CheckReport, GaugeState, HolonomyError, HolonomyField,
};
use masterfield::levy::{fubm_moments, LevyError, Semigroup};
use masterfield::mc::{default_workers, Field, MatrixSamplerConfig, DEFAULT_STEPS_PER_UNIT};
use masterfield::ncalg::{Axiom, NcAlgError};
use masterfield::planar::{build_graph, Loop, PlanarError, TreePolicy};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("not a loop: empty word allowed only as explicit constant `eval --constant`")]
    EmptyLoop,
    #[error("{0}")]
    Planar(#[from] PlanarError),
    #[error("corpus line {line}: {source}")]
    Corpus { line: usize, source: PlanarError },
    #[error("{0}")]
    Holonomy(#[from] HolonomyError),
    #[error("{0}")]
    Levy(#[from] LevyError),
    #[error("{0}")]
    NcAlg(#[from] NcAlgError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    /// A check ran but did not hold; the CSV is still emitted.
    #[error("{message}")]
    CheckFailed { csv: String, message: String },
}

#[derive(Parser, Debug, Clone)]
#[command(
    name = "masterfield",
    version,
    about = "Planar master fields: exact evaluation, invariance checks and Monte Carlo"
)]
pub struct RunConfig {
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Exact `Φ_ℓ(u^k)` of the scalar field.
    Eval(EvalArgs),
    /// Run an invariance check over a corpus.
    Check(CheckArgs),
    /// Exact corpus values against the U(N) Monte Carlo estimate.
    CompareMc(CompareArgs),
    /// Moments of free unitary Brownian motion.
    Moments(MomentArgs),
    /// Monte Carlo Wilson loops.
    Mc(McArgs),
    /// Dump the graph drawn by some loops.
    Graph(GraphArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProductArg {
    Free,
    Boolean,
    Tensor,
}

impl From<ProductArg> for ProductKind {
    fn from(p: ProductArg) -> ProductKind {
        match p {
            ProductArg::Free => ProductKind::Free,
            ProductArg::Boolean => ProductKind::Boolean,
            ProductArg::Tensor => ProductKind::Tensor,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Standard,
    Reversed,
}

impl From<PolicyArg> for TreePolicy {
    fn from(p: PolicyArg) -> TreePolicy {
        match p {
            PolicyArg::Standard => TreePolicy::STANDARD,
            PolicyArg::Reversed => TreePolicy::REVERSED,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    #[arg(long, value_enum, default_value = "free")]
    pub field: ProductArg,
    #[arg(long, default_value_t = 1.0)]
    pub t_scale: f64,
    /// Zhang dimension; exact evaluation needs 1.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "standard")]
    pub policy: PolicyArg,
}

impl FieldArgs {
    fn field(&self) -> HolonomyField {
        let mut f = HolonomyField::new(Semigroup::FreeUnitary, self.field.into())
            .with_t_scale(self.t_scale)
            .with_policy(self.policy.into());
        f.n = self.n;
        f
    }
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    /// Loop words over N, E, S, W, separated by commas.
    #[arg(long = "loop", allow_hyphen_values = true)]
    pub loops: Option<String>,
    /// Evaluate the constant loop.
    #[arg(long, conflicts_with = "loops")]
    pub constant: bool,
    /// Powers, separated by commas.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub k: Vec<i64>,
    #[command(flatten)]
    pub field: FieldArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Braid,
    Area,
    Divisibility,
    Gauge,
    Basis,
    Axioms,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub kind: CheckKind,
    /// `default` or a file with one loop per line.
    #[arg(long, default_value = "default")]
    pub corpus: String,
    #[arg(long, default_value_t = 3)]
    pub kmax: i64,
    /// Longest braid word.
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    /// Most strands a braid may use.
    #[arg(long, default_value_t = 4)]
    pub max_strands: usize,
    /// Largest dimension for `axioms`.
    #[arg(long, default_value_t = 3)]
    pub max_n: usize,
    #[command(flatten)]
    pub field: FieldArgs,
}

#[derive(Args, Debug, Clone)]
pub struct McParams {
    #[arg(long = "N", default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEPS_PER_UNIT)]
    pub steps_per_unit: usize,
    /// Worker threads; defaults to the environment or the core count.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value = "complex")]
    pub matrices: FieldArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl McParams {
    fn config(&self) -> MatrixSamplerConfig {
        let mut cfg = MatrixSamplerConfig::new(self.size, self.samples, self.seed);
        cfg.steps_per_unit = self.steps_per_unit;
        cfg.workers = self.workers.unwrap_or_else(default_workers);
        cfg.field = match self.matrices {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        };
        cfg
    }
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    #[arg(long, default_value = "default")]
    pub corpus: String,
    #[arg(long, default_value_t = 3)]
    pub kmax: i64,
    /// Tolerance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub z: f64,
    #[command(flatten)]
    pub mc: McParams,
    #[command(flatten)]
    pub field: FieldArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MomentArgs {
    /// Times, separated by commas.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 6)]
    pub kmax: usize,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    #[arg(long = "loop")]
    pub loops: String,
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub k: Vec<i64>,
    #[arg(long, default_value_t = 1.0)]
    pub t_scale: f64,
    #[command(flatten)]
    pub mc: McParams,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    #[arg(long = "loop")]
    pub loops: String,
}

/// Fixed-width decimal with 15 significant digits; scientific outside `[1e-5, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let e = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&e) {
        return format!("{x:.14e}");
    }
    let decimals = (14 - e).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn parse_loops(s: &str) -> Result<Vec<Loop>, CliError> {
    if s.trim().is_empty() {
        return Err(CliError::EmptyLoop);
    }
    s.split(',')
        .map(|w| {
            let w = w.trim();
            if w.is_empty() {
                return Err(CliError::EmptyLoop);
            }
            Ok(Loop::parse(w)?)
        })
        .collect()
}

pub fn load_corpus(spec: &str) -> Result<Vec<Loop>, CliError> {
    if spec == "default" {
        return Ok(default_corpus());
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Io {
        path: spec.into(),
        message: e.to_string(),
    })?;
    parse_corpus(&text).map_err(|(line, source)| CliError::Corpus { line, source })
}

fn report_csv(reports: &[CheckReport]) -> (String, Option<String>) {
    let mut csv = String::from("check,case,k,lhs,rhs,error\n");
    let mut failure = None;
    for r in reports {
        for c in &r.cases {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                r.name,
                c.label,
                c.k,
                fmt_num(c.lhs),
                fmt_num(c.rhs),
                fmt_num(c.error())
            )
            .unwrap();
            if failure.is_none() && c.error() > r.tol {
                failure = Some(format!(
                    "{} check failed on {} k={}: {} vs {}",
                    r.name,
                    c.label,
                    c.k,
                    fmt_num(c.lhs),
                    fmt_num(c.rhs)
                ));
            }
        }
    }
    (csv, failure)
}

fn finish(csv: String, failure: Option<String>) -> Result<String, CliError> {
    match failure {
        Some(message) => Err(CliError::CheckFailed { csv, message }),
        None => Ok(csv),
    }
}

fn run_check(a: &CheckArgs) -> Result<String, CliError> {
    if a.kind == CheckKind::Axioms {
        let mut csv = String::from("axiom,n,holds,convention,witness\n");
        let mut failure = None;
        for n in 1..=a.max_n {
            for axiom in Axiom::ALL {
                let r = masterfield::ncalg::verify_axiom(axiom.name(), n)?;
                let witness = r
                    .counterexample
                    .as_ref()
                    .map(|c| c.generator.to_string())
                    .unwrap_or_default();
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    axiom, n, r.holds, r.convention, witness
                )
                .unwrap();
                if !r.holds && failure.is_none() {
                    failure = Some(format!("axiom {axiom} fails for n={n} at {witness}"));
                }
            }
        }
        return finish(csv, failure);
    }
    let field = a.field.field();
    let corpus = load_corpus(&a.corpus)?;
    let report = match a.kind {
        CheckKind::Braid => {
            let mut r = CheckReport::new("braid");
            for l in &corpus {
                let rank = masterfield::holonomy::decompose_loop(&field, l)?
                    .areas
                    .len();
                let strands = rank.min(a.max_strands).max(1);
                let braids = braid_words(strands, a.max_len);
                r.cases.extend(
                    check_braid_invariance(&field, std::slice::from_ref(l), &braids, a.kmax)?.cases,
                );
            }
            r
        }
        CheckKind::Area => {
            let pairs: Vec<(Loop, Loop)> = corpus
                .iter()
                .flat_map(|l| [(l.clone(), mirror(l)), (l.clone(), rotate_quarter(l))])
                .collect();
            check_area_invariance(&field, &pairs, a.kmax)?
        }
        CheckKind::Divisibility => {
            let pairs = [(0.0, 0.0), (0.5, 0.5), (0.3, 0.7), (1.0, 1.0), (0.25, 1.75)];
            let mut r = check_infinite_divisibility(&field, &pairs, a.kmax.max(5))?;
            let cases: Vec<(Loop, Vec<Loop>)> = corpus
                .iter()
                .map(|l| Ok((l.clone(), cell_cuts(l)?)))
                .collect::<Result<_, PlanarError>>()?;
            r.cases
                .extend(check_refinement(&field, &cases, a.kmax)?.cases);
            r
        }
        CheckKind::Gauge => check_gauge_invariance_scalar(
            &field,
            &[0.25, 0.5, 1.0, 2.0],
            a.kmax.max(5),
            GaugeState { trivial: false },
        )?,
        CheckKind::Basis => {
            let other = match a.field.policy {
                PolicyArg::Standard => TreePolicy::REVERSED,
                PolicyArg::Reversed => TreePolicy::STANDARD,
            };
            check_basis_independence(&field, &corpus, other, a.kmax)?
        }
        CheckKind::Axioms => unreachable!("handled above"),
    };
    let (csv, failure) = report_csv(std::slice::from_ref(&report));
    finish(csv, failure)
}

/// Executes one command and returns the CSV it produces.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match &cfg.command {
        Command::Eval(a) => {
            let field = a.field.field();
            let loops = if a.constant {
                vec![Loop::constant()]
            } else {
                parse_loops(a.loops.as_deref().unwrap_or(""))?
            };
            let mut csv = String::from("loop,k,value,method\n");
            for l in &loops {
                for &k in &a.k {
                    let v = evaluate(&field, l, k)?;
                    writeln!(csv, "{},{},{},{}", v.l, k, fmt_num(v.value.re), v.method).unwrap();
                }
            }
            Ok(csv)
        }
        Command::Check(a) => run_check(a),
        Command::CompareMc(a) => {
            let field = a.field.field();
            let cases: Vec<(Loop, i64)> = load_corpus(&a.corpus)?
                .into_iter()
                .flat_map(|l| (1..=a.kmax).map(move |k| (l.clone(), k)))
                .collect();
            let rows = compare_mc(&field, &cases, &a.mc.config(), a.z)?;
            let mut csv = String::from("loop,k,exact,mc_re,mc_im,stderr,agree\n");
            let mut failure = None;
            for r in &rows {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    r.l,
                    r.k,
                    fmt_num(r.exact),
                    fmt_num(r.estimate.mean.re),
                    fmt_num(r.estimate.mean.im),
                    fmt_num(r.estimate.stderr),
                    r.agrees
                )
                .unwrap();
                if !r.agrees && failure.is_none() {
                    failure = Some(format!(
                        "{} k={}: exact {} outside {}·stderr of {}",
                        r.l,
                        r.k,
                        fmt_num(r.exact),
                        a.z,
                        fmt_num(r.estimate.mean.re)
                    ));
                }
            }
            finish(csv, failure)
        }
        Command::Moments(a) => {
            let mut csv = String::from("t,k,moment\n");
            for &t in &a.t {
                let m = fubm_moments(t, a.kmax)?;
                for k in 0..=a.kmax {
                    writeln!(
                        csv,
                        "{},{},{}",
                        fmt_num(t),
                        k,
                        fmt_num(m.get(k as i64).expect("k within kmax"))
                    )
                    .unwrap();
                }
            }
            Ok(csv)
        }
        Command::Mc(a) => {
            let mc = a.mc.config();
            let field = HolonomyField::new(
                Semigroup::ClassicalMc {
                    field: mc.field,
                    size: mc.n,
                },
                ProductKind::Free,
            )
            .with_t_scale(a.t_scale);
            let cases: Vec<(Loop, i64)> = parse_loops(&a.loops)?
                .into_iter()
                .flat_map(|l| a.k.iter().map(move |&k| (l.clone(), k)))
                .collect();
            let mut csv = String::from("loop,k,re,im,stderr,method\n");
            for v in evaluate_mc(&field, &cases, &mc)? {
                writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    v.l,
                    v.k,
                    fmt_num(v.value.re),
                    fmt_num(v.value.im),
                    fmt_num(v.stderr.unwrap_or(0.0)),
                    v.method
                )
                .unwrap();
            }
            Ok(csv)
        }
        Command::Graph(a) => Ok(build_graph(&parse_loops(&a.loops)?)?.dump()),
    }
}
