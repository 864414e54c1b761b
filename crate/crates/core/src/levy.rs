//! Lévy semigroups on the Zhang algebra: free unitary Brownian motion moments
//! and the semigroup interface used by the holonomy evaluator.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::freeprob::{product_state, DynState, FreeProbError, ProductKind, State, Tagged};
use crate::mc::{Field, MatrixSamplerConfig};

pub const MAX_MOMENT_ORDER: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),
    #[error("moment order {k} exceeds the cap {max}")]
    OrderTooLarge { k: usize, max: usize },
    #[error("exact evaluation unavailable for the {0} semigroup; use the Monte Carlo estimator")]
    ExactUnavailable(String),
    #[error(transparent)]
    FreeProb(#[from] FreeProbError),
}

/// Coefficients of `P_k` with `m_k(t) = e^{−kt/2} P_k(t)`, for `k = 0..=20`.
/// `P_k' = −(k/2) Σ_{j=1}^{k−1} P_j P_{k−j}` and `P_k(0) = 1`.
pub fn fubm_polynomials() -> &'static [Vec<BigRational>] {
    static POLYS: OnceLock<Vec<Vec<BigRational>>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let one = || BigRational::from_integer(BigInt::from(1));
        let mut p: Vec<Vec<BigRational>> = vec![vec![one()], vec![one()]];
        for k in 2..=MAX_MOMENT_ORDER {
            let mut deriv = vec![BigRational::zero(); k - 1];
            for j in 1..k {
                for (a, x) in p[j].iter().enumerate() {
                    for (b, y) in p[k - j].iter().enumerate() {
                        deriv[a + b] += x * y;
                    }
                }
            }
            let scale = BigRational::new(BigInt::from(-(k as i64)), BigInt::from(2));
            let mut poly = vec![one()];
            for (i, d) in deriv.into_iter().enumerate() {
                poly.push(d * &scale / BigRational::from_integer(BigInt::from(i as i64 + 1)));
            }
            p.push(poly);
        }
        p
    })
}

fn eval_poly_exact(coeffs: &[BigRational], t: &BigRational) -> f64 {
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc.to_f64().unwrap_or(f64::NAN)
}

/// `m_k(t) = τ(u_t^k)`; negative orders use `m_{−k} = m_k`.
pub fn fubm_moment(t: f64, k: i64) -> Result<f64, LevyError> {
    if t < 0.0 || t.is_nan() {
        return Err(LevyError::NegativeTime(t));
    }
    let k = k.unsigned_abs() as usize;
    if k > MAX_MOMENT_ORDER {
        return Err(LevyError::OrderTooLarge {
            k,
            max: MAX_MOMENT_ORDER,
        });
    }
    if k == 0 {
        return Ok(1.0);
    }
    let tq = BigRational::from_float(t).ok_or(LevyError::NegativeTime(t))?;
    // the polynomial alternates in sign; summing exactly avoids cancellation
    Ok(eval_poly_exact(&fubm_polynomials()[k], &tq) * (-(k as f64) * t / 2.0).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector {
    pub t: f64,
    /// `m[k]` for `k = 0..=kmax`, with `m[0] = 1`.
    pub m: Vec<f64>,
}

impl MomentVector {
    pub fn get(&self, k: i64) -> Option<f64> {
        self.m.get(k.unsigned_abs() as usize).copied()
    }

    pub fn kmax(&self) -> usize {
        self.m.len() - 1
    }
}

pub fn fubm_moments(t: f64, kmax: usize) -> Result<MomentVector, LevyError> {
    if kmax > MAX_MOMENT_ORDER {
        return Err(LevyError::OrderTooLarge {
            k: kmax,
            max: MAX_MOMENT_ORDER,
        });
    }
    let m = (0..=kmax as i64)
        .map(|k| fubm_moment(t, k))
        .collect::<Result<_, _>>()?;
    Ok(MomentVector { t, m })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Semigroup {
    /// Free unitary Brownian motion on one copy of `O⟨1⟩`; exact.
    FreeUnitary,
    /// Brownian motion on `U(N)` or `O(N)`.
    ClassicalMc { field: Field, size: usize },
    /// `n × n` square blocks of size `d` of a Brownian motion of size `n·d`.
    BlockMc { field: Field, n: usize, d: usize },
    /// Rectangular blocks `d¹, …, dⁿ` of a Brownian motion of size `Σ dⁱ`.
    RectangularMc { field: Field, d: Vec<usize> },
}

impl Semigroup {
    pub fn is_exact(&self) -> bool {
        matches!(self, Semigroup::FreeUnitary)
    }

    /// Sampler configuration for Monte Carlo kinds.
    pub fn sampler(&self, samples: usize, seed: u64) -> Option<MatrixSamplerConfig> {
        let (field, size) = match self {
            Semigroup::FreeUnitary => return None,
            Semigroup::ClassicalMc { field, size } => (*field, *size),
            Semigroup::BlockMc { field, n, d } => (*field, n * d),
            Semigroup::RectangularMc { field, d } => (*field, d.iter().sum()),
        };
        let mut cfg = MatrixSamplerConfig::new(size, samples, seed);
        cfg.field = field;
        Some(cfg)
    }
}

impl fmt::Display for Semigroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semigroup::FreeUnitary => write!(f, "free unitary"),
            Semigroup::ClassicalMc { field, size } => write!(f, "classical {field} N={size}"),
            Semigroup::BlockMc { field, n, d } => write!(f, "square block {field} n={n} d={d}"),
            Semigroup::RectangularMc { field, d } => write!(f, "rectangular block {field} d={d:?}"),
        }
    }
}

/// State of free unitary Brownian motion at a fixed time. Letters are
/// exponents: the word `[a, b, …]` stands for `u^a u^b ⋯`.
#[derive(Clone, Debug)]
pub struct FubmState {
    t: f64,
    moments: MomentVector,
}

impl FubmState {
    pub fn new(t: f64) -> Result<FubmState, LevyError> {
        Ok(FubmState {
            t,
            moments: fubm_moments(t, MAX_MOMENT_ORDER)?,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }
}

impl State for FubmState {
    type Letter = i32;
    type Scalar = f64;

    fn eval(&self, word: &[i32]) -> Result<f64, FreeProbError> {
        let m: i64 = word.iter().map(|&e| e as i64).sum();
        self.moments.get(m).ok_or(FreeProbError::OrderOverflow {
            len: m.unsigned_abs() as usize,
            max: MAX_MOMENT_ORDER,
        })
    }
}

pub fn state_at(sg: &Semigroup, area: f64) -> Result<FubmState, LevyError> {
    if area < 0.0 || area.is_nan() {
        return Err(LevyError::NegativeTime(area));
    }
    match sg {
        Semigroup::FreeUnitary => FubmState::new(area),
        other => Err(LevyError::ExactUnavailable(other.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tol: f64,
}

impl LevyCheck {
    pub fn error(&self) -> f64 {
        (self.expected - self.actual).abs()
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tol
    }
}

#[derive(Clone, Debug, Default)]
pub struct LevyReport {
    pub checks: Vec<LevyCheck>,
}

impl LevyReport {
    pub fn max_error(&self) -> f64 {
        self.checks.iter().map(LevyCheck::error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(LevyCheck::passed)
    }
}

pub const AXIOM_ORDER: usize = 5;
pub const INCREMENT_TOL: f64 = 1e-10;
pub const CONTINUITY_TIME: f64 = 1e-6;
pub const CONTINUITY_ORDER: usize = 3;
pub const CONTINUITY_TOL: f64 = 1e-5;

/// Increment property under free multiplicative convolution for every pair of
/// times, plus continuity at zero. Stationarity holds by construction since a
/// state depends only on the length of its time interval.
pub fn check_levy_axioms(sg: &Semigroup, times: &[f64]) -> Result<LevyReport, LevyError> {
    if !sg.is_exact() {
        return Err(LevyError::ExactUnavailable(sg.to_string()));
    }
    let mut report = LevyReport::default();
    for &s in times {
        for &t in times {
            let a: DynState<i32, f64> = std::sync::Arc::new(state_at(sg, s)?);
            let b: DynState<i32, f64> = std::sync::Arc::new(state_at(sg, t)?);
            let joint = product_state(ProductKind::Free, vec![a, b]);
            for k in 1..=AXIOM_ORDER {
                let word: Vec<Tagged<i32>> = (0..k)
                    .flat_map(|_| [Tagged::new(0, 1), Tagged::new(1, 1)])
                    .collect();
                report.checks.push(LevyCheck {
                    name: format!("increment s={s} t={t} k={k}"),
                    expected: fubm_moment(s + t, k as i64)?,
                    actual: joint.eval(&word)?,
                    tol: INCREMENT_TOL,
                });
            }
        }
    }
    for k in 1..=CONTINUITY_ORDER {
        report.checks.push(LevyCheck {
            name: format!("continuity k={k}"),
            expected: 1.0,
            actual: fubm_moment(CONTINUITY_TIME, k as i64)?,
            tol: CONTINUITY_TOL,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classical RK4 on the hierarchy `m_k' = −(k/2)m_k − (k/2)Σ m_j m_{k−j}`.
    fn rk4(t: f64, kmax: usize, steps: usize) -> Vec<f64> {
        let f = |m: &[f64]| -> Vec<f64> {
            let mut d = vec![0.0; kmax + 1];
            for k in 1..=kmax {
                let conv: f64 = (1..k).map(|j| m[j] * m[k - j]).sum();
                d[k] = -(k as f64) / 2.0 * (m[k] + conv);
            }
            d
        };
        let h = t / steps as f64;
        let mut m = vec![1.0; kmax + 1];
        for _ in 0..steps {
            let k1 = f(&m);
            let y2: Vec<f64> = m.iter().zip(&k1).map(|(a, b)| a + h / 2.0 * b).collect();
            let k2 = f(&y2);
            let y3: Vec<f64> = m.iter().zip(&k2).map(|(a, b)| a + h / 2.0 * b).collect();
            let k3 = f(&y3);
            let y4: Vec<f64> = m.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = f(&y4);
            for i in 0..=kmax {
                m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        m
    }

    /// Closed form as a finite sum: `e^{−kt/2} Σ_{j<k} (−t)^j/j! k^{j−1} C(k, j+1)`.
    fn biane(t: f64, k: u32) -> f64 {
        let mut s = 0.0;
        let mut fact = 1.0;
        for j in 0..k {
            if j > 0 {
                fact *= j as f64;
            }
            let binom: f64 = (0..j + 1)
                .map(|i| (k - i) as f64 / (i + 1) as f64)
                .product();
            s += (-t).powi(j as i32) / fact * (k as f64).powi(j as i32 - 1) * binom;
        }
        (-(k as f64) * t / 2.0).exp() * s
    }

    #[test]
    fn low_order_closed_forms() {
        for t in [0.0, 0.3, 1.0, 2.5] {
            assert!((fubm_moment(t, 1).unwrap() - (-t / 2.0).exp()).abs() < 1e-15);
            assert!((fubm_moment(t, 2).unwrap() - (-t).exp() * (1.0 - t)).abs() < 1e-15);
        }
        assert_eq!(fubm_moment(1.0, 2).unwrap(), 0.0);
        for k in 0..=20 {
            assert_eq!(fubm_moment(0.0, k).unwrap(), 1.0);
        }
    }

    #[test]
    fn matches_numerical_integration() {
        for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let num = rk4(t, 10, 4000);
            for k in 1..=10 {
                let exact = fubm_moment(t, k as i64).unwrap();
                assert!(
                    (exact - num[k]).abs() < 1e-10,
                    "t={t} k={k}: {exact} vs {}",
                    num[k]
                );
            }
        }
    }

    #[test]
    fn matches_finite_sum_formula() {
        for t in [0.1, 1.0, 3.0] {
            for k in 1..=12 {
                assert!((fubm_moment(t, k as i64).unwrap() - biane(t, k)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bounded_and_decaying() {
        for t in [0.1, 0.7, 1.0, 2.0, 5.0, 50.0] {
            for k in 1..=20 {
                let m = fubm_moment(t, k).unwrap();
                assert!(m.abs() <= 1.0 + 1e-12, "t={t} k={k} m={m}");
            }
        }
        for k in 1..=20 {
            assert!(fubm_moment(50.0, k).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn toeplitz_positivity() {
        // moments of a unitary give a positive semidefinite Toeplitz matrix
        for t in [0.2, 1.0, 3.0] {
            let n = 12;
            let m = fubm_moments(t, n).unwrap();
            let a = nalgebra::DMatrix::from_fn(n, n, |i, j| m.m[i.abs_diff(j)]);
            let eig = a.symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|&x| x > -1e-12), "t={t}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fubm_moment(-1.0, 1),
            Err(LevyError::NegativeTime(_))
        ));
        assert!(matches!(
            fubm_moments(1.0, 21),
            Err(LevyError::OrderTooLarge { .. })
        ));
        let mc = Semigroup::ClassicalMc {
            field: Field::Complex,
            size: 8,
        };
        assert!(matches!(
            state_at(&mc, 1.0),
            Err(LevyError::ExactUnavailable(_))
        ));
        assert!(mc.sampler(10, 1).is_some());
        let s = state_at(&Semigroup::FreeUnitary, 1.0).unwrap();
        assert!(s.eval(&[15, 6]).is_err());
    }

    #[test]
    fn state_examples() {
        let s = state_at(&Semigroup::FreeUnitary, 1.0).unwrap();
        assert_eq!(s.eval(&[1, -1]).unwrap(), 1.0);
        assert!((s.eval(&[1]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        let z = state_at(&Semigroup::FreeUnitary, 0.0).unwrap();
        assert_eq!(z.eval(&[1, 1, 1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn levy_axioms() {
        let r = check_levy_axioms(&Semigroup::FreeUnitary, &[0.0, 0.3, 0.5, 0.7]).unwrap();
        assert!(r.passed(), "{:?}", r.checks.iter().find(|c| !c.passed()));
        let inc = r
            .checks
            .iter()
            .filter(|c| c.name.starts_with("increment"))
            .map(LevyCheck::error)
            .fold(0.0, f64::max);
        assert!(inc < 1e-10);
        // s = 0.3, t = 0.7, k = 2 lands on the zero of m₂ at 1
        let sharp = r
            .checks
            .iter()
            .find(|c| c.name == "increment s=0.3 t=0.7 k=2")
            .unwrap();
        assert!(sharp.expected.abs() < 1e-15 && sharp.actual.abs() < 1e-10);
    }
}
