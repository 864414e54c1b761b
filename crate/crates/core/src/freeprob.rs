//! Noncrossing partitions, free cumulants and universal products of states.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Debug, Display, Write as _};
use std::hash::Hash;
use std::ops::Neg;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};
use thiserror::Error;

pub const MAX_NC_ORDER: usize = 12;
pub const MAX_MATCHING_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeProbError {
    #[error("order {k} out of range 1..={max}")]
    OrderOutOfRange { k: usize, max: usize },
    #[error("matchings need an even order, got {0}")]
    OddMatchingOrder(usize),
    #[error("word of length {len} exceeds the available order {max}")]
    OrderOverflow { len: usize, max: usize },
    #[error("letter tagged with factor {factor} but the product has {n} factors")]
    FactorOutOfRange { factor: usize, n: usize },
    #[error("grouping is not an interval partition of the word")]
    NotInterval,
    #[error("letter {0} is not in the domain of this state")]
    InvalidLetter(String),
}

/// Coefficient rings the transforms work over: `f64`, `Complex64`, `BigRational`.
pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
}

impl<T: Clone + Debug + PartialEq + Num + Neg<Output = T> + Send + Sync + 'static> Scalar for T {}

/// A unital linear functional on words of letters.
pub trait State {
    type Letter: Clone + Ord + Hash + Debug;
    type Scalar: Scalar;

    fn eval(&self, word: &[Self::Letter]) -> Result<Self::Scalar, FreeProbError>;
}

impl<S: State + ?Sized> State for &S {
    type Letter = S::Letter;
    type Scalar = S::Scalar;

    fn eval(&self, word: &[S::Letter]) -> Result<S::Scalar, FreeProbError> {
        (**self).eval(word)
    }
}

impl<S: State + ?Sized> State for Arc<S> {
    type Letter = S::Letter;
    type Scalar = S::Scalar;

    fn eval(&self, word: &[S::Letter]) -> Result<S::Scalar, FreeProbError> {
        (**self).eval(word)
    }
}

pub type DynState<L, T> = Arc<dyn State<Letter = L, Scalar = T> + Send + Sync>;

/// State given by a moment table; words missing from the table are an error.
#[derive(Clone, Debug)]
pub struct TableState<L, T> {
    pub moments: BTreeMap<Vec<L>, T>,
}

impl<L: Clone + Ord + Hash + Debug, T: Scalar> State for TableState<L, T> {
    type Letter = L;
    type Scalar = T;

    fn eval(&self, word: &[L]) -> Result<T, FreeProbError> {
        if word.is_empty() {
            return Ok(T::one());
        }
        self.moments.get(word).cloned().ok_or_else(|| {
            let max = self.moments.keys().map(Vec::len).max().unwrap_or(0);
            FreeProbError::OrderOverflow {
                len: word.len(),
                max,
            }
        })
    }
}

/// Haar unitary: letters are exponents of `u`, `τ(u^m) = δ_{m,0}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HaarUnitary;

impl State for HaarUnitary {
    type Letter = i32;
    type Scalar = BigRational;

    fn eval(&self, word: &[i32]) -> Result<BigRational, FreeProbError> {
        let m: i64 = word.iter().map(|&e| e as i64).sum();
        Ok(if m == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        })
    }
}

/// Standard semicircular element; the single letter is `()`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Semicircular;

impl State for Semicircular {
    type Letter = ();
    type Scalar = BigRational;

    fn eval(&self, word: &[()]) -> Result<BigRational, FreeProbError> {
        let r = word.len();
        Ok(if r % 2 == 1 {
            BigRational::zero()
        } else {
            BigRational::from_integer(catalan(r / 2))
        })
    }
}

pub fn catalan(m: usize) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..m {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    c
}

/// Partition of `0..k` into blocks, each sorted, blocks ordered by their minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NCPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl NCPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> NCPartition {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        NCPartition { blocks }
    }

    pub fn order(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_noncrossing(&self) -> bool {
        for (x, b1) in self.blocks.iter().enumerate() {
            for b2 in &self.blocks[x + 1..] {
                for &a in b1 {
                    for &c in b1 {
                        if a >= c {
                            continue;
                        }
                        let inside = b2.iter().filter(|&&y| y > a && y < c).count();
                        if inside > 0 && inside < b2.len() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn is_interval(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.windows(2).all(|w| w[1] == w[0] + 1))
    }

    /// Block label of every element.
    pub fn labels(&self) -> Vec<usize> {
        let mut lab = vec![0; self.order()];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                lab[x] = i;
            }
        }
        lab
    }

    /// Whether the join with `other` is the one-block partition.
    pub fn joins_to_full(&self, other: &NCPartition) -> bool {
        let k = self.order();
        if k == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for b in self.blocks.iter().chain(&other.blocks) {
            for w in b.windows(2) {
                let (a, c) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = c;
            }
        }
        let root = find(&mut parent, 0);
        (0..k).all(|x| find(&mut parent, x) == root)
    }
}

impl Display for NCPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            let inner: Vec<String> = b.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{{{}}}", inner.join(","))?;
        }
        Ok(())
    }
}

fn nc_interval(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo >= hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    // lo alone
    for mut rest in nc_interval(lo + 1, hi) {
        rest.insert(0, vec![lo]);
        out.push(rest);
    }
    // lo joined to m, the next element of its block
    for m in lo + 1..hi {
        let inner = nc_interval(lo + 1, m);
        let outer = nc_interval(m, hi);
        for a in &inner {
            for b in &outer {
                let mut blocks = Vec::with_capacity(a.len() + b.len());
                let mut first = b[0].clone();
                first.insert(0, lo);
                blocks.push(first);
                blocks.extend(a.iter().cloned());
                blocks.extend(b[1..].iter().cloned());
                out.push(blocks);
            }
        }
    }
    out
}

fn nc_cache() -> &'static RwLock<HashMap<usize, Arc<Vec<NCPartition>>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Vec<NCPartition>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// All noncrossing partitions of `0..k`.
pub fn enumerate_nc(k: usize) -> Result<Arc<Vec<NCPartition>>, FreeProbError> {
    if k == 0 || k > MAX_NC_ORDER {
        return Err(FreeProbError::OrderOutOfRange {
            k,
            max: MAX_NC_ORDER,
        });
    }
    if let Some(v) = nc_cache().read().unwrap().get(&k) {
        return Ok(v.clone());
    }
    let all: Vec<NCPartition> = nc_interval(0, k)
        .into_iter()
        .map(NCPartition::new)
        .collect();
    let all = Arc::new(all);
    nc_cache().write().unwrap().insert(k, all.clone());
    Ok(all)
}

/// All noncrossing pair partitions of `0..two_m`.
pub fn enumerate_nc_matchings(two_m: usize) -> Result<Vec<NCPartition>, FreeProbError> {
    if two_m % 2 == 1 {
        return Err(FreeProbError::OddMatchingOrder(two_m));
    }
    if two_m == 0 || two_m > MAX_MATCHING_ORDER {
        return Err(FreeProbError::OrderOutOfRange {
            k: two_m,
            max: MAX_MATCHING_ORDER,
        });
    }
    fn rec(free: &[usize]) -> Vec<Vec<Vec<usize>>> {
        if free.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        // partner of the first point must leave an even number inside
        for j in (1..free.len()).step_by(2) {
            for a in rec(&free[1..j]) {
                for b in rec(&free[j + 1..]) {
                    let mut blocks = vec![vec![free[0], free[j]]];
                    blocks.extend(a.iter().cloned());
                    blocks.extend(b);
                    out.push(blocks);
                }
            }
        }
        out
    }
    let pts: Vec<usize> = (0..two_m).collect();
    Ok(rec(&pts).into_iter().map(NCPartition::new).collect())
}

/// Free cumulants of a state on arbitrary words, memoized per word.
pub struct CumulantCache<'s, S: State> {
    state: &'s S,
    memo: HashMap<Vec<S::Letter>, S::Scalar>,
}

impl<'s, S: State> CumulantCache<'s, S> {
    pub fn new(state: &'s S) -> Self {
        CumulantCache {
            state,
            memo: HashMap::new(),
        }
    }

    /// `κ(w) = φ(w) − Σ κ(w_V) Π φ(gaps)` over proper subsets `V` holding the first letter.
    pub fn cumulant(&mut self, w: &[S::Letter]) -> Result<S::Scalar, FreeProbError> {
        if w.is_empty() {
            return Ok(S::Scalar::zero());
        }
        if let Some(v) = self.memo.get(w) {
            return Ok(v.clone());
        }
        let r = w.len();
        let mut acc = self.state.eval(w)?;
        for mask in 0u64..(1u64 << (r - 1)) - 1 {
            let mut v = vec![0usize];
            v.extend((1..r).filter(|&i| mask >> (i - 1) & 1 == 1));
            let mut term = {
                let sub: Vec<S::Letter> = v.iter().map(|&i| w[i].clone()).collect();
                self.cumulant(&sub)?
            };
            if term.is_zero() {
                continue;
            }
            for (x, &a) in v.iter().enumerate() {
                let b = v.get(x + 1).copied().unwrap_or(r);
                if b > a + 1 {
                    term = term * self.state.eval(&w[a + 1..b])?;
                }
            }
            acc = acc - term;
        }
        self.memo.insert(w.to_vec(), acc.clone());
        Ok(acc)
    }
}

pub fn cumulants_from_moments<S: State>(
    state: &S,
    word: &[S::Letter],
) -> Result<S::Scalar, FreeProbError> {
    CumulantCache::new(state).cumulant(word)
}

/// Joint free cumulants of all words up to `max_order`.
#[derive(Clone, Debug)]
pub struct CumulantTable<L, T> {
    pub max_order: usize,
    pub values: BTreeMap<Vec<L>, T>,
}

impl<L: Clone + Ord + Hash + Debug, T: Scalar> CumulantTable<L, T> {
    pub fn new(max_order: usize) -> Self {
        CumulantTable {
            max_order,
            values: BTreeMap::new(),
        }
    }

    /// Cumulants of every word over `alphabet` of length `1..=max_order`.
    pub fn from_state<S: State<Letter = L, Scalar = T>>(
        state: &S,
        alphabet: &[L],
        max_order: usize,
    ) -> Result<Self, FreeProbError> {
        let mut cache = CumulantCache::new(state);
        let mut values = BTreeMap::new();
        for w in words_up_to(alphabet, max_order) {
            let c = cache.cumulant(&w)?;
            values.insert(w, c);
        }
        Ok(CumulantTable { max_order, values })
    }

    /// Cumulant of a word; words of allowed length absent from the table are zero.
    pub fn get(&self, w: &[L]) -> Result<T, FreeProbError> {
        if w.len() > self.max_order {
            return Err(FreeProbError::OrderOverflow {
                len: w.len(),
                max: self.max_order,
            });
        }
        Ok(self.values.get(w).cloned().unwrap_or_else(T::zero))
    }

    fn partition_product(&self, word: &[L], p: &NCPartition) -> Result<T, FreeProbError> {
        let mut prod = T::one();
        for b in &p.blocks {
            let sub: Vec<L> = b.iter().map(|&i| word[i].clone()).collect();
            prod = prod * self.get(&sub)?;
            if prod.is_zero() {
                break;
            }
        }
        Ok(prod)
    }
}

impl<L: Debug, T: Display> CumulantTable<L, T> {
    /// One `word : value` line per entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (w, v) in &self.values {
            let letters: Vec<String> = w.iter().map(|l| format!("{l:?}")).collect();
            writeln!(out, "{} : {}", letters.join(" "), v).unwrap();
        }
        out
    }
}

/// All words over `alphabet` of length `1..=max_len`.
pub fn words_up_to<L: Clone>(alphabet: &[L], max_len: usize) -> Vec<Vec<L>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<L>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for a in alphabet {
                let mut x = w.clone();
                x.push(a.clone());
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `φ(w) = Σ_{π ∈ NC(|w|)} Π_{B ∈ π} κ(w|_B)`.
pub fn moments_from_cumulants<L, T>(
    table: &CumulantTable<L, T>,
    word: &[L],
) -> Result<T, FreeProbError>
where
    L: Clone + Ord + Hash + Debug,
    T: Scalar,
{
    if word.is_empty() {
        return Ok(T::one());
    }
    if word.len() > table.max_order {
        return Err(FreeProbError::OrderOverflow {
            len: word.len(),
            max: table.max_order,
        });
    }
    let mut acc = T::zero();
    for p in enumerate_nc(word.len())?.iter() {
        acc = acc + table.partition_product(word, p)?;
    }
    Ok(acc)
}

/// Cumulant with products as entries: the sum of `κ_π` over noncrossing `π`
/// whose join with the interval partition `grouping` is the full block.
pub fn cumulants_of_products<L, T>(
    table: &CumulantTable<L, T>,
    word: &[L],
    grouping: &NCPartition,
) -> Result<T, FreeProbError>
where
    L: Clone + Ord + Hash + Debug,
    T: Scalar,
{
    if grouping.order() != word.len() || !grouping.is_interval() {
        return Err(FreeProbError::NotInterval);
    }
    if word.is_empty() {
        return Ok(T::zero());
    }
    let mut acc = T::zero();
    for p in enumerate_nc(word.len())?.iter() {
        if p.joins_to_full(grouping) {
            acc = acc + table.partition_product(word, p)?;
        }
    }
    Ok(acc)
}

/// Interval partition with consecutive blocks of the given sizes.
pub fn interval_partition(sizes: &[usize]) -> NCPartition {
    let mut blocks = Vec::new();
    let mut start = 0;
    for &s in sizes {
        blocks.push((start..start + s).collect());
        start += s;
    }
    NCPartition::new(blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tagged<L> {
    pub factor: usize,
    pub letter: L,
}

impl<L> Tagged<L> {
    pub fn new(factor: usize, letter: L) -> Self {
        Tagged { factor, letter }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductKind {
    Tensor,
    Boolean,
    Free,
}

impl std::str::FromStr for ProductKind {
    type Err = String;

    fn from_str(s: &str) -> Result<ProductKind, String> {
        match s {
            "tensor" => Ok(ProductKind::Tensor),
            "boolean" => Ok(ProductKind::Boolean),
            "free" => Ok(ProductKind::Free),
            _ => Err(format!(
                "unknown product {s:?}, expected free, boolean or tensor"
            )),
        }
    }
}

impl Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProductKind::Tensor => "tensor",
            ProductKind::Boolean => "boolean",
            ProductKind::Free => "free",
        })
    }
}

/// How a free product is evaluated. Both need only marginal moments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum FreeAlgorithm {
    /// Expand over the block containing the first letter, using marginal cumulants.
    #[default]
    FirstBlock,
    /// Center every run and recurse on shorter alternating words.
    Centering,
}

/// Product of marginal states; letters are tagged by the factor they live in.
#[derive(Clone)]
pub struct ProductState<L, T> {
    pub kind: ProductKind,
    pub algorithm: FreeAlgorithm,
    pub marginals: Vec<DynState<L, T>>,
}

impl<L, T> ProductState<L, T> {
    pub fn n_copies(&self) -> usize {
        self.marginals.len()
    }
}

pub fn product_state<L, T>(
    kind: ProductKind,
    marginals: Vec<DynState<L, T>>,
) -> ProductState<L, T> {
    ProductState {
        kind,
        algorithm: FreeAlgorithm::default(),
        marginals,
    }
}

/// Maximal runs of letters from the same factor.
fn runs<L: Clone>(w: &[Tagged<L>]) -> Vec<(usize, Vec<L>)> {
    let mut out: Vec<(usize, Vec<L>)> = Vec::new();
    for t in w {
        match out.last_mut() {
            Some((f, v)) if *f == t.factor => v.push(t.letter.clone()),
            _ => out.push((t.factor, vec![t.letter.clone()])),
        }
    }
    out
}

impl<L: Clone + Ord + Hash + Debug, T: Scalar> ProductState<L, T> {
    fn marginal(&self, f: usize, w: &[L]) -> Result<T, FreeProbError> {
        self.marginals[f].eval(w)
    }

    fn tensor(&self, w: &[Tagged<L>]) -> Result<T, FreeProbError> {
        let mut groups: BTreeMap<usize, Vec<L>> = BTreeMap::new();
        for t in w {
            groups.entry(t.factor).or_default().push(t.letter.clone());
        }
        let mut acc = T::one();
        for (f, g) in groups {
            acc = acc * self.marginal(f, &g)?;
        }
        Ok(acc)
    }

    fn boolean(&self, w: &[Tagged<L>]) -> Result<T, FreeProbError> {
        let mut acc = T::one();
        for (f, r) in runs(w) {
            acc = acc * self.marginal(f, &r)?;
        }
        Ok(acc)
    }

    fn centering(
        &self,
        w: &[Tagged<L>],
        memo: &mut HashMap<Vec<Tagged<L>>, T>,
    ) -> Result<T, FreeProbError> {
        let rs = runs(w);
        match rs.len() {
            0 => return Ok(T::one()),
            1 => return self.marginal(rs[0].0, &rs[0].1),
            _ => {}
        }
        if let Some(v) = memo.get(w) {
            return Ok(v.clone());
        }
        let p = rs.len();
        let alphas: Vec<T> = rs
            .iter()
            .map(|(f, r)| self.marginal(*f, r))
            .collect::<Result<_, _>>()?;
        // τ(Π(r_j − α_j)) = 0 expanded over the subset S of uncentred runs
        let mut acc = T::zero();
        for mask in 0u64..(1u64 << p) - 1 {
            let mut coef = T::one();
            for (j, a) in alphas.iter().enumerate() {
                if mask >> j & 1 == 0 {
                    coef = coef * (-a.clone());
                }
            }
            if coef.is_zero() {
                continue;
            }
            let sub: Vec<Tagged<L>> = rs
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .flat_map(|(_, (f, r))| r.iter().map(move |l| Tagged::new(*f, l.clone())))
                .collect();
            acc = acc + coef * self.centering(&sub, memo)?;
        }
        let v = -acc;
        memo.insert(w.to_vec(), v.clone());
        Ok(v)
    }

    fn first_block(&self, w: &[Tagged<L>]) -> Result<T, FreeProbError> {
        let mut ev = FirstBlock {
            state: self,
            word: w,
            memo: HashMap::new(),
            cumulants: (0..self.marginals.len()).map(|_| HashMap::new()).collect(),
        };
        ev.interval(0, w.len())
    }
}

struct FirstBlock<'a, L, T> {
    state: &'a ProductState<L, T>,
    word: &'a [Tagged<L>],
    memo: HashMap<(usize, usize), T>,
    cumulants: Vec<HashMap<Vec<L>, T>>,
}

impl<L: Clone + Ord + Hash + Debug, T: Scalar> FirstBlock<'_, L, T> {
    fn cumulant(&mut self, f: usize, w: Vec<L>) -> Result<T, FreeProbError> {
        if let Some(v) = self.cumulants[f].get(&w) {
            return Ok(v.clone());
        }
        let marginal = &self.state.marginals[f];
        let mut cache = CumulantCache {
            state: marginal,
            memo: std::mem::take(&mut self.cumulants[f]),
        };
        let v = cache.cumulant(&w);
        self.cumulants[f] = cache.memo;
        v
    }

    /// Moment of the subword `word[i..j]`. Mixed cumulants vanish, so the
    /// block of the first letter only contains letters of its own factor.
    fn interval(&mut self, i: usize, j: usize) -> Result<T, FreeProbError> {
        if i >= j {
            return Ok(T::one());
        }
        if let Some(v) = self.memo.get(&(i, j)) {
            return Ok(v.clone());
        }
        let f = self.word[i].factor;
        let same: Vec<usize> = (i + 1..j).filter(|&x| self.word[x].factor == f).collect();
        let mut acc = T::zero();
        for mask in 0u64..(1u64 << same.len()) {
            let mut v = vec![i];
            v.extend(
                same.iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &x)| x),
            );
            let letters: Vec<L> = v.iter().map(|&x| self.word[x].letter.clone()).collect();
            let mut term = self.cumulant(f, letters)?;
            if term.is_zero() {
                continue;
            }
            for (x, &a) in v.iter().enumerate() {
                let b = v.get(x + 1).copied().unwrap_or(j);
                term = term * self.interval(a + 1, b)?;
                if term.is_zero() {
                    break;
                }
            }
            acc = acc + term;
        }
        self.memo.insert((i, j), acc.clone());
        Ok(acc)
    }
}

impl<L: Clone + Ord + Hash + Debug, T: Scalar> State for ProductState<L, T> {
    type Letter = Tagged<L>;
    type Scalar = T;

    fn eval(&self, w: &[Tagged<L>]) -> Result<T, FreeProbError> {
        let n = self.marginals.len();
        if let Some(t) = w.iter().find(|t| t.factor >= n) {
            return Err(FreeProbError::FactorOutOfRange {
                factor: t.factor,
                n,
            });
        }
        match self.kind {
            ProductKind::Tensor => self.tensor(w),
            ProductKind::Boolean => self.boolean(w),
            ProductKind::Free => match self.algorithm {
                FreeAlgorithm::FirstBlock => self.first_block(w),
                FreeAlgorithm::Centering => self.centering(w, &mut HashMap::new()),
            },
        }
    }
}

/// Free product of single unitaries: every marginal is the law of one unitary
/// `u_f` and the letter `e` stands for `u_f^e`, so `φ_f(w)` depends only on the
/// exponent sum. Walks the free product Fock space right to left; a pushed
/// layer `(u^k Ω)°` only carries its current exponent. Polynomial in `|w|`.
pub fn free_unitary_moment<T: Scalar>(
    marginals: &[DynState<i32, T>],
    w: &[Tagged<i32>],
) -> Result<T, FreeProbError> {
    let n = marginals.len();
    if let Some(t) = w.iter().find(|t| t.factor >= n) {
        return Err(FreeProbError::FactorOutOfRange {
            factor: t.factor,
            n,
        });
    }
    let mut walk = UnitaryWalk {
        word: w,
        marginals,
        moments: HashMap::new(),
        excursions: HashMap::new(),
        layers: HashMap::new(),
    };
    walk.excursion(0, w.len(), n)
}

struct UnitaryWalk<'a, T> {
    word: &'a [Tagged<i32>],
    marginals: &'a [DynState<i32, T>],
    moments: HashMap<(usize, i32), T>,
    excursions: HashMap<(usize, usize, usize), T>,
    layers: HashMap<(usize, usize, i32), T>,
}

impl<T: Scalar> UnitaryWalk<'_, T> {
    fn moment(&mut self, f: usize, k: i32) -> Result<T, FreeProbError> {
        if k == 0 {
            return Ok(T::one());
        }
        if let Some(v) = self.moments.get(&(f, k)) {
            return Ok(v.clone());
        }
        let v = self.marginals[f].eval(&[k])?;
        self.moments.insert((f, k), v.clone());
        Ok(v)
    }

    /// Letters `a..b` acting on a stack whose top layer is of factor `g`
    /// (`g` out of range for the vacuum) and returning to it untouched.
    fn excursion(&mut self, a: usize, b: usize, g: usize) -> Result<T, FreeProbError> {
        if a == b {
            return Ok(T::one());
        }
        let Tagged {
            factor: h,
            letter: e,
        } = self.word[b - 1];
        if h == g {
            return Ok(T::zero());
        }
        if let Some(v) = self.excursions.get(&(a, b, g)) {
            return Ok(v.clone());
        }
        let mut acc = self.moment(h, e)? * self.excursion(a, b - 1, g)?;
        for q in a..b - 1 {
            if self.word[q].factor != h {
                continue;
            }
            let life = self.layer(q, b - 1, e)?;
            if !life.is_zero() {
                acc = acc + life * self.excursion(a, q, g)?;
            }
        }
        self.excursions.insert((a, b, g), acc.clone());
        Ok(acc)
    }

    /// A layer `(u_h^k Ω)°` on top, letters `a..b` still to act, destroyed by
    /// letter `a`; `h` is the factor of letter `a`.
    fn layer(&mut self, a: usize, b: usize, k: i32) -> Result<T, FreeProbError> {
        if let Some(v) = self.layers.get(&(a, b, k)) {
            return Ok(v.clone());
        }
        let h = self.word[a].factor;
        let mk = self.moment(h, k)?;
        let mut acc = T::zero();
        for q in a..b {
            if self.word[q].factor != h {
                continue;
            }
            let gap = self.excursion(q + 1, b, h)?;
            if gap.is_zero() {
                continue;
            }
            let e = self.word[q].letter;
            let event = if q == a {
                self.moment(h, e + k)? - mk.clone() * self.moment(h, e)?
            } else {
                let merged = if e + k == 0 {
                    T::zero()
                } else {
                    self.layer(a, q, e + k)?
                };
                merged - mk.clone() * self.layer(a, q, e)?
            };
            acc = acc + gap * event;
        }
        self.layers.insert((a, b, k), acc.clone());
        Ok(acc)
    }
}

/// Cumulants of `a = v w v*` (free Haar unitary `v`, semicircular `w`) next to those of `w`.
#[derive(Clone, Debug)]
pub struct ConjugationReport {
    /// `(order, κ(a, …, a), κ(w, …, w))`
    pub rows: Vec<(usize, BigRational, BigRational)>,
}

impl ConjugationReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|(r, ka, kw)| ka == kw && (r % 2 == 0 || ka.is_zero()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum GaugeLetter {
    V(i32),
    W,
}

struct GaugeMarginal(usize);

impl State for GaugeMarginal {
    type Letter = GaugeLetter;
    type Scalar = BigRational;

    fn eval(&self, word: &[GaugeLetter]) -> Result<BigRational, FreeProbError> {
        let bad = || FreeProbError::InvalidLetter(format!("{word:?}"));
        match self.0 {
            0 => {
                let exps: Vec<i32> = word
                    .iter()
                    .map(|l| {
                        if let GaugeLetter::V(e) = l {
                            Ok(*e)
                        } else {
                            Err(bad())
                        }
                    })
                    .collect::<Result<_, _>>()?;
                HaarUnitary.eval(&exps)
            }
            _ => {
                if word.iter().any(|l| *l != GaugeLetter::W) {
                    return Err(bad());
                }
                Semicircular.eval(&vec![(); word.len()])
            }
        }
    }
}

/// Moments of powers of `v w v*` under the free product.
struct ConjugatedSemicircle(ProductState<GaugeLetter, BigRational>);

impl State for ConjugatedSemicircle {
    type Letter = ();
    type Scalar = BigRational;

    fn eval(&self, word: &[()]) -> Result<BigRational, FreeProbError> {
        let mut w = Vec::with_capacity(3 * word.len());
        for _ in word {
            w.push(Tagged::new(0, GaugeLetter::V(1)));
            w.push(Tagged::new(1, GaugeLetter::W));
            w.push(Tagged::new(0, GaugeLetter::V(-1)));
        }
        self.0.eval(&w)
    }
}

pub fn joint_cumulants_check_conjugation(order: usize) -> Result<ConjugationReport, FreeProbError> {
    if order == 0 || order > 6 {
        return Err(FreeProbError::OrderOutOfRange { k: order, max: 6 });
    }
    let marginals: Vec<DynState<GaugeLetter, BigRational>> =
        vec![Arc::new(GaugeMarginal(0)), Arc::new(GaugeMarginal(1))];
    let conj = ConjugatedSemicircle(product_state(ProductKind::Free, marginals));
    let mut ca = CumulantCache::new(&conj);
    let mut cw = CumulantCache::new(&Semicircular);
    let mut rows = Vec::new();
    for r in 1..=order {
        let w = vec![(); r];
        rows.push((r, ca.cumulant(&w)?, cw.cumulant(&w)?));
    }
    Ok(ConjugationReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// Every set partition of `0..k` via restricted growth strings.
    fn all_set_partitions(k: usize) -> Vec<NCPartition> {
        let mut out = Vec::new();
        let mut rgs = vec![0usize; k];
        loop {
            let nb = rgs.iter().max().map_or(0, |m| m + 1);
            let mut blocks = vec![Vec::new(); nb];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(NCPartition::new(blocks));
            // next restricted growth string
            let mut i = k;
            loop {
                if i <= 1 {
                    return out;
                }
                i -= 1;
                let bound = rgs[..i].iter().max().unwrap() + 1;
                if rgs[i] < bound {
                    rgs[i] += 1;
                    for r in &mut rgs[i + 1..] {
                        *r = 0;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn nc_counts_by_brute_force() {
        for k in 1..=8 {
            let mut brute: Vec<NCPartition> = all_set_partitions(k)
                .into_iter()
                .filter(|p| p.is_noncrossing())
                .collect();
            brute.sort();
            let mut fast = enumerate_nc(k).unwrap().to_vec();
            fast.sort();
            assert_eq!(fast, brute, "k={k}");
            assert_eq!(BigInt::from(fast.len()), catalan(k));
        }
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(all_set_partitions(4).len(), 15);
        assert!(enumerate_nc(0).is_err());
        assert!(enumerate_nc(13).is_err());
    }

    #[test]
    fn matchings() {
        assert_eq!(enumerate_nc_matchings(2).unwrap().len(), 1);
        assert_eq!(enumerate_nc_matchings(4).unwrap().len(), 2);
        assert_eq!(enumerate_nc_matchings(6).unwrap().len(), 5);
        assert!(enumerate_nc_matchings(5).is_err());
        for p in enumerate_nc_matchings(8).unwrap() {
            assert!(p.is_noncrossing());
            assert!(p.blocks.iter().all(|b| b.len() == 2));
        }
    }

    #[test]
    fn semicircle_fourth_moment() {
        let mut t = CumulantTable::new(4);
        t.values.insert(vec!['a', 'a'], q(1));
        assert_eq!(moments_from_cumulants(&t, &['a'; 4]).unwrap(), q(2));
        assert!(moments_from_cumulants(&t, &['a'; 5]).is_err());
    }

    #[test]
    fn first_cumulant_is_mean() {
        let s = TableState {
            moments: BTreeMap::from([(vec![0u8], q(3))]),
        };
        assert_eq!(cumulants_from_moments(&s, &[0u8]).unwrap(), q(3));
    }

    #[test]
    fn haar_unitary_cumulants() {
        // κ_{2m}(u, u*, …) = (−1)^{m−1} C_{m−1}
        for m in 1..=4usize {
            let w: Vec<i32> = (0..2 * m)
                .map(|i| if i % 2 == 0 { 1 } else { -1 })
                .collect();
            let k = cumulants_from_moments(&HaarUnitary, &w).unwrap();
            let sign = if m % 2 == 1 { 1 } else { -1 };
            assert_eq!(k, BigRational::from_integer(catalan(m - 1) * sign));
        }
    }

    #[test]
    fn products_of_entries() {
        // a, b free semicirculars: only same-letter cumulants of order 2
        let mut t = CumulantTable::new(4);
        t.values.insert(vec!['a', 'a'], q(1));
        t.values.insert(vec!['b', 'b'], q(1));
        let g = interval_partition(&[2, 2]);
        assert_eq!(
            cumulants_of_products(&t, &['a', 'b', 'b', 'a'], &g).unwrap(),
            q(1)
        );
        assert_eq!(
            cumulants_of_products(&t, &['a', 'b', 'a', 'b'], &g).unwrap(),
            q(0)
        );
        assert_eq!(
            cumulants_of_products(&t, &['a', 'b'], &interval_partition(&[2])).unwrap(),
            q(0)
        );
        let bad = NCPartition::new(vec![vec![0, 2], vec![1, 3]]);
        assert_eq!(
            cumulants_of_products(&t, &['a', 'b', 'a', 'b'], &bad),
            Err(FreeProbError::NotInterval)
        );
    }

    fn two_tables() -> (DynState<char, BigRational>, DynState<char, BigRational>) {
        let mut a = BTreeMap::new();
        let mut b = BTreeMap::new();
        for w in words_up_to(&['x'], 6) {
            a.insert(w.clone(), q(w.len() as i64 + 1));
            b.insert(
                w.iter().map(|_| 'y').collect::<Vec<_>>(),
                BigRational::new((w.len() as i64).into(), 3.into()),
            );
        }
        (
            Arc::new(TableState { moments: a }),
            Arc::new(TableState { moments: b }),
        )
    }

    #[test]
    fn low_order_products() {
        let (a, b) = two_tables();
        let x = |f: usize| Tagged::new(f, if f == 0 { 'x' } else { 'y' });
        let free = product_state(ProductKind::Free, vec![a.clone(), b.clone()]);
        assert_eq!(
            free.eval(&[x(0), x(1)]).unwrap(),
            q(2) * BigRational::new(1.into(), 3.into())
        );
        let boolean = product_state(ProductKind::Boolean, vec![a.clone(), b.clone()]);
        assert_eq!(
            boolean.eval(&[x(0), x(1), x(0)]).unwrap(),
            q(4) * BigRational::new(1.into(), 3.into())
        );
        let tensor = product_state(ProductKind::Tensor, vec![a.clone(), b.clone()]);
        assert_eq!(
            tensor.eval(&[x(0), x(1), x(0)]).unwrap(),
            q(3) * BigRational::new(1.into(), 3.into())
        );
        let aa = a.eval(&['x', 'x']).unwrap();
        let b1 = b.eval(&['y']).unwrap();
        assert_eq!(free.eval(&[x(0), x(1), x(0)]).unwrap(), aa * b1);
        // centered marginals: alternating words vanish
        let centered: DynState<char, BigRational> = Arc::new(TableState {
            moments: BTreeMap::from([(vec!['x'], q(0)), (vec!['x', 'x'], q(1))]),
        });
        let free = product_state(ProductKind::Free, vec![centered.clone(), centered]);
        let w = [
            Tagged::new(0, 'x'),
            Tagged::new(1, 'x'),
            Tagged::new(0, 'x'),
        ];
        assert_eq!(free.eval(&w).unwrap(), q(0));
        assert_eq!(
            free.eval(&[Tagged::new(2, 'x')]),
            Err(FreeProbError::FactorOutOfRange { factor: 2, n: 2 })
        );
    }

    #[test]
    fn centering_matches_first_block() {
        let (a, b) = two_tables();
        let mut free = product_state(ProductKind::Free, vec![a, b]);
        for len in 1..=6 {
            for tags in words_up_to(&[0usize, 1], len)
                .into_iter()
                .filter(|w| w.len() == len)
            {
                let w: Vec<Tagged<char>> = tags
                    .iter()
                    .map(|&f| Tagged::new(f, if f == 0 { 'x' } else { 'y' }))
                    .collect();
                free.algorithm = FreeAlgorithm::FirstBlock;
                let x = free.eval(&w).unwrap();
                free.algorithm = FreeAlgorithm::Centering;
                assert_eq!(free.eval(&w).unwrap(), x, "{tags:?}");
            }
        }
    }

    struct Exponents;

    impl State for Exponents {
        type Letter = i32;
        type Scalar = BigRational;

        fn eval(&self, word: &[i32]) -> Result<BigRational, FreeProbError> {
            let m: i64 = word.iter().map(|&e| e as i64).sum();
            Ok(BigRational::new(
                BigInt::from(2 + m),
                BigInt::from(2 + 3 * m * m),
            ))
        }
    }

    #[test]
    fn unitary_walk_matches_first_block() {
        let haar: DynState<i32, BigRational> = Arc::new(HaarUnitary);
        let table: DynState<i32, BigRational> = Arc::new(Exponents);
        let marginals = vec![table.clone(), haar, table];
        let free = product_state(ProductKind::Free, marginals.clone());
        for w in words_up_to(&[(0usize, 1i32), (0, -2), (1, 1), (1, -1), (2, 2)], 5) {
            let w: Vec<Tagged<i32>> = w.iter().map(|&(f, e)| Tagged::new(f, e)).collect();
            assert_eq!(
                free_unitary_moment(&marginals, &w).unwrap(),
                free.eval(&w).unwrap(),
                "{w:?}"
            );
        }
    }

    #[test]
    fn conjugation_cumulants() {
        let r = joint_cumulants_check_conjugation(6).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.rows[0].1, q(0));
        assert_eq!(r.rows[1].1, q(1));
        assert_eq!(r.rows[3].1, q(0));
    }

    #[test]
    fn dump_format() {
        let mut t: CumulantTable<char, BigRational> = CumulantTable::new(2);
        t.values
            .insert(vec!['a', 'a'], BigRational::new(1.into(), 2.into()));
        assert_eq!(t.dump(), "'a' 'a' : 1/2\n");
    }
}
