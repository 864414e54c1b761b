//! Free products of copies of the dual Voiculescu group `O⟨n⟩` and its Zhang structure.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcAlgError {
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("generator index ({i},{j}) outside 1..={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub copy: u32,
    pub i: usize,
    pub j: usize,
    pub star: bool,
}

impl Generator {
    pub fn u(i: usize, j: usize, copy: u32) -> Generator {
        Generator {
            copy,
            i,
            j,
            star: false,
        }
    }

    pub fn u_star(i: usize, j: usize, copy: u32) -> Generator {
        Generator {
            copy,
            i,
            j,
            star: true,
        }
    }

    pub fn adjoint(self) -> Generator {
        Generator {
            star: !self.star,
            ..self
        }
    }

    pub fn with_copy(self, copy: u32) -> Generator {
        Generator { copy, ..self }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = if self.star { "u*" } else { "u" };
        write!(f, "{head}[{},{},{}]", self.i, self.j, self.copy)
    }
}

pub type Word = Vec<Generator>;

/// Finite linear combination of words with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Element {
    terms: BTreeMap<Word, BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

impl Element {
    pub fn zero() -> Element {
        Element::default()
    }

    pub fn one() -> Element {
        Element::scalar(BigRational::one())
    }

    pub fn scalar(c: BigRational) -> Element {
        Element::term(Vec::new(), c)
    }

    pub fn generator(g: Generator) -> Element {
        Element::term(vec![g], BigRational::one())
    }

    pub fn word(w: Word) -> Element {
        Element::term(w, BigRational::one())
    }

    pub fn term(w: Word, c: BigRational) -> Element {
        let mut e = Element::zero();
        e.add_term(w, c);
        e
    }

    pub fn add_term(&mut self, w: Word, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &[Generator]) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &BigRational) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Element) -> Element {
        let mut out = Element::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }

    /// Algebra homomorphism determined by the image of each letter.
    pub fn substitute<F: FnMut(&Generator) -> Element>(&self, mut image: F) -> Element {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            let mut acc = Element::scalar(c.clone());
            for g in w {
                acc = acc.mul(&image(g));
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn retag<F: Fn(u32) -> u32>(&self, map: F) -> Element {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            out.add_term(
                w.iter().map(|g| g.with_copy(map(g.copy))).collect(),
                c.clone(),
            );
        }
        out
    }

    /// Reverses every word and stars each letter; rational coefficients are self-conjugate.
    pub fn involution(&self) -> Element {
        let mut out = Element::zero();
        for (w, c) in &self.terms {
            out.add_term(w.iter().rev().map(|g| g.adjoint()).collect(), c.clone());
        }
        out
    }

    /// Letterwise antipode `u_ij ↦ u*_ji`, `u*_ij ↦ u_ji`.
    pub fn antipode(&self) -> Element {
        self.substitute(|g| Element::generator(antipode_gen(*g)))
    }

    pub fn counit(&self) -> BigRational {
        let mut total = BigRational::zero();
        for (w, c) in &self.terms {
            if w.iter().all(|g| g.i == g.j) {
                total += c;
            }
        }
        total
    }

    pub fn copies(&self) -> BTreeSet<u32> {
        self.terms
            .keys()
            .flat_map(|w| w.iter().map(|g| g.copy))
            .collect()
    }

    /// One term per line, `coeff * u[i,j,copy] u*[i,j,copy] ...`, sorted by text.
    pub fn dump(&self) -> String {
        let mut lines: Vec<(String, String)> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word = if w.is_empty() {
                    "1".to_string()
                } else {
                    w.iter()
                        .map(|g| g.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                (word, c.to_string())
            })
            .collect();
        lines.sort();
        let mut s = String::new();
        for (w, c) in lines {
            s.push_str(&format!("{c} * {w}\n"));
        }
        s
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let dump = self.dump();
        f.write_str(&dump.trim_end().replace('\n', " + "))
    }
}

fn antipode_gen(g: Generator) -> Generator {
    Generator {
        copy: g.copy,
        i: g.j,
        j: g.i,
        star: !g.star,
    }
}

fn kronecker(i: usize, j: usize) -> BigRational {
    if i == j {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pattern {
    Row,
    Column,
}

fn match_pair(x: &Generator, y: &Generator) -> Option<(Pattern, usize, usize, usize)> {
    if x.copy != y.copy {
        return None;
    }
    if !x.star && y.star && x.j == y.j {
        return Some((Pattern::Row, x.i, y.i, x.j));
    }
    if x.star && !y.star && x.i == y.i {
        return Some((Pattern::Column, x.j, y.j, x.i));
    }
    None
}

type GroupKey = (Word, Word, Pattern, usize, usize, u32);

/// Replaces every complete sum `Σ_k u_ik u*_jk` or `Σ_k u*_ki u_kj` (same copy,
/// same context, equal coefficients) by `δ_ij`, until nothing changes.
pub fn unitarity_reduce(e: &Element, n: usize) -> Element {
    let mut cur = e.clone();
    loop {
        let mut groups: BTreeMap<GroupKey, Vec<(usize, Word, BigRational)>> = BTreeMap::new();
        for (w, c) in &cur.terms {
            for p in 0..w.len().saturating_sub(1) {
                if let Some((pat, a, b, k)) = match_pair(&w[p], &w[p + 1]) {
                    let key = (w[..p].to_vec(), w[p + 2..].to_vec(), pat, a, b, w[p].copy);
                    groups
                        .entry(key)
                        .or_default()
                        .push((k, w.clone(), c.clone()));
                }
            }
        }
        let mut consumed: BTreeSet<Word> = BTreeSet::new();
        let mut next = cur.clone();
        let mut changed = false;
        for ((pre, post, _, a, b, _), members) in groups {
            let ks: BTreeSet<usize> = members.iter().map(|m| m.0).collect();
            if ks.len() != n || members.len() != n || (1..=n).any(|k| !ks.contains(&k)) {
                continue;
            }
            let c = members[0].2.clone();
            if members.iter().any(|m| m.2 != c || consumed.contains(&m.1)) {
                continue;
            }
            for m in &members {
                consumed.insert(m.1.clone());
                next.add_term(m.1.clone(), -m.2.clone());
            }
            let mut w = pre;
            w.extend(post);
            next.add_term(w, c * kronecker(a, b));
            changed = true;
        }
        if !changed {
            return cur;
        }
        cur = next;
    }
}

/// Structure maps of a Zhang algebra on the generators of `O⟨n⟩`.
pub trait ZhangStructure {
    fn n(&self) -> usize;

    /// Coproduct of a generator with legs tagged `left` and `right`.
    fn delta_gen(&self, g: &Generator, left: u32, right: u32) -> Element;

    fn antipode_gen(&self, g: &Generator) -> Element {
        Element::generator(antipode_gen(*g))
    }

    fn counit_gen(&self, g: &Generator) -> BigRational {
        kronecker(g.i, g.j)
    }

    fn generators(&self, copy: u32) -> Vec<Generator> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n * n);
        for star in [false, true] {
            for i in 1..=n {
                for j in 1..=n {
                    out.push(Generator { copy, i, j, star });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZhangSpec {
    pub n: usize,
}

impl ZhangSpec {
    pub fn new(n: usize) -> Result<ZhangSpec, NcAlgError> {
        if n == 0 {
            return Err(NcAlgError::ZeroDimension);
        }
        Ok(ZhangSpec { n })
    }

    pub fn check(&self, g: &Generator) -> Result<(), NcAlgError> {
        if g.i == 0 || g.j == 0 || g.i > self.n || g.j > self.n {
            return Err(NcAlgError::IndexOutOfRange {
                i: g.i,
                j: g.j,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn delta(&self, g: &Generator) -> Element {
        self.delta_gen(g, 1, 2)
    }

    pub fn antipode(&self, e: &Element) -> Element {
        e.antipode()
    }

    pub fn counit(&self, e: &Element) -> BigRational {
        e.counit()
    }

    pub fn omega_c(&self, g: &Generator) -> Element {
        omega_c_with(self, g, 1, 2)
    }

    pub fn unitarity_reduce(&self, e: &Element) -> Element {
        unitarity_reduce(e, self.n)
    }
}

impl ZhangStructure for ZhangSpec {
    fn n(&self) -> usize {
        self.n
    }

    fn delta_gen(&self, g: &Generator, left: u32, right: u32) -> Element {
        let mut out = Element::zero();
        for k in 1..=self.n {
            let w = if g.star {
                vec![
                    Generator::u_star(k, g.j, right),
                    Generator::u_star(g.i, k, left),
                ]
            } else {
                vec![Generator::u(g.i, k, left), Generator::u(k, g.j, right)]
            };
            out.add_term(w, BigRational::one());
        }
        out
    }
}

/// Negative control: the coproduct with its last summand dropped.
#[derive(Clone, Copy, Debug)]
pub struct DroppedSummand(pub ZhangSpec);

impl ZhangStructure for DroppedSummand {
    fn n(&self) -> usize {
        self.0.n
    }

    fn delta_gen(&self, g: &Generator, left: u32, right: u32) -> Element {
        let full = self.0.delta_gen(g, left, right);
        let mut out = Element::zero();
        let last = full.terms.keys().last().cloned();
        for (w, c) in full.terms {
            if Some(&w) != last.as_ref() {
                out.add_term(w, c);
            }
        }
        out
    }
}

/// Applies `Δ` to the letters of copy `from`, sending the legs to `left`, `right`.
pub fn apply_delta<Z: ZhangStructure + ?Sized>(
    z: &Z,
    e: &Element,
    from: u32,
    left: u32,
    right: u32,
) -> Element {
    e.substitute(|g| {
        if g.copy == from {
            z.delta_gen(g, left, right)
        } else {
            Element::generator(*g)
        }
    })
}

/// Conjugation coaction with the gauge on copy `gauge` and the holonomy on `field`:
/// the composite `(ι₁ ⊔̇ ι₂ ⊔̇ ι₁)∘(id ⊔ S)∘(Δ ⊔ id)∘Δ`.
pub fn omega_c_with<Z: ZhangStructure + ?Sized>(
    z: &Z,
    g: &Generator,
    gauge: u32,
    field: u32,
) -> Element {
    const SCRATCH: u32 = u32::MAX - 2;
    let (a, b, c) = (SCRATCH, SCRATCH + 1, SCRATCH + 2);
    let first = z.delta_gen(&g.with_copy(0), a, c);
    let second = apply_delta(z, &first, a, a, b);
    let third = second.substitute(|x| {
        if x.copy == c {
            z.antipode_gen(x)
        } else {
            Element::generator(*x)
        }
    });
    third.retag(|t| {
        if t == a || t == c {
            gauge
        } else if t == b {
            field
        } else {
            t
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Coassoc,
    CounitLeft,
    CounitRight,
    AntipodeLeft,
    AntipodeRight,
    AntipodeAnticomorphism,
    CoactionAssoc,
    CoactionCounit,
    DeltaComodule,
}

impl Axiom {
    pub const ALL: [Axiom; 9] = [
        Axiom::Coassoc,
        Axiom::CounitLeft,
        Axiom::CounitRight,
        Axiom::AntipodeLeft,
        Axiom::AntipodeRight,
        Axiom::AntipodeAnticomorphism,
        Axiom::CoactionAssoc,
        Axiom::CoactionCounit,
        Axiom::DeltaComodule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Coassoc => "coassoc",
            Axiom::CounitLeft => "counit_left",
            Axiom::CounitRight => "counit_right",
            Axiom::AntipodeLeft => "antipode_left",
            Axiom::AntipodeRight => "antipode_right",
            Axiom::AntipodeAnticomorphism => "antipode_anticomorphism",
            Axiom::CoactionAssoc => "coaction_assoc",
            Axiom::CoactionCounit => "coaction_counit",
            Axiom::DeltaComodule => "delta_comodule",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axiom {
    type Err = NcAlgError;

    fn from_str(s: &str) -> Result<Axiom, NcAlgError> {
        Axiom::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| NcAlgError::UnknownAxiom(s.to_string()))
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub generator: Generator,
    pub lhs: Element,
    pub rhs: Element,
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub n: usize,
    pub holds: bool,
    /// Which reading of a sided identity was checked when both are plausible.
    pub convention: &'static str,
    pub counterexample: Option<Counterexample>,
}

fn fold_to(e: &Element, target: u32) -> Element {
    e.retag(|_| target)
}

fn sides<Z: ZhangStructure + ?Sized>(
    z: &Z,
    axiom: Axiom,
    g: &Generator,
) -> Vec<(&'static str, Element, Element)> {
    let id = Element::generator(*g);
    let unit = Element::scalar(z.counit_gen(g));
    let d = z.delta_gen(g, 1, 2);
    match axiom {
        Axiom::Coassoc => {
            let lhs = apply_delta(z, &d.retag(|c| if c == 2 { 3 } else { c }), 1, 1, 2);
            let rhs = apply_delta(z, &d, 2, 2, 3);
            vec![("(Δ⊔id)Δ = (id⊔Δ)Δ", lhs, rhs)]
        }
        Axiom::CounitLeft => {
            let lhs = d.substitute(|x| {
                if x.copy == 1 {
                    Element::scalar(z.counit_gen(x))
                } else {
                    Element::generator(*x)
                }
            });
            vec![("(ε⊔̇id)Δ = id", fold_to(&lhs, g.copy), id)]
        }
        Axiom::CounitRight => {
            let rhs = d.substitute(|x| {
                if x.copy == 2 {
                    Element::scalar(z.counit_gen(x))
                } else {
                    Element::generator(*x)
                }
            });
            vec![("(id⊔̇ε)Δ = id", fold_to(&rhs, g.copy), id)]
        }
        Axiom::AntipodeLeft => {
            let lhs = d.substitute(|x| {
                if x.copy == 1 {
                    z.antipode_gen(x)
                } else {
                    Element::generator(*x)
                }
            });
            vec![("(S⊔̇id)Δ = ηε", fold_to(&lhs, 0), unit)]
        }
        Axiom::AntipodeRight => {
            let lhs = d.substitute(|x| {
                if x.copy == 2 {
                    z.antipode_gen(x)
                } else {
                    Element::generator(*x)
                }
            });
            vec![("(id⊔̇S)Δ = ηε", fold_to(&lhs, 0), unit)]
        }
        Axiom::AntipodeAnticomorphism => {
            let lhs = d.substitute(|x| z.antipode_gen(x)).retag(|c| 3 - c);
            let rhs = Element::generator(*g)
                .substitute(|x| z.antipode_gen(x))
                .substitute(|x| z.delta_gen(x, 1, 2));
            vec![("τ₁₂(S⊔S)Δ = ΔS", lhs, rhs)]
        }
        Axiom::CoactionAssoc => {
            let om = omega_c_with(z, g, 1, 2);
            let lhs = om.substitute(|x| {
                if x.copy == 2 {
                    omega_c_with(z, x, 2, 3)
                } else {
                    Element::generator(*x)
                }
            });
            let rhs = apply_delta(z, &om.retag(|c| if c == 2 { 3 } else { c }), 1, 1, 2);
            vec![("(id⊔Ω)Ω = (Δ⊔id)Ω", lhs, rhs)]
        }
        Axiom::CoactionCounit => {
            let om = omega_c_with(z, g, 1, 2);
            let gauge_trivial = om.substitute(|x| {
                if x.copy == 1 {
                    Element::scalar(z.counit_gen(x))
                } else {
                    Element::generator(*x)
                }
            });
            let field_trivial = om.substitute(|x| {
                if x.copy == 2 {
                    Element::scalar(z.counit_gen(x))
                } else {
                    Element::generator(*x)
                }
            });
            vec![
                ("(ε⊔̇id)Ω = id", fold_to(&gauge_trivial, g.copy), id),
                ("(id⊔̇ε)Ω = ηε", fold_to(&field_trivial, 0), unit),
            ]
        }
        Axiom::DeltaComodule => {
            let lhs = d
                .retag(|c| c + 1)
                .substitute(|x| omega_c_with(z, &x.with_copy(0), 1, x.copy));
            let om = omega_c_with(z, g, 1, 2);
            let rhs = apply_delta(z, &om, 2, 2, 3);
            vec![("Ω²Δ = (id⊔Δ)Ω", lhs, rhs)]
        }
    }
}

pub fn verify_axiom_with<Z: ZhangStructure + ?Sized>(z: &Z, axiom: Axiom) -> AxiomReport {
    let n = z.n();
    let mut conventions: Vec<&'static str> = Vec::new();
    for g in z.generators(0) {
        for (label, lhs, rhs) in sides(z, axiom, &g) {
            if !unitarity_reduce(&lhs.sub(&rhs), n).is_zero() {
                return AxiomReport {
                    axiom,
                    n,
                    holds: false,
                    convention: label,
                    counterexample: Some(Counterexample {
                        generator: g,
                        lhs: unitarity_reduce(&lhs, n),
                        rhs: unitarity_reduce(&rhs, n),
                    }),
                };
            }
            if !conventions.contains(&label) {
                conventions.push(label);
            }
        }
    }
    let convention = if conventions.len() > 1 {
        "both sides"
    } else {
        conventions.first().copied().unwrap_or("")
    };
    AxiomReport {
        axiom,
        n,
        holds: true,
        convention,
        counterexample: None,
    }
}

pub fn verify_axiom(name: &str, n: usize) -> Result<AxiomReport, NcAlgError> {
    let axiom: Axiom = name.parse()?;
    Ok(verify_axiom_with(&ZhangSpec::new(n)?, axiom))
}

/// Morphism `H → A` given by its values on the `2n²` generators of copy 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorImageMap {
    n: usize,
    images: BTreeMap<(bool, usize, usize), Element>,
}

impl GeneratorImageMap {
    pub fn from_fn<F: FnMut(Generator) -> Element>(n: usize, mut f: F) -> GeneratorImageMap {
        let mut images = BTreeMap::new();
        for g in (ZhangSpec { n }).generators(0) {
            images.insert((g.star, g.i, g.j), f(g));
        }
        GeneratorImageMap { n, images }
    }

    /// `ι_copy`: the generator itself, tagged with `copy`.
    pub fn identity(n: usize, copy: u32) -> GeneratorImageMap {
        GeneratorImageMap::from_fn(n, |g| Element::generator(g.with_copy(copy)))
    }

    /// `η∘ε`.
    pub fn unit(n: usize) -> GeneratorImageMap {
        GeneratorImageMap::from_fn(n, |g| Element::scalar(kronecker(g.i, g.j)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn image(&self, g: &Generator) -> &Element {
        &self.images[&(g.star, g.i, g.j)]
    }

    /// `f∘S`, the convolution inverse of a morphism.
    pub fn compose_antipode(&self) -> GeneratorImageMap {
        GeneratorImageMap::from_fn(self.n, |g| self.image(&antipode_gen(g)).clone())
    }

    pub fn apply(&self, e: &Element) -> Element {
        e.substitute(|g| self.image(g).clone())
    }

    pub fn reduced(&self) -> GeneratorImageMap {
        GeneratorImageMap {
            n: self.n,
            images: self
                .images
                .iter()
                .map(|(k, v)| (*k, unitarity_reduce(v, self.n)))
                .collect(),
        }
    }
}

/// `(f ⊔̇ g)∘Δ`.
pub fn convolve(
    f: &GeneratorImageMap,
    g: &GeneratorImageMap,
) -> Result<GeneratorImageMap, NcAlgError> {
    if f.n != g.n {
        return Err(NcAlgError::DimensionMismatch(f.n, g.n));
    }
    let z = ZhangSpec { n: f.n };
    Ok(GeneratorImageMap::from_fn(f.n, |x| {
        z.delta_gen(&x, 1, 2).substitute(|y| {
            if y.copy == 1 {
                f.image(y).clone()
            } else {
                g.image(y).clone()
            }
        })
    }))
}
