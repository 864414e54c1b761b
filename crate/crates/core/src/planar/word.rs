use std::fmt;

use super::{free_reduce, Invertible};

/// One letter `λ_index^exp` with `exp = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub exp: i8,
}

impl Letter {
    pub fn new(index: usize, exp: i8) -> Letter {
        assert!(exp == 1 || exp == -1, "letter exponent must be ±1");
        Letter { index, exp }
    }

    pub fn pos(index: usize) -> Letter {
        Letter { index, exp: 1 }
    }

    pub fn neg(index: usize) -> Letter {
        Letter { index, exp: -1 }
    }
}

impl Invertible for Letter {
    fn inverse(self) -> Letter {
        Letter {
            index: self.index,
            exp: -self.exp,
        }
    }
}

/// Element of the free group on a lasso basis, stored as a letter sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LassoWord {
    pub letters: Vec<Letter>,
}

impl LassoWord {
    pub fn identity() -> LassoWord {
        LassoWord {
            letters: Vec::new(),
        }
    }

    pub fn generator(index: usize) -> LassoWord {
        LassoWord {
            letters: vec![Letter::pos(index)],
        }
    }

    pub fn from_letters(letters: Vec<Letter>) -> LassoWord {
        LassoWord { letters }
    }

    /// Builds a word from `(index, exponent)` pairs; any nonzero integer exponent is expanded.
    pub fn from_pairs(pairs: &[(usize, i32)]) -> LassoWord {
        let mut letters = Vec::new();
        for &(index, e) in pairs {
            let l = if e > 0 {
                Letter::pos(index)
            } else {
                Letter::neg(index)
            };
            letters.extend(std::iter::repeat_n(l, e.unsigned_abs() as usize));
        }
        LassoWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn reduced(&self) -> LassoWord {
        LassoWord {
            letters: free_reduce(&self.letters),
        }
    }

    pub fn mul(&self, other: &LassoWord) -> LassoWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        LassoWord {
            letters: free_reduce(&letters),
        }
    }

    pub fn inverse(&self) -> LassoWord {
        LassoWord {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, k: i32) -> LassoWord {
        let base = if k >= 0 { self.clone() } else { self.inverse() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        LassoWord {
            letters: free_reduce(&letters),
        }
    }

    /// Exponent sum of each generator.
    pub fn abelianize(&self, rank: usize) -> Vec<i64> {
        let mut out = vec![0; rank.max(self.max_index().map_or(0, |m| m + 1))];
        for l in &self.letters {
            out[l.index] += l.exp as i64;
        }
        out
    }

    pub fn max_index(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.index).max()
    }

    /// Collapses runs of equal letters into `(index, signed power)` pairs.
    pub fn syllables(&self) -> Vec<(usize, i32)> {
        let mut out: Vec<(usize, i32)> = Vec::new();
        for l in &self.letters {
            match out.last_mut() {
                Some((i, p)) if *i == l.index && (*p > 0) == (l.exp > 0) => *p += l.exp as i32,
                _ => out.push((l.index, l.exp as i32)),
            }
        }
        out
    }

    /// Renames generators in order of first appearance, starting from 0.
    pub fn relabel_by_first_occurrence(&self) -> (LassoWord, Vec<usize>) {
        let mut order: Vec<usize> = Vec::new();
        let letters = self
            .letters
            .iter()
            .map(|l| {
                let pos = order.iter().position(|&i| i == l.index).unwrap_or_else(|| {
                    order.push(l.index);
                    order.len() - 1
                });
                Letter {
                    index: pos,
                    exp: l.exp,
                }
            })
            .collect();
        (LassoWord { letters }, order)
    }

    /// Substitutes a word for every generator and reduces.
    pub fn substitute(&self, images: &[LassoWord]) -> LassoWord {
        let mut letters = Vec::new();
        for l in &self.letters {
            let img = &images[l.index];
            if l.exp > 0 {
                letters.extend_from_slice(&img.letters);
            } else {
                letters.extend(img.letters.iter().rev().map(|x| x.inverse()));
            }
        }
        LassoWord {
            letters: free_reduce(&letters),
        }
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (n, (i, p)) in self.syllables().into_iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            if p == 1 {
                write!(f, "L{i}")?;
            } else {
                write!(f, "L{i}^{p}")?;
            }
        }
        Ok(())
    }
}
