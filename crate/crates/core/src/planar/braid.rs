use std::fmt;

use super::{LassoWord, Loop, PlanarError};

/// Group elements the braid group can act on by substitution.
pub trait GroupElement: Clone {
    fn mul(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
}

impl GroupElement for LassoWord {
    fn mul(&self, other: &LassoWord) -> LassoWord {
        LassoWord::mul(self, other)
    }

    fn inverse(&self) -> LassoWord {
        LassoWord::inverse(self)
    }
}

impl GroupElement for Loop {
    fn mul(&self, other: &Loop) -> Loop {
        self.concat(other)
    }

    fn inverse(&self) -> Loop {
        Loop::inverse(self)
    }
}

/// `β_index` (1-based) or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BraidLetter {
    pub index: usize,
    pub inverse: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<BraidLetter>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<BraidLetter>) -> Result<BraidWord, PlanarError> {
        for l in &letters {
            if l.index == 0 || l.index >= strands {
                return Err(PlanarError::BraidIndex {
                    index: l.index,
                    strands,
                });
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> BraidWord {
        BraidWord {
            strands,
            letters: Vec::new(),
        }
    }

    /// Builds a braid from signed generator indices: `2` is `β₂`, `-2` is `β₂⁻¹`.
    pub fn from_signed(strands: usize, gens: &[i32]) -> Result<BraidWord, PlanarError> {
        let letters = gens
            .iter()
            .map(|&g| BraidLetter {
                index: g.unsigned_abs() as usize,
                inverse: g < 0,
            })
            .collect();
        BraidWord::new(strands, letters)
    }

    pub fn inverse(&self) -> BraidWord {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| BraidLetter {
                index: l.index,
                inverse: !l.inverse,
            })
            .collect();
        BraidWord {
            strands: self.strands,
            letters,
        }
    }

    pub fn then(&self, other: &BraidWord) -> BraidWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BraidWord {
            strands: self.strands.max(other.strands),
            letters,
        }
    }

    /// Underlying permutation: entry `j` of `β·c` is conjugate to `c[perm[j]]`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.strands).collect();
        for l in self.letters.iter().rev() {
            perm.swap(l.index - 1, l.index);
        }
        perm
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("b{}^-1", l.index)
                } else {
                    format!("b{}", l.index)
                }
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

fn act_letter<G: GroupElement>(l: BraidLetter, seq: &mut [G]) {
    let i = l.index - 1;
    let a = seq[i].clone();
    let b = seq[i + 1].clone();
    if l.inverse {
        seq[i] = a.inverse().mul(&b).mul(&a);
        seq[i + 1] = a;
    } else {
        seq[i + 1] = b.mul(&a).mul(&b.inverse());
        seq[i] = b;
    }
}

/// Left action of a braid on a sequence of group elements: the rightmost
/// letter of the braid word acts first.
pub fn braid_act<G: GroupElement>(braid: &BraidWord, seq: &[G]) -> Result<Vec<G>, PlanarError> {
    if braid.strands != seq.len() {
        return Err(PlanarError::StrandMismatch {
            strands: braid.strands,
            len: seq.len(),
        });
    }
    for l in &braid.letters {
        if l.index == 0 || l.index >= braid.strands {
            return Err(PlanarError::BraidIndex {
                index: l.index,
                strands: braid.strands,
            });
        }
    }
    let mut out = seq.to_vec();
    for &l in braid.letters.iter().rev() {
        act_letter(l, &mut out);
    }
    Ok(out)
}
