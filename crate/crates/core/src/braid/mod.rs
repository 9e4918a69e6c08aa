//! Braid words on `s` strands, their closures and closure invariants.

mod invariants;
mod laurent;

pub use invariants::{alexander_polynomial, jones_polynomial, JONES_MAX_LETTERS};
pub use laurent::LaurentPoly;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraidError {
    #[error("zero is not a generator (token {position})")]
    ZeroLetter { position: usize },
    #[error("generator {value} out of range for {strands} strands")]
    IndexOutOfRange { value: i64, strands: usize },
    #[error("cannot parse token {token:?} as a generator")]
    BadToken { token: String },
    #[error("a braid needs at least one strand")]
    NoStrands,
    #[error("closure has {components} components, a knot is required")]
    NotAKnot { components: usize },
    #[error("word has {len} letters after reduction, state sum limited to {max}")]
    TooLong { len: usize, max: usize },
}

/// One Artin generator `σ_index^sign`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub sign: i8,
}

impl Letter {
    pub fn new(index: usize, sign: i8) -> Self {
        debug_assert!(index >= 1 && (sign == 1 || sign == -1));
        Self { index, sign }
    }

    pub fn signed(self) -> i64 {
        self.index as i64 * self.sign as i64
    }

    pub fn inverse(self) -> Self {
        Self {
            index: self.index,
            sign: -self.sign,
        }
    }
}

/// A word in the Artin generators of the braid group on `strands` strands.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BraidRepr", into = "BraidRepr")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<Letter>,
}

#[derive(Serialize, Deserialize)]
struct BraidRepr {
    strands: usize,
    word: String,
}

impl TryFrom<BraidRepr> for BraidWord {
    type Error = BraidError;
    fn try_from(r: BraidRepr) -> Result<Self, BraidError> {
        parse_braid_word(&r.word, r.strands)
    }
}

impl From<BraidWord> for BraidRepr {
    fn from(b: BraidWord) -> Self {
        BraidRepr {
            strands: b.strands,
            word: b.to_string(),
        }
    }
}

/// Parse whitespace separated signed generator indices, e.g. `"1 -2 1 -2"`.
pub fn parse_braid_word(text: &str, strands: usize) -> Result<BraidWord, BraidError> {
    if strands == 0 {
        return Err(BraidError::NoStrands);
    }
    let mut letters = Vec::new();
    for (position, tok) in text.split_whitespace().enumerate() {
        let value: i64 = tok.parse().map_err(|_| BraidError::BadToken {
            token: tok.to_string(),
        })?;
        if value == 0 {
            return Err(BraidError::ZeroLetter { position });
        }
        if value.unsigned_abs() as usize > strands - 1 {
            return Err(BraidError::IndexOutOfRange { value, strands });
        }
        letters.push(Letter::new(
            value.unsigned_abs() as usize,
            value.signum() as i8,
        ));
    }
    Ok(BraidWord { strands, letters })
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Result<Self, BraidError> {
        if strands == 0 {
            return Err(BraidError::NoStrands);
        }
        for l in &letters {
            if l.index == 0 || l.index >= strands {
                return Err(BraidError::IndexOutOfRange {
                    value: l.signed(),
                    strands,
                });
            }
        }
        Ok(Self { strands, letters })
    }

    /// Build from signed indices; panics on invalid input (for literals in tests and presets).
    pub fn from_signed(strands: usize, word: &[i64]) -> Self {
        let letters = word
            .iter()
            .map(|&v| Letter::new(v.unsigned_abs() as usize, v.signum() as i8))
            .collect();
        Self::new(strands, letters).expect("invalid braid literal")
    }

    pub fn trivial(strands: usize) -> Self {
        Self {
            strands,
            letters: Vec::new(),
        }
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn signed(&self) -> Vec<i64> {
        self.letters.iter().map(|l| l.signed()).collect()
    }

    /// Sum of the crossing signs.
    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|l| l.sign as i64).sum()
    }

    pub fn components(&self) -> usize {
        closure_permutation(self).cycles().len()
    }

    pub fn is_knot(&self) -> bool {
        self.components() == 1
    }
}

/// Add a strand on the left: every index goes up by one.
pub fn shift_braid(b: &BraidWord) -> BraidWord {
    BraidWord {
        strands: b.strands + 1,
        letters: b
            .letters
            .iter()
            .map(|l| Letter::new(l.index + 1, l.sign))
            .collect(),
    }
}

/// Reverse every crossing.
pub fn mirror(b: &BraidWord) -> BraidWord {
    BraidWord {
        strands: b.strands,
        letters: b.letters.iter().map(|l| l.inverse()).collect(),
    }
}

/// Permutation of strand positions induced by the word, read bottom to top.
pub fn closure_permutation(b: &BraidWord) -> Permutation {
    // pos[k] is the current position of the strand that started at k.
    let mut pos: Vec<usize> = (0..b.strands).collect();
    for l in &b.letters {
        let i = l.index - 1;
        for p in pos.iter_mut() {
            if *p == i {
                *p = i + 1;
            } else if *p == i + 1 {
                *p = i;
            }
        }
    }
    Permutation { image: pos }
}

/// Remove a set of strands (given by their starting positions) from the word.
///
/// Letters where a removed strand takes part are dropped; the rest are
/// re-indexed. The removed strands should form whole cycles of the closure
/// permutation, otherwise the result is not a closed braid of the remainder.
pub fn delete_strands(b: &BraidWord, remove: &[usize]) -> BraidWord {
    // at[p] = starting label of the strand currently at position p
    let mut at: Vec<usize> = (0..b.strands).collect();
    let gone = |label: usize| remove.contains(&label);
    let mut letters = Vec::new();
    for l in &b.letters {
        let i = l.index - 1;
        let (x, y) = (at[i], at[i + 1]);
        if !gone(x) && !gone(y) {
            let kept_below = at[..i].iter().filter(|&&s| !gone(s)).count();
            letters.push(Letter::new(kept_below + 1, l.sign));
        }
        at.swap(i, i + 1);
    }
    let strands = (0..b.strands).filter(|&s| !gone(s)).count().max(1);
    BraidWord { strands, letters }
}

/// Free reduction (including past far-commuting letters), cyclic reduction
/// and Markov destabilisation of outer strands touched by a single letter.
/// The closure's link type is preserved.
pub fn simplify(b: &BraidWord) -> BraidWord {
    let mut w = b.clone();
    loop {
        let before = (w.strands, w.letters.len());
        w.letters = free_reduce(&w.letters);
        w.letters = cyclic_reduce(w.letters);
        w = destabilise(w);
        if (w.strands, w.letters.len()) == before {
            return w;
        }
    }
}

fn free_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    'next: for &l in letters {
        // look back through letters that commute with l for an inverse
        for k in (0..out.len()).rev() {
            let o = out[k];
            if o.index == l.index {
                if o.sign == -l.sign {
                    out.remove(k);
                    continue 'next;
                }
                break;
            }
            if o.index.abs_diff(l.index) < 2 {
                break;
            }
        }
        out.push(l);
    }
    out
}

fn cyclic_reduce(mut letters: Vec<Letter>) -> Vec<Letter> {
    // rotate so that a cancelling pair across the seam becomes adjacent
    let n = letters.len();
    for _ in 0..n {
        if letters.len() < 2 {
            break;
        }
        let last = letters.pop().unwrap();
        letters.insert(0, last);
        let reduced = free_reduce(&letters);
        if reduced.len() < letters.len() {
            return cyclic_reduce(reduced);
        }
    }
    letters
}

fn destabilise(w: BraidWord) -> BraidWord {
    if w.strands < 2 {
        return w;
    }
    let top = w.strands - 1;
    let count = |j: usize| w.letters.iter().filter(|l| l.index == j).count();
    if count(top) == 1 {
        let letters = w
            .letters
            .iter()
            .copied()
            .filter(|l| l.index != top)
            .collect();
        return BraidWord {
            strands: w.strands - 1,
            letters,
        };
    }
    if count(1) == 1 {
        let letters = w
            .letters
            .iter()
            .filter(|l| l.index != 1)
            .map(|l| Letter::new(l.index - 1, l.sign))
            .collect();
        return BraidWord {
            strands: w.strands - 1,
            letters,
        };
    }
    w
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| l.signed().to_string())
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BraidWord(s={}, [{}])", self.strands, self)
    }
}

/// A permutation of `0..s` stored by images; displayed 1-based.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// Build from 0-based images; `None` unless a bijection.
    pub fn from_images(image: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return None;
            }
        }
        Some(Self { image })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.image
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Disjoint cycles including fixed points, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.image.len()];
        let mut out = Vec::new();
        for start in 0..self.image.len() {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.image[i];
            }
            out.push(cyc);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nontrivial: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return write!(f, "()");
        }
        for c in nontrivial {
            let s: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        let t = parse_braid_word("1 1 1", 2).unwrap();
        assert_eq!(t.signed(), vec![1, 1, 1]);
        assert!(parse_braid_word("", 4).unwrap().is_empty());
        let b = parse_braid_word("1 1 1 2 -1 2 3 -2 3", 4).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.letters()[4], Letter::new(1, -1));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse_braid_word("1 0", 3),
            Err(BraidError::ZeroLetter { position: 1 })
        );
        assert!(matches!(
            parse_braid_word("3", 3),
            Err(BraidError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            parse_braid_word("1 x", 3),
            Err(BraidError::BadToken { .. })
        ));
        assert!(matches!(
            parse_braid_word("1.5", 3),
            Err(BraidError::BadToken { .. })
        ));
    }

    #[test]
    fn shift_examples() {
        let b = parse_braid_word("1 1 1 2 -1 2 3 -2 3", 4).unwrap();
        let s = shift_braid(&b);
        assert_eq!(s.strands(), 5);
        assert_eq!(s.to_string(), "2 2 2 3 -2 3 4 -3 4");
        assert_eq!(shift_braid(&BraidWord::trivial(3)), BraidWord::trivial(4));
    }

    #[test]
    fn closure_examples() {
        let p = closure_permutation(&BraidWord::from_signed(2, &[1, 1, 1]));
        assert_eq!(p.images(), &[1, 0]);
        assert_eq!(p.cycles().len(), 1);
        assert_eq!(
            closure_permutation(&BraidWord::trivial(3)).cycles().len(),
            3
        );
        let fig8 = BraidWord::from_signed(3, &[1, -2, 1, -2]);
        assert_eq!(closure_permutation(&fig8).cycles(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn mirror_examples() {
        let b = BraidWord::from_signed(3, &[1, -2]);
        assert_eq!(mirror(&b).signed(), vec![-1, 2]);
        assert_eq!(mirror(&BraidWord::trivial(2)), BraidWord::trivial(2));
    }

    #[test]
    fn delete_unknot_strand_of_shifted_braid() {
        let b = BraidWord::from_signed(3, &[1, 1, 1, 2, -1, 2]);
        let s = shift_braid(&b);
        assert_eq!(delete_strands(&s, &[0]), b);
    }

    #[test]
    fn simplify_removes_inverse_pairs() {
        let w = BraidWord::from_signed(3, &[1, 2, -2, 1, 1]);
        assert_eq!(simplify(&w).signed(), vec![1, 1, 1]);
        // across a far-commuting letter and around the seam
        let w = BraidWord::from_signed(4, &[-1, 1, 3, 1, 1, -3, 2, 2, -2]);
        assert_eq!(simplify(&w).signed(), vec![1, 1, 2]);
        let w = BraidWord::from_signed(3, &[1, -1, 2, 1, 1, 1, -2]);
        assert_eq!(simplify(&w).signed(), vec![1, 1, 1]);
        // destabilise: σ1³σ2 on three strands is the trefoil on two
        let w = BraidWord::from_signed(3, &[1, 1, 1, 2]);
        assert_eq!(simplify(&w), BraidWord::from_signed(2, &[1, 1, 1]));
    }

    #[test]
    fn serde_round_trip() {
        let b = BraidWord::from_signed(3, &[1, -2, 1, -2]);
        let js = serde_json::to_string(&b).unwrap();
        assert_eq!(js, r#"{"strands":3,"word":"1 -2 1 -2"}"#);
        let back: BraidWord = serde_json::from_str(&js).unwrap();
        assert_eq!(back, b);
    }
}
