use super::{closure_permutation, simplify, BraidError, BraidWord, LaurentPoly};

/// Upper bound on word length for the Kauffman state sum.
pub const JONES_MAX_LETTERS: usize = 16;

fn require_knot(b: &BraidWord) -> Result<(), BraidError> {
    let components = closure_permutation(b).cycles().len();
    if components != 1 {
        return Err(BraidError::NotAKnot { components });
    }
    Ok(())
}

type Matrix = Vec<Vec<LaurentPoly>>;

fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        LaurentPoly::one()
                    } else {
                        LaurentPoly::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Right-multiply `m` by the reduced Burau matrix of one letter, in place.
/// Only columns `i-1..=i+1` (0-based) are touched.
fn apply_burau(m: &mut Matrix, index: usize, sign: i8, size: usize) {
    let mono = |c: i64, e: i32| LaurentPoly::monomial(c, e);
    let t = |c: i64| mono(c, 1);
    let ti = |c: i64| mono(c, -1);
    let one = LaurentPoly::one;
    let zero = LaurentPoly::zero;
    let j = index - 1; // 0-based row/column of the generator

    // local block and the range of columns it occupies
    let (cols, block): (Vec<usize>, Matrix) = if size == 1 {
        (vec![0], vec![vec![if sign > 0 { t(-1) } else { ti(-1) }]])
    } else if j == 0 {
        let blk = if sign > 0 {
            vec![vec![t(-1), zero()], vec![one(), one()]]
        } else {
            vec![vec![ti(-1), zero()], vec![ti(1), one()]]
        };
        (vec![0, 1], blk)
    } else if j == size - 1 {
        // last generator σ_{s-1} acts on the final two columns
        let blk = if sign > 0 {
            vec![vec![one(), t(1)], vec![zero(), t(-1)]]
        } else {
            vec![vec![one(), one()], vec![zero(), ti(-1)]]
        };
        (vec![size - 2, size - 1], blk)
    } else {
        let blk = if sign > 0 {
            vec![
                vec![one(), t(1), zero()],
                vec![zero(), t(-1), zero()],
                vec![zero(), one(), one()],
            ]
        } else {
            vec![
                vec![one(), one(), zero()],
                vec![zero(), ti(-1), zero()],
                vec![zero(), ti(1), one()],
            ]
        };
        (vec![j - 1, j, j + 1], blk)
    };

    for row in m.iter_mut() {
        let old: Vec<LaurentPoly> = cols.iter().map(|&c| row[c].clone()).collect();
        for (b, &c) in cols.iter().enumerate() {
            let mut acc = LaurentPoly::zero();
            for (a, v) in old.iter().enumerate() {
                if !v.is_zero() && !block[a][b].is_zero() {
                    acc = &acc + &(v * &block[a][b]);
                }
            }
            row[c] = acc;
        }
    }
}

/// Fraction-free Gaussian elimination; every division is exact.
fn bareiss_det(mut a: Matrix) -> LaurentPoly {
    let n = a.len();
    if n == 0 {
        return LaurentPoly::one();
    }
    let mut sign = 1i64;
    let mut prev = LaurentPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return LaurentPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev).expect("Bareiss step is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -&d
    } else {
        d
    }
}

/// Shift to a symmetric exponent range and fix `Δ(1) = 1`.
fn normalise_alexander(p: &LaurentPoly) -> LaurentPoly {
    let (lo, hi) = (p.min_exp().unwrap(), p.max_exp().unwrap());
    let centred = p.shift(-(lo + hi) / 2);
    if centred.eval_at_one() < 0 {
        -&centred
    } else {
        centred
    }
}

/// Alexander polynomial of a knot closure from the reduced Burau matrix.
pub fn alexander_polynomial(b: &BraidWord) -> Result<LaurentPoly, BraidError> {
    require_knot(b)?;
    let s = b.strands();
    if s == 1 {
        return Ok(LaurentPoly::one());
    }
    let size = s - 1;
    let mut m = identity(size);
    for l in b.letters() {
        apply_burau(&mut m, l.index, l.sign, size);
    }
    let mut a = identity(size);
    for i in 0..size {
        for j in 0..size {
            a[i][j] = &a[i][j] - &m[i][j];
        }
    }
    let det = bareiss_det(a);
    let geometric = LaurentPoly::from_terms((0..s as i32).map(|e| (e, 1)));
    let delta = det
        .div_exact(&geometric)
        .expect("Burau determinant is divisible by 1 + t + ... + t^(s-1)");
    Ok(normalise_alexander(&delta))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
            true
        } else {
            false
        }
    }
}

/// Number of circles after smoothing each crossing; bit k of `state` set
/// means crossing k gets the horizontal (cup-cap) smoothing.
fn count_loops(word: &[(usize, i8)], strands: usize, state: u64) -> usize {
    let levels = word.len();
    // node (level, position); level `levels` is identified with level 0
    let node = |lvl: usize, p: usize| (lvl % levels) * strands + p;
    let total = levels * strands;
    let mut uf = UnionFind::new(total);
    let mut merges = 0;
    for (k, &(i, _)) in word.iter().enumerate() {
        let horizontal = state >> k & 1 == 1;
        for p in 0..strands {
            if p == i || p == i + 1 {
                continue;
            }
            merges += uf.union(node(k, p), node(k + 1, p)) as usize;
        }
        if horizontal {
            merges += uf.union(node(k, i), node(k, i + 1)) as usize;
            merges += uf.union(node(k + 1, i), node(k + 1, i + 1)) as usize;
        } else {
            merges += uf.union(node(k, i), node(k + 1, i)) as usize;
            merges += uf.union(node(k, i + 1), node(k + 1, i + 1)) as usize;
        }
    }
    total - merges
}

/// Jones polynomial of a knot closure via the Kauffman bracket state sum.
///
/// The word is simplified first (free and cyclic reduction, destabilisation);
/// the reduced word must have at most [`JONES_MAX_LETTERS`] letters.
pub fn jones_polynomial(b: &BraidWord) -> Result<LaurentPoly, BraidError> {
    require_knot(b)?;
    let w = simplify(b);
    if w.len() > JONES_MAX_LETTERS {
        return Err(BraidError::TooLong {
            len: w.len(),
            max: JONES_MAX_LETTERS,
        });
    }
    if w.is_empty() {
        return Ok(LaurentPoly::one());
    }
    let word: Vec<(usize, i8)> = w.letters().iter().map(|l| (l.index - 1, l.sign)).collect();
    let n = word.len();
    let s = w.strands();

    // d = -A^2 - A^-2, powers up to the largest possible loop count
    let d = LaurentPoly::from_terms([(2, -1), (-2, -1)]);
    let max_loops = n * s;
    let mut dpow = vec![LaurentPoly::one()];
    for k in 1..max_loops {
        let next = &dpow[k - 1] * &d;
        dpow.push(next);
    }

    // tally states by (A-exponent, loop count) before expanding
    let mut tally = std::collections::HashMap::<(i32, usize), i64>::new();
    for state in 0u64..(1u64 << n) {
        let mut a_exp = 0i32;
        for (k, &(_, sign)) in word.iter().enumerate() {
            let horizontal = state >> k & 1 == 1;
            // positive crossing: vertical is the A-smoothing
            let is_a = (sign > 0) != horizontal;
            a_exp += if is_a { 1 } else { -1 };
        }
        let loops = count_loops(&word, s, state);
        *tally.entry((a_exp, loops)).or_insert(0) += 1;
    }
    let mut bracket = LaurentPoly::zero();
    for ((a_exp, loops), count) in tally {
        let term = &LaurentPoly::monomial(count, a_exp) * &dpow[loops - 1];
        bracket = &bracket + &term;
    }

    // (-A^3)^(-w)
    let writhe = w.writhe() as i32;
    let sign = if writhe % 2 == 0 { 1 } else { -1 };
    let v_a = &LaurentPoly::monomial(sign, -3 * writhe) * &bracket;
    // A = t^(-1/4)
    let v = v_a
        .substitute_power(-1)
        .compress_exponents(4)
        .expect("knot Jones polynomial has integer exponents");
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braid::mirror;

    fn lp(terms: &[(i32, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().copied())
    }

    #[test]
    fn alexander_examples() {
        assert_eq!(
            alexander_polynomial(&BraidWord::trivial(1)).unwrap(),
            LaurentPoly::one()
        );
        let trefoil = BraidWord::from_signed(2, &[1, 1, 1]);
        assert_eq!(
            alexander_polynomial(&trefoil).unwrap(),
            lp(&[(1, 1), (0, -1), (-1, 1)])
        );
        let fig8 = BraidWord::from_signed(3, &[1, -2, 1, -2]);
        assert_eq!(
            alexander_polynomial(&fig8).unwrap(),
            lp(&[(1, -1), (0, 3), (-1, -1)])
        );
    }

    #[test]
    fn alexander_refuses_links() {
        let hopf = BraidWord::from_signed(2, &[1, 1]);
        assert_eq!(
            alexander_polynomial(&hopf),
            Err(BraidError::NotAKnot { components: 2 })
        );
        assert!(jones_polynomial(&BraidWord::trivial(3)).is_err());
    }

    #[test]
    fn jones_trefoil() {
        let trefoil = BraidWord::from_signed(2, &[1, 1, 1]);
        let v = jones_polynomial(&trefoil).unwrap();
        assert_eq!(v, lp(&[(1, 1), (3, 1), (4, -1)]));
        assert_eq!(jones_polynomial(&mirror(&trefoil)).unwrap(), v.mirror());
    }

    #[test]
    fn jones_unknot_and_figure_eight() {
        assert_eq!(
            jones_polynomial(&BraidWord::trivial(1)).unwrap(),
            LaurentPoly::one()
        );
        assert_eq!(
            jones_polynomial(&BraidWord::from_signed(3, &[1, 2])).unwrap(),
            LaurentPoly::one()
        );
        let fig8 = BraidWord::from_signed(3, &[1, -2, 1, -2]);
        let v = jones_polynomial(&fig8).unwrap();
        assert!(v.is_symmetric());
        assert_eq!(v, lp(&[(-2, 1), (-1, -1), (0, 1), (1, -1), (2, 1)]));
    }

    #[test]
    fn jones_refuses_long_words() {
        let b = BraidWord::from_signed(2, &[1; 17]);
        assert!(matches!(
            jones_polynomial(&b),
            Err(BraidError::TooLong { len: 17, .. })
        ));
    }

    #[test]
    fn cinquefoil_and_five_two() {
        // V(5_1) = t^2 + t^4 - t^5 + t^6 - t^7
        let b = BraidWord::from_signed(2, &[1; 5]);
        assert_eq!(
            jones_polynomial(&b).unwrap(),
            lp(&[(2, 1), (4, 1), (5, -1), (6, 1), (7, -1)])
        );
        assert_eq!(
            alexander_polynomial(&b).unwrap(),
            lp(&[(2, 1), (1, -1), (0, 1), (-1, -1), (-2, 1)])
        );
        // Δ(5_2) = 2t - 3 + 2t^-1
        let b = BraidWord::from_signed(3, &[1, 1, 1, 2, -1, 2]);
        assert_eq!(
            alexander_polynomial(&b).unwrap(),
            lp(&[(1, 2), (0, -3), (-1, 2)])
        );
    }
}
