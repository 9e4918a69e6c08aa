//! Root continuation of `g_t` over one period and the braid it traces.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{aberth, BasePolynomial, ConstructError, TrigLoop};
use crate::braid::{BraidWord, Letter, Permutation};

/// Roots closer than this count as a collision.
pub const COLLISION_TOLERANCE: f64 = 1e-8;
const MAX_SUBDIVISION: u32 = 24;

/// Roots of `g_t` followed continuously over `t ∈ [0, 2π]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootBraid {
    /// Sample times, `2πk/steps` for `k = 0..=steps`.
    pub times: Vec<f64>,
    /// `strands[i][k]`: strand that starts at the i-th root (ascending) at time k.
    pub strands: Vec<Vec<Complex64>>,
    pub min_separation: f64,
    pub min_separation_time: f64,
    /// Smallest distance from any root to any critical point of `p`.
    pub min_critical_distance: f64,
    /// Start position to end position, both ranked by real part.
    pub permutation: Permutation,
    /// Crossings read off with strands ordered by real part.
    pub word: BraidWord,
}

fn coefficients(p: &BasePolynomial, trig: &TrigLoop, t: f64) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = p.coeffs().iter().map(|&a| Complex64::new(a, 0.0)).collect();
    c[0] -= trig.eval(t);
    c
}

fn min_pairwise(z: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            best = best.min((z[i] - z[j]).norm());
        }
    }
    best
}

/// Reorder `new` so that `new[i]` continues `old[i]`, greedily by distance.
fn match_nearest(old: &[Complex64], new: &[Complex64]) -> Vec<Complex64> {
    let n = old.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in old.iter().enumerate() {
        for (j, b) in new.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = vec![Complex64::new(f64::NAN, 0.0); n];
    let mut used_old = vec![false; n];
    let mut used_new = vec![false; n];
    for (_, i, j) in pairs {
        if !used_old[i] && !used_new[j] {
            out[i] = new[j];
            used_old[i] = true;
            used_new[j] = true;
        }
    }
    out
}

/// Left-to-right order of strand labels and the crossings between samples.
struct CrossingReader {
    order: Vec<usize>,
    letters: Vec<Letter>,
}

impl CrossingReader {
    fn new(roots: &[Complex64]) -> Self {
        let mut order: Vec<usize> = (0..roots.len()).collect();
        order.sort_by(|&a, &b| roots[a].re.partial_cmp(&roots[b].re).unwrap());
        Self {
            order,
            letters: Vec::new(),
        }
    }

    /// Swaps needed to go from the current order to the order at `new`.
    ///
    /// Ties in the real part keep the current order, so a pair sitting
    /// exactly on top of each other at a sample swaps one step later.
    fn plan(&self, old: &[Complex64], new: &[Complex64]) -> Vec<(f64, usize, usize)> {
        let mut target = self.order.clone();
        target.sort_by(|&a, &b| new[a].re.partial_cmp(&new[b].re).unwrap());
        let rank = |order: &[usize], s: usize| order.iter().position(|&x| x == s).unwrap();
        let mut events = Vec::new();
        for i in 0..self.order.len() {
            for j in i + 1..self.order.len() {
                let (a, b) = (self.order[i], self.order[j]);
                if rank(&target, a) > rank(&target, b) {
                    let before = old[b].re - old[a].re;
                    let after = new[b].re - new[a].re;
                    let lambda = if before - after > 0.0 {
                        (before / (before - after)).clamp(0.0, 1.0)
                    } else {
                        0.5
                    };
                    events.push((lambda, a, b));
                }
            }
        }
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        events
    }

    /// True when the planned swaps are adjacent in the current order and
    /// touch disjoint strands, so they commute and may share one step.
    fn unambiguous(&self, events: &[(f64, usize, usize)]) -> bool {
        if events.len() <= 1 {
            return true;
        }
        let mut used = vec![false; self.order.len()];
        for &(_, a, b) in events {
            let pa = self.order.iter().position(|&s| s == a).unwrap();
            if self.order.get(pa + 1) != Some(&b) || used[a] || used[b] {
                return false;
            }
            used[a] = true;
            used[b] = true;
        }
        true
    }

    fn apply(
        &mut self,
        old: &[Complex64],
        new: &[Complex64],
        t: f64,
    ) -> Result<(), ConstructError> {
        for (lambda, a, b) in self.plan(old, new) {
            let pa = self.order.iter().position(|&s| s == a).unwrap();
            if self.order.get(pa + 1) != Some(&b) {
                return Err(ConstructError::TriplePoint { t });
            }
            let im_a = old[a].im + lambda * (new[a].im - old[a].im);
            let im_b = old[b].im + lambda * (new[b].im - old[b].im);
            // a moves rightwards past b; positive when it passes below
            let sign = if im_a < im_b { 1 } else { -1 };
            self.letters.push(Letter::new(pa + 1, sign));
            self.order.swap(pa, pa + 1);
        }
        Ok(())
    }
}

struct Tracker<'a> {
    p: &'a BasePolynomial,
    trig: &'a TrigLoop,
    reader: CrossingReader,
    min_sep: f64,
    min_sep_t: f64,
}

impl Tracker<'_> {
    fn roots_at(&self, t: f64, seed: &[Complex64]) -> Result<Vec<Complex64>, ConstructError> {
        aberth(&coefficients(self.p, self.trig, t), Some(seed))
    }

    /// Continue from `(t0, z0)` to `t1`, halving the step while roots move
    /// more than a quarter of their current separation or the exchanges in
    /// one step cannot be ordered.
    fn advance(
        &mut self,
        t0: f64,
        z0: &[Complex64],
        t1: f64,
        depth: u32,
    ) -> Result<Vec<Complex64>, ConstructError> {
        let sep0 = min_pairwise(z0);
        let attempt = self.roots_at(t1, z0).map(|z| match_nearest(z0, &z));
        let (small_step, single_swap) = match &attempt {
            Ok(z1) => {
                let moved = z0
                    .iter()
                    .zip(z1)
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                (
                    moved <= 0.25 * sep0,
                    self.reader.unambiguous(&self.reader.plan(z0, z1)),
                )
            }
            Err(_) => (false, true),
        };
        if !(small_step && single_swap) {
            if depth >= MAX_SUBDIVISION {
                return Err(if small_step {
                    ConstructError::TriplePoint { t: t1 }
                } else {
                    ConstructError::RootCollision {
                        t: t1,
                        separation: sep0,
                    }
                });
            }
            let mid = 0.5 * (t0 + t1);
            let zm = self.advance(t0, z0, mid, depth + 1)?;
            return self.advance(mid, &zm, t1, depth + 1);
        }
        let z1 = attempt?;
        let sep1 = min_pairwise(&z1);
        if sep1 < self.min_sep {
            self.min_sep = sep1;
            self.min_sep_t = t1;
        }
        if sep1 < COLLISION_TOLERANCE {
            return Err(ConstructError::RootCollision {
                t: t1,
                separation: sep1,
            });
        }
        self.reader.apply(z0, &z1, t1)?;
        Ok(z1)
    }
}

/// Follow the roots of `g_t` over one period with `steps` uniform samples.
pub fn track_roots(
    p: &BasePolynomial,
    trig: &TrigLoop,
    steps: usize,
    word_len: usize,
) -> Result<RootBraid, ConstructError> {
    let min_steps = 64 * word_len.max(1);
    if steps < min_steps {
        return Err(ConstructError::TooFewSteps {
            steps,
            min: min_steps,
        });
    }
    let s = p.degree();
    let mut start = aberth(&coefficients(p, trig, 0.0), None)?;
    start.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());

    let mut tracker = Tracker {
        p,
        trig,
        reader: CrossingReader::new(&start),
        min_sep: min_pairwise(&start),
        min_sep_t: 0.0,
    };
    let mut times = vec![0.0];
    let mut strands: Vec<Vec<Complex64>> = start.iter().map(|&z| vec![z]).collect();
    let mut cur = start.clone();
    for k in 1..=steps {
        let t0 = TAU * (k - 1) as f64 / steps as f64;
        let t1 = TAU * k as f64 / steps as f64;
        cur = tracker.advance(t0, &cur, t1, 0)?;
        times.push(t1);
        for (i, z) in cur.iter().enumerate() {
            strands[i].push(*z);
        }
    }

    let crit = p.critical_points();
    let min_critical_distance = strands
        .iter()
        .flatten()
        .flat_map(|z| crit.iter().map(move |&c| (z - c).norm()))
        .fold(f64::INFINITY, f64::min);

    let order = &tracker.reader.order;
    let mut image = vec![0; s];
    for (pos, &label) in order.iter().enumerate() {
        image[label] = pos;
    }
    let permutation = Permutation::from_images(image).expect("order is a permutation");
    let word = BraidWord::new(s, tracker.reader.letters.clone()).expect("letters stay in range");

    Ok(RootBraid {
        times,
        strands,
        min_separation: tracker.min_sep,
        min_separation_time: tracker.min_sep_t,
        min_critical_distance,
        permutation,
        word,
    })
}
