use knotbeam::construct::{
    aberth, concatenate_loops, fourier_approximate, horner, track_roots, winding_sequence,
    BasePolynomial, DEFAULT_SAMPLES,
};
use knotbeam::pipeline::{loop_stage, Construction, Inputs, PresetBook};
use num_complex::Complex64;
use proptest::prelude::*;

const BOTH: [Construction; 2] = [Construction::Gaussian, Construction::Polybeam];

#[test]
fn winding_reproduces_every_word_up_to_four_strands() {
    let book = PresetBook::builtin();
    for k in book.knots().into_iter().filter(|k| k.strands() <= 4) {
        for c in BOTH {
            let inputs = Inputs::from_preset(k, c);
            let stage = loop_stage(&book, &inputs).unwrap();
            let w = winding_sequence(&stage.polynomial, &stage.trig, stage.word.len()).unwrap();
            assert_eq!(w.word.as_ref(), Some(&stage.word), "{} {c}", k.name);
        }
    }
}

#[test]
fn tracked_roots_avoid_critical_points_and_ignore_step_size() {
    let book = PresetBook::builtin();
    for name in ["3_1", "4_1", "5_2", "8_19"] {
        for c in BOTH {
            let inputs = Inputs::from_preset(book.knot(name).unwrap(), c);
            let stage = loop_stage(&book, &inputs).unwrap();
            let ell = stage.word.len();
            let coarse = track_roots(&stage.polynomial, &stage.trig, 64 * ell, ell).unwrap();
            let fine = track_roots(&stage.polynomial, &stage.trig, 128 * ell, ell).unwrap();
            assert!(
                coarse.min_critical_distance > 1e-6,
                "{name} {c}: {}",
                coarse.min_critical_distance
            );
            assert_eq!(coarse.word, fine.word);
            for (a, b) in coarse.strands.iter().zip(&fine.strands) {
                for (k, z) in a.iter().enumerate() {
                    assert!((z - b[2 * k]).norm() <= 1e-8, "{name} {c}: sample {k}");
                }
            }
        }
    }
}

#[test]
fn preset_loops_wind_once_around_their_critical_value() {
    let book = PresetBook::builtin();
    for lp in book.loop_presets() {
        let p = lp.polynomial().unwrap();
        for l in &lp.loops {
            l.check_against(&p)
                .unwrap_or_else(|e| panic!("{} loop {}: {e}", lp.id(), l.index));
        }
    }
}

#[test]
fn higher_order_fourier_keeps_low_coefficients() {
    let book = PresetBook::builtin();
    let k = book.knot("5_2").unwrap();
    let lp = book.loops(Construction::Gaussian, 3).unwrap();
    let gamma = concatenate_loops(&k.word, &lp.loops).unwrap();
    let low = fourier_approximate(&gamma, 12, DEFAULT_SAMPLES).unwrap();
    for m in [13, 20, 40] {
        let high = fourier_approximate(&gamma, m, DEFAULT_SAMPLES).unwrap();
        for q in -12..=12 {
            assert!(
                (low.coeff(q) - high.coeff(q)).norm() <= 1e-10,
                "m = {m}, q = {q}"
            );
        }
    }
}

proptest! {
    #[test]
    fn aberth_recovers_real_roots(mut roots in prop::collection::vec(-3.0f64..3.0, 1..6)) {
        roots.push(0.0);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.05));
        let p = BasePolynomial::new(&roots);
        prop_assume!(p.is_ok());
        let p = p.unwrap();
        let coeffs: Vec<Complex64> = p.coeffs().iter().map(|&c| c.into()).collect();
        let mut found = aberth(&coeffs, None).unwrap();
        found.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (z, &r) in found.iter().zip(&roots) {
            prop_assert!((z - r).norm() < 1e-8);
        }
        // critical points are roots of p' between consecutive roots
        for (j, &c) in p.critical_points().iter().enumerate() {
            prop_assert!(roots[j] < c && c < roots[j + 1]);
            let (_, d) = horner(p.coeffs(), c.into());
            prop_assert!(d.norm() <= 1e-9 * (1.0 + p.coeffs().iter().map(|x| x.abs()).sum::<f64>()));
        }
    }
}
