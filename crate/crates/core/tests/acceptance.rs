//! Acceptance criteria, one test per criterion, each printing a single
//! `criterion N ... PASS|FAIL` line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use knotbeam::braid::delete_strands;
use knotbeam::construct::{
    concatenate_loops, fourier_approximate, track_roots, winding_sequence, BasePolynomial,
    DEFAULT_SAMPLES,
};
use knotbeam::field::{build_semiholomorphic, restrict_z0_cylindrical};
use knotbeam::pipeline::{
    loop_stage, run_pipeline, Construction, Inputs, PresetBook, RunConfig, RunReport,
};
use knotbeam::propagate::{p_beam, paraxial_residual, q_beam};
use knotbeam::topo::{identify_knot, Verdict};
use knotbeam::trace::{DEFAULT_GRID, DEFAULT_SLICES};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, title: &str, failures: &[String], start: Instant) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "criterion {n} {title}: {status} ({:.1}s)",
        start.elapsed().as_secs_f64()
    );
    for f in failures {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {n} failed: {failures:?}");
}

type RunKey = (String, Construction, usize, usize);

/// Pipeline runs shared between criteria.
fn run(knot: &str, c: Construction, slices: usize, grid: usize) -> Arc<Result<RunReport, String>> {
    static RUNS: OnceLock<Mutex<HashMap<RunKey, Arc<OnceLock<Arc<Result<RunReport, String>>>>>>> =
        OnceLock::new();
    let cell = RUNS
        .get_or_init(Default::default)
        .lock()
        .unwrap()
        .entry((knot.to_string(), c, slices, grid))
        .or_default()
        .clone();
    cell.get_or_init(|| {
        let book = PresetBook::builtin();
        let preset = book.knot(knot).expect("preset");
        let cfg = RunConfig {
            slices,
            grid,
            ..RunConfig::new(Inputs::from_preset(preset, c))
        };
        Arc::new(run_pipeline(&book, &cfg).map_err(|e| e.to_string()))
    })
    .clone()
}

fn verdict_of(r: &Result<RunReport, String>) -> Result<Verdict, String> {
    match r {
        Ok(rep) => rep.verdict.ok_or_else(|| "no verdict".to_string()),
        Err(e) => Err(e.clone()),
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

#[test]
fn criterion_1_beam_contracts() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let modes: Vec<(i32, i32)> = (0..=12)
        .flat_map(|n| (-n..=n).step_by(2).map(move |l| (n, l)))
        .collect();
    let (mut worst_p, mut worst_q, mut worst_s, mut worst_res) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(n, l) in &modes {
        for _ in 0..20 {
            let (r, phi): (f64, f64) = (rng.gen_range(0.0..2.5), rng.gen_range(-3.2..3.2));
            let w: f64 = rng.gen_range(0.3..3.0);
            let phase = Complex64::from_polar(1.0, l as f64 * phi);
            worst_p = worst_p.max(rel(p_beam(n, l, r, phi, 0.0).unwrap(), phase * r.powi(n)));
            let want = phase * (r / w).powi(n) * (-r * r / (2.0 * w * w)).exp();
            worst_q = worst_q.max(rel(q_beam(n, l, r, phi, 0.0, w).unwrap(), want));
        }
        // points away from the axis and from the vortex rings of the mode
        for _ in 0..4 {
            let (r, phi, z): (f64, f64, f64) = (
                rng.gen_range(0.5..2.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-1.0..1.0),
            );
            let p = paraxial_residual(
                |r, phi, z| p_beam(n, l, r, phi, z).unwrap(),
                r,
                phi,
                z,
                1e-3,
            )
            .unwrap();
            let q = paraxial_residual(
                |r, phi, z| q_beam(n, l, r, phi, z, 1.0).unwrap(),
                r,
                phi,
                z,
                1e-3,
            )
            .unwrap();
            worst_res = worst_res.max(p).max(q);
        }
    }
    for _ in 0..1000 {
        let &(n, l) = &modes[rng.gen_range(0..modes.len())];
        let (r, phi, z): (f64, f64, f64) = (
            rng.gen_range(0.0..4.0),
            rng.gen_range(-3.2..3.2),
            rng.gen_range(-3.0..3.0),
        );
        let w: f64 = rng.gen_range(0.3..3.0);
        let a = q_beam(n, l, r, phi, z, w).unwrap();
        let b = q_beam(n, l, r / w, phi, z / (w * w), 1.0).unwrap();
        worst_s = worst_s.max(rel(a, b));
    }
    for (name, worst, tol) in [
        ("P restriction", worst_p, 1e-12),
        ("Q restriction", worst_q, 1e-10),
        ("Q scaling", worst_s, 1e-9),
        ("paraxial residual", worst_res, 1e-6),
    ] {
        println!("    {name}: worst {worst:.2e} (tol {tol:.0e})");
        if !(worst <= tol) {
            fails.push(format!("{name}: {worst:.3e} > {tol:.0e}"));
        }
    }
    if start.elapsed().as_secs() >= 60 {
        fails.push(format!(
            "runtime {:.1}s over 1 min",
            start.elapsed().as_secs_f64()
        ));
    }
    report(1, "beam contracts", &fails, start);
}

#[test]
fn criterion_2_construction_oracle() {
    let start = Instant::now();
    let book = PresetBook::builtin();
    let knots = [
        "3_1", "4_1", "5_1", "5_2", "6_2", "6_3", "7_1", "7_3", "7_5", "8_2", "8_5", "8_7", "8_9",
        "8_10", "8_16", "8_17", "8_18", "8_19", "8_20", "8_21",
    ];
    let mut fails = Vec::new();
    for name in knots {
        let preset = book.knot(name).unwrap();
        for c in [Construction::Gaussian, Construction::Polybeam] {
            let inputs = Inputs::from_preset(preset, c);
            let stage = loop_stage(&book, &inputs).unwrap();
            let ell = stage.word.len();
            match winding_sequence(&stage.polynomial, &stage.trig, ell) {
                Ok(w) if w.word.as_ref() == Some(&stage.word) => {}
                Ok(w) => fails.push(format!("{name} {c}: winding word {:?}", w.word)),
                Err(e) => fails.push(format!("{name} {c}: winding {e}")),
            }
            match track_roots(&stage.polynomial, &stage.trig, 64 * ell, ell) {
                Ok(rb) => {
                    let word = match c {
                        Construction::Gaussian => rb.word.clone(),
                        Construction::Polybeam => {
                            if rb.permutation.apply(0) != 0 {
                                fails.push(format!(
                                    "{name} {c}: extra strand is not closed on itself"
                                ));
                            }
                            delete_strands(&rb.word, &[0])
                        }
                    };
                    match identify_knot(&word, &preset.word) {
                        Ok(id) if id.verdict == Verdict::Match => {}
                        Ok(id) => fails.push(format!(
                            "{name} {c}: tracked {} reads {}",
                            rb.word, id.verdict
                        )),
                        Err(e) => fails.push(format!("{name} {c}: {e}")),
                    }
                }
                Err(e) => fails.push(format!("{name} {c}: tracking {e}")),
            }
        }
    }
    if start.elapsed().as_secs() >= 300 {
        fails.push(format!(
            "runtime {:.1}s over 5 min",
            start.elapsed().as_secs_f64()
        ));
    }
    report(2, "construction oracle", &fails, start);
}

#[test]
fn criterion_3_reference_numbers() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let p = BasePolynomial::new(&[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
    let want_c = [-1.6443, -0.543912, 0.543912, 1.6443];
    // the reference v₄ = 3.63143 has the wrong sign; odd symmetry gives -3.63143
    let want_v = [3.63143, -1.4187, 1.4187, -3.63143];
    for (k, (&got, &want)) in p.critical_points().iter().zip(&want_c).enumerate() {
        if (got - want).abs() > 1e-4 {
            fails.push(format!("c_{} = {got} vs {want}", k + 1));
        }
    }
    for (k, (&got, &want)) in p.critical_values().iter().zip(&want_v).enumerate() {
        if (got - want).abs() > 1e-4 {
            fails.push(format!("v_{} = {got} vs {want}", k + 1));
        }
    }

    let book = PresetBook::builtin();
    let preset = book.knot("7_2").unwrap();
    let inputs = Inputs::from_preset(preset, Construction::Polybeam);
    let stage = loop_stage(&book, &inputs).unwrap();
    let gamma = concatenate_loops(&stage.word, &stage.preset.loops).unwrap();
    let raw = fourier_approximate(&gamma, inputs.m, DEFAULT_SAMPLES).unwrap();
    let d0 = Complex64::new(-0.624528, -0.171786);
    let d1 = -Complex64::new(0.385917, -0.0981406);
    let (got0, got1) = (stage.trig.coeff(0), stage.trig.coeff(1));
    println!(
        "    d_0 = {got0:.6} (before pinning {:.6}), reference {d0}",
        raw.coeff(0)
    );
    println!("    d_1 = {got1:.6}, reference {d1}");
    if (got0 - d0).norm() > 1e-3 {
        fails.push(format!(
            "d_0 = {got0:.6}, reference {d0}, off by {:.3e}",
            (got0 - d0).norm()
        ));
    }
    if (got1 - d1).norm() > 1e-3 {
        fails.push(format!(
            "d_1 = {got1:.6}, reference {d1}, off by {:.3e}",
            (got1 - d1).norm()
        ));
    }

    let f = build_semiholomorphic(&stage.polynomial, &stage.trig, 1.0 / inputs.a_inv).unwrap();
    let c00 = restrict_z0_cylindrical(&f).unwrap().get(0, 0) * 8f64.powi(5);
    let want = Complex64::new(-30239.4, -0.171786);
    println!("    8^5 c_00 = {c00:.6}, reference {want}");
    if (c00 - want).norm() > 5e-3 * want.norm() {
        fails.push(format!("8^5 c_00 = {c00:.4} vs {want}"));
    }
    report(3, "reference-number regressions", &fails, start);
}

fn end_to_end(n: u32, title: &str, c: Construction, knots: &[&str], want: Verdict, budget_s: f64) {
    let start = Instant::now();
    let mut fails = Vec::new();
    for &k in knots {
        let t = Instant::now();
        let r = run(k, c, DEFAULT_SLICES, DEFAULT_GRID);
        match &*r {
            Ok(rep) => {
                let trace = rep.diagnostics.trace.as_ref().unwrap();
                println!(
                    "    {k} {c}: {} in {:.1}s, {} closed / {} open, word {}",
                    rep.verdict.unwrap(),
                    rep.seconds,
                    trace.closed_curves,
                    trace.open_chains,
                    rep.identification.as_ref().unwrap().extracted_word
                );
                if trace.selected.is_none() {
                    fails.push(format!("{k}: no selected component"));
                }
                if rep.verdict != Some(want) {
                    fails.push(format!("{k}: verdict {:?}, want {want}", rep.verdict));
                }
                if rep.seconds > budget_s {
                    fails.push(format!("{k}: {:.0}s over budget", rep.seconds));
                }
            }
            Err(e) => fails.push(format!("{k}: {e} after {:.1}s", t.elapsed().as_secs_f64())),
        }
    }
    report(n, title, &fails, start);
}

#[test]
fn criterion_4_gaussian_pipeline() {
    end_to_end(
        4,
        "Gaussian pipeline",
        Construction::Gaussian,
        &["3_1", "4_1", "5_2"],
        Verdict::Match,
        900.0,
    );
}

#[test]
fn criterion_5_polybeam_pipeline() {
    end_to_end(
        5,
        "polynomial-beam pipeline",
        Construction::Polybeam,
        &["3_1", "5_2"],
        Verdict::MirrorMatch,
        1800.0,
    );
}

#[test]
fn criterion_6_mirror_pair() {
    let start = Instant::now();
    let mut fails = Vec::new();
    let g = run("3_1", Construction::Gaussian, DEFAULT_SLICES, DEFAULT_GRID);
    let p = run("3_1", Construction::Polybeam, DEFAULT_SLICES, DEFAULT_GRID);
    match (&*g, &*p) {
        (Ok(g), Ok(p)) => {
            let jg = &g.identification.as_ref().unwrap().extracted.jones;
            let jp = &p.identification.as_ref().unwrap().extracted.jones;
            println!("    Gaussian V = {jg}, polybeam V = {jp}");
            if *jg != jp.mirror() {
                fails.push(format!("{jg} is not the mirror of {jp}"));
            }
            if jg == jp {
                fails.push("the two constructions read the same chirality".into());
            }
        }
        (g, p) => fails.push(format!(
            "runs failed: {:?} / {:?}",
            g.as_ref().err(),
            p.as_ref().err()
        )),
    }
    report(6, "mirror-pair certificate", &fails, start);
}

#[test]
fn criterion_7_amphichirality() {
    let start = Instant::now();
    let mut fails = Vec::new();
    match &*run("4_1", Construction::Gaussian, DEFAULT_SLICES, DEFAULT_GRID) {
        Ok(rep) => {
            let j = &rep.identification.as_ref().unwrap().extracted.jones;
            println!("    4_1 extracted V = {j}");
            if *j != j.mirror() {
                fails.push(format!("{j} differs from its mirror"));
            }
        }
        Err(e) => fails.push(e.clone()),
    }
    report(7, "amphichirality", &fails, start);
}

#[test]
fn criterion_8_stability() {
    let start = Instant::now();
    let mut fails = Vec::new();
    for k in ["3_1", "4_1", "5_2"] {
        let base = verdict_of(&run(
            k,
            Construction::Gaussian,
            DEFAULT_SLICES,
            DEFAULT_GRID,
        ));
        for (slices, grid) in [
            (2 * DEFAULT_SLICES, DEFAULT_GRID),
            (DEFAULT_SLICES, 2 * DEFAULT_GRID),
        ] {
            let v = verdict_of(&run(k, Construction::Gaussian, slices, grid));
            println!("    {k}: slices {slices} grid {grid}: {v:?} (base {base:?})");
            if base.is_err() || v != base {
                fails.push(format!(
                    "{k} at {slices} slices, grid {grid}: {v:?} vs {base:?}"
                ));
            }
        }
    }
    report(8, "stability", &fails, start);
}
