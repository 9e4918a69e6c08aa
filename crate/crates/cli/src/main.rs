use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use knotbeam::braid::parse_braid_word;
use knotbeam::construct::{track_roots, winding_sequence};
use knotbeam::field::CoefficientField;
use knotbeam::pipeline::{
    coefficient_stage, format_word, loop_stage, make_field, phase_slice, run_pipeline,
    Construction, Inputs, Plane, PresetBook, RunConfig,
};
use knotbeam::propagate::{assemble_polynomial_beam, ParaxialField};
use knotbeam::topo::{extract_braid, identify_knot, permutation_consistent, Verdict};
use knotbeam::trace::{
    curves_csv, curves_json, curves_obj, parse_curves_csv, select_component, trace_nodal_curves,
    NodalCurve, Window, DEFAULT_GRID, DEFAULT_SLICES,
};
use num_complex::Complex64;

#[derive(Parser)]
#[command(
    name = "knotbeam",
    version,
    about = "Knotted vortex lines in paraxial light beams"
)]
struct Cli {
    /// Extra preset file merged over the built-in table.
    #[arg(long, global = true)]
    presets: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List knot and loop presets.
    Presets {
        #[arg(long)]
        json: bool,
    },
    /// Base polynomial, trigonometric loop and braid diagnostics.
    Construct(#[command(flatten)] KnotArgs),
    /// Coefficient field on z = 0, optionally evaluated at a point.
    Propagate {
        #[command(flatten)]
        knot: KnotArgs,
        /// `R,phi,z` point to evaluate the propagated field at.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Trace nodal curves and write curves.csv, curves.obj, components.json.
    Trace {
        #[command(flatten)]
        knot: KnotArgs,
        #[command(flatten)]
        trace: TraceArgs,
    },
    /// Read the braid off a traced curve file and compare with the input knot.
    Verify {
        #[command(flatten)]
        knot: KnotArgs,
        #[arg(long)]
        curves: PathBuf,
    },
    /// Every stage end to end; exit status reflects the verdict.
    Pipeline {
        #[command(flatten)]
        knot: KnotArgs,
        #[command(flatten)]
        trace: TraceArgs,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Phase image of the field as a binary PPM.
    PhaseSlice {
        #[command(flatten)]
        knot: KnotArgs,
        /// Single polynomial beam `n:l` instead of a knot.
        #[arg(long, allow_hyphen_values = true)]
        mode: Option<String>,
        #[arg(long, value_enum, default_value_t = PlaneKind::Z0)]
        plane: PlaneKind,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        /// Half-width in x, y (z0) or radial extent (azimuthal); defaults to twice the core radius.
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long)]
        z_extent: Option<f64>,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// Darken pixels where |field| is small.
        #[arg(long)]
        brightness: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Convert a curves CSV to OBJ polylines or JSON component stats.
    Export {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Slice count when the file does not reach the last slice.
        #[arg(long)]
        slices: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlaneKind {
    Z0,
    Azimuthal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Json,
    Csv,
}

#[derive(Args, Clone, Default)]
struct KnotArgs {
    /// Knot name, e.g. 3_1.
    #[arg(value_name = "KNOT")]
    knot_pos: Option<String>,
    #[arg(value_name = "CONSTRUCTION")]
    construction_pos: Option<Construction>,
    #[arg(long)]
    knot: Option<String>,
    /// Signed generator indices, e.g. "1 -2 1 -2".
    #[arg(long, allow_hyphen_values = true)]
    braid: Option<String>,
    #[arg(long)]
    strands: Option<usize>,
    #[arg(long)]
    construction: Option<Construction>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    a_inv: Option<f64>,
    #[arg(long)]
    mu_inv: Option<f64>,
}

#[derive(Args, Clone)]
struct TraceArgs {
    #[arg(long, default_value_t = DEFAULT_SLICES)]
    slices: usize,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// `rmin:rmax:zmin:zmax`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_window(text: &str) -> Result<Window> {
    let v: Vec<f64> = text
        .split(':')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("window {text:?}"))?;
    let [r_min, r_max, z_min, z_max] = v[..] else {
        bail!("window needs four values rmin:rmax:zmin:zmax, got {text:?}");
    };
    if !(r_min >= 0.0 && r_max > r_min && z_max > z_min) {
        bail!("empty window {text:?}");
    }
    Ok(Window {
        r_min,
        r_max,
        z_min,
        z_max,
    })
}

impl KnotArgs {
    fn construction(&self) -> Construction {
        self.construction
            .or(self.construction_pos)
            .unwrap_or(Construction::Gaussian)
    }

    fn resolve(&self, book: &PresetBook) -> Result<Inputs> {
        let construction = self.construction();
        let name = self.knot.as_ref().or(self.knot_pos.as_ref());
        let mut inputs = match (name, &self.braid) {
            (Some(_), Some(_)) => bail!("give either a knot name or --braid, not both"),
            (Some(name), None) => Inputs::from_preset(book.knot(name)?, construction),
            (None, Some(text)) => {
                let strands = match self.strands {
                    Some(s) => s,
                    None => infer_strands(text)?,
                };
                let word = parse_braid_word(text, strands)?;
                let missing = |what: &str| anyhow!("--{what} is required with --braid");
                Inputs {
                    knot: None,
                    word,
                    construction,
                    m: self.m.ok_or_else(|| missing("m"))?,
                    a_inv: self.a_inv.ok_or_else(|| missing("a-inv"))?,
                    mu_inv: match construction {
                        Construction::Gaussian => self.mu_inv.ok_or_else(|| missing("mu-inv"))?,
                        Construction::Polybeam => self.mu_inv.unwrap_or(1.0),
                    },
                }
            }
            (None, None) => bail!("no knot given; use a preset name or --braid"),
        };
        if let Some(m) = self.m {
            inputs.m = m;
        }
        if let Some(a) = self.a_inv {
            inputs.a_inv = a;
        }
        if let Some(mu) = self.mu_inv {
            inputs.mu_inv = mu;
        }
        if inputs.m == 0 || !(inputs.a_inv >= 1.0) || !(inputs.mu_inv > 0.0) {
            bail!("need m > 0, a-inv >= 1 and mu-inv > 0");
        }
        Ok(inputs)
    }
}

fn infer_strands(text: &str) -> Result<usize> {
    let mut top = 0;
    for tok in text.split_whitespace() {
        let v: i64 = tok
            .parse()
            .with_context(|| format!("braid letter {tok:?}"))?;
        top = top.max(v.unsigned_abs() as usize);
    }
    Ok(top + 1)
}

fn load_book(path: Option<&Path>) -> Result<PresetBook> {
    let mut book = PresetBook::builtin();
    if let Some(p) = path {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        book.merge(&text)?;
    }
    Ok(book)
}

fn write_out(dir: &Path, name: &str, content: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn verdict_code(verdict: Verdict, expected: Verdict) -> ExitCode {
    match verdict {
        v if v == expected => ExitCode::SUCCESS,
        Verdict::Mismatch => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn field_for(
    book: &PresetBook,
    inputs: &Inputs,
) -> Result<(CoefficientField, Box<dyn ParaxialField>)> {
    let stage = loop_stage(book, inputs).map_err(|e| anyhow!("construct: {e}"))?;
    let coeffs = coefficient_stage(&stage, inputs.a_inv).map_err(|e| anyhow!("field: {e}"))?;
    let field = make_field(&coeffs, inputs).map_err(|e| anyhow!("propagate: {e}"))?;
    Ok((coeffs, field))
}

fn cmd_presets(book: &PresetBook, json: bool) -> Result<()> {
    if json {
        let loops: Vec<_> = book.loop_presets().collect();
        let v = serde_json::json!({ "knots": book.knots(), "loops": loops });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!(
        "{:<6} {:>2} {:<28} {:>3} {:>6} {:>6} {:>3} {:>6}  family",
        "knot", "s", "braid", "m1", "1/a1", "1/mu", "m2", "1/a2"
    );
    for k in book.knots() {
        let family = k.family.map(|f| format!("{f:?}")).unwrap_or_default();
        println!(
            "{:<6} {:>2} {:<28} {:>3} {:>6} {:>6} {:>3} {:>6}  {}",
            k.name,
            k.strands(),
            format_word(&k.word),
            k.m1,
            k.a1_inv,
            k.mu_inv,
            k.m2,
            k.a2_inv,
            family
        );
    }
    println!();
    for l in book.loop_presets() {
        println!(
            "loops {:<12} roots {:?} ({} loops)",
            l.id(),
            l.roots,
            l.loops.len()
        );
    }
    Ok(())
}

fn cmd_construct(book: &PresetBook, args: &KnotArgs) -> Result<()> {
    let inputs = args.resolve(book)?;
    let stage = loop_stage(book, &inputs).map_err(|e| anyhow!("construct: {e}"))?;
    let ell = stage.word.len();
    let winding = winding_sequence(&stage.polynomial, &stage.trig, ell)?;
    let tracked = track_roots(&stage.polynomial, &stage.trig, 64 * ell.max(1), ell);
    let coeffs: Vec<_> = stage
        .trig
        .iter()
        .map(|(q, c)| serde_json::json!([q, c.re, c.im]))
        .collect();
    let v = serde_json::json!({
        "word": format_word(&stage.word),
        "strands": stage.word.strands(),
        "roots": stage.polynomial.roots(),
        "critical_points": stage.polynomial.critical_points(),
        "critical_values": stage.polynomial.critical_values(),
        "fourier": coeffs,
        "winding_word": winding.word.as_ref().map(format_word),
        "winding_max_deviation": winding.max_deviation,
        "winding_max_endpoint_offset": winding.max_endpoint_offset,
        "tracked_word": tracked.as_ref().ok().map(|t| format_word(&t.word)),
        "tracking_error": tracked.as_ref().err().map(|e| e.to_string()),
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn cmd_propagate(book: &PresetBook, args: &KnotArgs, at: Option<&str>) -> Result<()> {
    let inputs = args.resolve(book)?;
    let (coeffs, field) = field_for(book, &inputs)?;
    match at {
        None => print!("{}", coeffs.to_table()),
        Some(text) => {
            let v: Vec<f64> = text
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<Result<_, _>>()?;
            let [r, phi, z] = v[..] else {
                bail!("--at needs R,phi,z")
            };
            let psi = field.eval(r, phi, z);
            println!("{:e} {:e}", psi.re, psi.im);
        }
    }
    Ok(())
}

fn cmd_trace(book: &PresetBook, args: &KnotArgs, t: &TraceArgs) -> Result<()> {
    let inputs = args.resolve(book)?;
    let (_, field) = field_for(book, &inputs)?;
    let window = match &t.window {
        Some(w) => parse_window(w)?,
        None => Window::around(inputs.core_radius()),
    };
    let word = inputs.construction_word();
    let result = trace_nodal_curves(field.as_ref(), t.slices, &window, t.grid, 8 * word.len())?;
    let curves: Vec<NodalCurve> = result.closed.iter().chain(&result.open).cloned().collect();
    eprintln!(
        "{} closed, {} open, {} ambiguous links, grid {}",
        result.closed.len(),
        result.open.len(),
        result.ambiguous_links,
        result.grid
    );
    let dir = t.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    write_out(&dir, "curves.csv", curves_csv(&curves).as_bytes())?;
    write_out(&dir, "curves.obj", curves_obj(&curves).as_bytes())?;
    write_out(
        &dir,
        "components.json",
        serde_json::to_string_pretty(&curves_json(&curves))?.as_bytes(),
    )?;
    println!("{}", serde_json::to_string_pretty(&curves_json(&curves))?);
    Ok(())
}

fn cmd_verify(book: &PresetBook, args: &KnotArgs, path: &Path) -> Result<ExitCode> {
    let inputs = args.resolve(book)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let curves = parse_curves_csv(&text, None)?;
    let curve = select_component(&curves, inputs.word.strands())?;
    let diagram = extract_braid(curve)?;
    let id = identify_knot(&diagram.word, &inputs.word)?;
    let expected = if id.amphichiral {
        Verdict::Match
    } else {
        inputs.expected_verdict()
    };
    let v = serde_json::json!({
        "identification": id,
        "permutation_consistent": permutation_consistent(&diagram),
        "expected_verdict": expected,
    });
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(verdict_code(id.verdict, expected))
}

fn cmd_pipeline(
    book: &PresetBook,
    args: &KnotArgs,
    t: &TraceArgs,
    cache_dir: Option<PathBuf>,
) -> Result<ExitCode> {
    let inputs = args.resolve(book)?;
    let cfg = RunConfig {
        slices: t.slices,
        grid: t.grid,
        window: t.window.as_deref().map(parse_window).transpose()?,
        out_dir: t.out_dir.clone(),
        cache_dir,
        ..RunConfig::new(inputs)
    };
    match run_pipeline(book, &cfg) {
        Ok(report) => {
            println!("{}", report.to_json());
            let verdict = report.verdict.expect("a finished run has a verdict");
            eprintln!("verdict: {verdict} (expected {})", report.expected_verdict);
            Ok(verdict_code(verdict, report.expected_verdict))
        }
        Err(e) => {
            println!("{}", e.report.to_json());
            if let Some(dir) = &cfg.out_dir {
                write_out(dir, "report.json", e.report.to_json().as_bytes())?;
            }
            Err(anyhow!("stage {} failed: {}", e.stage, e.message))
        }
    }
}

fn parse_mode(text: &str) -> Result<CoefficientField> {
    let (n, l) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("--mode needs n:l"))?;
    let mut c = CoefficientField::default();
    c.add(
        n.trim().parse()?,
        l.trim().parse()?,
        Complex64::new(1.0, 0.0),
    )?;
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn cmd_phase_slice(
    book: &PresetBook,
    args: &KnotArgs,
    mode: Option<&str>,
    plane: PlaneKind,
    phi: f64,
    extent: Option<f64>,
    z_extent: Option<f64>,
    resolution: usize,
    brightness: bool,
    output: &Path,
) -> Result<()> {
    if resolution == 0 {
        bail!("resolution must be positive");
    }
    let (field, core): (Box<dyn ParaxialField>, f64) = match mode {
        Some(m) => (Box::new(assemble_polynomial_beam(&parse_mode(m)?)), 1.0),
        None => {
            let inputs = args.resolve(book)?;
            (field_for(book, &inputs)?.1, inputs.core_radius())
        }
    };
    let extent = extent.unwrap_or(2.0 * core);
    let plane = match plane {
        PlaneKind::Z0 => Plane::Z0 { extent },
        PlaneKind::Azimuthal => Plane::Azimuthal {
            phi,
            extent,
            z_extent: z_extent.unwrap_or(extent / 2.0),
        },
    };
    let bytes = phase_slice(field.as_ref(), plane, resolution, resolution, brightness);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(output, bytes).with_context(|| format!("writing {}", output.display()))?;
    Ok(())
}

fn cmd_export(
    path: &Path,
    format: Format,
    output: Option<&Path>,
    slices: Option<usize>,
) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let curves = parse_curves_csv(&text, slices)?;
    let out = match format {
        Format::Obj => curves_obj(&curves),
        Format::Json => serde_json::to_string_pretty(&curves_json(&curves))? + "\n",
        Format::Csv => curves_csv(&curves),
    };
    match output {
        Some(p) => fs::write(p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let book = load_book(cli.presets.as_deref())?;
    match cli.command {
        Command::Presets { json } => cmd_presets(&book, json)?,
        Command::Construct(args) => cmd_construct(&book, &args)?,
        Command::Propagate { knot, at } => cmd_propagate(&book, &knot, at.as_deref())?,
        Command::Trace { knot, trace } => cmd_trace(&book, &knot, &trace)?,
        Command::Verify { knot, curves } => return cmd_verify(&book, &knot, &curves),
        Command::Pipeline {
            knot,
            trace,
            cache_dir,
        } => return cmd_pipeline(&book, &knot, &trace, cache_dir),
        Command::PhaseSlice {
            knot,
            mode,
            plane,
            phi,
            extent,
            z_extent,
            resolution,
            brightness,
            output,
        } => cmd_phase_slice(
            &book,
            &knot,
            mode.as_deref(),
            plane,
            phi,
            extent,
            z_extent,
            resolution,
            brightness,
            &output,
        )?,
        Command::Export {
            curves,
            format,
            output,
            slices,
        } => cmd_export(&curves, format, output.as_deref(), slices)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        let w = parse_window("0.1:6:-1:1").unwrap();
        assert_eq!((w.r_min, w.r_max, w.z_min, w.z_max), (0.1, 6.0, -1.0, 1.0));
        assert!(parse_window("1:2:3").is_err());
        assert!(parse_window("2:1:-1:1").is_err());
    }

    #[test]
    fn strands_from_word() {
        assert_eq!(infer_strands("1 -2 1 -2").unwrap(), 3);
        assert!(infer_strands("1 x").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            verdict_code(Verdict::Match, Verdict::Match),
            ExitCode::SUCCESS
        );
        assert_eq!(
            verdict_code(Verdict::Match, Verdict::MirrorMatch),
            ExitCode::from(2)
        );
        assert_eq!(
            verdict_code(Verdict::Mismatch, Verdict::Match),
            ExitCode::from(3)
        );
    }
}
