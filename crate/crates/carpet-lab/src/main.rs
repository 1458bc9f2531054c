//! Command-line front end for certified carpet analysis.
//!
//! Subcommands drive the library crate: `check` certifies structural
//! conditions, `render` draws construction rectangles, `slice` verifies
//! slice regularity, `tangent` verifies windowed split models, `dim`
//! runs the dimension estimators, `scales` verifies the scale-index
//! sandwich. Every command is deterministic: identical input and flags
//! produce byte-identical outputs.
//!
//! Exit codes: 0 all asserted bounds hold, 1 an asserted bound failed,
//! 2 unreadable or invalid input (also unsatisfiable requests), 3 a
//! work budget was exceeded. `CARPET_LAB_BUDGET` caps the number of
//! construction rectangles `render` may enumerate (default 500000).

mod output;
mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use carpet_core::conditions::{
    check_h1, check_h2, check_h2_double_prime, check_h2_prime, horizontal_projection, CheckResult,
    Verdict,
};
use carpet_core::dimension::{
    assouad_estimate, microset_dimension_gap, microset_search, minkowski_estimate, estimates_csv,
};
use carpet_core::ifs::{CarpetSpec, SscStatus};
use carpet_core::input::parse_carpet_json;
use carpet_core::interval::RatIntervalUnion;
use carpet_core::rat::{rat, to_f64, Rat};
use carpet_core::regularity::{
    exact_projection, regularity_csv, verify_slice_regularity, SampleGrid,
};
use carpet_core::scales::{scale_reports_csv, verify_littlethings};
use carpet_core::tangents::{analyze_endings, verify_epspatterns};
use carpet_core::word::{PeriodicWord, Word};
use carpet_core::Error as CoreError;

const DEFAULT_RENDER_BUDGET: u64 = 500_000;
/// Level pairs scanned by the two-scale estimator: a diagonal of short
/// gaps plus three long-gap anchors.
const ASSOUAD_PAIRS: [(u32, u32); 8] =
    [(3, 5), (4, 6), (5, 7), (6, 8), (7, 9), (3, 9), (5, 9), (3, 7)];

#[derive(Parser)]
#[command(
    name = "carpet-lab",
    about = "Certified structure, geometry, and dimension reports for self-affine carpets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify structural conditions and report the projection cover
    Check(CheckArgs),
    /// Draw construction rectangles with optional overlays as SVG
    Render(RenderArgs),
    /// Verify porosity and perfectness bounds on vertical slices
    Slice(SliceArgs),
    /// Verify the split model on rescaled tangent windows
    Tangent(TangentArgs),
    /// Box-counting and two-scale dimension estimates
    Dim(DimArgs),
    /// Verify the scale-index sandwich and height bounds
    Scales(ScalesArgs),
}

#[derive(Args)]
struct InputArgs {
    /// IFS spec as JSON ({"maps": [{a1, a2, b1, b2}, ...]})
    #[arg(long, value_name = "FILE", conflicts_with = "preset")]
    input: Option<PathBuf>,
    /// Built-in spec: two-column, wide-gap, wide-gap-printed,
    /// cantor-product, segment, or square
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for conditions.txt, witnesses.csv, projection.json
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Depth of the projection outer cover
    #[arg(long, default_value_t = 4)]
    depth: usize,
    /// Conditions that must hold for exit code 0
    #[arg(long, value_delimiter = ',', default_value = "ssc,h1,h2,h2p,h2pp")]
    require: Vec<String>,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for carpet.svg
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Deepest construction level to draw (0 draws the hull alone)
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Overlay vertical ending lines
    #[arg(long)]
    endings: bool,
    /// Level whose ending lines to draw (defaults to the render depth)
    #[arg(long, value_name = "K")]
    ending_level: Option<usize>,
    /// Overlay the projection bar with certified gaps
    #[arg(long)]
    projection: bool,
}

#[derive(Args)]
struct SliceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for regularity.csv
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Slice cover depth
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Number of abscissae, spread through the projection by length
    #[arg(long, default_value_t = 20)]
    slices: usize,
}

#[derive(Args)]
struct TangentArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for tangent.json
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Ending level K of the split model
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Number of windows from the deterministic word schedule
    #[arg(long, default_value_t = 10)]
    windows: usize,
    /// Cylinder-avoidance certification depth
    #[arg(long, default_value_t = 12)]
    cert_depth: usize,
    /// Window scale as an exact fraction, e.g. 1/500000
    #[arg(long, default_value = "1/500000")]
    scale: String,
}

#[derive(Args)]
struct DimArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for estimates.csv and microset.json
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Coarsest dyadic level of the slope fit
    #[arg(long, default_value_t = 3)]
    lo: u32,
    /// Finest dyadic level of the slope fit
    #[arg(long, default_value_t = 9)]
    hi: u32,
    /// Allowed excess of the upper box slope over the two-scale value
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    /// Also run the deepened window search for a localized exponent
    #[arg(long)]
    microset: bool,
    /// Allowed gap of the two-scale value over the microset slope
    #[arg(long, default_value_t = 0.1)]
    gap_tol: f64,
}

#[derive(Args)]
struct ScalesArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Directory for scales.csv
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of (word, scale) samples
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Cylinder-avoidance certification depth
    #[arg(long, default_value_t = 6)]
    cert_depth: usize,
    /// Coarse end of the scale window, as the exponent of alpha_bar
    #[arg(long, default_value_t = 3)]
    t_coarse: u32,
    /// Fine end of the scale window, as the exponent of alpha_bar
    #[arg(long, default_value_t = 8)]
    t_fine: u32,
}

enum CliError {
    Usage(String),
    Core(CoreError),
    Io(std::io::Error),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

fn exit_code_for(e: &CliError) -> u8 {
    match e {
        CliError::Core(CoreError::DepthBudgetExceeded { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Render(a) => cmd_render(a),
        Command::Slice(a) => cmd_slice(a),
        Command::Tangent(a) => cmd_tangent(a),
        Command::Dim(a) => cmd_dim(a),
        Command::Scales(a) => cmd_scales(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("carpet-lab: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn load_spec(input: &InputArgs) -> Result<CarpetSpec, CliError> {
    match (&input.input, &input.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read {}: {e}", path.display()))
            })?;
            Ok(parse_carpet_json(&text)?)
        }
        (None, Some(name)) => preset_spec(name),
        _ => Err(CliError::Usage(
            "exactly one of --input or --preset is required".into(),
        )),
    }
}

fn preset_spec(name: &str) -> Result<CarpetSpec, CliError> {
    let text = match name {
        "two-column" => include_str!("../presets/v1/two-column.json"),
        "wide-gap" => include_str!("../presets/v1/wide-gap.json"),
        "wide-gap-printed" => include_str!("../presets/v1/wide-gap-printed.json"),
        "cantor-product" => include_str!("../presets/v1/cantor-product.json"),
        "segment" => include_str!("../presets/v1/segment.json"),
        "square" => include_str!("../presets/v1/square.json"),
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset \"{other}\"; known presets: two-column, wide-gap, \
                 wide-gap-printed, cantor-product, segment, square"
            )))
        }
    };
    Ok(parse_carpet_json(text)?)
}

fn render_budget() -> u64 {
    std::env::var("CARPET_LAB_BUDGET")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_RENDER_BUDGET)
}

fn write_out(dir: &Option<PathBuf>, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(d) = dir {
        let path = d.join(name);
        output::write_atomic(&path, bytes)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Uncertified => "uncertified",
    }
}

fn union_json(u: &RatIntervalUnion) -> serde_json::Value {
    serde_json::Value::Array(
        u.intervals()
            .iter()
            .map(|(lo, hi)| serde_json::json!([lo.to_string(), hi.to_string()]))
            .collect(),
    )
}

fn cmd_check(args: CheckArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    let h1 = check_h1(&spec);
    let h2 = check_h2(&spec);
    let h2p = check_h2_prime(&spec, 2);
    let h2pp = check_h2_double_prime(&spec);
    let (outer, gaps) = horizontal_projection(&spec, args.depth.max(1));

    let ssc_holds = spec.ssc_certified();
    let ssc_detail = match spec.ssc() {
        SscStatus::Certified { depth, delta_lo } => {
            // delta_lo denominators can run to hundreds of digits; the
            // table shows a readable decimal, certificates keep the exact
            // value internally.
            format!("depth {depth}, gap >= {:.6}", to_f64(delta_lo))
        }
        SscStatus::Inconclusive { max_depth } => {
            format!("no separating depth up to {max_depth}")
        }
    };

    let named: [(&str, &CheckResult); 4] =
        [("h1", &h1), ("h2", &h2), ("h2p", &h2p), ("h2pp", &h2pp)];
    let mut rows = vec![vec![
        "ssc".to_string(),
        if ssc_holds { "holds" } else { "uncertified" }.to_string(),
        ssc_detail,
    ]];
    for (name, res) in &named {
        let detail = if res.witnesses.is_empty() {
            format!("depth {}", res.certification_depth)
        } else {
            format!(
                "depth {}, {} witness region(s)",
                res.certification_depth,
                res.witnesses.len()
            )
        };
        rows.push(vec![name.to_string(), verdict_str(res.verdict).to_string(), detail]);
    }
    let d = spec.delta_bounds();
    rows.push(vec![
        "delta".to_string(),
        "-".to_string(),
        format!("certified in [{:.6}, {:.6}]", to_f64(&d.lo), to_f64(&d.hi)),
    ]);

    let table = output::text_table(&["condition", "verdict", "detail"], &rows);
    print!("{table}");
    println!(
        "projection outer cover at depth {}: {} segment(s), {} certified gap(s)",
        args.depth.max(1),
        outer.intervals().len(),
        gaps.intervals().len()
    );

    let mut witness_csv = String::from("condition,x_lo,x_hi\n");
    for (name, res) in &named {
        for (lo, hi) in &res.witnesses {
            let _ = writeln!(witness_csv, "{name},{lo},{hi}");
        }
    }
    let projection = serde_json::json!({
        "depth": args.depth.max(1),
        "outer": union_json(&outer),
        "gaps": union_json(&gaps),
    });
    write_out(&args.out, "conditions.txt", table.as_bytes())?;
    write_out(&args.out, "witnesses.csv", witness_csv.as_bytes())?;
    write_out(
        &args.out,
        "projection.json",
        format!("{}\n", serde_json::to_string_pretty(&projection).expect("plain data")).as_bytes(),
    )?;

    let mut all = true;
    for req in &args.require {
        let ok = match req.as_str() {
            "ssc" => ssc_holds,
            "h1" => h1.holds(),
            "h2" => h2.holds(),
            "h2p" => h2p.holds(),
            "h2pp" => h2pp.holds(),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown condition \"{other}\"; known: ssc, h1, h2, h2p, h2pp"
                )))
            }
        };
        if !ok {
            println!("required condition {req} does not hold");
            all = false;
        }
    }
    Ok(all)
}

fn cmd_render(args: RenderArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    let k = spec.n_maps() as u64;
    let mut total: u64 = 0;
    let mut level_count: u64 = 1;
    for _ in 1..=args.depth {
        level_count = level_count.saturating_mul(k);
        total = total.saturating_add(level_count);
    }
    let budget = render_budget();
    if total.max(1) > budget {
        return Err(CoreError::DepthBudgetExceeded { needed: total, budget }.into());
    }

    let mut overlays = svg::Overlays::none();
    if args.endings {
        let level = args.ending_level.unwrap_or(args.depth.max(1));
        overlays.ending_lines = analyze_endings(&spec, level)?.ending_abscissae;
    }
    if args.projection {
        overlays.projection = Some(horizontal_projection(&spec, args.depth.max(1)));
    }
    let doc = svg::render(&spec, args.depth, &overlays)?;
    let path = args.out.join("carpet.svg");
    output::write_atomic(&path, doc.as_bytes())?;
    println!(
        "wrote {}: {} rectangle(s), depth {}",
        path.display(),
        total.max(1),
        args.depth
    );
    Ok(true)
}

/// Exact-rational analog of length-weighted center sampling: the i-th
/// abscissa sits at fraction (2i+1)/2n of the total covered length.
fn rat_centers(u: &RatIntervalUnion, n: usize) -> Vec<Rat> {
    let ivs = u.intervals();
    if ivs.is_empty() || n == 0 {
        return Vec::new();
    }
    let total: Rat = ivs.iter().map(|(lo, hi)| hi - lo).sum();
    if total == rat(0, 1) {
        return (0..n).map(|i| ivs[i % ivs.len()].0.clone()).collect();
    }
    (0..n)
        .map(|i| {
            let mut target = &total * rat(2 * i as i64 + 1, 2 * n as i64);
            for (lo, hi) in ivs {
                let len = hi - lo;
                if target <= len {
                    return lo + target;
                }
                target -= len;
            }
            ivs.last().expect("nonempty").1.clone()
        })
        .collect()
}

fn cmd_slice(args: SliceArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    let proj = exact_projection(&spec)?;
    let xs = rat_centers(&proj, args.slices);
    if xs.is_empty() {
        return Err(CliError::Usage("no slice abscissae to sample".into()));
    }
    let reports =
        verify_slice_regularity(&spec, &xs, args.depth, None, &SampleGrid::default())?;
    let passed = reports.iter().filter(|r| r.pass).count();
    for r in &reports {
        println!(
            "x = {:.6}: porosity {:.4} (bound {:.4}), perfectness {:.1} (bound {:.1}) -> {}",
            r.x,
            r.porosity_const,
            r.porosity_bound,
            r.perfectness_const,
            r.perfectness_bound,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    println!("slices: {passed}/{} pass at depth {}", reports.len(), args.depth);
    write_out(&args.out, "regularity.csv", regularity_csv(&reports).as_bytes())?;
    Ok(passed == reports.len())
}

/// Deterministic window schedule: the constant words first, then ordered
/// two-symbol cycles.
fn window_words(n_maps: usize, count: usize) -> Vec<PeriodicWord> {
    let mut out = Vec::with_capacity(count);
    for i in 1..=n_maps {
        if out.len() == count {
            return out;
        }
        out.push(PeriodicWord::new(Word::new([]), Word::new([i])));
    }
    for i in 1..=n_maps {
        for j in 1..=n_maps {
            if i != j {
                if out.len() == count {
                    return out;
                }
                out.push(PeriodicWord::new(Word::new([]), Word::new([i, j])));
            }
        }
    }
    out
}

fn parse_rat_arg(s: &str) -> Result<Rat, CliError> {
    let err = || CliError::Usage(format!("\"{s}\" is not a fraction of the form p/q"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = num.parse().map_err(|_| err())?;
    let d: i64 = den.parse().map_err(|_| err())?;
    if d == 0 {
        return Err(err());
    }
    Ok(rat(n, d))
}

fn cmd_tangent(args: TangentArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    let t = parse_rat_arg(&args.scale)?;
    if t <= rat(0, 1) || t >= rat(1, 1) {
        return Err(CliError::Usage("--scale must lie strictly between 0 and 1".into()));
    }
    let words = window_words(spec.n_maps(), args.windows);
    let mut reports = Vec::with_capacity(words.len());
    for w in &words {
        reports.push(verify_epspatterns(&spec, w, &t, args.k, args.cert_depth)?);
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    for r in &reports {
        println!(
            "center ({:.6}, {:.6}): residual {:.5} vs bound {:.5} + slack {:.5} -> {}",
            r.center.0,
            r.center.1,
            r.residual,
            r.bound,
            r.slack,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "tangent windows: {passed}/{} pass at K = {}, t = {}",
        reports.len(),
        args.k,
        t
    );
    let json = serde_json::to_string_pretty(&reports).expect("plain data");
    write_out(&args.out, "tangent.json", format!("{json}\n").as_bytes())?;
    Ok(passed == reports.len())
}

fn cmd_dim(args: DimArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    if args.lo >= args.hi {
        return Err(CliError::Usage("--lo must be below --hi".into()));
    }
    let mink = minkowski_estimate(&spec, args.lo..=args.hi)?;
    let assouad = assouad_estimate(&spec, &ASSOUAD_PAIRS)?;
    println!(
        "minkowski: value {:.4} (adjusted {:.4}), slope range [{:.4}, {:.4}], levels {}..{}",
        mink.value, mink.adjusted_value, mink.lower_slope, mink.upper_slope, args.lo, args.hi
    );
    println!("two-scale: value {:.4} over {} level pairs", assouad.value, ASSOUAD_PAIRS.len());

    let mut all = mink.lower_slope <= mink.upper_slope + 1e-12
        && mink.upper_slope <= assouad.value + args.tol;
    if !all {
        println!(
            "FAIL: slope ordering lower <= upper <= two-scale + {} violated",
            args.tol
        );
    }

    write_out(
        &args.out,
        "estimates.csv",
        estimates_csv(&[mink, assouad.clone()]).as_bytes(),
    )?;

    if args.microset {
        let gap = microset_dimension_gap(&spec, 3..=7, 6, 11, 24)?;
        let (descriptor, best) = microset_search(&spec, 7, 6)?;
        println!(
            "microset: slope {:.4}, localized two-scale {:.4}, gap {:.4}",
            gap.microset_slope, gap.assouad_value, gap.gap
        );
        if gap.gap > args.gap_tol {
            println!("FAIL: gap {:.4} above tolerance {}", gap.gap, args.gap_tol);
            all = false;
        }
        let doc = serde_json::json!({
            "descriptor": descriptor,
            "best_count": best,
            "gap_report": gap,
        });
        write_out(
            &args.out,
            "microset.json",
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("plain data")).as_bytes(),
        )?;
    }
    Ok(all)
}

fn rat_pow(r: &Rat, e: u32) -> Rat {
    let mut out = rat(1, 1);
    for _ in 0..e {
        out *= r;
    }
    out
}

fn cmd_scales(args: ScalesArgs) -> Result<bool, CliError> {
    let spec = load_spec(&args.input)?;
    if args.t_coarse >= args.t_fine {
        return Err(CliError::Usage("--t-coarse must be below --t-fine".into()));
    }
    // Scale grid: eight mantissa steps per alpha_bar octave, covering
    // (alpha_bar^t_fine, alpha_bar^t_coarse] exactly.
    let mut ts = Vec::new();
    for e in args.t_coarse..args.t_fine {
        let base = rat_pow(spec.alpha_bar(), e);
        for m in 1..=8i64 {
            ts.push(&base * rat(8 + m, 16));
        }
    }
    ts.sort();
    ts.dedup();
    let words = window_words(spec.n_maps(), spec.n_maps());
    let samples: Vec<(PeriodicWord, Rat)> = (0..args.samples)
        .map(|s| {
            (
                words[s % words.len()].clone(),
                ts[(s / words.len()) % ts.len()].clone(),
            )
        })
        .collect();
    let reports = verify_littlethings(&spec, &samples, args.cert_depth)?;
    let passed = reports.iter().filter(|r| r.pass).count();
    let certified = reports
        .iter()
        .filter(|r| r.n_exact.certified_in_regime().is_some())
        .count();
    println!(
        "scales: {passed}/{} pass, {certified} certified in regime at depth {}",
        reports.len(),
        args.cert_depth
    );
    write_out(&args.out, "scales.csv", scale_reports_csv(&reports).as_bytes())?;
    Ok(passed == reports.len())
}
