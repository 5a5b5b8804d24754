//! `revlw`: compute, search and verify reverse Loomis–Whitney constants of
//! rational polytopes.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use revlw::heuristic::{heuristic_search, min_box, phi_lower_bound, BoxMode, HeuristicConfig};
use revlw::io::parse_polytope;
use revlw::lw2d::{lw_exact_2d, min_perimeter_rect_2d};
use revlw::oracles::{run_battery, zhang_entry, BatteryConfig, BoundsReport, Verdict};
use revlw::rational::{format_rational, parse_rational, to_f64, vec_to_f64, DEFAULT_SQRT_BITS};
use revlw::structured::{lw_approx, structured_search, SearchConfig, DEFAULT_BUDGET};
use revlw::zonotope::{projection_body, zhang_check};
use revlw::{Error, HPolytope, Rational};
use serde_json::{json, Value};

use output::{emit, Doc, Format, Manifest};

const EXIT_CHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "revlw", version, about = "Reverse Loomis–Whitney constants of rational polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value = "table", global = true)]
    out: Format,
    /// Include wall-clock timings in the manifest.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Args, Clone)]
struct Threads {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl Threads {
    fn get(&self) -> usize {
        self.threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchMode {
    Certified,
    Heuristic,
}

#[derive(Clone, Copy, ValueEnum)]
enum MinBoxMode {
    Body,
    Projection,
}

#[derive(Subcommand)]
enum Command {
    /// Volume, facet data, surface-area enclosure and isoperimetric bound.
    Info {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact LW-constant and minimal-perimeter rectangle of a polygon.
    Lw2d {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Certified structured search or multistart heuristic for the best frame.
    Search {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "certified")]
        mode: SearchMode,
        /// Additive tolerance for the certified search, in (0, 1].
        #[arg(long, value_parser = parse_rational)]
        tau: Option<Rational>,
        /// Relative accuracy in (0, 1); derives tau from nu.
        #[arg(long, value_parser = parse_rational, conflicts_with = "tau")]
        delta: Option<Rational>,
        /// Lower bound on vol^{n-1}/S^n used with --delta (default: computed).
        #[arg(long, value_parser = parse_rational, requires = "delta")]
        nu: Option<Rational>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        threads: Threads,
        /// Maximal projected evaluation count for the certified search.
        #[arg(long, env = "REVLW_BUDGET")]
        budget: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal enclosing box over orthonormal frames.
    Minbox {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "body")]
        mode: MinBoxMode,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        threads: Threads,
        #[command(flatten)]
        common: Common,
    },
    /// Generators of the projection body.
    Projbody {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the inequality and identity battery on one or more bodies.
    Bounds {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Monte Carlo samples for the Zhang entry (0 skips it).
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random frames for the LW upper bound.
        #[arg(long, default_value_t = 1000)]
        frames: usize,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[command(flatten)]
        threads: Threads,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo check of Zhang's inequality.
    Zhang {
        path: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        threads: Threads,
        #[command(flatten)]
        common: Common,
    },
}

/// A failure mapped to an exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

type Outcome = std::result::Result<u8, Failure>;

fn load(path: &Path) -> Result<HPolytope, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) })?;
    parse_polytope(&text).map_err(|e| Failure { code: EXIT_INPUT, message: format!("{}: {e}", path.display()) })
}

fn q(x: &Rational) -> Value {
    Value::String(format_rational(x))
}

fn qv(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(q).collect())
}

fn qm(m: &[Vec<Rational>]) -> Value {
    Value::Array(m.iter().map(|r| qv(r)).collect())
}

fn body_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn finish(doc: Doc, mut manifest: Manifest, common: &Common, start: Instant, code: u8) -> Outcome {
    if common.timings {
        manifest.wall_ms = Some(start.elapsed().as_millis());
    }
    emit(&doc, &manifest, common.out);
    Ok(code)
}

fn cmd_info(path: &Path, common: &Common) -> Outcome {
    let start = Instant::now();
    let p = load(path)?;
    let s = p.summary();
    let facets: Vec<Value> = p
        .normals()
        .iter()
        .zip(p.offsets())
        .zip(p.omegas())
        .map(|((a, b), w)| json!({"normal": qv(a), "offset": q(b), "omega": q(w)}))
        .collect();
    let doc = Doc::new(json!({
        "dimension": s.dimension,
        "facets": s.facets,
        "vertices": s.vertices,
        "volume": q(&s.volume),
        "surface": s.surface.approx,
        "surface_lower": q(&s.surface.enclosure.lo),
        "surface_upper": q(&s.surface.enclosure.hi),
        "iso_lower": q(&s.iso_lower),
        "facet_data": facets,
    }))
    .with_rows("facet_data", vec!["normal", "offset", "omega"]);
    let manifest = Manifest::new("info", vec![path.display().to_string()]);
    finish(doc, manifest, common, start, 0)
}

fn cmd_lw2d(path: &Path, common: &Common) -> Outcome {
    let start = Instant::now();
    let p = load(path)?;
    let lw = lw_exact_2d(&p)?;
    let per = min_perimeter_rect_2d(&p)?;
    let doc = Doc::new(json!({
        "lambda": q(&lw.lambda),
        "lambda_approx": to_f64(&lw.lambda),
        "min_area": q(&lw.min_area),
        "edge": lw.edge,
        "direction": qv(&lw.direction),
        "min_perimeter": {
            "direction": qv(&per.direction),
            "perimeter_sq": q(&per.perimeter_sq),
            "perimeter": per.perimeter,
        },
    }));
    let manifest = Manifest::new("lw2d", vec![path.display().to_string()]);
    finish(doc, manifest, common, start, 0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    path: &Path,
    mode: SearchMode,
    tau: Option<Rational>,
    delta: Option<Rational>,
    nu: Option<Rational>,
    restarts: usize,
    seed: u64,
    threads: usize,
    budget: Option<f64>,
    common: &Common,
) -> Outcome {
    let start = Instant::now();
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if let Some(t) = &tau {
        if *t <= zero || *t > one {
            return Err(usage(format!("--tau {} must lie in (0, 1]", format_rational(t))));
        }
    }
    if let Some(d) = &delta {
        if *d <= zero || *d >= one {
            return Err(usage(format!("--delta {} must lie in (0, 1)", format_rational(d))));
        }
    }
    if let Some(v) = &nu {
        if *v <= zero {
            return Err(usage(format!("--nu {} must be positive", format_rational(v))));
        }
    }
    if restarts == 0 {
        return Err(usage("--restarts must be positive".into()));
    }
    let p = load(path)?;
    let mut manifest = Manifest::new("search", vec![path.display().to_string()]);
    let body = match mode {
        SearchMode::Certified => {
            let budget = budget.unwrap_or(DEFAULT_BUDGET);
            if budget.is_nan() || budget <= 0.0 {
                return Err(usage("--budget must be positive".into()));
            }
            let cfg = SearchConfig { threads, budget };
            manifest.set("mode", "certified");
            manifest.set("budget", budget);
            let (r, extra) = if let Some(delta) = &delta {
                let nu = nu.clone().unwrap_or_else(|| p.iso_lower_bound(DEFAULT_SQRT_BITS));
                manifest.set("delta", format_rational(delta));
                manifest.set("nu", format_rational(&nu));
                let a = lw_approx(&p, delta, &nu, &cfg)?;
                for w in &a.warnings {
                    eprintln!("warning: {w}");
                }
                let extra = json!({
                    "delta": q(&a.delta),
                    "nu": q(&a.nu),
                    "iso_lower": q(&a.iso_lower),
                    "lambda_upper": q(&a.lambda_upper),
                    "warnings": a.warnings,
                });
                (a.search, extra)
            } else {
                let tau = tau.unwrap_or_else(|| Rational::new(1.into(), 10.into()));
                manifest.set("tau", format_rational(&tau));
                let scaled = p.scale_to_unit_surface();
                let r = structured_search(&scaled, &tau, &cfg)?;
                (r, json!({}))
            };
            let sigma = p.scale_to_unit_surface().sigma;
            let mut body = json!({
                "mode": "certified",
                "psi": q(&r.psi),
                "lambda_lower": q(&r.lambda_lower),
                "tau": q(&r.tau),
                "frame": qm(&r.frame),
                "r_choice": r.r_choice,
                "evaluations": r.stats.evaluations,
                "psi_approx": to_f64(&r.psi),
                "lambda_lower_approx": to_f64(&r.lambda_lower),
                "rho": q(&r.rho),
                "sigma": q(&sigma),
                "grids": r.stats.grids,
                "skipped": r.stats.skipped,
                "projected": r.projected,
            });
            if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
                b.extend(e);
            }
            body
        }
        SearchMode::Heuristic => {
            let cfg = HeuristicConfig { restarts, seed, threads, ..Default::default() };
            manifest.set("mode", "heuristic");
            manifest.set("restarts", restarts as u64);
            manifest.seeds.push(seed);
            let r = heuristic_search(&p, &cfg)?;
            json!({
                "mode": "heuristic",
                "psi": q(&r.psi_upper),
                "lambda_lower": q(&r.lambda_lower),
                "tau": Value::Null,
                "frame": qm(&r.rational_frame),
                "r_choice": Value::Array(Vec::new()),
                "evaluations": restarts,
                "psi_approx": r.psi,
                "lambda_approx": r.lambda,
                "real_frame": r.frame.rows(),
                "restart": r.restart,
            })
        }
    };
    finish(Doc::new(body), manifest, common, start, 0)
}

fn cmd_minbox(path: &Path, mode: MinBoxMode, restarts: usize, seed: u64, threads: usize, common: &Common) -> Outcome {
    let start = Instant::now();
    if restarts == 0 {
        return Err(usage("--restarts must be positive".into()));
    }
    let p = load(path)?;
    let box_mode = match mode {
        MinBoxMode::Body => BoxMode::Body,
        MinBoxMode::Projection => BoxMode::ProjectionBody,
    };
    let cfg = HeuristicConfig { restarts, seed, threads, ..Default::default() };
    let r = min_box(&p, box_mode, &cfg)?;
    let mut body = json!({
        "mode": match mode { MinBoxMode::Body => "body", MinBoxMode::Projection => "projection" },
        "box_volume": r.box_volume,
        "value": r.value,
        "exact": r.exact.as_ref().map_or(Value::Null, q),
        "frame": r.frame.rows(),
    });
    if let (MinBoxMode::Body, Value::Object(b)) = (mode, &mut body) {
        b.insert("phi_lower_bound".into(), q(&phi_lower_bound(p.dim())));
    }
    let mut manifest = Manifest::new("minbox", vec![path.display().to_string()]);
    manifest.set("restarts", restarts as u64);
    manifest.seeds.push(seed);
    finish(Doc::new(body), manifest, common, start, 0)
}

fn cmd_projbody(path: &Path, common: &Common) -> Outcome {
    let start = Instant::now();
    let p = load(path)?;
    let z = projection_body(&p);
    let gens: Vec<Value> = z.generators.iter().map(|g| json!({"generator": qv(g), "approx": vec_to_f64(g)})).collect();
    let doc = Doc::new(json!({"n": z.n, "count": z.generators.len(), "generators": gens}))
        .with_rows("generators", vec!["generator", "approx"]);
    let manifest = Manifest::new("projbody", vec![path.display().to_string()]);
    finish(doc, manifest, common, start, 0)
}

fn cmd_bounds(paths: &[PathBuf], cfg: &BatteryConfig, common: &Common) -> Outcome {
    let start = Instant::now();
    let mut report = BoundsReport::default();
    for path in paths {
        let p = load(path)?;
        let r = run_battery(&p, &body_name(path), cfg)?;
        report.entries.extend(r.entries);
    }
    let code = if report.all_hold() { 0 } else { EXIT_CHECK };
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "body": e.body,
                "relation": e.relation,
                "lhs": e.lhs.display(),
                "rhs": e.rhs.display(),
                "slack": e.slack.display(),
                "verdict": e.verdict,
                "note": e.note,
                "detail": {"lhs": e.lhs, "rhs": e.rhs, "slack": e.slack},
            })
        })
        .collect();
    let doc = Doc::new(json!({"all_hold": report.all_hold(), "count": entries.len(), "entries": entries}))
        .with_rows("entries", vec!["body", "name", "lhs", "relation", "rhs", "slack", "verdict", "note"]);
    let mut manifest = Manifest::new("bounds", paths.iter().map(|p| p.display().to_string()).collect());
    manifest.set("samples", cfg.samples);
    manifest.set("frames", cfg.frames as u64);
    manifest.set("restarts", cfg.restarts as u64);
    manifest.seeds.push(cfg.seed);
    finish(doc, manifest, common, start, code)
}

fn cmd_zhang(path: &Path, samples: u64, seed: u64, threads: usize, common: &Common) -> Outcome {
    let start = Instant::now();
    if samples == 0 {
        return Err(usage("--samples must be positive".into()));
    }
    let p = load(path)?;
    let simplex = revlw::oracles::is_simplex(&p);
    let r = zhang_check(&p, samples, seed, threads)?;
    let e = zhang_entry(&p, samples, seed, threads, simplex, &body_name(path))?;
    let code = if e.verdict == Verdict::Holds { 0 } else { EXIT_CHECK };
    let doc = Doc::new(json!({
        "n": r.n,
        "lhs": q(&r.lhs),
        "lhs_approx": r.lhs_approx,
        "rhs_estimate": r.rhs_estimate,
        "rhs_ci95": r.rhs_ci95,
        "ratio": r.ratio,
        "ratio_sigma": r.ratio_sigma,
        "polar_volume": r.polar.estimate,
        "polar_ci95": r.polar.ci95,
        "hits": r.polar.hits,
        "samples": r.polar.samples,
        "simplex": simplex,
        "relation": e.relation,
        "verdict": e.verdict,
    }));
    let mut manifest = Manifest::new("zhang", vec![path.display().to_string()]);
    manifest.set("samples", samples);
    manifest.seeds.push(seed);
    finish(doc, manifest, common, start, code)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Info { path, common } => cmd_info(&path, &common),
        Command::Lw2d { path, common } => cmd_lw2d(&path, &common),
        Command::Search { path, mode, tau, delta, nu, restarts, seed, threads, budget, common } => {
            cmd_search(&path, mode, tau, delta, nu, restarts, seed, threads.get(), budget, &common)
        }
        Command::Minbox { path, mode, restarts, seed, threads, common } => {
            cmd_minbox(&path, mode, restarts, seed, threads.get(), &common)
        }
        Command::Projbody { path, common } => cmd_projbody(&path, &common),
        Command::Bounds { paths, samples, seed, frames, restarts, threads, common } => {
            if restarts == 0 {
                return Err(usage("--restarts must be positive".into()));
            }
            let cfg = BatteryConfig { frames, samples, seed, threads: threads.get(), restarts };
            cmd_bounds(&paths, &cfg, &common)
        }
        Command::Zhang { path, samples, seed, threads, common } => {
            cmd_zhang(&path, samples, seed, threads.get(), &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
