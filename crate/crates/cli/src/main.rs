mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rossler_core::flow::{fixed_points, Params, State3};
use rossler_core::knot::{enumerate_words, knot_report, template_embed, KnotReport};
use rossler_core::manifolds::{
    certify_trefoil, trefoil_search, HeteroConfig, ParamAxis, SearchOptions, HETERO_TOL,
};
use rossler_core::periodic::{
    attach_word, curves_csv, find_periodic, fixed_point_index, recurrence_seeds, OrbitRecord,
};
use rossler_core::return_map::{
    find_discontinuities, iterate, polylines_csv, samples_csv, Partition2,
};
use rossler_core::section::SectionPoint;
use rossler_core::spectral::{check_assumptions, saddle_report};
use rossler_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use config::{ConfigError, RunConfig};

const EXIT_ASSUMPTION: u8 = 1;
const EXIT_ANALYSIS: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "rossler", version, about = "Rössler flow experiments")]
struct Cli {
    /// Key-value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random knot projection.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rayon thread count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fixed points, spectra and the assumption checks.
    Analyze,
    /// Iterate the return map from one section point.
    ReturnMap(ReturnMapArgs),
    /// Locate the discontinuity curves and the partition curve.
    ScanDiscontinuities,
    /// Heteroclinic trefoil search with `b` fixed.
    HeteroSearch(SearchArgs),
    /// Periodic points of the return map.
    Orbits(OrbitArgs),
    /// Knot invariants of template orbits or of a curve file.
    Knots(KnotArgs),
}

#[derive(Args, Debug)]
struct ReturnMapArgs {
    /// Start point in the section chart (u = x, v = z).
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    u0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    v0: f64,
    /// Number of returns.
    #[arg(long, default_value_t = 500)]
    n: usize,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Half width of the (a, c) search box.
    #[arg(long, allow_negative_numbers = true)]
    half_width: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Period of the return-map orbits.
    #[arg(long)]
    k: usize,
    /// Length of the run used for recurrence seeds.
    #[arg(long, default_value_t = 3000)]
    recurrence: usize,
    /// Scan for the partition and attach symbol words.
    #[arg(long)]
    words: bool,
}

#[derive(Args, Debug)]
struct KnotArgs {
    /// Run every primitive template word up to `--max-len`.
    #[arg(long)]
    template: bool,
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// CSV file with `x,y,z` rows of a closed curve.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Bound on p and q when naming torus knots T(p, q).
    #[arg(long, default_value_t = 11)]
    max_pq: usize,
}

enum Failure {
    Usage(String),
    Analysis(Error),
    Io(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) | Error::InvalidParams(m) => Failure::Usage(m),
            other => Failure::Analysis(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Stable short code for an analysis error.
fn error_code(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "invalid_params",
        Error::DegenerateFixedPoints { .. } => "degenerate_fixed_points",
        Error::ConversionUndefined { .. } => "conversion_undefined",
        Error::OffSection { .. } => "off_section",
        Error::UndefinedAtPole => "undefined_at_pole",
        Error::NotSaddleFocus(_) => "not_saddle_focus",
        Error::BlowUp { .. } => "blow_up",
        Error::StepUnderflow { .. } => "step_underflow",
        Error::NoDiscontinuityFound => "no_discontinuity_found",
        Error::NoCrossing(_) => "no_crossing",
        Error::LoopTooCoarse { .. } => "loop_too_coarse",
        Error::LoopHitsDiscontinuity { .. } => "loop_hits_discontinuity",
        Error::LoopNotIsolating { .. } => "loop_not_isolating",
        Error::UndecidedPoint { .. } => "undecided_point",
        Error::NonGenericProjection(_) => "non_generic_projection",
        Error::DegenerateDiagram(_) => "degenerate_diagram",
        Error::InvalidArgument(_) => "invalid_argument",
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.a {
        cfg.a = v;
    }
    if let Some(v) = cli.b {
        cfg.b = v;
    }
    if let Some(v) = cli.c {
        cfg.c = v;
    }
    if let Some(v) = &cli.out {
        cfg.out = v.clone();
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Command::HeteroSearch(s) = &cli.cmd {
        if let Some(h) = s.half_width {
            cfg.half_width = h;
        }
        if let Some(m) = s.max_iter {
            cfg.max_iter = m;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Outcome {
    status: &'static str,
    exit: u8,
    result: Value,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Self {
            status: "ok",
            exit: 0,
            result,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), Failure> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

fn params(cfg: &RunConfig) -> Result<Params, Failure> {
    Ok(Params::new(cfg.a, cfg.b, cfg.c)?)
}

fn analyze(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = params(cfg)?;
    let fp = fixed_points(&p)?;
    let status = check_assumptions(&p);
    let report = saddle_report(&p);
    let exit = match (&report, status.all_pass()) {
        (_, true) => 0,
        (Err(_), false) if status.a1.pass => EXIT_ANALYSIS,
        _ => EXIT_ASSUMPTION,
    };
    let mut result = json!({
        "p_in": fp.p_in,
        "p_out": fp.p_out,
        "assumptions": status,
        "all_pass": status.all_pass(),
    });
    match &report {
        Ok(r) => {
            result["spectrum"] = to_value(r);
            result["gamma_in"] = json!(r.spectrum_in.gamma);
            result["gamma_out"] = json!(r.spectrum_out.gamma);
        }
        Err(e) => {
            result["spectrum_error"] = json!({ "code": error_code(e), "message": e.to_string() });
        }
    }
    Ok(Outcome {
        status: if exit == 0 {
            "ok"
        } else {
            "assumptions_failed"
        },
        exit,
        result,
    })
}

fn return_map(cfg: &RunConfig, args: &ReturnMapArgs) -> Result<Outcome, Failure> {
    let p = params(cfg)?;
    let ic = cfg.integrator();
    if args.n == 0 {
        return Err(Failure::Usage("--n must be at least 1".into()));
    }
    let start = SectionPoint::new(args.u0, args.v0);
    let run = iterate(&p, start, args.n, &ic)?;
    let mut points = vec![start];
    points.extend(run.iter().filter_map(|r| r.point()));
    let returned = points.len() - 1;
    // The last point has no recorded return; drop it from the sample table.
    points.pop();
    write_file(
        &cfg.out,
        "return_map.csv",
        &samples_csv(&p, &points, None, &ic)?,
    )?;
    let stop = run.last().filter(|r| r.point().is_none()).copied();
    Ok(Outcome {
        status: if returned == args.n { "ok" } else { "stopped" },
        exit: 0,
        result: json!({ "start": start, "returns": returned, "stop": stop, "csv": "return_map.csv" }),
    })
}

fn scan(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let p = params(cfg)?;
    let ds = match find_discontinuities(&p, &cfg.grid(), &cfg.integrator()) {
        Ok(ds) => ds,
        Err(Error::NoDiscontinuityFound) => {
            return Ok(Outcome {
                status: "not_found",
                exit: 0,
                result: json!({ "components": 0 }),
            })
        }
        Err(e) => return Err(e.into()),
    };
    let mut curves: Vec<(String, &[SectionPoint])> = vec![
        ("delta".to_string(), &ds.delta_polyline[..]),
        ("rho".to_string(), &ds.rho_polyline[..]),
    ];
    for (i, c) in ds.components.iter().enumerate() {
        curves.push((format!("component_{i}"), &c[..]));
    }
    for (i, c) in ds.rho_candidates.iter().enumerate() {
        curves.push((format!("preimage_{i}"), &c[..]));
    }
    let borrowed: Vec<(&str, &[SectionPoint])> =
        curves.iter().map(|(n, c)| (n.as_str(), *c)).collect();
    write_file(&cfg.out, "discontinuities.csv", &polylines_csv(&borrowed))?;
    Ok(Outcome::ok(json!({
        "delta0": ds.delta0,
        "delta_tip": ds.delta_tip,
        "p0_estimate": ds.p0_estimate,
        "resolution": ds.resolution,
        "components": ds.components.len(),
        "rho_candidates": ds.rho_candidates.len(),
        "csv": "discontinuities.csv",
    })))
}

fn hetero_search(cfg: &RunConfig) -> Result<Outcome, Failure> {
    if !(cfg.half_width > 0.0) {
        return Err(Failure::Usage(format!(
            "empty search box (half_width = {})",
            cfg.half_width
        )));
    }
    let seed = params(cfg)?;
    let hc = HeteroConfig {
        integrator: cfg.integrator(),
        ..HeteroConfig::default()
    };
    let opts = SearchOptions {
        half_width: cfg.half_width,
        max_iter: cfg.max_iter,
        ..SearchOptions::default()
    };
    let report = trefoil_search(seed, (ParamAxis::A, ParamAxis::C), &opts, &hc)?;
    let mut result = json!({ "search": report, "monotone": report.is_monotone() });
    if report.mismatch < HETERO_TOL {
        let cert = certify_trefoil(&report.params, &hc)?;
        let rows: String = std::iter::once("x,y,z".to_string())
            .chain(cert.theta_curve.iter().map(|s| {
                format!(
                    "{},{},{}",
                    rossler_core::fmt17(s.x),
                    rossler_core::fmt17(s.y),
                    rossler_core::fmt17(s.z)
                )
            }))
            .collect::<Vec<_>>()
            .join("\n");
        write_file(&cfg.out, "trefoil_loop.csv", &(rows + "\n"))?;
        result["certificate_valid"] = json!(cert.is_valid());
        result["certificate"] = to_value(&cert);
    }
    Ok(Outcome {
        status: if report.found { "ok" } else { "not_found" },
        exit: 0,
        result,
    })
}

fn orbits(cfg: &RunConfig, args: &OrbitArgs) -> Result<Outcome, Failure> {
    if args.k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let p = params(cfg)?;
    let ic = cfg.integrator();
    let start = SectionPoint::new(-1.0, 0.0);
    let mut seeds = recurrence_seeds(&p, start, args.recurrence, args.k, 40, &ic);
    let g = cfg.grid();
    let n = ((g.u_max - g.u_min) / 0.1).round().max(1.0) as usize;
    seeds.extend(
        (0..=n)
            .map(|i| SectionPoint::new(g.u_min + (g.u_max - g.u_min) * i as f64 / n as f64, 0.0))
            .filter(|sp| sp.height(&p) > 0.0),
    );
    let search = find_periodic(&p, args.k, &seeds, &ic)?;
    let partition = if args.words {
        let ds = find_discontinuities(&p, &g, &ic)?;
        Some(Partition2::from_structure(&p, &ds, ds.p0_estimate)?)
    } else {
        None
    };
    let mut records = Vec::new();
    let mut found = search.orbits;
    for o in &mut found {
        if let Some(part) = &partition {
            o.word = attach_word(o, part).ok();
        }
        let index = fixed_point_index(&p, o, cfg.loop_radius, 256, &ic)
            .ok()
            .map(|r| r.winding);
        records.push(OrbitRecord::new(o, index));
    }
    write_file(&cfg.out, "orbits.csv", &curves_csv(&found))?;
    Ok(Outcome {
        status: if records.is_empty() {
            "not_found"
        } else {
            "ok"
        },
        exit: 0,
        result: json!({
            "k": args.k,
            "seeds": seeds.len(),
            "failed_seeds": search.failures.len(),
            "orbits": records,
            "csv": "orbits.csv",
        }),
    })
}

fn read_curve(path: &Path) -> Result<Vec<State3>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 3 => out.push(State3::new(v[0], v[1], v[2])),
            _ if n == 0 => continue,
            _ => {
                return Err(Failure::Usage(format!(
                    "{}: line {} is not x,y,z",
                    path.display(),
                    n + 1
                )))
            }
        }
    }
    Ok(out)
}

fn knots(cfg: &RunConfig, args: &KnotArgs) -> Result<Outcome, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dir = State3::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3), 1.0).normalized();
    let reports: Vec<KnotReport> = match (&args.curve, args.template) {
        (None, true) => {
            if args.max_len == 0 {
                return Err(Failure::Usage("--max-len must be at least 1".into()));
            }
            enumerate_words(args.max_len)
                .iter()
                .map(|w| knot_report(&w.to_string(), &template_embed(w), dir, args.max_pq))
                .collect::<Result<_, _>>()?
        }
        (Some(path), false) => {
            let curve = read_curve(path)?;
            vec![knot_report(
                &path.display().to_string(),
                &curve,
                dir,
                args.max_pq,
            )?]
        }
        _ => {
            return Err(Failure::Usage(
                "knots needs exactly one of --template or --curve".into(),
            ))
        }
    };
    Ok(Outcome::ok(json!({
        "projection": dir,
        "convention": "symbol 1: strip with no half-twist, order preserved; symbol 2: strip with one half-twist, order reversed; strands ordered by the shift order of the rotations",
        "reports": reports,
    })))
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, Failure> {
    std::fs::create_dir_all(&cfg.out)?;
    match &cli.cmd {
        Command::Analyze => analyze(cfg),
        Command::ReturnMap(a) => return_map(cfg, a),
        Command::ScanDiscontinuities => scan(cfg),
        Command::HeteroSearch(_) => hetero_search(cfg),
        Command::Orbits(a) => orbits(cfg, a),
        Command::Knots(a) => knots(cfg, a),
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Analyze => "analyze",
        Command::ReturnMap(_) => "return-map",
        Command::ScanDiscontinuities => "scan-discontinuities",
        Command::HeteroSearch(_) => "hetero-search",
        Command::Orbits(_) => "orbits",
        Command::Knots(_) => "knots",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(w) = cfg.workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    let name = command_name(&cli.cmd);
    let (status, exit, result) = match run(&cli, &cfg) {
        Ok(o) => (o.status, o.exit, o.result),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_ANALYSIS);
        }
        Err(Failure::Analysis(e)) => (
            "error",
            EXIT_ANALYSIS,
            json!({ "code": error_code(&e), "message": e.to_string() }),
        ),
    };
    let doc = json!({
        "tool": "rossler",
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "config": cfg,
        "status": status,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    if let Err(e) = std::fs::write(cfg.out.join(format!("{name}.json")), &text) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ANALYSIS);
    }
    print!("{text}");
    ExitCode::from(exit)
}
