//! `bandforge`: batch reports over band complexes and the thin-type gallery.
//!
//! Exit codes: 0 success, 2 bad input, 3 hypothesis violated, 4 budget
//! exhausted.

use anyhow::Context;
use bandforge::gallery::{self, GallerySpec, Periodic};
use bandforge::leaf::{self, Transversal};
use bandforge::rational::{self, Rational};
use bandforge::rips::{self, Policy};
use bandforge::spectral;
use bandforge::{format, BandComplex, BandId, ComponentId, DPoint, Error};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_BUDGET: usize = 100_000;

#[derive(Parser)]
#[command(name = "bandforge", version, about = "Band complexes, the Rips machine and the thin-type gallery")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random choice; recorded in each output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Search budget (states, leaf points or extension segments).
    #[arg(long, global = true, env = "BANDFORGE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Directory for output files; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Which artifacts to write into --out.
    #[arg(long, global = true, value_delimiter = ',', default_value = "json,csv,svg")]
    emit: Vec<Emit>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
enum Emit {
    Json,
    Csv,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Measures, free arcs and the annulus-free verdict of a complex.
    Inspect {
        file: PathBuf,
        /// Also report the first return correspondence and block
        /// decomposition on an arc: `support:COMP:LO:HI` or `band:ID:LO:HI`.
        #[arg(long)]
        sigma: Option<String>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Runs the Rips machine and writes its trace.
    Rips {
        file: PathBuf,
        /// leftmost, widest or random (seeded by --seed).
        #[arg(long, default_value = "leftmost")]
        policy: String,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// End counts of leaves through sampled points. Takes a complex or a
    /// gallery spec (whose stage 0 is used).
    Ends {
        file: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = leaf::CALIBRATED_RADIUS)]
        radius: usize,
        /// Inner radii, comma separated; defaults to R/4, R/2, 3R/4.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Reports on a gallery spec.
    Gallery {
        spec: PathBuf,
        /// Search a collapse schedule for the first stage, with w' = seed
        /// and l = ell0.
        #[arg(long)]
        verify_step: bool,
        #[arg(long)]
        areas: bool,
        /// Fixed-point widths for m, n repeated periodically.
        #[arg(long)]
        fixed_point: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Write stage k of the gallery as a complex file into --out.
        #[arg(long)]
        complex: Option<usize>,
    },
    /// Perron-Frobenius data and the dimension 1 + ln mu / ln lambda.
    Spectral {
        /// Constant gallery (m, n).
        #[arg(long, requires = "n", conflicts_with_all = ["mu", "matrix"])]
        m: Option<i64>,
        #[arg(long, requires = "m")]
        n: Option<i64>,
        /// Also derive A(m, n) from a found collapse schedule.
        #[arg(long, requires = "m")]
        substitution: bool,
        /// Substitution matrix as a JSON array of rows.
        #[arg(long, requires = "lambda", conflicts_with = "mu")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "lambda")]
        mu: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = spectral::DEFAULT_TOL)]
        tol: f64,
    },
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = error.downcast_ref::<Error>().map_or(2, exit_code);
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            error: e.into(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::HypothesisViolated(_) | Error::NotSelfSimilar(_) => 3,
        Error::BudgetExceeded { .. } | Error::SearchExhausted { .. } | Error::NonConvergence { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bandforge: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let c = &cli.common;
    match &cli.command {
        Command::Inspect { file, sigma, json } => inspect(c, file, sigma.as_deref(), *json),
        Command::Rips { file, policy, max_steps } => rips_cmd(c, file, policy, *max_steps),
        Command::Ends {
            file,
            samples,
            radius,
            ladder,
        } => ends(c, file, *samples, *radius, ladder.as_deref()),
        Command::Gallery {
            spec,
            verify_step,
            areas,
            fixed_point,
            tol,
            complex,
        } => gallery_cmd(c, spec, *verify_step, *areas, *fixed_point, *tol, *complex),
        Command::Spectral {
            m,
            n,
            substitution,
            matrix,
            mu,
            lambda,
            tol,
        } => spectral_cmd(c, *m, *n, *substitution, matrix.as_deref(), *mu, *lambda, *tol),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn load_complex(path: &Path) -> Result<BandComplex, Failure> {
    let text = read(path)?;
    Ok(format::deserialize(&text)?)
}

fn load_spec(path: &Path) -> Result<GallerySpec, Failure> {
    let text = read(path)?;
    let spec: GallerySpec =
        serde_json::from_str(&text).with_context(|| format!("{} is not a gallery spec", path.display()))?;
    spec.validate()?;
    Ok(spec)
}

/// A complex file, or a gallery spec standing for its stage 0.
fn load_complex_or_spec(path: &Path) -> Result<BandComplex, Failure> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{} is not JSON", path.display()))?;
    if value.get("format").is_some() {
        load_complex(path)
    } else {
        let spec = load_spec(path)?;
        Ok(gallery::gallery_state(&spec, 0)?)
    }
}

fn wants(c: &Common, e: Emit) -> Option<&Path> {
    c.out.as_deref().filter(|_| c.emit.iter().collect::<BTreeSet<_>>().contains(&e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn r(x: &Rational) -> String {
    rational::format(x)
}

fn parse_rational(s: &str) -> Result<Rational, Failure> {
    Ok(rational::parse(s).ok_or_else(|| anyhow::anyhow!("not a rational: {s:?}"))?)
}

fn parse_sigma(s: &str) -> Result<Transversal, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let [kind, id, lo, hi] = parts.as_slice() else {
        return Err(anyhow::anyhow!("--sigma wants KIND:ID:LO:HI, got {s:?}").into());
    };
    let id: u32 = id.parse().map_err(|_| anyhow::anyhow!("bad id in --sigma: {id:?}"))?;
    let (lo, hi) = (parse_rational(lo)?, parse_rational(hi)?);
    match *kind {
        "support" => Ok(Transversal::Support {
            component: ComponentId(id),
            lo,
            hi,
        }),
        "band" => Ok(Transversal::Band { band: BandId(id), lo, hi }),
        _ => Err(anyhow::anyhow!("--sigma kind must be support or band, got {kind:?}").into()),
    }
}

#[derive(Serialize)]
struct InspectReport {
    seed: u64,
    budget: usize,
    total_width: String,
    support_length: String,
    excess: String,
    balanced: bool,
    free_arcs: Vec<rips::FreeArc>,
    imanishi: rips::ImanishiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_return: Option<leaf::Correspondence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    blocks: Option<leaf::BlockDecomposition>,
}

fn inspect(c: &Common, file: &Path, sigma: Option<&str>, json: bool) -> Result<(), Failure> {
    let x = load_complex(file)?;
    let transversal = sigma.map(parse_sigma).transpose()?;
    let (first_return, blocks) = match &transversal {
        Some(t) => (
            Some(leaf::first_return(&x, t, c.budget)?),
            Some(leaf::block_decomposition(&x, t, c.budget)?),
        ),
        None => (None, None),
    };
    let report = InspectReport {
        seed: c.seed,
        budget: c.budget,
        total_width: r(&x.total_width()),
        support_length: r(&x.support_length()),
        excess: r(&x.excess()),
        balanced: x.is_balanced(),
        free_arcs: rips::free_arcs(&x),
        imanishi: rips::imanishi(&x, c.budget),
        first_return,
        blocks,
    };
    if let Some(dir) = wants(c, Emit::Json) {
        write(dir, "inspect.json", &to_json(&report))?;
    }
    if json {
        print!("{}", to_json(&report));
        return Ok(());
    }
    println!("|X| (total width): {}", report.total_width);
    println!("|D| (support length): {}", report.support_length);
    println!("excess: {}", report.excess);
    println!("balanced: {}", if report.balanced { "yes" } else { "no" });
    println!("free arcs: {}", report.free_arcs.len());
    for a in &report.free_arcs {
        println!(
            "  component {} ({}, {}) under band {} base {}",
            a.component,
            r(&a.lo),
            r(&a.hi),
            a.covering_band,
            a.covering_base.index()
        );
    }
    let verdict = match &report.imanishi.annulus_free {
        rips::AnnulusFree::Yes => "yes".to_string(),
        rips::AnnulusFree::No => "no".to_string(),
        rips::AnnulusFree::Unknown { budget } => format!("unknown (budget {budget})"),
    };
    println!("annulus-free: {verdict}");
    println!("compact leaf measure: {}", r(&report.imanishi.compact_leaf_measure));
    if let Some(f) = &report.first_return {
        println!(
            "first return on carrier of length {}: {} families{}",
            r(&f.length()),
            f.families.len(),
            if f.has_open_families() { " (some open)" } else { "" }
        );
    }
    if let Some(b) = &report.blocks {
        let products = b.blocks.iter().filter(|x| x.is_product).count();
        println!("blocks: {} ({} product, {} unresolved extensions)", b.blocks.len(), products, b.unresolved.len());
    }
    println!("seed: {}", c.seed);
    Ok(())
}

#[derive(Serialize)]
struct RipsSummary {
    seed: u64,
    policy: String,
    max_steps: usize,
    collapses: usize,
    halt: rips::Halt,
    excess: String,
    final_total_width: String,
    final_support_length: String,
}

fn rips_cmd(c: &Common, file: &Path, policy: &str, max_steps: usize) -> Result<(), Failure> {
    let x = load_complex(file)?;
    let policy = match policy.parse::<Policy>().map_err(|e| anyhow::anyhow!(e))? {
        Policy::Random { .. } => Policy::Random { seed: c.seed },
        p => p,
    };
    let trace = rips::run_machine(&x, policy, max_steps);
    let last = trace.last();
    let summary = RipsSummary {
        seed: c.seed,
        policy: policy.to_string(),
        max_steps,
        collapses: trace.collapses(),
        halt: trace.halt,
        excess: r(&last.excess),
        final_total_width: r(&last.total_width),
        final_support_length: r(&last.support_length),
    };
    if let Some(dir) = wants(c, Emit::Json) {
        write(dir, "trace.jsonl", &trace.to_json_lines())?;
        write(dir, "summary.json", &to_json(&summary))?;
        write(dir, "final.json", &format::serialize(&last.complex))?;
    }
    print!("{}", to_json(&summary));
    Ok(())
}

fn ends(c: &Common, file: &Path, samples: usize, radius: usize, ladder: Option<&[usize]>) -> Result<(), Failure> {
    let x = load_complex_or_spec(file)?;
    let ladder = ladder.map_or_else(|| leaf::default_ladder(radius), <[usize]>::to_vec);
    let h = leaf::end_statistics_with(&x, samples, radius, &ladder, c.seed)?;
    if let Some(dir) = wants(c, Emit::Csv) {
        write(dir, "histogram.csv", &h.to_csv())?;
    }
    if let Some(dir) = wants(c, Emit::Json) {
        write(dir, "histogram.json", &to_json(&h))?;
    }
    if let Some(dir) = wants(c, Emit::Svg) {
        // the ball around the first sample, kept small enough to read
        let p: &DPoint = &h.samples[0].point;
        let ball = leaf::trace_leaf(&x, p, radius.min(12))?;
        let mut svg = leaf::ball_svg(&x, &ball);
        svg = svg.replacen("<title>", &format!("<desc>seed {}</desc>\n<title>", c.seed), 1);
        write(dir, "ball.svg", &svg)?;
        if let Some(dir) = wants(c, Emit::Json) {
            write(dir, "ball.json", &to_json(&ball))?;
        }
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        seed: u64,
        samples: usize,
        radius: usize,
        ladder: &'a [usize],
        counts: BTreeMap<&'static str, usize>,
    }
    let counts = leaf::EndClass::ALL.iter().map(|&k| (k.label(), h.count(k))).collect();
    print!(
        "{}",
        to_json(&Summary {
            seed: c.seed,
            samples,
            radius,
            ladder: &ladder,
            counts,
        })
    );
    Ok(())
}

#[derive(Serialize)]
struct StepReport {
    m: i64,
    n: i64,
    states_explored: usize,
    schedule: Vec<rips::FreeArc>,
    reached: serde_json::Value,
    target: serde_json::Value,
}

#[derive(Serialize)]
struct GalleryReport {
    seed: u64,
    spec: GallerySpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    verify_step: Option<StepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    areas: Option<gallery::AreaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_point: Option<gallery::FixedWidths>,
}

fn gallery_cmd(
    c: &Common,
    path: &Path,
    verify_step: bool,
    areas: bool,
    fixed_point: bool,
    tol: f64,
    complex: Option<usize>,
) -> Result<(), Failure> {
    let spec = load_spec(path)?;
    let doc = |x: &BandComplex| serde_json::from_str::<serde_json::Value>(&format::serialize(x)).expect("documents are JSON");
    let verify_step = if verify_step {
        let (m, n) = (spec.m.first().copied(), spec.n.first().copied());
        let (Some(m), Some(n)) = (m, n) else {
            return Err(anyhow::anyhow!("--verify-step needs at least one stage").into());
        };
        let w = gallery::verify_rips_step(m, n, &spec.seed, &spec.ell0, c.budget)?;
        Some(StepReport {
            m,
            n,
            states_explored: w.states_explored,
            schedule: w.schedule,
            reached: doc(&w.reached),
            target: doc(&w.target),
        })
    } else {
        None
    };
    let areas = areas.then(|| gallery::area_sequence(&spec)).transpose()?;
    let fixed_point = if fixed_point {
        let periodic = |v: &[i64]| Periodic {
            prefix: vec![],
            period: v.to_vec(),
        };
        Some(gallery::projective_fixed_widths(&periodic(&spec.m), &periodic(&spec.n), tol)?)
    } else {
        None
    };
    if let Some(k) = complex {
        if k > spec.k {
            return Err(anyhow::anyhow!("stage {k} is beyond K = {}", spec.k).into());
        }
        let dir = c.out.as_deref().ok_or_else(|| anyhow::anyhow!("--complex needs --out"))?;
        write(dir, &format!("stage{k}.json"), &format::serialize(&gallery::gallery_state(&spec, k)?))?;
    }
    let report = GalleryReport {
        seed: c.seed,
        spec,
        verify_step,
        areas,
        fixed_point,
    };
    let text = to_json(&report);
    if let Some(dir) = wants(c, Emit::Json) {
        write(dir, "gallery.json", &text)?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct DimensionReport {
    seed: u64,
    mu: f64,
    lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    dimension: f64,
}

#[allow(clippy::too_many_arguments)]
fn spectral_cmd(
    c: &Common,
    m: Option<i64>,
    n: Option<i64>,
    substitution: bool,
    matrix: Option<&Path>,
    mu: Option<f64>,
    lambda: Option<f64>,
    tol: f64,
) -> Result<(), Failure> {
    let text = if let (Some(m), Some(n)) = (m, n) {
        #[derive(Serialize)]
        struct Report {
            seed: u64,
            #[serde(flatten)]
            report: spectral::SpectralReport,
            #[serde(skip_serializing_if = "Option::is_none")]
            substitution: Option<Vec<Vec<i64>>>,
        }
        let report = spectral::constant_gallery_report(m, n, tol)?;
        let substitution = substitution.then(|| spectral::gallery_substitution(m, n, c.budget)).transpose()?.map(|x| x.0);
        to_json(&Report {
            seed: c.seed,
            report,
            substitution,
        })
    } else if let Some(path) = matrix {
        let a: Vec<Vec<f64>> =
            serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a matrix", path.display()))?;
        let lambda = lambda.expect("clap requires --lambda");
        let pf = spectral::pf_eigen(&a, tol)?;
        to_json(&DimensionReport {
            seed: c.seed,
            mu: pf.mu,
            lambda,
            residual: Some(pf.residual),
            dimension: spectral::hausdorff_dimension(pf.mu, lambda)?,
        })
    } else if let (Some(mu), Some(lambda)) = (mu, lambda) {
        to_json(&DimensionReport {
            seed: c.seed,
            mu,
            lambda,
            residual: None,
            dimension: spectral::hausdorff_dimension(mu, lambda)?,
        })
    } else {
        return Err(anyhow::anyhow!("give --m and --n, --matrix with --lambda, or --mu with --lambda").into());
    };
    if let Some(dir) = wants(c, Emit::Json) {
        write(dir, "spectral.json", &text)?;
    }
    print!("{text}");
    Ok(())
}
