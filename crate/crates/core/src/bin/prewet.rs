use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prewet::gibbs::{exact_distribution, ModelParams};
use prewet::harness::run::run_experiment;
use prewet::harness::{
    verify_suite_with, ExperimentConfig, ExperimentKind, FitSummary, ParsedConfig, RunRecord, Scaled, VerifyOptions,
};
use prewet::lattice::{make_region, BoundaryCondition};
use prewet::randomline::{interface_law_checks, partition_ratio};

#[derive(Parser)]
#[command(name = "prewet", version, about = "Ising interface laboratory: sampling, exact enumeration and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and record observables only.
    Sample(ExperimentArgs),
    /// Exact law of a small box.
    Enumerate(EnumerateArgs),
    /// Run the exact verification suite; exits nonzero on any failure.
    Verify(VerifyArgs),
    /// One-point tail fit at the query column.
    Tail(ExperimentArgs),
    /// Area scaling across box sizes.
    Area(ExperimentArgs),
    /// Maximum-height scaling across box sizes.
    Maxheight(ExperimentArgs),
    /// Exceedance counts on a mesh of columns.
    Multipoint(ExperimentArgs),
    /// Coupled extremal chains: coalescence times and order preservation.
    CouplingTest(ExperimentArgs),
}

/// Flags mirror the configuration keys and override the file.
#[derive(Args)]
struct ExperimentArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    run_id: Option<String>,
    /// Box size; repeat for several.
    #[arg(long = "n")]
    sizes: Vec<u32>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c_lambda: Option<f64>,
    #[arg(long)]
    chains: Option<u64>,
    /// Samples per chain.
    #[arg(long)]
    samples: Option<usize>,
    /// Sweep count such as 500, 4N or 200N2.
    #[arg(long)]
    burn_in_cap: Option<Scaled>,
    #[arg(long)]
    thinning: Option<Scaled>,
    #[arg(long)]
    check_interval: Option<Scaled>,
    #[arg(long)]
    seed: Option<u64>,
    /// Recorded column; repeat for several.
    #[arg(long = "column")]
    columns: Vec<i32>,
    #[arg(long)]
    mesh_r: Option<f64>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    svg: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bc {
    Dobrushin,
    Plus,
    Minus,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 3)]
    width: u32,
    #[arg(long, default_value_t = 3)]
    height: u32,
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value_t = Bc::Dobrushin)]
    bc: Bc,
    /// Most probable configurations to list.
    #[arg(long, default_value_t = 5)]
    top: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Sample the source sets instead of checking all of them.
    #[arg(long)]
    quick: bool,
    /// Multiply the dual temperature (a deliberate fault; the suite must fail).
    #[arg(long, default_value_t = 1.0)]
    corrupt_beta_star: f64,
    /// Print every failing instance.
    #[arg(long)]
    verbose: bool,
}

fn set(echo: &mut Vec<(String, String)>, key: &str, values: Vec<String>) {
    echo.retain(|(k, _)| k != key);
    echo.extend(values.into_iter().map(|v| (key.to_string(), v)));
}

fn build(kind: ExperimentKind, a: &ExperimentArgs) -> prewet::Result<ParsedConfig> {
    let mut parsed = match &a.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::parse_with_env("")?,
    };
    let (c, echo) = (&mut parsed.config, &mut parsed.echo);
    c.kind = kind;
    set(echo, "kind", vec![kind.to_string()]);
    macro_rules! flag {
        ($field:ident, $key:literal) => {
            if let Some(v) = a.$field.clone() {
                set(echo, $key, vec![v.to_string()]);
                c.$field = v.into();
            }
        };
    }
    flag!(run_id, "run_id");
    flag!(beta, "beta");
    flag!(c_lambda, "c_lambda");
    flag!(chains, "chains");
    flag!(samples, "samples");
    flag!(burn_in_cap, "burn_in_cap");
    flag!(thinning, "thinning");
    flag!(check_interval, "check_interval");
    flag!(seed, "seed");
    flag!(mesh_r, "mesh_r");
    flag!(resamples, "resamples");
    if let Some(dir) = &a.output_dir {
        set(echo, "output_dir", vec![dir.display().to_string()]);
        c.output_dir = dir.clone();
    }
    if !a.sizes.is_empty() {
        set(echo, "n", a.sizes.iter().map(u32::to_string).collect());
        c.sizes = a.sizes.clone();
    }
    if !a.columns.is_empty() {
        set(echo, "column", a.columns.iter().map(i32::to_string).collect());
        c.columns = a.columns.clone();
    }
    if a.svg {
        set(echo, "svg", vec!["true".into()]);
        c.svg = true;
    }
    if a.run_id.is_none() && !parsed.echo.iter().any(|(k, _)| k == "run_id") {
        parsed.config.run_id = format!("{kind}-{}", parsed.config.seed);
    }
    Ok(parsed)
}

fn report(record: &RunRecord) {
    println!("run {} ({} rows, {:.1}s)", record.run_id, record.row_count, record.wall_clock_seconds);
    for c in &record.chains {
        let flag = if c.certificate.coalesced { "coalesced" } else { "NOT coalesced (cap reached)" };
        let order = match c.order_preserved {
            Some(true) => ", order preserved",
            Some(false) => ", ORDER VIOLATED",
            None => "",
        };
        println!("  N={} chain {}: burn-in {} sweeps, {flag}{order}", c.n, c.chain, c.certificate.sweeps);
    }
    for f in &record.fits {
        match f {
            FitSummary::Tail { n, column, fits, slope_ci } => {
                for t in fits {
                    match t.fit {
                        Some(l) => println!(
                            "  tail N={n} x={column} R^{}: slope {:.4} R2 {:.4} over {} levels",
                            t.exponent,
                            l.slope,
                            l.r_squared,
                            t.levels_used()
                        ),
                        None => println!("  tail N={n} x={column} R^{}: degenerate", t.exponent),
                    }
                }
                if let Some((lo, hi)) = slope_ci {
                    println!("  tail N={n}: 95% bootstrap interval of the R^1.5 slope [{lo:.4}, {hi:.4}]");
                }
            }
            FitSummary::Scaling { statistic, fit, spread, normalized_medians } => {
                println!("  {statistic}: log-log slope {:.4} [{:.4}, {:.4}]", fit.slope, fit.ci.0, fit.ci.1);
                if let (Some(s), Some(ci)) = (fit.corrected_slope, fit.corrected_ci) {
                    println!("  {statistic}: corrected slope {s:.4} [{:.4}, {:.4}]", ci.0, ci.1);
                }
                let meds: Vec<String> = normalized_medians.iter().map(|(n, m)| format!("N={n}: {m:.4}")).collect();
                println!("  {statistic}: normalized medians {} (spread {spread:.3})", meds.join(", "));
            }
            FitSummary::Multipoint { n, mesh, levels, decisive } => {
                println!("  multipoint N={n}: mesh {mesh:?}");
                if let Some(t) = decisive {
                    let l = &levels[*t as usize];
                    println!("  multipoint N={n}: threshold {t}: P(>=1) {:.4}, P(>=2) {:.4}", l.p1, l.p2);
                }
            }
            FitSummary::Verify { passed, max_deviation, .. } => {
                println!("  verify: {} (max deviation {max_deviation:e})", if *passed { "pass" } else { "FAIL" })
            }
            FitSummary::Note { message } => println!("  note: {message}"),
        }
    }
    println!("  wrote {}", record.csv_path.display());
    println!("  wrote {}", record.json_path.display());
    if let Some(p) = &record.svg_path {
        println!("  wrote {}", p.display());
    }
}

fn enumerate(a: &EnumerateArgs) -> prewet::Result<()> {
    if a.width == 0 || a.height == 0 {
        return Err(prewet::Error::InvalidConfig("width and height must be positive".into()));
    }
    let region = make_region(a.width - 1, a.height - 1);
    let bc = match a.bc {
        Bc::Dobrushin => BoundaryCondition::Dobrushin,
        Bc::Plus => BoundaryCondition::AllPlus,
        Bc::Minus => BoundaryCondition::AllMinus,
    };
    let p = ModelParams::new(a.beta, a.lambda);
    let dist = exact_distribution(&region, &bc, &p)?;
    println!("{}x{} box, {:?}, beta={}, lambda={}", a.width, a.height, bc, a.beta, a.lambda);
    println!("configurations: {}", dist.n_configs());
    println!("log Z: {:.12}", dist.log_z());
    println!("Z / Z_plus: {:.12e}", partition_ratio(&bc, &region, &p)?);
    let mut order: Vec<u64> = (0..dist.n_configs() as u64).collect();
    order.sort_by(|&x, &y| dist.probability(y).total_cmp(&dist.probability(x)));
    for &m in order.iter().take(a.top) {
        let sigma = dist.config(m);
        let rows: Vec<String> = (0..a.height as i32)
            .rev()
            .map(|y| {
                (0..a.width as i32)
                    .map(|x| if sigma.get(prewet::lattice::Site::new(x, y)) == Some(1) { '+' } else { '-' })
                    .collect()
            })
            .collect();
        println!("p = {:.6e}  {}", dist.probability(m), rows.join("/"));
    }
    if bc.is_plus_minus_type() && a.lambda == 0.0 {
        let checks = interface_law_checks(&region, &bc, a.beta)?;
        let worst = checks.iter().map(|c| c.deviation).fold(0.0, f64::max);
        println!("interface law: {} instances, max deviation {worst:e}", checks.len());
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> bool {
    let opts = VerifyOptions { beta_star_factor: a.corrupt_beta_star, exhaustive: !a.quick };
    let report = verify_suite_with(&opts);
    for s in report.summary() {
        let status = if s.failures == 0 { "pass" } else { "FAIL" };
        println!("{status}  {:<36} {:>6} instances  max deviation {:.3e}", s.name, s.instances, s.max_deviation);
    }
    if a.verbose {
        for f in report.failures() {
            println!("  failed: {} [{}] {} vs {}", f.name, f.instance, f.lhs, f.rhs);
        }
    }
    println!("{}", if report.passed() { "all checks passed" } else { "verification FAILED" });
    report.passed()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = match &cli.command {
        Command::Sample(_) => ExperimentKind::Sample,
        Command::Tail(_) => ExperimentKind::Tail,
        Command::Area(_) => ExperimentKind::Area,
        Command::Maxheight(_) => ExperimentKind::MaxHeight,
        Command::Multipoint(_) => ExperimentKind::Multipoint,
        Command::CouplingTest(_) => ExperimentKind::Coupling,
        Command::Enumerate(a) => {
            return match enumerate(a) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Verify(a) => return if verify(a) { ExitCode::SUCCESS } else { ExitCode::FAILURE },
    };
    let args = match &cli.command {
        Command::Sample(a)
        | Command::Tail(a)
        | Command::Area(a)
        | Command::Maxheight(a)
        | Command::Multipoint(a)
        | Command::CouplingTest(a) => a,
        Command::Enumerate(_) | Command::Verify(_) => unreachable!("handled above"),
    };
    match build(kind, args).and_then(|p| run_experiment(&p)) {
        Ok(record) => {
            report(&record);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
