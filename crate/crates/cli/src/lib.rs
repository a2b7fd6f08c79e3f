//! Command-line front end for the twistratios workbench.

pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twistratios::gauss::{g_def, g_fast};
use twistratios::lfun::{l2_twist, modular_twist_l, quad_dirichlet_l, sym2_l, LValue};
use twistratios::mds::{p_product, p_product_accelerated, ShiftTriple};
use twistratios::modform::{build_delta_form_cached, default_cache_dir, HeckeEigenform, CACHE_DIR_ENV};
use twistratios::ratios::{run_verification, RatiosReport, SmoothWeight};
use twistratios::selftest::{all_passed, render_table, run_all, SelftestOptions};
use twistratios::{Complex64, Error};

use config::RunConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "twistratios", version, about = "Ratios of quadratic twists of a modular L-function")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration; missing keys take the embedded defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Reduced grids.
    #[arg(long, global = true)]
    pub fast: bool,
    /// Seed for sampled property suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Coefficient cache directory.
    #[arg(long, global = true, env = CACHE_DIR_ENV)]
    pub cache_dir: Option<PathBuf>,
    /// Also compare the coefficient table with a public database (network).
    #[arg(long, global = true)]
    pub remote_check: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every property suite and print a pass/fail table.
    Selftest,
    /// Compare the twisted ratio sum with its predicted main term over the X grid.
    VerifyRatios(RatiosArgs),
    /// Evaluate one L-value with its error estimate.
    Lvalue(LvalueArgs),
    /// G(chi_n, q) by the multiplicative formula and by definition.
    Gauss {
        #[arg(long)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
    },
    /// The Euler product P(s, w, z) with its tail estimate.
    Eulerprod(EulerArgs),
    /// Re-render a JSON report: print its summary and write the CSV.
    Report {
        /// JSON report written by verify-ratios.
        #[arg(long)]
        input: PathBuf,
        /// CSV destination; defaults to the input path with a .csv extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    ShowConfig,
}

#[derive(Debug, Args)]
pub struct RatiosArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_im: Option<f64>,
    /// Comma-separated X values.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// File stem for the JSON and CSV outputs.
    #[arg(long, default_value = "ratios")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LKind {
    /// L(s, chi^(d)) for a fundamental discriminant d.
    Dirichlet,
    /// L(s, f x chi^(d)) for a fundamental discriminant d.
    Twist,
    /// L^(2)(s, f x chi_n) for odd n.
    L2twist,
    /// L(s, sym^2 f).
    Sym2,
}

#[derive(Debug, Args)]
pub struct LvalueArgs {
    #[arg(long, value_enum)]
    pub kind: LKind,
    /// Discriminant, or odd n for l2twist.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub d: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub s_im: f64,
}

#[derive(Debug, Args)]
pub struct EulerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub w: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: f64,
    /// Largest prime in the product.
    #[arg(long, default_value_t = 100_000)]
    pub cutoff: u64,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument { .. } | Error::Precondition { .. } => EXIT_CONFIG,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

/// Configuration from defaults, the optional file, then command-line flags.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.global.config {
        Some(p) => RunConfig::load(p).map_err(Failure::config)?,
        None => RunConfig::default(),
    };
    let g = &cli.global;
    if let Some(o) = &g.out {
        cfg.run.out = o.clone();
    }
    if let Some(w) = g.workers {
        cfg.run.workers = w;
    }
    if let Some(s) = g.seed {
        cfg.run.seed = s;
    }
    cfg.run.fast |= g.fast;
    if let Command::VerifyRatios(a) = &cli.command {
        let s = &mut cfg.shifts;
        s.alpha_re = a.alpha.unwrap_or(s.alpha_re);
        s.alpha_im = a.alpha_im.unwrap_or(s.alpha_im);
        s.beta_re = a.beta.unwrap_or(s.beta_re);
        s.beta_im = a.beta_im.unwrap_or(s.beta_im);
        if let Some(grid) = &a.grid {
            cfg.grid.x = grid.clone();
        }
    }
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(Failure::config(format!("invalid configuration:\n  {}", v.join("\n  "))));
    }
    Ok(cfg)
}

fn load_form(cli: &Cli, cfg: &RunConfig) -> Result<HeckeEigenform, Failure> {
    let dir = cli.global.cache_dir.clone().unwrap_or_else(default_cache_dir);
    let f = build_delta_form_cached(cfg.form.n_max, Some(&dir))?;
    if cli.global.remote_check {
        remote_check(&f)?;
    }
    Ok(f)
}

#[cfg(feature = "remote-check")]
fn remote_check(f: &HeckeEigenform) -> Result<(), Failure> {
    let n = twistratios::remote::cross_check_tau(f)?;
    println!("remote check: {n} coefficients agree");
    Ok(())
}

#[cfg(not(feature = "remote-check"))]
fn remote_check(_: &HeckeEigenform) -> Result<(), Failure> {
    Err(Failure::config("--remote-check needs a build with the remote-check feature"))
}

/// Runs the parsed command, printing to stdout.
pub fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = effective_config(cli)?;
    if cfg.run.workers > 0 {
        // a second call in the same process keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.workers).build_global();
    }
    match &cli.command {
        Command::ShowConfig => {
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Selftest => cmd_selftest(cli, &cfg),
        Command::VerifyRatios(a) => cmd_verify_ratios(cli, &cfg, &a.name),
        Command::Lvalue(a) => cmd_lvalue(cli, &cfg, a),
        Command::Gauss { n, q } => cmd_gauss(*n, *q),
        Command::Eulerprod(a) => cmd_eulerprod(cli, &cfg, a),
        Command::Report { input, csv } => cmd_report(input, csv.as_ref()),
    }
}

fn cmd_selftest(cli: &Cli, cfg: &RunConfig) -> Result<(), Failure> {
    let f = load_form(cli, cfg)?;
    let results = run_all(&f, &SelftestOptions { fast: cfg.run.fast, seed: cfg.run.seed });
    print!("{}", render_table(&results));
    if all_passed(&results) {
        println!("all suites passed");
        Ok(())
    } else {
        let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.invariant.as_str()).collect();
        Err(Failure { code: EXIT_NUMERIC, message: format!("failing invariants: {}", failed.join("; ")) })
    }
}

fn cmd_verify_ratios(cli: &Cli, cfg: &RunConfig, name: &str) -> Result<(), Failure> {
    let f = load_form(cli, cfg)?;
    let w = SmoothWeight::from_spec(&cfg.weight)?;
    let shifts = cfg.shift_pair();
    let report = run_verification(&cfg.grid.x, &shifts, &f, &w, &cfg.policy)?;
    println!("# {}", report.bound);
    if report.imaginary_shifts {
        println!("# imaginary-shift mode: alpha = {}, beta = {}", shifts.alpha, shifts.beta);
    }
    print_summary(&report);
    report.write(&cfg.run.out, name)?;
    std::fs::write(cfg.run.out.join(format!("{name}.config.toml")), cfg.to_toml())
        .map_err(|e| Failure { code: EXIT_NUMERIC, message: e.to_string() })?;
    println!("wrote {}/{name}.json and {name}.csv", cfg.run.out.display());
    Ok(())
}

pub fn print_summary(r: &RatiosReport) {
    println!("{:>8} {:>22} {:>22} {:>12} {:>12}", "X", "lhs", "main", "abs_dev", "rel_dev");
    for rec in &r.records {
        println!(
            "{:>8} {:>22} {:>22} {:>12.4e} {:>12.4e}",
            rec.x,
            format!("{:.6}", rec.lhs),
            format!("{:.6}", rec.main),
            rec.abs_dev,
            rec.rel_dev
        );
    }
    match r.fitted_slope {
        Some(s) => println!(
            "fitted slope of log|lhs - main|: {s:.4}; relative slope {:.4} vs N - 1 = {:.4} (N = {:.4})",
            s - 1.0,
            r.predicted_rel_exponent,
            r.predicted_abs_exponent
        ),
        None => println!("fitted slope unavailable (fewer than 3 nonzero deviations)"),
    }
    println!("rel_dev decreasing from first to last X: {}", r.rel_dev_decreasing());
}

fn cmd_lvalue(cli: &Cli, cfg: &RunConfig, a: &LvalueArgs) -> Result<(), Failure> {
    let s = Complex64::new(a.s, a.s_im);
    let pol = &cfg.policy;
    let v: LValue = match a.kind {
        LKind::Dirichlet => quad_dirichlet_l(s, a.d, pol)?,
        LKind::Twist => modular_twist_l(s, &load_form(cli, cfg)?, a.d, pol)?,
        LKind::Sym2 => sym2_l(s, &load_form(cli, cfg)?, pol)?,
        LKind::L2twist => {
            if a.d <= 0 {
                return Err(Failure::config(format!("l2twist needs odd n > 0, got {}", a.d)));
            }
            l2_twist(s, &load_form(cli, cfg)?, a.d as u64, pol)?
        }
    };
    println!("value = {} +- {:e} ({} terms)", v.value, v.error_estimate, v.terms);
    Ok(())
}

fn cmd_gauss(n: u64, q: i64) -> Result<(), Failure> {
    let fast = g_fast(n, q)?;
    let def = g_def(n, q)?;
    println!("G_fast = {fast}");
    println!("G_def  = {def}");
    println!("|difference| = {:e}", (fast - def).norm());
    Ok(())
}

fn cmd_eulerprod(cli: &Cli, cfg: &RunConfig, a: &EulerArgs) -> Result<(), Failure> {
    let f = load_form(cli, cfg)?;
    let t = ShiftTriple::real(a.s, a.w, a.z);
    let cutoff = a.cutoff.min(f.n_max());
    let acc = p_product_accelerated(&t, &f, cutoff, &cfg.policy)?;
    let plain = p_product(&t, &f, cutoff)?;
    println!("P = {} +- {:e} (accelerated, {} primes)", acc.value, acc.tail_estimate, acc.primes_used);
    println!("P = {} +- {:e} (plain product)", plain.value, plain.tail_estimate);
    Ok(())
}

fn cmd_report(input: &PathBuf, csv: Option<&PathBuf>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(input).map_err(|e| Failure::config(format!("{}: {e}", input.display())))?;
    let report = RatiosReport::from_json(&text).map_err(|e| Failure::config(e.to_string()))?;
    println!("# {}", report.bound);
    print_summary(&report);
    let dest = csv.cloned().unwrap_or_else(|| input.with_extension("csv"));
    std::fs::write(&dest, report.to_csv()?).map_err(|e| Failure { code: EXIT_NUMERIC, message: e.to_string() })?;
    println!("wrote {}", dest.display());
    Ok(())
}
