//! Command-line front end: sample point sets on the rotation group, verify
//! the numerical identity table, and compute energies and reference bounds.
//!
//! Every command is deterministic given its arguments: randomized samplers
//! take explicit seeds (default 0), and all parallel reductions are
//! partition-fixed, so output files are byte-identical for any `--threads`
//! value. Relative `--out` paths are resolved against `$SO3KIT_OUT_DIR`
//! when that variable is set.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use so3kit::energy::{s_key, BoundsReport, EnergyReport};
use so3kit::kernel::KernelSpec;
use so3kit::pointset::PointSet;
use so3kit::sampling::derive_seed;
use so3kit::{
    arvo_sample, dpp_sample, green_energy, hardish_sample, riesz_energy, run_checks,
    uniform_sample, variance_experiment, GREEN_LOWER_COEFF, GREEN_UPPER_COEFF,
};

/// Default size cap for the deterministic sampler; lift with --allow-large.
const HARDISH_DEFAULT_CAP: u64 = 100_000;
/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "SO3KIT_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "so3kit",
    version,
    about = "Samplers, energies, and diagnostics for point sets on the rotation group"
)]
struct Cli {
    /// Worker thread cap (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a point set and write it as CSV plus a JSON metadata sidecar
    Sample(SampleArgs),
    /// Run the numerical identity table; nonzero exit if any check fails
    Verify(VerifyArgs),
    /// Compute pair energies of a stored point set
    Energy(EnergyArgs),
    /// Print theoretical bounds and expectations at a given size or level
    Bounds(BoundsArgs),
    /// Ball-count variance experiment for the determinantal sampler
    Variance(VarianceArgs),
    /// Energy trajectories for several samplers against the theoretical band
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerKind {
    Uniform,
    Arvo,
    Hardish,
    Dpp,
}

impl SamplerKind {
    fn name(self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Arvo => "arvo",
            SamplerKind::Hardish => "hardish",
            SamplerKind::Dpp => "dpp",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    sampler: SamplerKind,
    /// Number of points (all samplers except dpp)
    #[arg(long)]
    n: Option<u64>,
    /// Spectral level; implies n = (2L+1)(2L+2)(2L+3)/6 (dpp only)
    #[arg(long = "L", value_name = "L")]
    l: Option<u32>,
    /// RNG seed for the randomized samplers (default 0)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Lift the default 100000-point cap on the deterministic sampler
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only checks whose name contains this substring
    #[arg(long)]
    only: Option<String>,
}

#[derive(Args)]
struct EnergyArgs {
    /// Point-set CSV written by `sample`
    #[arg(long = "in")]
    input: PathBuf,
    /// Riesz exponents, comma-separated, each in (0, 3]
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    s: Vec<f64>,
    /// Also compute the Green energy
    #[arg(long)]
    green: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long = "L", value_name = "L")]
    l: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VarianceArgs {
    #[arg(long = "L", value_name = "L")]
    l: u32,
    /// Geodesic ball radius, in (0, pi/2)
    #[arg(long)]
    eps: f64,
    /// Number of independent ensemble draws (at least 100)
    #[arg(long)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    samplers: Vec<SamplerKind>,
    /// Sizes for the size-driven samplers (uniform, arvo, hardish)
    #[arg(long = "n-list", value_delimiter = ',')]
    n_list: Vec<u64>,
    /// Levels for the dpp sampler, which is driven by L, not n
    #[arg(long = "L-list", value_name = "L-LIST", value_delimiter = ',', default_value = "1,2,3")]
    l_list: Vec<u32>,
    /// Independent repetitions per size for the randomized samplers
    #[arg(long, default_value_t = 20)]
    runs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: cannot configure {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.cmd {
        Cmd::Sample(args) => cmd_sample(args).map(|()| ExitCode::SUCCESS),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Energy(args) => cmd_energy(args).map(|()| ExitCode::SUCCESS),
        Cmd::Bounds(args) => cmd_bounds(args).map(|()| ExitCode::SUCCESS),
        Cmd::Variance(args) => cmd_variance(args).map(|()| ExitCode::SUCCESS),
        Cmd::Compare(args) => cmd_compare(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Resolves a relative output path against `$SO3KIT_OUT_DIR` when set,
/// creating that directory if needed.
fn resolve_out(path: &Path) -> Result<PathBuf> {
    if path.is_absolute() {
        return Ok(path.to_owned());
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => {
            let dir = PathBuf::from(dir);
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating {} ({})", dir.display(), OUT_DIR_ENV))?;
            Ok(dir.join(path))
        }
        _ => Ok(path.to_owned()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Prints to stdout or writes to the resolved output path.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let path = resolve_out(path)?;
            write_text(&path, text)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// 17-significant-digit rendering used by every CSV cell, matching the
/// point-set file format.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let start = Instant::now();
    let seed = args.seed.unwrap_or(0);
    let set = match args.sampler {
        SamplerKind::Dpp => {
            let Some(l) = args.l else {
                bail!("the dpp sampler is driven by the spectral level: pass --L");
            };
            let spec = KernelSpec::new(l);
            if let Some(n) = args.n {
                if n != spec.n() {
                    bail!(
                        "--n {n} contradicts --L {l}: the determinantal ensemble at level {l} \
                         always has {} points (omit --n)",
                        spec.n()
                    );
                }
            }
            dpp_sample(&spec, seed)?
        }
        kind => {
            if args.l.is_some() {
                bail!(
                    "--L only applies to the dpp sampler; size the {} sampler with --n",
                    kind.name()
                );
            }
            let Some(n) = args.n else {
                bail!("pass --n for the {} sampler", kind.name());
            };
            if n == 0 {
                bail!("--n must be positive");
            }
            match kind {
                SamplerKind::Uniform => uniform_sample(n as usize, seed),
                SamplerKind::Arvo => arvo_sample(n, seed),
                SamplerKind::Hardish => {
                    if args.seed.is_some() {
                        eprintln!("note: the hardish construction is deterministic; --seed has no effect");
                    }
                    if n > HARDISH_DEFAULT_CAP && !args.allow_large {
                        bail!(
                            "n = {n} exceeds the default hardish cap of {HARDISH_DEFAULT_CAP}; \
                             pass --allow-large to proceed"
                        );
                    }
                    hardish_sample(n)
                }
                _ => unreachable!(),
            }
        }
    };
    let out = resolve_out(&args.out)?;
    set.write_csv(&out)
        .with_context(|| format!("writing {}", out.display()))?;
    println!(
        "{}: {} points -> {} ({} ms)",
        set.info.sampler,
        set.len(),
        out.display(),
        start.elapsed().as_millis()
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let results = run_checks(args.only.as_deref());
    if results.is_empty() {
        bail!("no check name contains {:?}", args.only.unwrap_or_default());
    }
    let name_width = results.iter().map(|r| r.name.len()).max().unwrap_or(5);
    println!("{:<name_width$}  {:>10}  {:>10}  status", "check", "tolerance", "observed");
    let mut failed = 0usize;
    for r in &results {
        let status = if r.passed() { "pass" } else { "FAIL" };
        println!(
            "{:<name_width$}  {:>10.3e}  {:>10.3e}  {status}",
            r.name, r.tolerance, r.observed
        );
        if !r.passed() {
            failed += 1;
        }
    }
    println!("{} checks, {} passed, {} failed", results.len(), results.len() - failed, failed);
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// Key/value CSV rendering of a bounds report, shared by `energy` and
/// `bounds`.
fn bounds_csv_rows(out: &mut String, b: &BoundsReport) {
    let _ = writeln!(out, "green_lower,{}", num(b.green_lower));
    let _ = writeln!(out, "green_upper,{}", num(b.green_upper));
    let _ = writeln!(out, "riesz3_dpp_expectation,{}", num(b.riesz3_dpp_expectation));
    for (k, v) in &b.continuous_riesz {
        let _ = writeln!(out, "continuous_riesz_{k},{}", num(*v));
    }
    for (k, v) in &b.riesz_subleading {
        let _ = writeln!(out, "riesz_subleading_{k},{}", num(*v));
    }
}

fn cmd_energy(args: EnergyArgs) -> Result<()> {
    let start = Instant::now();
    let input = args.input;
    let set = PointSet::read_csv(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    if set.len() < 2 {
        bail!("energies need at least two points, found {}", set.len());
    }
    let mut riesz = BTreeMap::new();
    for &s in &args.s {
        if !(s > 0.0 && s <= 3.0) {
            bail!("riesz exponent {s} outside (0, 3]");
        }
        riesz.insert(s_key(s), riesz_energy(&set, s)?);
    }
    let green = if args.green {
        Some(green_energy(&set)?)
    } else {
        None
    };
    let bounds = match set.info.l {
        Some(l) => BoundsReport::for_level(l),
        None => BoundsReport::for_size(set.len() as u64),
    };
    let report = EnergyReport {
        n: set.len(),
        sampler: set.info.sampler.clone(),
        seed: set.info.seed,
        riesz,
        green,
        bounds,
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    let text = match args.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&report)?;
            t.push('\n');
            t
        }
        Format::Csv => {
            let mut t = String::from("key,value\n");
            let _ = writeln!(t, "n,{}", report.n);
            let _ = writeln!(t, "sampler,{}", report.sampler);
            let _ = writeln!(
                t,
                "seed,{}",
                report.seed.map_or(String::new(), |s| s.to_string())
            );
            for (k, v) in &report.riesz {
                let _ = writeln!(t, "riesz_{k},{}", num(*v));
            }
            if let Some(g) = report.green {
                let _ = writeln!(t, "green,{}", num(g));
            }
            bounds_csv_rows(&mut t, &report.bounds);
            let _ = writeln!(t, "runtime_ms,{}", report.runtime_ms);
            t
        }
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let report = match (args.n, args.l) {
        (Some(_), Some(_)) => bail!("pass either --n or --L, not both"),
        (None, None) => bail!("pass --n <size> or --L <level>"),
        (Some(n), None) => {
            if n == 0 {
                bail!("--n must be positive");
            }
            BoundsReport::for_size(n)
        }
        (None, Some(l)) => BoundsReport::for_level(l),
    };
    let text = match args.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&report)?;
            t.push('\n');
            t
        }
        Format::Csv => {
            let mut t = String::from("key,value\n");
            let _ = writeln!(t, "n,{}", report.n);
            if let Some(l) = report.l {
                let _ = writeln!(t, "L,{l}");
            }
            bounds_csv_rows(&mut t, &report);
            t
        }
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_variance(args: VarianceArgs) -> Result<()> {
    if args.l > 3 {
        bail!("the experiment grid covers levels 0 through 3, got {}", args.l);
    }
    if !(args.eps > 0.0 && args.eps < std::f64::consts::PI / 2.0) {
        bail!("--eps must lie in (0, pi/2), got {}", args.eps);
    }
    if args.runs < 100 {
        bail!("--runs must be at least 100, got {}", args.runs);
    }
    let start = Instant::now();
    let exp = variance_experiment(args.l, args.eps, args.runs, args.seed);
    eprintln!(
        "L={} eps={} runs={}: empirical variance {:.6}, exact {:.6} (se {:.1e}), iid {:.6} ({} ms)",
        exp.l,
        exp.eps,
        exp.runs,
        exp.empirical_variance,
        exp.exact_variance,
        exp.exact_variance_se,
        exp.iid_variance,
        start.elapsed().as_millis()
    );
    let text = match args.format {
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&exp)?;
            t.push('\n');
            t
        }
        Format::Csv => {
            let mut t = String::from("key,value\n");
            let _ = writeln!(t, "L,{}", exp.l);
            let _ = writeln!(t, "eps,{}", num(exp.eps));
            let _ = writeln!(t, "runs,{}", exp.runs);
            let _ = writeln!(t, "n,{}", exp.n);
            let _ = writeln!(t, "seed,{}", exp.seed);
            let _ = writeln!(t, "empirical_mean,{}", num(exp.empirical_mean));
            let _ = writeln!(t, "empirical_variance,{}", num(exp.empirical_variance));
            let _ = writeln!(t, "expected_mean,{}", num(exp.expected_mean));
            let _ = writeln!(t, "iid_variance,{}", num(exp.iid_variance));
            let _ = writeln!(t, "exact_variance,{}", num(exp.exact_variance));
            let _ = writeln!(t, "exact_variance_se,{}", num(exp.exact_variance_se));
            if let Some(sv) = exp.scaled_variance {
                let _ = writeln!(t, "scaled_variance,{}", num(sv));
            }
            for (i, c) in exp.counts.iter().enumerate() {
                let _ = writeln!(t, "count_{i},{c}");
            }
            t
        }
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let start = Instant::now();
    if args.runs == 0 {
        bail!("--runs must be positive");
    }
    if args.n_list.is_empty() && args.samplers.iter().any(|&s| s != SamplerKind::Dpp) {
        bail!("pass --n-list for the size-driven samplers");
    }
    let mut reports: Vec<EnergyReport> = Vec::new();

    for &sampler in &args.samplers {
        match sampler {
            SamplerKind::Hardish => {
                for &n in &args.n_list {
                    if n > HARDISH_DEFAULT_CAP {
                        bail!("n = {n} exceeds the hardish cap of {HARDISH_DEFAULT_CAP}");
                    }
                    reports.push(compare_row(hardish_sample(n))?);
                }
            }
            SamplerKind::Uniform | SamplerKind::Arvo => {
                for &n in &args.n_list {
                    let per_size = derive_seed(args.seed, n);
                    for run in 0..u64::from(args.runs) {
                        let seed = derive_seed(per_size, run);
                        let set = if sampler == SamplerKind::Uniform {
                            uniform_sample(n as usize, seed)
                        } else {
                            arvo_sample(n, seed)
                        };
                        reports.push(compare_row(set)?);
                    }
                }
            }
            SamplerKind::Dpp => {
                // the determinantal ensemble is driven by the level, so it
                // walks --L-list instead of --n-list
                for &l in &args.l_list {
                    let spec = KernelSpec::new(l);
                    let per_level = derive_seed(args.seed, 1_000_000 + u64::from(l));
                    for run in 0..u64::from(args.runs) {
                        let set = dpp_sample(&spec, derive_seed(per_level, run))?;
                        reports.push(compare_row(set)?);
                    }
                }
            }
        }
    }

    let text = match args.format {
        Format::Csv => {
            let mut t = String::from("sampler,n,energy,energy_over_n43,lower_band,upper_band\n");
            for r in &reports {
                let energy = r.green.expect("compare rows always carry the green energy");
                let scaled = energy / (r.n as f64).powf(4.0 / 3.0);
                let _ = writeln!(
                    t,
                    "{},{},{},{},{},{}",
                    r.sampler,
                    r.n,
                    num(energy),
                    num(scaled),
                    num(GREEN_LOWER_COEFF),
                    num(GREEN_UPPER_COEFF)
                );
            }
            t
        }
        Format::Json => {
            let mut t = serde_json::to_string_pretty(&reports)?;
            t.push('\n');
            t
        }
    };
    let out = resolve_out(&args.out)?;
    write_text(&out, &text)?;
    println!(
        "{} rows -> {} ({} ms)",
        reports.len(),
        out.display(),
        start.elapsed().as_millis()
    );
    Ok(())
}

fn compare_row(set: PointSet) -> Result<EnergyReport> {
    let start = Instant::now();
    let green = green_energy(&set)?;
    let bounds = match set.info.l {
        Some(l) => BoundsReport::for_level(l),
        None => BoundsReport::for_size(set.len() as u64),
    };
    Ok(EnergyReport {
        n: set.len(),
        sampler: set.info.sampler.clone(),
        seed: set.info.seed,
        riesz: BTreeMap::new(),
        green: Some(green),
        bounds,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
