//! Command-line frontend for the `lagens` library.
//!
//! Five subcommands cover the library surface: `equilibrium` (measure
//! record and density grid), `partition` (two-route log-partition sweep),
//! `density` (exact and edge-kernel density grids at fixed sizes), `fit`
//! (expansion fit of a partition sweep with parity and decay diagnostics),
//! and `expect` (linear-statistic sweep with a fitted expansion).
//!
//! Outputs are plain text: CSV files with a header row and flat
//! `key=value` reports, every number printed at full working precision so
//! a rerun with the same configuration is byte-identical.  Exit codes: 0
//! on success, 2 for configuration errors, 3 for numerical failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand};
use lagens::asymptotics::{
    e0_energy_difference, e0_path_oracle, fit_expansion, remainder_ratios, ExpansionFit,
};
use lagens::correlation::{expect, rho_cd, LinearStatistic};
use lagens::equilibrium::EquilibriumData;
use lagens::kernels::{hard_edge_density, soft_edge_density, EdgeMaps};
use lagens::orthopoly::{auto_digits, stieltjes_recurrence, WeightSpec};
use lagens::partition::{log_ratio_sweep, PartitionRow};
use lagens::potential::parse_decimal;
use lagens::{format_sig, Error, Potential, PrecisionContext};
use rug::ops::{CompleteRound, Pow};
use rug::Float;

#[derive(Parser)]
#[command(
    name = "lagens",
    version,
    about = "High-precision computations for Laguerre-type ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equilibrium measure; write its record and a density grid.
    Equilibrium(EquilibriumArgs),
    /// Compute log Z_N by both routes over the size list.
    Partition(PartitionArgs),
    /// Tabulate the exact density and its edge approximations on a grid.
    Density(DensityArgs),
    /// Fit a partition sweep in powers of N and report diagnostics.
    Fit(FitArgs),
    /// Sweep a linear statistic over sizes and fit its expansion.
    Expect(ExpectArgs),
}

#[derive(Args)]
struct Shared {
    /// Potential block `t=...;alpha=...` — inline text, or a path to a
    /// file holding the same key=value lines.
    #[arg(long, default_value = "t=;alpha=0")]
    potential: String,
    /// Working decimal precision (default: subcommand-specific, at least
    /// 40; sweeps over large N raise it automatically).
    #[arg(long)]
    digits: Option<u32>,
    /// Output directory, created when missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Lower grid edge (decimal or fraction; default 0).
    #[arg(long)]
    grid_min: Option<String>,
    /// Upper grid edge (default: the support endpoint β).
    #[arg(long)]
    grid_max: Option<String>,
    /// Number of grid points (midpoints of equal subintervals).
    #[arg(long, default_value_t = 200)]
    grid_points: u32,
}

#[derive(Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated matrix sizes.
    #[arg(long = "n-list", default_value = "8,12,16,24,32,48")]
    n_list: String,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated matrix sizes (one grid file per size).
    #[arg(long = "n-list", default_value = "20")]
    n_list: String,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated matrix sizes for the partition sweep.
    #[arg(long = "n-list", default_value = "8,12,16,24,32,48")]
    n_list: String,
    /// Comma-separated powers of N to fit.
    #[arg(long, default_value = "2,0,-2,-4")]
    basis: String,
}

#[derive(Args)]
struct ExpectArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated matrix sizes for the statistic sweep.
    #[arg(long = "n-list", default_value = "8,12,16,24,32")]
    n_list: String,
    /// Test function: `1`, `x`, or a monomial `x^K`.
    #[arg(long, default_value = "x")]
    theta: String,
    /// Comma-separated powers of N to fit.
    #[arg(long, default_value = "0,-2,-4")]
    basis: String,
}

/// A classified failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidPotential(_) | Error::InvalidPrecision(_) | Error::Parse(_) => 2,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Equilibrium(args) => cmd_equilibrium(args),
        Command::Partition(args) => cmd_partition(args),
        Command::Density(args) => cmd_density(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Expect(args) => cmd_expect(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration helpers

/// Resolve `--potential`: an existing file path is read, anything else is
/// parsed inline.
fn load_potential(spec: &str) -> Result<Potential, Failure> {
    let path = Path::new(spec);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|e| {
            Failure::config(format!("cannot read potential file `{spec}`: {e}"))
        })?
    } else {
        spec.to_string()
    };
    Ok(Potential::parse(&text)?)
}

fn parse_n_list(s: &str) -> Result<Vec<u32>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let item = part.trim();
        if item.is_empty() {
            continue;
        }
        let n: u32 = item
            .parse()
            .map_err(|_| Failure::config(format!("invalid size `{item}` in n-list")))?;
        if n == 0 {
            return Err(Failure::config("sizes in n-list must be positive"));
        }
        out.push(n);
    }
    if out.is_empty() {
        return Err(Failure::config("n-list is empty"));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn parse_basis(s: &str) -> Result<Vec<i32>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let item = part.trim();
        if item.is_empty() {
            continue;
        }
        let p: i32 = item
            .parse()
            .map_err(|_| Failure::config(format!("invalid power `{item}` in basis")))?;
        if out.contains(&p) {
            return Err(Failure::config(format!("duplicate power {p} in basis")));
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(Failure::config("basis is empty"));
    }
    Ok(out)
}

/// Monomial degree of the `--theta` spec.
fn parse_theta(s: &str) -> Result<u32, Failure> {
    let trimmed = s.trim();
    if trimmed == "1" {
        return Ok(0);
    }
    if trimmed == "x" {
        return Ok(1);
    }
    if let Some(rest) = trimmed.strip_prefix("x^") {
        if let Ok(k) = rest.parse::<u32>() {
            if (1..=64).contains(&k) {
                return Ok(k);
            }
        }
    }
    Err(Failure::config(format!(
        "unsupported theta `{s}`: use 1, x, or x^K with 1 ≤ K ≤ 64"
    )))
}

/// Working precision: the explicit flag, or a floor raised for the largest
/// requested size so recurrence tables and Hankel factorizations stay
/// stable.
fn resolve_digits(explicit: Option<u32>, sizes: &[u32], floor: u32) -> Result<u32, Failure> {
    if let Some(d) = explicit {
        return Ok(d);
    }
    let auto = sizes
        .iter()
        .map(|&n| auto_digits(n as usize))
        .max()
        .unwrap_or(floor);
    Ok(auto.max(floor))
}

fn context(digits: u32) -> Result<PrecisionContext, Failure> {
    Ok(PrecisionContext::new(digits)?)
}

// ---------------------------------------------------------------------------
// Output helpers

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure {
        code: 3,
        message: format!("cannot create output directory `{}`: {e}", dir.display()),
    })
}

fn write_output(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content).map_err(|e| Failure {
        code: 3,
        message: format!("cannot write `{}`: {e}", path.display()),
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Midpoint grid over `[min, max]` with `points` cells.
fn midpoint_grid(
    min: &Float,
    max: &Float,
    points: u32,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>, Failure> {
    if points == 0 {
        return Err(Failure::config("grid needs at least one point"));
    }
    if !(min < max) {
        return Err(Failure::config("grid-min must lie below grid-max"));
    }
    let bits = ctx.bits();
    let step = (max - min).complete(bits) / points;
    let mut out = Vec::with_capacity(points as usize);
    for i in 0..points {
        let mut x = Float::with_val(bits, 2 * i + 1);
        x *= &step;
        x >>= 1u32;
        x += min;
        out.push(x);
    }
    Ok(out)
}

fn resolve_grid(
    grid: &GridArgs,
    beta: &Float,
    ctx: &PrecisionContext,
) -> Result<Vec<Float>, Failure> {
    let min = match &grid.grid_min {
        Some(s) => ctx.from_rational(&parse_decimal(s)?),
        None => ctx.zero(),
    };
    let max = match &grid.grid_max {
        Some(s) => ctx.from_rational(&parse_decimal(s)?),
        None => beta.clone(),
    };
    midpoint_grid(&min, &max, grid.grid_points, ctx)
}

/// Run one job per item on its own thread, preserving input order.
fn map_parallel<T, R, F>(items: &[T], job: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    thread::scope(|scope| {
        let handles: Vec<_> = items
            .iter()
            .map(|item| scope.spawn(|| job(item)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_equilibrium(args: EquilibriumArgs) -> Result<(), Failure> {
    let p = load_potential(&args.shared.potential)?;
    let digits = args.shared.digits.unwrap_or(40);
    let c = context(digits)?;
    let eq = EquilibriumData::solve(&p, &c)?;
    ensure_out_dir(&args.shared.out)?;

    let mut record = String::new();
    let _ = writeln!(record, "potential={}", p.key());
    let _ = writeln!(record, "digits={digits}");
    let _ = writeln!(record, "beta={}", format_sig(eq.beta(), digits));
    let coeffs: Vec<String> = eq
        .h_coeffs()
        .iter()
        .map(|h| format_sig(h, digits))
        .collect();
    let _ = writeln!(record, "h_coeffs={}", coeffs.join(","));
    let _ = writeln!(record, "l_V={}", format_sig(eq.l_v(), digits));
    let _ = writeln!(record, "h_min={}", format_sig(eq.h_min(), digits));
    write_output(&args.shared.out.join("equilibrium.txt"), &record)?;

    let grid = resolve_grid(&args.grid, eq.beta(), &c)?;
    let mut csv = String::from("x,psi_V\n");
    for x in &grid {
        let _ = writeln!(
            csv,
            "{},{}",
            format_sig(x, digits),
            format_sig(&eq.density(x, &c), digits)
        );
    }
    write_output(&args.shared.out.join("equilibrium_density.csv"), &csv)
}

fn cmd_partition(args: PartitionArgs) -> Result<(), Failure> {
    let p = load_potential(&args.shared.potential)?;
    let sizes = parse_n_list(&args.n_list)?;
    let digits = resolve_digits(args.shared.digits, &sizes, 40)?;
    let c = context(digits)?;
    ensure_out_dir(&args.shared.out)?;

    let rows: Vec<Result<PartitionRow, Failure>> = map_parallel(&sizes, |&n| {
        log_ratio_sweep(&p, &[n], &c)
            .map(|table| table.rows()[0].clone())
            .map_err(|e| {
                let mut failure = Failure::from(e);
                failure.message = format!("N = {n}: {}", failure.message);
                failure
            })
    });

    let mut csv = String::from("N,log_Z_gamma,log_Z_hankel,log_Z0,log_ratio,agreement\n");
    for row in rows {
        let row = row?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            row.n,
            format_sig(&row.log_z_gamma, digits),
            format_sig(&row.log_z_hankel, digits),
            format_sig(&row.log_z0, digits),
            format_sig(&row.log_ratio, digits),
            format_sig(&row.agreement, digits)
        );
    }
    write_output(&args.shared.out.join("partition.csv"), &csv)
}

fn cmd_density(args: DensityArgs) -> Result<(), Failure> {
    let p = load_potential(&args.shared.potential)?;
    let sizes = parse_n_list(&args.n_list)?;
    let digits = args.shared.digits.unwrap_or(40);
    let c = context(digits)?;
    let eq = EquilibriumData::solve(&p, &c)?;
    let grid = resolve_grid(&args.grid, eq.beta(), &c)?;
    ensure_out_dir(&args.shared.out)?;

    for &n in &sizes {
        let spec = WeightSpec::new(p.clone(), n)?;
        let rec = stieltjes_recurrence(&spec, n as usize, &c)?;
        let maps = EdgeMaps::new(eq.clone(), n, &c)?;
        let beta = eq.beta();

        let lines: Vec<Result<String, Failure>> = map_parallel(&grid, |x| {
            let rho = rho_cd(&rec, x, &c)?;
            let hard = if x > &0u32 && x <= maps.hard_cutoff() {
                format_sig(&hard_edge_density(&maps, x, &c)?, digits)
            } else {
                String::new()
            };
            let dist = (x - beta).complete(c.bits()).abs();
            let soft = if dist <= *maps.soft_window() {
                format_sig(&soft_edge_density(&maps, x, &c)?, digits)
            } else {
                String::new()
            };
            Ok(format!(
                "{},{},{},{},{}",
                format_sig(x, digits),
                format_sig(&rho, digits),
                hard,
                soft,
                format_sig(&eq.density(x, &c), digits)
            ))
        });

        let mut csv = String::from("x,rho_exact,hard_edge_approx,soft_edge_approx,psi_V\n");
        for line in lines {
            csv.push_str(&line?);
            csv.push('\n');
        }
        write_output(&args.shared.out.join(format!("density_N{n}.csv")), &csv)?;
    }
    Ok(())
}

/// Shared by `fit` and `expect`: serialize the fit block of a report.
fn describe_fit(
    report: &mut String,
    fit: &ExpansionFit,
    keep: usize,
    digits: u32,
    ctx: &PrecisionContext,
) {
    for (p, coeff) in fit.basis().iter().zip(fit.coeffs()) {
        let _ = writeln!(report, "coeff_{p}={}", format_sig(coeff, digits));
    }
    match fit.odd_probe() {
        Some(probe) => {
            let _ = writeln!(report, "odd_probe={}", format_sig(probe, digits));
        }
        None => {
            let _ = writeln!(report, "odd_probe=none");
        }
    }
    let _ = writeln!(report, "condition={}", format_sig(fit.condition(), digits));
    let _ = writeln!(report, "remainder_keep={keep}");
    if let Ok(ratios) = remainder_ratios(fit, keep, ctx) {
        for (n, doubled, ratio) in &ratios {
            let _ = writeln!(
                report,
                "ratio_{n}_{doubled}={}",
                format_sig(ratio, digits)
            );
        }
    }
}

/// Number of leading fitted terms kept by the decay diagnostic: the
/// non-decaying powers, at least one.
fn remainder_keep(basis: &[i32]) -> usize {
    basis.iter().filter(|p| **p >= 0).count().max(1)
}

fn cmd_fit(args: FitArgs) -> Result<(), Failure> {
    let p = load_potential(&args.shared.potential)?;
    let sizes = parse_n_list(&args.n_list)?;
    let basis = parse_basis(&args.basis)?;
    if sizes.len() < basis.len() {
        return Err(Failure::config(format!(
            "n-list supplies {} samples for {} basis powers",
            sizes.len(),
            basis.len()
        )));
    }
    let digits = resolve_digits(args.shared.digits, &sizes, 40)?;
    let c = context(digits)?;
    ensure_out_dir(&args.shared.out)?;

    let rows: Vec<Result<(u32, Float), Failure>> = map_parallel(&sizes, |&n| {
        log_ratio_sweep(&p, &[n], &c)
            .map(|table| (n, table.rows()[0].log_ratio.clone()))
            .map_err(|e| {
                let mut failure = Failure::from(e);
                failure.message = format!("N = {n}: {}", failure.message);
                failure
            })
    });
    let samples: Vec<(u32, Float)> = rows.into_iter().collect::<Result<_, _>>()?;

    let fit = fit_expansion(&samples, &basis, &c)?;
    let oracle_path = e0_path_oracle(&p, &c)?;
    let oracle_energy = e0_energy_difference(&p, &c)?;
    let leading = &fit.coeffs()[0];
    let abs_gap = (leading - &oracle_path).complete(c.bits()).abs();
    let mut denom = oracle_path.clone().abs();
    let floor = c.pow10(-10);
    if denom < floor {
        denom = floor;
    }
    let rel_gap = (&abs_gap / &denom).complete(c.bits());

    let mut report = String::new();
    let _ = writeln!(report, "potential={}", p.key());
    let _ = writeln!(report, "digits={digits}");
    let sizes_text: Vec<String> = sizes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(report, "n_list={}", sizes_text.join(","));
    let basis_text: Vec<String> = basis.iter().map(|p| p.to_string()).collect();
    let _ = writeln!(report, "basis={}", basis_text.join(","));
    let _ = writeln!(report, "e0_fit={}", format_sig(leading, digits));
    let _ = writeln!(report, "e0_path_oracle={}", format_sig(&oracle_path, digits));
    let _ = writeln!(
        report,
        "e0_energy_difference={}",
        format_sig(&oracle_energy, digits)
    );
    let _ = writeln!(report, "e0_abs_gap={}", format_sig(&abs_gap, digits));
    let _ = writeln!(report, "e0_rel_gap={}", format_sig(&rel_gap, digits));
    describe_fit(&mut report, &fit, remainder_keep(&basis), digits, &c);
    write_output(&args.shared.out.join("fit_report.txt"), &report)?;

    let mut csv = String::from("N,log_ratio,residual\n");
    for ((n, y), (_, r)) in samples.iter().zip(fit.residuals()) {
        let _ = writeln!(
            csv,
            "{},{},{}",
            n,
            format_sig(y, digits),
            format_sig(r, digits)
        );
    }
    write_output(&args.shared.out.join("fit_residuals.csv"), &csv)
}

fn cmd_expect(args: ExpectArgs) -> Result<(), Failure> {
    let p = load_potential(&args.shared.potential)?;
    let sizes = parse_n_list(&args.n_list)?;
    let basis = parse_basis(&args.basis)?;
    if sizes.len() < basis.len() {
        return Err(Failure::config(format!(
            "n-list supplies {} samples for {} basis powers",
            sizes.len(),
            basis.len()
        )));
    }
    let degree = parse_theta(&args.theta)?;
    let digits = args.shared.digits.unwrap_or(40);
    let c = context(digits)?;
    ensure_out_dir(&args.shared.out)?;

    let stat = match degree {
        0 => LinearStatistic::new("1", |_, ctx| ctx.f(1)).with_degree_hint(0),
        1 => LinearStatistic::new("x", |x, _| x.clone()).with_degree_hint(1),
        k => LinearStatistic::new(format!("x^{k}"), move |x, _| x.clone().pow(k))
            .with_degree_hint(k),
    };

    let rows: Vec<Result<(u32, Float), Failure>> = map_parallel(&sizes, |&n| {
        let spec = WeightSpec::new(p.clone(), n)?;
        let nmax = n as usize + degree.div_ceil(2) as usize + 2;
        let rec = stieltjes_recurrence(&spec, nmax, &c)?;
        let value = expect(&stat, &rec, &c).map_err(|e| {
            let mut failure = Failure::from(e);
            failure.message = format!("N = {n}: {}", failure.message);
            failure
        })?;
        Ok((n, value))
    });
    let samples: Vec<(u32, Float)> = rows.into_iter().collect::<Result<_, _>>()?;

    let mut csv = String::from("N,value\n");
    for (n, value) in &samples {
        let _ = writeln!(csv, "{},{}", n, format_sig(value, digits));
    }
    write_output(&args.shared.out.join("expect.csv"), &csv)?;

    let fit = fit_expansion(&samples, &basis, &c)?;
    let mut report = String::new();
    let _ = writeln!(report, "potential={}", p.key());
    let _ = writeln!(report, "digits={digits}");
    let _ = writeln!(report, "theta={}", stat.description());
    let sizes_text: Vec<String> = sizes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(report, "n_list={}", sizes_text.join(","));
    let basis_text: Vec<String> = basis.iter().map(|p| p.to_string()).collect();
    let _ = writeln!(report, "basis={}", basis_text.join(","));
    // The equilibrium limit of E[x^k] for reference against the leading
    // fitted term.
    let eq = EquilibriumData::solve(&p, &c)?;
    let limit = if degree == 0 {
        c.f(1)
    } else {
        eq.equilibrium_moment(degree, &c)?
    };
    let _ = writeln!(
        report,
        "equilibrium_moment={}",
        format_sig(&limit, digits)
    );
    describe_fit(&mut report, &fit, remainder_keep(&basis), digits, &c);
    write_output(&args.shared.out.join("expect_report.txt"), &report)
}
