//! Command-line front end. Results go to stdout as `key=value` lines, CSV or
//! JSON; diagnostics go to stderr.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;

use crate::asymptotics::{rho1_boundary, BoundaryCase};
use crate::continuation::continuation_report;
use crate::error::{Error, Result};
use crate::experiments::{linear_edges, run_experiment, write_profile, ExperimentConfig, Format};
use crate::intensity::{rho1, Method};
use crate::presets::{self, CATALOGUE};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GAF_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gaf-zeros", version, about = "Zero intensities of Gaussian power series with stationary coefficients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First intensity ρ₁ at one point of the disk.
    Density {
        #[arg(long)]
        preset: String,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "z")]
        r: Option<f64>,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "z")]
        phi: Option<f64>,
        /// Point as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// spectral, qform or ek; defaults to qform for densities, spectral otherwise.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Boundary regime and expansion coefficients of ρ₁ in direction φ.
    Asymptote {
        #[arg(long)]
        preset: String,
        #[arg(long, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo zero counts against ∫ρ₁ on a polar grid.
    Experiment {
        #[arg(long)]
        preset: String,
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        #[arg(long, default_value_t = 0.0)]
        rmin: f64,
        #[arg(long, default_value_t = 0.95)]
        rmax: f64,
        #[arg(long, default_value_t = 1)]
        rbins: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = -PI)]
        phi_lo: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = PI)]
        phi_hi: f64,
        #[arg(long, default_value_t = 1)]
        phibins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "csv")]
        format: Format,
        #[arg(long)]
        method: Option<Method>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Local radius of convergence and regular/singular arcs.
    Continuation {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 512)]
        kmax: usize,
        #[arg(long)]
        json: bool,
    },
    /// Lists the preset grammar.
    Presets,
}

fn parse_point(s: &str) -> Result<Complex64> {
    let (a, b) = s.split_once(',').ok_or_else(|| Error::Parse(format!("expected re,im, got '{s}'")))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{t}'")));
    Ok(Complex64::new(num(a)?, num(b)?))
}

/// Applies [`THREADS_ENV`] to the global worker pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Parse(format!("{THREADS_ENV} must be positive")));
        }
        // A pool that is already initialized keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Density { preset, r, phi, z, method } => {
            let f = presets::parse(&preset)?;
            let point = match (z, r, phi) {
                (Some(z), _, _) => parse_point(&z)?,
                (None, Some(r), phi) => Complex64::from_polar(r, phi.unwrap_or(0.0)),
                (None, None, _) => return Err(Error::Parse("give either --z or --r [--phi]".into())),
            };
            let method = method.unwrap_or_else(|| Method::default_for(&f));
            let value = rho1(&f, point, method)?;
            writeln!(out, "value={value}")?;
            writeln!(out, "method={method}")?;
            writeln!(out, "preset={preset}")?;
            writeln!(out, "r={}", point.norm())?;
            writeln!(out, "phi={}", point.arg())?;
        }
        Command::Asymptote { preset, phi, json } => {
            let f = presets::parse(&preset)?;
            let b = rho1_boundary(&f, phi)?;
            if json {
                serde_json::to_writer_pretty(&mut *out, &b)?;
                writeln!(out)?;
                return Ok(());
            }
            writeln!(out, "preset={preset}")?;
            writeln!(out, "phi={phi}")?;
            writeln!(out, "case={}", b.case)?;
            for (k, c) in &b.report.coefficients {
                writeln!(out, "coef[{k}]={c}")?;
            }
            match b.case {
                // ρ₁ = (1/π)(y⁻² + correction) + o(1)
                BoundaryCase::Positive => writeln!(out, "correction={}", b.report.coefficient(0) * PI)?,
                // ρ₁ = (1/π)(leading / y) + O(1)
                BoundaryCase::Zero => writeln!(out, "leading={}", b.report.coefficient(-1) * PI)?,
                BoundaryCase::DoubleZero => writeln!(out, "limit={}", b.report.coefficient(0))?,
            }
            for (k, v) in &b.report.inputs {
                writeln!(out, "input[{k}]={v}")?;
            }
        }
        Command::Experiment {
            preset,
            n,
            replicas,
            rmin,
            rmax,
            rbins,
            phi_lo,
            phi_hi,
            phibins,
            seed,
            format,
            method,
            out: path,
        } => {
            if rbins == 0 || phibins == 0 {
                return Err(Error::domain("bin counts must be positive"));
            }
            let f = presets::parse(&preset)?;
            let mut cfg = ExperimentConfig::new(f, n, replicas, seed);
            cfg.r_edges = linear_edges(rmin, rmax, rbins);
            cfg.phi_edges = linear_edges(phi_lo, phi_hi, phibins);
            if let Some(m) = method {
                cfg.method = m;
            }
            let profile = run_experiment(&cfg)?;
            for w in &profile.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "total: empirical {} ± {} (se), analytic {}",
                profile.total.empirical_mean, profile.total.empirical_se, profile.total.analytic
            );
            match path {
                Some(p) => crate::experiments::emit_profile(&profile, &p, format)?,
                None => write_profile(&profile, &mut *out, format)?,
            }
        }
        Command::Continuation { preset, r, kmax, json } => {
            let f = presets::parse(&preset)?;
            let rep = continuation_report(&f, r, kmax)?;
            if let Some(w) = &rep.rho_estimate.warning {
                eprintln!("warning: {w}");
            }
            if json {
                serde_json::to_writer_pretty(&mut *out, &rep)?;
                writeln!(out)?;
                return Ok(());
            }
            writeln!(out, "preset={preset}")?;
            writeln!(out, "r={r}")?;
            writeln!(out, "k_max={kmax}")?;
            writeln!(out, "rho={}", rep.rho_estimate.rho)?;
            writeln!(out, "rho_two_point={}", rep.rho_estimate.two_point)?;
            writeln!(out, "rho_raw={}", rep.rho_estimate.raw)?;
            writeln!(out, "ln_var[{kmax}]={}", rep.ln_var_sequence[kmax])?;
            match &rep.arc_classification {
                Some(arcs) => {
                    writeln!(out, "arcs={}", arcs.len())?;
                    for (i, a) in arcs.iter().enumerate() {
                        writeln!(out, "arc[{i}].kind={}", a.arc.kind)?;
                        writeln!(out, "arc[{i}].start={}", a.arc.start)?;
                        writeln!(out, "arc[{i}].end={}", a.arc.end)?;
                        if let (Some(lb), Some(rho)) = (a.lower_bound, a.rho_at_center) {
                            writeln!(out, "arc[{i}].lower_bound={lb}")?;
                            writeln!(out, "arc[{i}].rho_at_center={rho}")?;
                        }
                    }
                }
                None => eprintln!("support unknown: arc classification skipped"),
            }
        }
        Command::Presets => {
            for (i, p) in CATALOGUE.iter().enumerate() {
                writeln!(out, "preset[{i}].syntax={}", p.syntax)?;
                writeln!(out, "preset[{i}].example={}", p.example)?;
                writeln!(out, "preset[{i}].description={}", p.description)?;
            }
        }
    }
    Ok(())
}
