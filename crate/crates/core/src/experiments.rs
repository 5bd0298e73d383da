//! Replicated sample → truncate → solve → bin runs, compared with ∫ρ₁.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intensity::{expected_count, Cell, Method};
use crate::sampler::{derive_seed, SpectralGrid};
use crate::spectral_measure::SpectralMeasure;
use crate::zeros::{count_points, find_roots, Region};

/// Largest outer radius accepted by [`run_experiment`].
pub const R_MAX_CAP: f64 = 0.99;
/// Default outer radius.
pub const DEFAULT_R_MAX: f64 = 0.95;
/// Relative tail variance `r^{2(N+1)}` above which a truncation warning is attached.
pub const TRUNCATION_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub measure: SpectralMeasure,
    pub n: usize,
    pub replicas: usize,
    /// Increasing radii, first may be 0.
    pub r_edges: Vec<f64>,
    /// Increasing angles spanning at most 2π.
    pub phi_edges: Vec<f64>,
    pub seed: u64,
    pub method: Method,
}

/// `bins + 1` equally spaced points from `lo` to `hi`.
pub fn linear_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
}

impl ExperimentConfig {
    /// One full disk of radius [`DEFAULT_R_MAX`].
    pub fn new(measure: SpectralMeasure, n: usize, replicas: usize, seed: u64) -> Self {
        let method = Method::default_for(&measure);
        Self {
            measure,
            n,
            replicas,
            r_edges: vec![0.0, DEFAULT_R_MAX],
            phi_edges: vec![-PI, PI],
            seed,
            method,
        }
    }

    pub fn radial_bins(mut self, lo: f64, hi: f64, bins: usize) -> Self {
        self.r_edges = linear_edges(lo, hi, bins);
        self
    }

    pub fn angular_bins(mut self, lo: f64, hi: f64, bins: usize) -> Self {
        self.phi_edges = linear_edges(lo, hi, bins);
        self
    }

    fn validate(&self) -> Result<()> {
        let increasing = |e: &[f64]| e.len() >= 2 && e.windows(2).all(|w| w[1] > w[0]) && e.iter().all(|v| v.is_finite());
        if !increasing(&self.r_edges) || self.r_edges[0] < 0.0 {
            return Err(Error::domain("radial edges must increase from a nonnegative radius"));
        }
        let r_max = self.r_max();
        if r_max > R_MAX_CAP {
            return Err(Error::domain(format!("r_max = {r_max} exceeds {R_MAX_CAP}")));
        }
        if !increasing(&self.phi_edges) || self.phi_edges[self.phi_edges.len() - 1] - self.phi_edges[0] > 2.0 * PI + 1e-12 {
            return Err(Error::domain("angular edges must increase and span at most 2π"));
        }
        if self.replicas < 2 {
            return Err(Error::domain("need at least two replicas"));
        }
        if self.n < 1 {
            return Err(Error::domain("degree must be at least 1"));
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        self.r_edges[self.r_edges.len() - 1]
    }

    fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for r in self.r_edges.windows(2) {
            for p in self.phi_edges.windows(2) {
                out.push(Cell { r_lo: r[0], r_hi: r[1], phi_lo: p[0], phi_hi: p[1] });
            }
        }
        out
    }

    fn outer(&self) -> Cell {
        Cell {
            r_lo: self.r_edges[0],
            r_hi: self.r_max(),
            phi_lo: self.phi_edges[0],
            phi_hi: self.phi_edges[self.phi_edges.len() - 1],
        }
    }
}

fn region(c: &Cell) -> Region {
    if c.phi_hi - c.phi_lo >= 2.0 * PI - 1e-12 {
        if c.r_lo == 0.0 {
            Region::Disk { r: c.r_hi }
        } else {
            Region::Annulus { r_lo: c.r_lo, r_hi: c.r_hi }
        }
    } else {
        Region::Sector { r_lo: c.r_lo, r_hi: c.r_hi, phi_lo: c.phi_lo, phi_hi: c.phi_hi }
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCell {
    pub r_lo: f64,
    pub r_hi: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub analytic: f64,
    pub replicas: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

/// Raised when the truncated tail may bias counts near `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationBiasWarning {
    pub r_max: f64,
    pub n: usize,
    /// `r_max^{2(N+1)}`, the tail variance relative to `K(z, z)` for i.i.d. coefficients.
    pub tail: f64,
}

impl fmt::Display for TruncationBiasWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "truncation bias: r_max = {} with N = {} leaves relative tail {:.3e}",
            self.r_max, self.n, self.tail
        )
    }
}

/// Count over the union of all cells, taken directly from the root sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TotalCount {
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub preset: String,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
    pub method: String,
    /// Row-major over (r-bin, φ-bin).
    pub cells: Vec<ProfileCell>,
    pub total: TotalCount,
    pub warnings: Vec<TruncationBiasWarning>,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Zero counts of one replica: one entry per cell, then the total.
pub fn replica_counts(grid: &SpectralGrid, config: &ExperimentConfig, index: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, index));
    let coeffs = grid.draw(config.n, &mut rng);
    let roots = find_roots(&coeffs)?.roots;
    let mut out = Vec::new();
    for c in config.cells().iter().chain([config.outer()].iter()) {
        out.push(count_points(&roots, &region(c))?.count);
    }
    Ok(out)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RadialProfile> {
    config.validate()?;
    let grid = SpectralGrid::new(&config.measure, config.n)?;
    let counts: Vec<Vec<usize>> = (0..config.replicas as u64)
        .into_par_iter()
        .map(|i| replica_counts(&grid, config, i))
        .collect::<Result<_>>()?;

    let cells = config.cells();
    let analytic: Vec<f64> = cells
        .par_iter()
        .chain([config.outer()].par_iter())
        .map(|c| expected_count(&config.measure, *c, config.method))
        .collect::<Result<_>>()?;

    let column = |j: usize| mean_se(counts.iter().map(move |row| row[j] as f64));
    let rows = cells
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let (m, se) = column(j);
            ProfileCell {
                r_lo: c.r_lo,
                r_hi: c.r_hi,
                phi_lo: c.phi_lo,
                phi_hi: c.phi_hi,
                empirical_mean: m,
                empirical_se: se,
                analytic: analytic[j],
                replicas: config.replicas,
                n: config.n,
                seed: config.seed,
            }
        })
        .collect();
    let (m, se) = column(cells.len());
    let total = TotalCount { empirical_mean: m, empirical_se: se, analytic: analytic[cells.len()] };

    let r_max = config.r_max();
    let tail = r_max.powi(2 * (config.n as i32 + 1));
    let warnings = if tail > TRUNCATION_TAIL_TOL {
        vec![TruncationBiasWarning { r_max, n: config.n, tail }]
    } else {
        Vec::new()
    };
    Ok(RadialProfile {
        preset: config.measure.label().to_string(),
        n: config.n,
        replicas: config.replicas,
        seed: config.seed,
        method: config.method.name().to_string(),
        cells: rows,
        total,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}', expected csv or json"))),
        }
    }
}

pub const CSV_COLUMNS: [&str; 10] =
    ["r_lo", "r_hi", "phi_lo", "phi_hi", "empirical_mean", "empirical_se", "analytic", "replicas", "N", "seed"];

pub fn write_profile<W: Write>(profile: &RadialProfile, out: W, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_COLUMNS)?;
            for c in &profile.cells {
                w.serialize(c)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, profile)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn emit_profile(profile: &RadialProfile, path: &Path, format: Format) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_profile(profile, std::io::BufWriter::new(file), format)
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<ProfileCell>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Parse(format!("unexpected profile header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn small(measure: SpectralMeasure, replicas: usize) -> ExperimentConfig {
        ExperimentConfig::new(measure, 120, replicas, 42).radial_bins(0.0, 0.8, 2).angular_bins(-PI, PI, 3)
    }

    #[test]
    fn cells_sum_to_total() {
        let cfg = small(SpectralMeasure::uniform(), 20);
        let grid = SpectralGrid::new(&cfg.measure, cfg.n).unwrap();
        for i in 0..20 {
            let c = replica_counts(&grid, &cfg, i).unwrap();
            assert_eq!(c[..c.len() - 1].iter().sum::<usize>(), c[c.len() - 1]);
        }
        let p = run_experiment(&cfg).unwrap();
        let sum: f64 = p.cells.iter().map(|c| c.empirical_mean).sum();
        assert!((sum - p.total.empirical_mean).abs() < 1e-12);
        let analytic: f64 = p.cells.iter().map(|c| c.analytic).sum();
        assert!((analytic - 0.64 / 0.36).abs() < 1e-9);
        assert!((p.total.analytic - 0.64 / 0.36).abs() < 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = run_experiment(&small(presets::ma1(0.3).unwrap(), 8)).unwrap();
        let b = run_experiment(&small(presets::ma1(0.3).unwrap(), 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_configs() {
        let u = SpectralMeasure::uniform;
        assert!(run_experiment(&ExperimentConfig::new(u(), 50, 4, 0).radial_bins(0.0, 0.995, 2)).is_err());
        assert!(run_experiment(&ExperimentConfig::new(u(), 50, 1, 0)).is_err());
        assert!(run_experiment(&ExperimentConfig::new(u(), 50, 4, 0).angular_bins(0.0, 7.0, 2)).is_err());
    }

    #[test]
    fn truncation_warning() {
        let p = run_experiment(&ExperimentConfig::new(SpectralMeasure::uniform(), 40, 2, 0).radial_bins(0.0, 0.9, 1)).unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert!(p.warnings[0].tail > 1e-6);
        let p = run_experiment(&ExperimentConfig::new(SpectralMeasure::uniform(), 400, 2, 0).radial_bins(0.0, 0.9, 1)).unwrap();
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn csv_round_trip() {
        let p = run_experiment(&small(presets::half_interval(), 6)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        emit_profile(&p, &path, Format::Csv).unwrap();
        assert_eq!(read_profile_csv(&path).unwrap(), p.cells);

        let empty = RadialProfile { cells: vec![], ..p.clone() };
        emit_profile(&empty, &path, Format::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().trim(), CSV_COLUMNS.join(","));
        assert!(read_profile_csv(&path).unwrap().is_empty());

        let one = RadialProfile { cells: vec![p.cells[0].clone()], ..p.clone() };
        emit_profile(&one, &path, Format::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);

        let jpath = dir.path().join("p.json");
        emit_profile(&p, &jpath, Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&jpath).unwrap()).unwrap();
        assert_eq!(v["cells"].as_array().unwrap().len(), p.cells.len());
        assert_eq!(v["cells"][0]["N"], 120);
    }

    #[test]
    fn io_failure_is_surfaced() {
        let p = run_experiment(&small(SpectralMeasure::uniform(), 2)).unwrap();
        let err = emit_profile(&p, Path::new("/nonexistent-dir/x.csv"), Format::Csv).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
