//! Coefficient blocks of a stationary complex Gaussian sequence via the
//! discretized spectral representation.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral_measure::SpectralMeasure;

const MASS_TOL: f64 = 1e-10;
/// Smallest spectral grid.
pub const MIN_GRID: usize = 4096;

/// `(ξ₀, …, ξ_N)` together with what is needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    pub values: Vec<Complex64>,
    pub seed: u64,
    pub label: String,
    pub grid_size: usize,
}

impl CoefficientBlock {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `index`: `splitmix64(seed ⊕ splitmix64(index))`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Grid size used for a block of degree `n`.
pub fn grid_size(n: usize) -> usize {
    (8 * (n + 1)).max(MIN_GRID)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * FRAC_1_SQRT_2
}

/// Spectral nodes `(tⱼ, wⱼ)`: grid cell midpoints with exact cell masses, then atoms.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    grid_size: usize,
    cell_weights: Vec<f64>,
    atoms: Vec<(f64, f64)>,
}

impl SpectralGrid {
    pub fn new(f: &SpectralMeasure, n: usize) -> Result<Self> {
        let mass = f.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization { mass });
        }
        let m = grid_size(n);
        let mut cell_weights = match f.density() {
            Some(d) => d.cell_masses(m).into_iter().map(|w| w.max(0.0)).collect(),
            None => Vec::new(),
        };
        let mut atoms: Vec<(f64, f64)> = f.atoms().iter().map(|a| (a.t, a.mass)).collect();
        let total: f64 = cell_weights.iter().sum::<f64>() + atoms.iter().map(|a| a.1).sum::<f64>();
        cell_weights.iter_mut().for_each(|w| *w /= total);
        atoms.iter_mut().for_each(|a| a.1 /= total);
        Ok(Self { grid_size: m, cell_weights, atoms })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// `Σ wⱼ e^{−iktⱼ}`, the covariance of the discretized process.
    pub fn covariance(&self, k: i64) -> Complex64 {
        let width = 2.0 * PI / self.grid_size as f64;
        let cells = self.cell_weights.iter().enumerate().map(|(j, &w)| {
            let t = -PI + (j as f64 + 0.5) * width;
            Complex64::from_polar(w, -(k as f64) * t)
        });
        let atoms = self.atoms.iter().map(|&(t, w)| Complex64::from_polar(w, -(k as f64) * t));
        cells.chain(atoms).sum()
    }

    /// One block of degree `n` drawn from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        let m = self.grid_size;
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        if !self.cell_weights.is_empty() {
            let mut buf: Vec<Complex64> = self.cell_weights.iter().map(|&w| w.sqrt() * complex_normal(rng)).collect();
            FftPlanner::new().plan_fft_forward(m).process(&mut buf);
            // tⱼ = −π + (j + ½)2π/M, so e^{−iktⱼ} = (−1)^k e^{−iπk/M} e^{−2πijk/M}.
            for (k, slot) in out.iter_mut().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *slot = buf[k] * Complex64::from_polar(sign, -PI * k as f64 / m as f64);
            }
        }
        for &(t, w) in &self.atoms {
            let z = w.sqrt() * complex_normal(rng);
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += z * Complex64::from_polar(1.0, -(k as f64) * t);
            }
        }
        out
    }
}

/// Draws `(ξ₀, …, ξ_N)` from a ChaCha8 stream seeded with `seed`.
pub fn sample_block(f: &SpectralMeasure, n: usize, seed: u64) -> Result<CoefficientBlock> {
    if n < 1 {
        return Err(Error::domain("block degree must be at least 1"));
    }
    let grid = SpectralGrid::new(f, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(CoefficientBlock {
        values: grid.draw(n, &mut rng),
        seed,
        label: f.label().to_string(),
        grid_size: grid.grid_size(),
    })
}

/// Replica blocks `0..replicas` with seeds from [`derive_seed`], in index order.
pub fn sample_blocks(f: &SpectralMeasure, n: usize, seed: u64, replicas: usize) -> Result<Vec<CoefficientBlock>> {
    if n < 1 {
        return Err(Error::domain("block degree must be at least 1"));
    }
    let grid = SpectralGrid::new(f, n)?;
    let label = f.label().to_string();
    Ok((0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            CoefficientBlock { values: grid.draw(n, &mut rng), seed: s, label: label.clone(), grid_size: grid.grid_size() }
        })
        .collect())
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    /// Standard error of the real and imaginary parts.
    pub se_re: f64,
    pub se_im: f64,
}

impl Estimate {
    /// `√(se_re² + se_im²)`.
    pub fn se(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }

    pub fn conj(&self) -> Self {
        Self { value: self.value.conj(), ..*self }
    }
}

fn lag_mean(xi: &[Complex64], k: usize) -> Complex64 {
    let n = xi.len() - k;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        acc += xi[j + k] * xi[j].conj();
    }
    acc / n as f64
}

/// Mean of `ξ_{j+k} conj(ξⱼ)` over blocks and positions; the standard error
/// comes from the spread of per-block means.
pub fn empirical_covariance(blocks: &[CoefficientBlock], k: i64) -> Result<Estimate> {
    if blocks.len() < 2 {
        return Err(Error::domain("need at least two blocks"));
    }
    let n = blocks.iter().map(|b| b.degree()).min().unwrap_or(0);
    if k.unsigned_abs() as usize > n {
        return Err(Error::domain(format!("lag {k} exceeds block degree {n}")));
    }
    if k < 0 {
        return Ok(empirical_covariance(blocks, -k)?.conj());
    }
    let means: Vec<Complex64> = blocks.iter().map(|b| lag_mean(&b.values, k as usize)).collect();
    let b = means.len() as f64;
    let mean = means.iter().sum::<Complex64>() / b;
    let var_re = means.iter().map(|m| (m.re - mean.re).powi(2)).sum::<f64>() / (b - 1.0);
    let var_im = means.iter().map(|m| (m.im - mean.im).powi(2)).sum::<f64>() / (b - 1.0);
    Ok(Estimate { value: mean, se_re: (var_re / b).sqrt(), se_im: (var_im / b).sqrt() })
}

/// `max_{N/2 ≤ k ≤ N} | |ξ_k|^{1/k} − 1 |`, skipping zero coefficients.
pub fn radius_check(block: &CoefficientBlock) -> Result<f64> {
    let n = block.degree();
    if n < 64 {
        return Err(Error::domain("radius check needs N ≥ 64"));
    }
    Ok(block.values[n / 2..]
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(i, v)| {
            let k = (n / 2 + i) as f64;
            (v.norm().ln() / k).exp_m1().abs()
        })
        .fold(0.0, f64::max))
}
