//! Spectral measures on `(-π, π]` and the functionals built from them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;
use crate::quadrature::wrap_angle;

/// Largest covariance lag accepted by [`SpectralMeasure::covariance`].
pub const MAX_LAG: i64 = 1 << 20;

const MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub mass: f64,
}

/// A probability measure `F(dt)` on `(-π, π]`: an optional density plus atoms.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    density: Option<PeriodicFunction>,
    atoms: Vec<Atom>,
    label: String,
}

impl SpectralMeasure {
    /// Validates nonnegativity and unit mass.
    pub fn new(density: Option<PeriodicFunction>, atoms: Vec<Atom>, label: impl Into<String>) -> Result<Self> {
        for a in &atoms {
            if !(a.mass > 0.0) || !a.t.is_finite() {
                return Err(Error::domain(format!("atom masses must be positive, got {} at {}", a.mass, a.t)));
            }
        }
        if let Some(d) = &density {
            let min = d.sampled_min(4096);
            if min < -1e-12 {
                return Err(Error::domain(format!("density takes negative value {min:e}")));
            }
        }
        let atoms = atoms.into_iter().map(|a| Atom { t: wrap_angle(a.t), ..a }).collect();
        let m = Self { density, atoms, label: label.into() };
        let mass = m.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::Normalization { mass });
        }
        Ok(m)
    }

    pub fn uniform() -> Self {
        Self::new(Some(PeriodicFunction::constant(1.0 / (2.0 * PI))), vec![], "uniform")
            .expect("uniform measure is normalized")
    }

    pub fn density(&self) -> Option<&PeriodicFunction> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.density.as_ref().map_or(0.0, |d| d.integral()) + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// `γ(k) = ∫ e^{−ikt} F(dt)`.
    pub fn covariance(&self, k: i64) -> Result<Complex64> {
        if k.abs() > MAX_LAG {
            return Err(Error::domain(format!("lag {k} exceeds the cap {MAX_LAG}")));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        if let Some(d) = &self.density {
            for p in d.pieces() {
                acc += p.numer.exp_integral(p.lo, p.hi, k);
            }
        }
        for a in &self.atoms {
            acc += Complex64::from_polar(a.mass, -(k as f64) * a.t);
        }
        Ok(acc)
    }

    /// `γ(k)` for `k = −K..=K`.
    pub fn covariance_sequence(&self, max_lag: usize) -> Result<CovarianceSequence> {
        let k = max_lag as i64;
        let values = (-k..=k).map(|j| self.covariance(j)).collect::<Result<Vec<_>>>()?;
        Ok(CovarianceSequence { max_lag, values })
    }

    /// `F_φ(ds) = F(d(s + φ))`.
    pub fn shift(&self, phi: f64) -> Self {
        Self {
            density: self.density.as_ref().map(|d| d.shift(phi)),
            atoms: self.atoms.iter().map(|a| Atom { t: wrap_angle(a.t - phi), mass: a.mass }).collect(),
            label: self.label.clone(),
        }
    }

    /// Convex combination `Σ wᵢ Fᵢ`.
    pub fn mixture(parts: &[(f64, SpectralMeasure)], label: impl Into<String>) -> Result<Self> {
        let mut density: Option<PeriodicFunction> = None;
        let mut atoms = Vec::new();
        for (w, m) in parts {
            if !(*w > 0.0) {
                return Err(Error::domain(format!("mixture weights must be positive, got {w}")));
            }
            if let Some(d) = &m.density {
                let d = d.scale(*w);
                density = Some(match density {
                    Some(acc) => acc.add(&d),
                    None => d,
                });
            }
            atoms.extend(m.atoms.iter().map(|a| Atom { t: a.t, mass: w * a.mass }));
        }
        Self::new(density, atoms, label)
    }

    /// Density of `F_φ` with the atoms dropped.
    pub fn shifted_density(&self, phi: f64) -> Result<PeriodicFunction> {
        let d = self
            .density
            .as_ref()
            .ok_or_else(|| Error::MethodUnavailable("measure has no density part".into()))?;
        Ok(d.shift(phi))
    }
}

/// Covariances `γ(−K), …, γ(K)`.
#[derive(Debug, Clone)]
pub struct CovarianceSequence {
    max_lag: usize,
    values: Vec<Complex64>,
}

impl CovarianceSequence {
    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.values[(k + self.max_lag as i64) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The Hermitian Toeplitz matrix `[γ(j − k)]` of size `n ≤ K + 1`, row-major.
    pub fn toeplitz(&self, n: usize) -> Vec<Complex64> {
        assert!(n <= self.max_lag + 1, "matrix size exceeds available lags");
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                out.push(self.get(j as i64 - k as i64));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;
    use approx::assert_relative_eq;

    fn ma1(a: f64) -> SpectralMeasure {
        let d = PeriodicFunction::from_trig(TrigPoly::new(vec![1.0, 2.0 * a], vec![]).scale(1.0 / (2.0 * PI)));
        SpectralMeasure::new(Some(d), vec![], "ma1").unwrap()
    }

    #[test]
    fn uniform_covariance() {
        let u = SpectralMeasure::uniform();
        assert_relative_eq!(u.covariance(0).unwrap().re, 1.0, epsilon = 1e-15);
        assert!(u.covariance(1).unwrap().norm() < 1e-15);
    }

    #[test]
    fn ma1_covariance() {
        let m = ma1(0.3);
        assert_relative_eq!(m.covariance(1).unwrap().re, 0.3, epsilon = 1e-15);
        assert!(m.covariance(2).unwrap().norm() < 1e-15);
    }

    #[test]
    fn half_interval_covariance() {
        let d = PeriodicFunction::step(&[-PI, -PI / 2.0, PI / 2.0, PI], &[0.0, 1.0 / PI, 0.0]).unwrap();
        let m = SpectralMeasure::new(Some(d), vec![], "indicator").unwrap();
        let g = m.covariance(1).unwrap();
        // Oracle: Gauss–Legendre over the support.
        let rule = crate::quadrature::GaussLegendre::new(30);
        let want = rule.integrate(-PI / 2.0, PI / 2.0, |t| t.cos() / PI);
        assert_relative_eq!(g.re, want, epsilon = 1e-14);
        assert_relative_eq!(g.re, 2.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let d = PeriodicFunction::constant(1.0);
        assert!(matches!(SpectralMeasure::new(Some(d), vec![], "x"), Err(Error::Normalization { .. })));
        let bad = SpectralMeasure::new(None, vec![Atom { t: 0.0, mass: -1.0 }], "x");
        assert!(matches!(bad, Err(Error::Domain(_))));
    }

    #[test]
    fn shift_examples() {
        let u = SpectralMeasure::uniform().shift(1.3);
        assert_relative_eq!(u.density().unwrap().eval(0.4), 1.0 / (2.0 * PI), epsilon = 1e-16);
        let (a, phi) = (0.3, 0.9);
        let m = ma1(a).shift(phi);
        assert_relative_eq!(m.density().unwrap().eval(0.0), (1.0 + 2.0 * a * phi.cos()) / (2.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(m.total_mass(), 1.0, epsilon = 1e-14);
        let atom = SpectralMeasure::new(None, vec![Atom { t: 0.0, mass: 1.0 }], "atom").unwrap();
        assert_relative_eq!(atom.shift(PI / 2.0).atoms()[0].t, -PI / 2.0);
    }

    #[test]
    fn covariance_is_hermitian() {
        let m = ma1(0.4).shift(0.7);
        for k in 0..5 {
            let (p, n) = (m.covariance(k).unwrap(), m.covariance(-k).unwrap());
            assert!((p - n.conj()).norm() < 1e-15);
        }
        assert!(m.covariance(MAX_LAG + 1).is_err());
    }
}
