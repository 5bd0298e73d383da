//! First intensity ρ₁(z) of the zero set.
//!
//! Three routes are provided: the spectral double integral against `F_φ`,
//! the 𝓠ᵣ-form on the symmetrized density, and a finite-difference
//! Laplacian of `log K(z, z)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;
use crate::poisson_ops::{k_diag, poisson, x_of, KernelPoint, Radius};
use crate::quadrature::GaussLegendre;
use crate::spectral_measure::SpectralMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Double integral against `F_φ`, atoms included.
    Spectral,
    /// 𝓠ᵣ-form on the symmetrized density.
    QForm,
    /// Finite-difference Laplacian of `log K(z, z)`.
    Ek,
}

impl Method {
    /// `QForm` for absolutely continuous measures, `Spectral` otherwise.
    pub fn default_for(f: &SpectralMeasure) -> Self {
        if f.has_atoms() || f.density().is_none() {
            Method::Spectral
        } else {
            Method::QForm
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::QForm => "q_form",
            Method::Ek => "ek",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" | "spectral_double" => Ok(Method::Spectral),
            "q_form" | "qform" | "q" => Ok(Method::QForm),
            "ek" | "ek_numeric" => Ok(Method::Ek),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

fn point(z: Complex64) -> Result<KernelPoint> {
    let p = KernelPoint::new(z)?;
    p.radius.check_ceiling()?;
    Ok(p)
}

/// ρ₁ from the spectral double integral, split into density and atom parts.
pub fn rho1_spectral(f: &SpectralMeasure, z: Complex64) -> Result<f64> {
    let p = point(z)?;
    let rad = p.radius;
    let fphi = f.shift(p.phi);
    // (location, mass, P_r(t)) for each atom of F_φ.
    let atoms: Vec<(f64, f64, f64)> = fphi
        .atoms()
        .iter()
        .map(|a| (a.t, a.mass, poisson(&rad, a.t)))
        .collect();

    let mut numer = 0.0;
    let mut denom = 0.0;
    if let Some(d) = fphi.density() {
        let n = d.nodes(&rad.foci(0.0));
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        let mut cross = 0.0;
        for i in 0..n.s.len() {
            let s = n.s[i];
            let pr = poisson(&rad, s);
            let m = n.w[i] * n.h[i];
            let m2 = m * pr * pr;
            let x = x_of(s);
            a += m2 * x;
            b += m2 * (2.0 - x);
            c += m2 * s.sin();
            denom += m * pr;
            for &(t, mass, pt) in &atoms {
                cross += m2 * mass * pt * pt * x_of(t - s);
            }
        }
        // 1 − cos(t − s) = 1 − cos t cos s − sin t sin s turns the
        // density × density term into A·B − C².
        numer += a * b - c * c + 2.0 * cross;
    }
    for &(t, mt, pt) in &atoms {
        denom += mt * pt;
        for &(u, mu, pu) in &atoms {
            numer += mt * pt * pt * mu * pu * pu * x_of(t - u);
        }
    }
    finish(numer, denom, rad.y())
}

fn finish(numer: f64, denom: f64, y: f64) -> Result<f64> {
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::DegenerateDenominator(format!(
            "harmonic extension of F vanishes numerically ({denom:e})"
        )));
    }
    Ok(numer / (PI * y * y * denom * denom))
}

/// The pieces of the 𝓠ᵣ-form at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFormParts {
    /// 𝓠ᵣ(f̂·x)
    pub q_hat_x: f64,
    /// 𝓠ᵣ(f̂·(2 − x))
    pub q_hat_two_minus_x: f64,
    /// 𝓠ᵣ(f̌·sin)
    pub q_check_sin: f64,
    /// 𝓟ᵣ(f̂)
    pub p_hat: f64,
}

impl QFormParts {
    /// `𝓢ᵣ = 𝓠ᵣ(f̂)² − 𝓠ᵣ(f̂ cos)² − 𝓠ᵣ(f̌ sin)²`, written as a product of
    /// the sum and difference of the first two terms.
    pub fn s_r(&self) -> f64 {
        self.q_hat_x * self.q_hat_two_minus_x - self.q_check_sin * self.q_check_sin
    }
}

/// Evaluates the 𝓠ᵣ-form ingredients of the density `f` rotated by `phi`.
pub fn q_form_parts(f: &PeriodicFunction, phi: f64, rad: &Radius) -> Result<QFormParts> {
    rad.check_ceiling()?;
    let fphi = f.shift(phi);
    let hat = fphi.symmetrize();
    let check = fphi.antisymmetrize();
    let foci = rad.foci(0.0);
    let c = 1.0 / (2.0 * PI);

    let n = hat.nodes(&foci);
    let (mut qx, mut q2x, mut ph) = (0.0, 0.0, 0.0);
    for i in 0..n.s.len() {
        let s = n.s[i];
        let pr = poisson(rad, s);
        let m = n.w[i] * n.h[i];
        let x = x_of(s);
        qx += m * x * pr * pr;
        q2x += m * (2.0 - x) * pr * pr;
        ph += m * pr;
    }
    let qs = check.integrate_with(&foci, |s| {
        let pr = poisson(rad, s);
        s.sin() * pr * pr
    });
    Ok(QFormParts { q_hat_x: c * qx, q_hat_two_minus_x: c * q2x, q_check_sin: c * qs, p_hat: c * ph })
}

/// ρ₁ from the 𝓠ᵣ-form; only for absolutely continuous measures.
pub fn rho1_qform(f: &SpectralMeasure, z: Complex64) -> Result<f64> {
    if f.has_atoms() {
        return Err(Error::MethodUnavailable("the q-form needs a measure without atoms".into()));
    }
    let p = point(z)?;
    let d = f.density().ok_or_else(|| Error::MethodUnavailable("measure has no density".into()))?;
    let parts = q_form_parts(d, p.phi, &p.radius)?;
    finish(parts.s_r(), parts.p_hat, p.y())
}

/// ρ₁ as `(1/4π) Δ log K(z, z)` on a five-point stencil.
pub fn rho1_ek_numeric(f: &SpectralMeasure, z: Complex64, step: Option<f64>) -> Result<f64> {
    let r = z.norm();
    let h = step.unwrap_or(1e-3 * (1.0 - r));
    if !(h > 0.0) || r + 2.0 * h >= 1.0 {
        return Err(Error::domain(format!("stencil of step {h:e} at |z| = {r} leaves the disk")));
    }
    let log_k = |w: Complex64| -> Result<f64> {
        let k = k_diag(f, w)?;
        Ok(k.ln())
    };
    let c = log_k(z)?;
    let mut sum = 0.0;
    for d in [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)] {
        sum += log_k(z + d)? - c;
    }
    Ok(sum / (h * h) / (4.0 * PI))
}

pub fn rho1(f: &SpectralMeasure, z: Complex64, method: Method) -> Result<f64> {
    match method {
        Method::Spectral => rho1_spectral(f, z),
        Method::QForm => rho1_qform(f, z),
        Method::Ek => rho1_ek_numeric(f, z, None),
    }
}

/// ρ₁ over many points, evaluated in parallel; results keep input order.
pub fn rho1_batch(f: &SpectralMeasure, zs: &[Complex64], method: Method) -> Result<Vec<f64>> {
    zs.par_iter().map(|&z| rho1(f, z, method)).collect()
}

/// `𝓢ᵣ(f_φ)` for a density `f`.
pub fn sr_value(f: &PeriodicFunction, phi: f64, r: f64) -> Result<f64> {
    let rad = Radius::new(r)?;
    Ok(q_form_parts(f, phi, &rad)?.s_r())
}

/// The limit numerator `𝓘(T²f̂)² − 𝓘(T²(f̂ cos))² − 𝓘(T²(f̌ sin))²` written as
/// the nonnegative double integral
/// `(1/4)(2π)⁻² ∬ [G(s,t) + G(s,−t)] / (x(s)² x(t)²) ds dt`
/// with `G(s,t) = {f(s)f(t) + f(−s)f(−t)}{1 − cos(s − t)}`.
pub fn sr_positive_form(f: &PeriodicFunction, phi: f64) -> Result<f64> {
    let fphi = f.shift(phi);
    if !fphi.is_smooth_at_zero() {
        return Err(Error::CaseMismatch("density is not smooth at the boundary point".into()));
    }
    let scale = fphi.max_abs_coeff().max(f64::MIN_POSITIVE);
    let (f0, f2) = (fphi.value_at_zero()?, fphi.derivative_at_zero(2)?);
    if f0.abs() > 1e-10 * scale || f2.abs() > 1e-8 * scale {
        return Err(Error::CaseMismatch(format!(
            "positive form needs f(0) = f''(0) = 0, got {f0:e}, {f2:e}"
        )));
    }
    let phi_fn = fphi.div_x()?.div_x()?;
    let n = phi_fn.nodes(&[]);
    let len = n.s.len();
    let a: Vec<f64> = (0..len).map(|i| n.w[i] * n.h[i]).collect();
    let b: Vec<f64> = (0..len).map(|i| n.w[i] * phi_fn.eval(-n.s[i])).collect();
    let mut acc = 0.0;
    for i in 0..len {
        let mut row = 0.0;
        for j in 0..len {
            let minus = x_of(n.s[i] - n.s[j]);
            let plus = x_of(n.s[i] + n.s[j]);
            row += (a[i] * a[j] + b[i] * b[j]) * minus + (a[i] * b[j] + b[i] * a[j]) * plus;
        }
        acc += row;
    }
    Ok(0.25 * acc / (4.0 * PI * PI))
}

/// A polar cell `[r_lo, r_hi] × [φ_lo, φ_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub r_lo: f64,
    pub r_hi: f64,
    pub phi_lo: f64,
    pub phi_hi: f64,
}

impl Cell {
    pub fn disk(r: f64) -> Self {
        Self { r_lo: 0.0, r_hi: r, phi_lo: -PI, phi_hi: PI }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.r_hi * self.r_hi - self.r_lo * self.r_lo) * (self.phi_hi - self.phi_lo)
    }
}

fn radial_panels(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = hi.min(0.5 * (1.0 + a)).min(a + 0.25);
        out.push((a, b));
        a = b;
    }
    out
}

/// `∬_cell ρ₁ r dr dφ`, the expected number of zeros in the cell.
pub fn expected_count(f: &SpectralMeasure, cell: Cell, method: Method) -> Result<f64> {
    if !(0.0 <= cell.r_lo && cell.r_lo <= cell.r_hi && cell.r_hi < 1.0 && cell.phi_lo <= cell.phi_hi) {
        return Err(Error::domain(format!("malformed cell {cell:?}")));
    }
    let rule = GaussLegendre::sixteen();
    let width = (PI / 4.0).min(16.0 * (1.0 - cell.r_hi));
    let n_phi = (((cell.phi_hi - cell.phi_lo) / width).ceil() as usize).max(1);
    let dphi = (cell.phi_hi - cell.phi_lo) / n_phi as f64;
    let mut pts = Vec::new();
    for (ra, rb) in radial_panels(cell.r_lo, cell.r_hi) {
        let (mut rs, mut rw) = (Vec::new(), Vec::new());
        rule.push_nodes(ra, rb, &mut rs, &mut rw);
        for j in 0..n_phi {
            let (pa, pb) = (cell.phi_lo + j as f64 * dphi, cell.phi_lo + (j + 1) as f64 * dphi);
            let (mut ps, mut pw) = (Vec::new(), Vec::new());
            rule.push_nodes(pa, pb, &mut ps, &mut pw);
            for (r, wr) in rs.iter().zip(&rw) {
                for (p, wp) in ps.iter().zip(&pw) {
                    pts.push((Complex64::from_polar(*r, *p), wr * wp * r));
                }
            }
        }
    }
    let zs: Vec<Complex64> = pts.iter().map(|p| p.0).collect();
    let vals = rho1_batch(f, &zs, method)?;
    Ok(vals.iter().zip(&pts).map(|(v, p)| v * p.1).sum())
}
