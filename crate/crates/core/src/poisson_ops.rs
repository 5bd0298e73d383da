//! Poisson kernel, the operators 𝓟ᵣ, 𝓠ᵣ, 𝓤ᵣ, 𝓥ᵣ, 𝓚ᵣ and the covariance kernel.
//!
//! All kernels are written in terms of `x = 1 − cos s = 2 sin²(s/2)` and
//! `1 − r = y/(1 + r)` so that nothing cancels as `r → 1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::periodic::{Nodes, PeriodicFunction};
use crate::quadrature::{wrap_angle, Focus};
use crate::spectral_measure::SpectralMeasure;

/// Largest radius handled by direct quadrature.
pub const R_CEILING: f64 = 1.0 - 1e-6;

/// A radius `r ∈ [0, 1)` together with `y = 1 − r²`, both held exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    r: f64,
    y: f64,
}

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
        }
        Ok(Self { r, y: (1.0 - r) * (1.0 + r) })
    }

    /// The radius with `1 − r² = y`.
    pub fn from_y(y: f64) -> Result<Self> {
        if !(y > 0.0 && y <= 1.0) {
            return Err(Error::domain(format!("y must lie in (0, 1], got {y}")));
        }
        Ok(Self { r: (1.0 - y).sqrt(), y })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn one_minus_r(&self) -> f64 {
        self.y / (1.0 + self.r)
    }

    /// Fails with a precision error beyond [`R_CEILING`].
    pub fn check_ceiling(&self) -> Result<()> {
        if self.r > R_CEILING {
            let achievable = f64::EPSILON / self.one_minus_r().max(f64::MIN_POSITIVE);
            return Err(Error::Precision { r: self.r, achievable: achievable.min(1.0) });
        }
        Ok(())
    }

    /// `(1 − r)² + 2r·x`, the common denominator of all kernels.
    #[inline]
    pub fn denom(&self, x: f64) -> f64 {
        let d = self.one_minus_r();
        d * d + 2.0 * self.r * x
    }

    /// Panel refinement around the kernel peak at `at`.
    pub fn foci(&self, at: f64) -> Vec<Focus> {
        let scale = (self.one_minus_r() / 16.0).min(0.05);
        [at, at - 2.0 * PI, at + 2.0 * PI].iter().map(|&a| Focus::new(a, scale)).collect()
    }
}

/// `x(s) = 1 − cos s` without cancellation.
#[inline]
pub fn x_of(s: f64) -> f64 {
    let h = (0.5 * s).sin();
    2.0 * h * h
}

/// A point `z` of the unit disk with its polar data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub z: Complex64,
    pub radius: Radius,
    pub phi: f64,
}

impl KernelPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        let radius = Radius::new(z.norm())?;
        Ok(Self { z, radius, phi: if z == Complex64::new(0.0, 0.0) { 0.0 } else { z.arg() } })
    }

    pub fn polar(r: f64, phi: f64) -> Result<Self> {
        let radius = Radius::new(r)?;
        Ok(Self { z: Complex64::from_polar(r, phi), radius, phi: wrap_angle(phi) })
    }

    pub fn r(&self) -> f64 {
        self.radius.r
    }

    pub fn y(&self) -> f64 {
        self.radius.y
    }
}

/// `P_r(s) = (1 − r²)/(1 − 2r cos s + r²)`.
pub fn poisson_kernel(r: f64, s: f64) -> Result<f64> {
    let rad = Radius::new(r)?;
    Ok(poisson(&rad, s))
}

#[inline]
pub(crate) fn poisson(rad: &Radius, s: f64) -> f64 {
    rad.y / rad.denom(x_of(s))
}

fn nodes_at_zero(h: &PeriodicFunction, rad: &Radius) -> Result<Nodes> {
    rad.check_ceiling()?;
    Ok(h.nodes(&rad.foci(0.0)))
}

/// `𝓟ᵣ(h) = (1/2π) ∫ h(s) P_r(s) ds`.
pub fn p_op(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let n = nodes_at_zero(h, rad)?;
    Ok(n.sum(|s| poisson(rad, s)) / (2.0 * PI))
}

/// `𝓠ᵣ(h) = (1/2π) ∫ h(s) P_r(s)² ds`.
pub fn q_op(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let n = nodes_at_zero(h, rad)?;
    Ok(n.sum(|s| {
        let p = poisson(rad, s);
        p * p
    }) / (2.0 * PI))
}

/// `𝓠ᵣ(h)` through `h(0)𝓠ᵣ(1) + h''(0)𝓠ᵣ(x) + (y²/4)𝓥ᵣ(T²h)` for even `h`
/// smooth at zero; an independent route to [`q_op`].
pub fn q_op_split(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let h0 = h.value_at_zero()?;
    let h2 = h.derivative_at_zero(2)?;
    let t2 = h.apply_t_pow(2)?;
    let y = rad.y;
    let q1 = (1.0 + rad.r * rad.r) / y;
    let qx = rad.one_minus_r() / (1.0 + rad.r);
    Ok(h0 * q1 + h2 * qx + 0.25 * y * y * v_op(&t2, rad)?)
}

#[inline]
fn u_kernel(rad: &Radius, s: f64) -> f64 {
    let x = x_of(s);
    2.0 * x / rad.denom(x)
}

#[inline]
fn k_kernel(rad: &Radius, s: f64) -> f64 {
    let x = x_of(s);
    let d = rad.one_minus_r();
    let den = rad.denom(x);
    (2.0 * x - d) * (d * d + 2.0 * (1.0 + rad.r) * x) / (den * den)
}

/// `𝓤ᵣ(h) = (1/2π) ∫ h · 2x/((1−r)² + 2rx) ds`.
pub fn u_op(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    Ok(nodes_at_zero(h, rad)?.sum(|s| u_kernel(rad, s)) / (2.0 * PI))
}

/// `𝓥ᵣ(h) = (1/2π) ∫ h · {2x/((1−r)² + 2rx)}² ds`.
pub fn v_op(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    Ok(nodes_at_zero(h, rad)?.sum(|s| u_kernel(rad, s).powi(2)) / (2.0 * PI))
}

/// `𝓚ᵣ(h)`.
pub fn k_op(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    Ok(nodes_at_zero(h, rad)?.sum(|s| k_kernel(rad, s)) / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxValues {
    pub u: f64,
    pub v: f64,
    pub k: f64,
}

/// `(𝓤ᵣ(h), 𝓥ᵣ(h), 𝓚ᵣ(h))` on a shared node set.
pub fn aux_ops(h: &PeriodicFunction, rad: &Radius) -> Result<AuxValues> {
    let n = nodes_at_zero(h, rad)?;
    let c = 1.0 / (2.0 * PI);
    Ok(AuxValues {
        u: c * n.sum(|s| u_kernel(rad, s)),
        v: c * n.sum(|s| u_kernel(rad, s).powi(2)),
        k: c * n.sum(|s| k_kernel(rad, s)),
    })
}

fn check_point(z: Complex64) -> Result<KernelPoint> {
    let p = KernelPoint::new(z)?;
    p.radius.check_ceiling()?;
    Ok(p)
}

/// `F̃(z) = ∫ P_r(φ − t) F(dt)`.
pub fn harmonic_extension(f: &SpectralMeasure, z: Complex64) -> Result<f64> {
    let p = check_point(z)?;
    let rad = p.radius;
    let mut acc = 0.0;
    if let Some(d) = f.density() {
        acc += d.integrate_with(&rad.foci(p.phi), |t| poisson(&rad, t - p.phi));
    }
    for a in f.atoms() {
        acc += a.mass * poisson(&rad, a.t - p.phi);
    }
    Ok(acc)
}

/// `K(z, z) = F̃(z)/(1 − |z|²)`.
pub fn k_diag(f: &SpectralMeasure, z: Complex64) -> Result<f64> {
    let y = KernelPoint::new(z)?.y();
    Ok(harmonic_extension(f, z)? / y)
}

/// `K(z, w) = ∫ F(dt) / ((1 − z e^{−it})(1 − w̄ e^{it}))`.
pub fn k_offdiag(f: &SpectralMeasure, z: Complex64, w: Complex64) -> Result<Complex64> {
    let pz = check_point(z)?;
    let pw = check_point(w)?;
    let one = Complex64::new(1.0, 0.0);
    let kernel = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        one / ((one - z * e.conj()) * (one - w.conj() * e))
    };
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some(d) = f.density() {
        let mut foci = pz.radius.foci(pz.phi);
        foci.extend(pw.radius.foci(pw.phi));
        let n = d.nodes(&foci);
        for i in 0..n.s.len() {
            acc += kernel(n.s[i]) * (n.w[i] * n.h[i]);
        }
    }
    for a in f.atoms() {
        acc += kernel(a.t) * a.mass;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::trig::TrigPoly;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn smooth(c: &[f64]) -> PeriodicFunction {
        PeriodicFunction::from_trig(TrigPoly::new(c.to_vec(), vec![]))
    }

    #[test]
    fn poisson_kernel_examples() {
        assert_eq!(poisson_kernel(0.0, 1.2).unwrap(), 1.0);
        let r = 0.7;
        assert_relative_eq!(poisson_kernel(r, 0.0).unwrap(), (1.0 + r) / (1.0 - r), epsilon = 1e-14);
        assert!(poisson_kernel(1.0, 0.3).is_err());
        let rad = Radius::new(0.99).unwrap();
        assert_relative_eq!(p_op(&PeriodicFunction::constant(1.0), &rad).unwrap(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn q_closed_forms() {
        for r in [0.3, 0.9, 0.999] {
            let rad = Radius::new(r).unwrap();
            let q1 = q_op(&PeriodicFunction::constant(1.0), &rad).unwrap();
            assert_relative_eq!(q1, (1.0 + r * r) / (1.0 - r * r), max_relative = 1e-12);
            // 1 − cos s in coefficient form loses digits near s = 0.
            let qx = q_op(&smooth(&[1.0, -1.0]), &rad).unwrap();
            assert_relative_eq!(qx, (1.0 - r) / (1.0 + r), max_relative = 1e-9);
            // 𝓠ᵣ(cos ms) = rᵐ(m + 1 + 2r²/y).
            let q3 = q_op(&PeriodicFunction::from_trig(TrigPoly::cos_k(3)), &rad).unwrap();
            assert_relative_eq!(q3, r.powi(3) * (4.0 + 2.0 * r * r / rad.y()), max_relative = 1e-12);
        }
    }

    #[test]
    fn p_of_cosines() {
        let rad = Radius::new(0.999).unwrap();
        for m in 0..5 {
            let p = p_op(&PeriodicFunction::from_trig(TrigPoly::cos_k(m)), &rad).unwrap();
            assert_relative_eq!(p, 0.999f64.powi(m as i32), max_relative = 1e-13);
        }
    }

    #[test]
    fn ceiling_is_enforced() {
        let rad = Radius::new(1.0 - 1e-7).unwrap();
        assert!(matches!(p_op(&PeriodicFunction::constant(1.0), &rad), Err(Error::Precision { .. })));
    }

    #[test]
    fn aux_examples() {
        let one = PeriodicFunction::constant(1.0);
        for r in [0.5, 0.9, 0.999] {
            let rad = Radius::new(r).unwrap();
            let a = aux_ops(&one, &rad).unwrap();
            assert_relative_eq!(a.v, 1.0 + (1.0 - r) * a.k, epsilon = 1e-12);
        }
        let rad = Radius::new(1.0 - 1e-6).unwrap();
        assert_relative_eq!(aux_ops(&one, &rad).unwrap().k, 1.25, epsilon = 1e-5);
        // r𝓤ᵣ(x) = 𝓘(x) − y/(1+r)² 𝓟ᵣ(x).
        let x = smooth(&[1.0, -1.0]);
        for r in [0.3, 0.9, 0.99] {
            let rad = Radius::new(r).unwrap();
            let lhs = r * u_op(&x, &rad).unwrap();
            let rhs = 1.0 - rad.y() / (1.0 + r).powi(2) * p_op(&x, &rad).unwrap();
            assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn q_split_matches_direct() {
        let h = smooth(&[1.0, 0.4, -0.2, 0.1]);
        for r in [0.5, 0.9, 0.999] {
            let rad = Radius::new(r).unwrap();
            assert_relative_eq!(q_op_split(&h, &rad).unwrap(), q_op(&h, &rad).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn symmetry_filtering() {
        let f = presets::ma1(0.4).unwrap().shift(1.1).density().unwrap().clone();
        let (fh, fc) = (f.symmetrize(), f.antisymmetrize());
        let rad = Radius::new(0.95).unwrap();
        let cos = TrigPoly::cos_k(1);
        let sin = TrigPoly::sin_k(1);
        let q = |h: &PeriodicFunction| q_op(h, &rad).unwrap();
        assert_relative_eq!(q(&f), q(&fh), max_relative = 1e-13);
        assert_relative_eq!(q(&f.mul_trig(&cos)), q(&fh.mul_trig(&cos)), max_relative = 1e-13);
        assert_relative_eq!(q(&f.mul_trig(&sin)), q(&fc.mul_trig(&sin)), max_relative = 1e-12);
    }

    #[test]
    fn kernel_examples() {
        let u = SpectralMeasure::uniform();
        let z = Complex64::new(0.3, -0.5);
        let w = Complex64::new(-0.6, 0.2);
        assert_relative_eq!(harmonic_extension(&u, z).unwrap(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(k_diag(&u, z).unwrap(), 1.0 / (1.0 - z.norm_sqr()), max_relative = 1e-13);
        // Geometric-series oracle Σ (z w̄)^k.
        let mut series = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for _ in 0..400 {
            series += term;
            term *= z * w.conj();
        }
        let k = k_offdiag(&u, z, w).unwrap();
        assert!((k - series).norm() < 1e-10);
        let atom = presets::single_atom(0.0);
        let z = Complex64::new(0.8, 0.1);
        assert_relative_eq!(k_diag(&atom, z).unwrap(), 1.0 / (Complex64::new(1.0, 0.0) - z).norm_sqr(), max_relative = 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn cauchy_schwarz(r1 in 0.0..0.99f64, a1 in -PI..PI, r2 in 0.0..0.99f64, a2 in -PI..PI, pick in 0usize..3) {
            let f = match pick {
                0 => presets::ma1(0.5).unwrap(),
                1 => presets::half_interval(),
                _ => presets::parse("mix:0.5*ma1:a=0.2+0.5*atoms:[(1,0.5),(-2,0.5)]").unwrap(),
            };
            let z = Complex64::from_polar(r1, a1);
            let w = Complex64::from_polar(r2, a2);
            let kzz = k_diag(&f, z).unwrap();
            let kww = k_diag(&f, w).unwrap();
            let kzw = k_offdiag(&f, z, w).unwrap();
            prop_assert!(kzz > 0.0 && kww > 0.0);
            prop_assert!(kzw.norm_sqr() <= kzz * kww * (1.0 + 1e-10));
            let kd = k_offdiag(&f, z, z).unwrap();
            prop_assert!((kd.re - kzz).abs() <= 1e-10 * kzz && kd.im.abs() <= 1e-10 * kzz);
        }
    }
}
