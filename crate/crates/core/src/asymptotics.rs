//! Boundary expansions in `y = 1 − r²` and the three boundary regimes of ρ₁.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;
use crate::poisson_ops::{k_op, p_op, u_op, v_op, Radius};
use crate::spectral_measure::SpectralMeasure;
use crate::trig::TrigPoly;

/// Below this `f_φ(0)` is treated as zero.
pub const ZERO_VALUE_TOL: f64 = 1e-10;
/// Below this `f_φ''(0)` is treated as zero once `f_φ(0)` vanishes.
pub const ZERO_CURVATURE_TOL: f64 = 1e-8;

/// Scalar functionals of an even function smooth at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub h0: f64,
    pub h2: f64,
    pub h4: f64,
    pub i_h: f64,
    pub i_th: f64,
    pub i_t2h: f64,
    pub i_t3h: f64,
}

impl Functionals {
    pub fn of(h: &PeriodicFunction) -> Result<Self> {
        if !h.is_smooth_at_zero() {
            return Err(Error::domain("expansion needs a function smooth at s = 0"));
        }
        if !h.is_even() {
            return Err(Error::domain("expansion needs an even function"));
        }
        let t1 = h.apply_t()?;
        let t2 = t1.apply_t()?;
        let t3 = t2.apply_t()?;
        Ok(Self {
            h0: h.value_at_zero()?,
            h2: h.derivative_at_zero(2)?,
            h4: h.derivative_at_zero(4)?,
            i_h: h.mean(),
            i_th: t1.mean(),
            i_t2h: t2.mean(),
            i_t3h: t3.mean(),
        })
    }

    fn named(&self) -> BTreeMap<String, f64> {
        [
            ("h(0)", self.h0),
            ("h''(0)", self.h2),
            ("h''''(0)", self.h4),
            ("I(h)", self.i_h),
            ("I(Th)", self.i_th),
            ("I(T^2h)", self.i_t2h),
            ("I(T^3h)", self.i_t3h),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Which formula produced an [`ExpansionReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    PoissonIntegral,
    SquaredPoissonIntegral,
    AuxiliaryK,
    NumeratorS,
    BoundaryPositive,
    BoundaryZero,
    BoundaryDoubleZero,
}

/// Coefficients of a series in `y = 1 − r²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub coefficients: BTreeMap<i32, f64>,
    /// Highest power whose coefficient is controlled.
    pub valid_order: i32,
    pub source: Source,
    pub inputs: BTreeMap<String, f64>,
}

impl ExpansionReport {
    pub fn coefficient(&self, k: i32) -> f64 {
        self.coefficients.get(&k).copied().unwrap_or(0.0)
    }

    /// Partial sum at `y`.
    pub fn eval(&self, y: f64) -> f64 {
        self.coefficients.iter().map(|(&k, &c)| c * y.powi(k)).sum()
    }
}

fn report(coeffs: &[(i32, f64)], valid_order: i32, source: Source, inputs: BTreeMap<String, f64>) -> ExpansionReport {
    ExpansionReport { coefficients: coeffs.iter().copied().collect(), valid_order, source, inputs }
}

fn p_coeffs(f: &Functionals) -> [f64; 4] {
    [
        f.h0,
        f.i_th / 2.0,
        (f.i_th - f.h2 / 2.0) / 4.0,
        (1.5 * f.i_th - f.h2 - f.i_t2h / 2.0) / 8.0,
    ]
}

fn q_coeffs(f: &Functionals) -> [f64; 6] {
    [
        2.0 * f.h0,
        -f.h0,
        f.h2 / 4.0,
        f.i_t2h / 4.0 + f.h2 / 8.0,
        f.i_t2h / 4.0 + f.h2 / 16.0 - f.h4 / 64.0,
        f.i_t2h / 4.0 - f.i_t3h / 16.0 + f.h2 / 32.0 - 3.0 * f.h4 / 128.0,
    ]
}

fn k_coeffs(f: &Functionals) -> [f64; 2] {
    [2.0 * f.i_h - 0.75 * f.h0, -15.0 / 16.0 * f.h0 + 1.5 * f.i_h - f.i_th / 2.0]
}

/// `𝓟ᵣ(h)` through `y³`.
pub fn expand_p(h: &PeriodicFunction) -> Result<ExpansionReport> {
    let f = Functionals::of(h)?;
    let c = p_coeffs(&f);
    Ok(report(&[(0, c[0]), (1, c[1]), (2, c[2]), (3, c[3])], 3, Source::PoissonIntegral, f.named()))
}

/// `𝓠ᵣ(h)` from `y⁻¹` through `y⁴`.
pub fn expand_q(h: &PeriodicFunction) -> Result<ExpansionReport> {
    let f = Functionals::of(h)?;
    let c = q_coeffs(&f);
    let pairs: Vec<(i32, f64)> = (0..6).map(|i| (i as i32 - 1, c[i])).collect();
    Ok(report(&pairs, 4, Source::SquaredPoissonIntegral, f.named()))
}

/// `𝓚ᵣ(h)` through `y¹`.
pub fn expand_k(h: &PeriodicFunction) -> Result<ExpansionReport> {
    let f = Functionals::of(h)?;
    let c = k_coeffs(&f);
    Ok(report(&[(0, c[0]), (1, c[1])], 1, Source::AuxiliaryK, f.named()))
}

/// Functionals of a density slice `g` needed for the `𝓢ᵣ` expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SInputs {
    /// ĝ(0), ĝ''(0), ĝ''''(0)
    pub g0: f64,
    pub g2: f64,
    pub g4: f64,
    /// ǧ'(0), ǧ'''(0)
    pub c1: f64,
    pub c3: f64,
    /// 𝓘(Tĝ), 𝓘(T²ĝ), 𝓘(T³ĝ)
    pub i_tg: f64,
    pub i_t2g: f64,
    pub i_t3g: f64,
    /// 𝓘(T²(ĝ cos)), 𝓘(T³(ĝ cos))
    pub i_t2gc: f64,
    pub i_t3gc: f64,
    /// 𝓘(T²(ǧ sin)), 𝓘(T³(ǧ sin))
    pub i_t2cs: f64,
    pub i_t3cs: f64,
}

impl SInputs {
    pub fn of(g: &PeriodicFunction) -> Result<Self> {
        if !g.is_smooth_at_zero() {
            return Err(Error::domain("expansion needs a density smooth at s = 0"));
        }
        let hat = g.symmetrize();
        let check = g.antisymmetrize();
        let hat_cos = hat.mul_trig(&TrigPoly::cos_k(1));
        let check_sin = check.mul_trig(&TrigPoly::sin_k(1));
        let t = |h: &PeriodicFunction, k: u32| -> Result<f64> { Ok(h.apply_t_pow(k)?.mean()) };
        Ok(Self {
            g0: hat.value_at_zero()?,
            g2: hat.derivative_at_zero(2)?,
            g4: hat.derivative_at_zero(4)?,
            c1: check.derivative_at_zero(1)?,
            c3: check.derivative_at_zero(3)?,
            i_tg: t(&hat, 1)?,
            i_t2g: t(&hat, 2)?,
            i_t3g: t(&hat, 3)?,
            i_t2gc: t(&hat_cos, 2)?,
            i_t3gc: t(&hat_cos, 3)?,
            i_t2cs: t(&check_sin, 2)?,
            i_t3cs: t(&check_sin, 3)?,
        })
    }

    fn named(&self) -> BTreeMap<String, f64> {
        [
            ("g^(0)", self.g0),
            ("g^''(0)", self.g2),
            ("g^''''(0)", self.g4),
            ("gv'(0)", self.c1),
            ("gv'''(0)", self.c3),
            ("I(Tg^)", self.i_tg),
            ("I(T^2g^)", self.i_t2g),
            ("I(T^3g^)", self.i_t3g),
            ("I(T^2(g^cos))", self.i_t2gc),
            ("I(T^3(g^cos))", self.i_t3gc),
            ("I(T^2(gv sin))", self.i_t2cs),
            ("I(T^3(gv sin))", self.i_t3cs),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// `S₋₂ … S₃` from the closed-form coefficient formulas.
pub fn s_coefficients(v: &SInputs) -> [f64; 6] {
    let s0 = v.g0 * v.g0;
    let s1 = v.g0 * v.i_tg;
    let s2 = 0.5 * v.g0 * v.i_tg - 0.25 * (v.g0 * v.g2 + v.c1 * v.c1);
    let s3 = s2 + (v.g2 * v.i_tg + v.g0 * v.i_t2gc - 2.0 * v.c1 * v.i_t2cs) / 8.0 - 0.25 * v.g0 * v.i_t2g;
    [0.0, 0.0, s0, s1, s2, s3]
}

/// `𝓢ᵣ(g)` from `y⁻²` through `y³`.
pub fn expand_s(g: &PeriodicFunction) -> Result<ExpansionReport> {
    let v = SInputs::of(g)?;
    let c = s_coefficients(&v);
    let pairs: Vec<(i32, f64)> = (0..6).map(|i| (i as i32 - 2, c[i])).collect();
    Ok(report(&pairs, 3, Source::NumeratorS, v.named()))
}

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Number of scalar inputs of the `𝓠ᵣ` coefficients: h(0), h'', h'''', 𝓘(T²h), 𝓘(T³h).
const NQ: usize = 5;
/// Number of scalar inputs of the `𝓢ᵣ` series product.
const NS: usize = 11;

/// Linear forms of `Q₋₁ … Q₄` over `[h(0), h'', h'''', 𝓘(T²h), 𝓘(T³h)]`.
fn q_linear_forms() -> [[Q; NQ]; 6] {
    let z = q(0, 1);
    [
        [q(2, 1), z, z, z, z],
        [q(-1, 1), z, z, z, z],
        [z, q(1, 4), z, z, z],
        [z, q(1, 8), z, q(1, 4), z],
        [z, q(1, 16), q(-1, 64), q(1, 4), z],
        [z, q(1, 32), q(-3, 128), q(1, 4), q(-1, 16)],
    ]
}

/// Exact quadratic forms `R_p = Σ_{k+l=p} Q_k Q_l` for `p = −2 … 3`.
pub fn r_quadratic_forms() -> Vec<[[Q; NQ]; NQ]> {
    let lin = q_linear_forms();
    let mut out = Vec::new();
    for p in -2i32..=3 {
        let mut m = [[q(0, 1); NQ]; NQ];
        for k in -1i32..=4 {
            let l = p - k;
            if !(-1..=4).contains(&l) {
                continue;
            }
            let (a, b) = (&lin[(k + 1) as usize], &lin[(l + 1) as usize]);
            for i in 0..NQ {
                for j in 0..NQ {
                    m[i][j] += a[i] * b[j];
                }
            }
        }
        out.push(m);
    }
    out
}

/// Linear maps from the `SInputs` vector to the 𝓠ᵣ inputs of ĝ, ĝ cos s and ǧ sin s.
///
/// Input order: ĝ(0), ĝ'', ĝ'''', 𝓘(T²ĝ), 𝓘(T³ĝ), 𝓘(T²(ĝ cos)), 𝓘(T³(ĝ cos)),
/// ǧ', ǧ''', 𝓘(T²(ǧ sin)), 𝓘(T³(ǧ sin)).
fn s_input_maps() -> [[[Q; NS]; NQ]; 3] {
    let z = [q(0, 1); NS];
    let unit = |i: usize| {
        let mut r = z;
        r[i] = q(1, 1);
        r
    };
    let hat = [unit(0), unit(1), unit(2), unit(3), unit(4)];
    // (h cos)'' = h'' − h(0) and (h cos)'''' = h'''' − 6h'' + h(0).
    let mut hc2 = unit(1);
    hc2[0] = q(-1, 1);
    let mut hc4 = unit(2);
    hc4[1] = q(-6, 1);
    hc4[0] = q(1, 1);
    let hat_cos = [unit(0), hc2, hc4, unit(5), unit(6)];
    // (ǧ sin)(0) = 0, (ǧ sin)'' = 2ǧ', (ǧ sin)'''' = 4ǧ''' − 4ǧ'.
    let mut cs2 = z;
    cs2[7] = q(2, 1);
    let mut cs4 = z;
    cs4[8] = q(4, 1);
    cs4[7] = q(-4, 1);
    let check_sin = [z, cs2, cs4, unit(9), unit(10)];
    [hat, hat_cos, check_sin]
}

/// Exact quadratic forms of `S_p = R_p(ĝ) − R_p(ĝ cos) − R_p(ǧ sin)`.
pub fn s_quadratic_forms() -> Vec<[[Q; NS]; NS]> {
    let maps = s_input_maps();
    let signs = [q(1, 1), q(-1, 1), q(-1, 1)];
    r_quadratic_forms()
        .iter()
        .map(|m| {
            let mut out = [[q(0, 1); NS]; NS];
            for (map, sign) in maps.iter().zip(signs) {
                for a in 0..NS {
                    for b in 0..NS {
                        let mut acc = q(0, 1);
                        for i in 0..NQ {
                            if map[i][a] == q(0, 1) {
                                continue;
                            }
                            for j in 0..NQ {
                                acc += map[i][a] * m[i][j] * map[j][b];
                            }
                        }
                        out[a][b] += sign * acc;
                    }
                }
            }
            out
        })
        .collect()
}

fn ratio_to_f64(r: &Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `S₋₂ … S₃` from the series product of the 𝓠ᵣ expansions.
pub fn s_coefficients_by_product(v: &SInputs) -> [f64; 6] {
    let x = [
        v.g0, v.g2, v.g4, v.i_t2g, v.i_t3g, v.i_t2gc, v.i_t3gc, v.c1, v.c3, v.i_t2cs, v.i_t3cs,
    ];
    let mut out = [0.0; 6];
    for (p, m) in s_quadratic_forms().iter().enumerate() {
        let mut acc = 0.0;
        for a in 0..NS {
            for b in 0..NS {
                if *m[a][b].numer() != 0 {
                    acc += ratio_to_f64(&m[a][b]) * x[a] * x[b];
                }
            }
        }
        out[p] = acc;
    }
    out
}

/// Boundary regime of ρ₁ in the direction φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// `f_φ(0) > 0`
    Positive,
    /// `f_φ(0) = 0`, `f_φ''(0) > 0`
    Zero,
    /// `f_φ(0) = f_φ''(0) = 0`
    DoubleZero,
}

impl BoundaryCase {
    pub fn roman(&self) -> &'static str {
        match self {
            BoundaryCase::Positive => "i",
            BoundaryCase::Zero => "ii",
            BoundaryCase::DoubleZero => "iii",
        }
    }
}

impl fmt::Display for BoundaryCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub case: BoundaryCase,
    /// Expansion of ρ₁ in powers of `y`.
    pub report: ExpansionReport,
}

/// Leading boundary behaviour of ρ₁(re^{iφ}) as `r → 1`.
pub fn rho1_boundary(f: &SpectralMeasure, phi: f64) -> Result<BoundaryReport> {
    if f.has_atoms() {
        return Err(Error::MethodUnavailable(
            "boundary asymptotics are only provided for absolutely continuous measures".into(),
        ));
    }
    let g = f.shifted_density(phi)?;
    if !g.is_smooth_at_zero() {
        return Err(Error::domain(format!("density is not smooth at φ = {phi}")));
    }
    let hat = g.symmetrize();
    let check = g.antisymmetrize();
    let f0 = g.value_at_zero()?;
    let f1 = g.derivative_at_zero(1)?;
    let f2 = g.derivative_at_zero(2)?;
    let i_t = hat.apply_t()?.mean();
    let mut inputs: BTreeMap<String, f64> = [("f(0)", f0), ("f'(0)", f1), ("f''(0)", f2), ("I(Tf^)", i_t)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();

    if f0 > ZERO_VALUE_TOL {
        let r = (f1 * f1 + i_t * i_t) / (4.0 * f0 * f0);
        inputs.insert("R".into(), r);
        let rep = report(&[(-2, 1.0 / PI), (0, -r / PI)], 0, Source::BoundaryPositive, inputs);
        return Ok(BoundaryReport { case: BoundaryCase::Positive, report: rep });
    }
    if i_t == 0.0 || i_t.abs() < 1e-14 {
        return Err(Error::DegenerateDenominator(format!("I(Tf^) = {i_t:e} vanishes")));
    }
    if f2 > ZERO_CURVATURE_TOL {
        let c = f2 / (2.0 * PI * i_t);
        let rep = report(&[(-1, c)], -1, Source::BoundaryZero, inputs);
        return Ok(BoundaryReport { case: BoundaryCase::Zero, report: rep });
    }
    let t2 = |h: &PeriodicFunction| -> Result<f64> { Ok(h.apply_t_pow(2)?.mean()) };
    let a = t2(&hat)?;
    let b = t2(&hat.mul_trig(&TrigPoly::cos_k(1)))?;
    let c = t2(&check.mul_trig(&TrigPoly::sin_k(1)))?;
    inputs.insert("I(T^2f^)".into(), a);
    inputs.insert("I(T^2(f^cos))".into(), b);
    inputs.insert("I(T^2(fv sin))".into(), c);
    let numer = a * a - b * b - c * c;
    inputs.insert("numerator".into(), numer);
    let rep = report(&[(0, numer / (4.0 * PI * i_t * i_t))], 0, Source::BoundaryDoubleZero, inputs);
    Ok(BoundaryReport { case: BoundaryCase::DoubleZero, report: rep })
}

/// `𝓟ᵣ(h)` minus its expansion, from `𝓟ᵣ(h) = h(0) + (y/2)𝓤ᵣ(Th)`.
pub fn p_residual(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let f = Functionals::of(h)?;
    let c = p_coeffs(&f);
    let y = rad.y();
    let u = u_op(&h.apply_t()?, rad)?;
    Ok(y * (0.5 * u - c[1] - c[2] * y - c[3] * y * y))
}

/// `𝓠ᵣ(h)` minus its expansion, from
/// `𝓠ᵣ(h) = h(0)𝓠ᵣ(1) + h''(0)𝓠ᵣ(x) + (y²/4)𝓥ᵣ(T²h)`.
pub fn q_residual(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let f = Functionals::of(h)?;
    let c = q_coeffs(&f);
    let (y, r) = (rad.y(), rad.r());
    let qx = y / ((1.0 + r) * (1.0 + r));
    let qx_series = y / 4.0 + y * y / 8.0 + 5.0 * y.powi(3) / 64.0 + 7.0 * y.powi(4) / 128.0;
    let v = v_op(&h.apply_t_pow(2)?, rad)?;
    let c3 = c[4] - 5.0 * f.h2 / 64.0;
    let c4 = c[5] - 7.0 * f.h2 / 128.0;
    let inner = v - f.i_t2h - 4.0 * c3 * y - 4.0 * c4 * y * y;
    Ok(f.h2 * (qx - qx_series) + 0.25 * y * y * inner)
}

/// `𝓚ᵣ(h)` minus its expansion.
pub fn k_residual(h: &PeriodicFunction, rad: &Radius) -> Result<f64> {
    let f = Functionals::of(h)?;
    let c = k_coeffs(&f);
    Ok(k_op(h, rad)? - c[0] - c[1] * rad.y())
}

/// Least-squares slope of `log|res|` against `log y`.
pub fn fit_slope(ys: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .zip(residuals)
        .filter(|(_, r)| r.abs() > 0.0)
        .map(|(y, r)| (y.ln(), r.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Both sides of the two recursion identities at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionRow {
    pub r: f64,
    pub p_lhs: f64,
    pub p_rhs: f64,
    pub k_lhs: f64,
    pub k_rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionReport {
    pub rows: Vec<RecursionRow>,
    pub max_discrepancy: f64,
}

/// Evaluates the Poisson-integral recursion and the 𝓚ᵣ recursion by quadrature.
pub fn verify_recursions(h: &PeriodicFunction, r_list: &[f64]) -> Result<RecursionReport> {
    let f = Functionals::of(h)?;
    let th = h.apply_t()?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &r in r_list {
        if r <= 0.0 {
            return Err(Error::domain("recursions need r > 0"));
        }
        let rad = Radius::new(r)?;
        let y = rad.y();
        let p_th = p_op(&th, &rad)?;
        let p_lhs = p_op(h, &rad)?;
        let p_rhs = f.h0 + y / (2.0 * r) * f.i_th - y * y / (2.0 * r * (1.0 + r).powi(2)) * p_th;

        let k_h = k_op(h, &rad)?;
        let k_th = k_op(&th, &rad)?;
        let r1 = 1.0 + r;
        let k_rhs = 2.0 * f.i_h
            + (2.0 * r - 3.0) * (1.0 + 4.0 * r + r * r) / r1.powi(3) * f.h0
            + ((1.0 + 2.0 * r) / r1 * f.i_h + (2.0 * r - 3.0) * (1.0 + r * r) / (2.0 * r * r1) * f.i_th) * y
            + ((1.0 + 2.0 * r) / (r1 * r1) * k_h - (2.0 * r - 3.0) / (2.0 * r * r1.powi(3)) * p_th
                + r * (2.0 * r - 3.0) / (2.0 * r1 * r1) * k_th)
                * y
                * y;
        worst = worst.max((p_lhs - p_rhs).abs()).max((k_h - k_rhs).abs());
        rows.push(RecursionRow { r, p_lhs, p_rhs, k_lhs: k_h, k_rhs });
    }
    Ok(RecursionReport { rows, max_discrepancy: worst })
}
