//! Piecewise-trigonometric 2π-periodic functions.
//!
//! A function is stored as a partition of `[-π, π]` into pieces, each
//! carrying `numer(s) / x(s)^q` with `x = 1 − cos s`. Negative powers of
//! `x` only arise from the operator `T` on pieces away from the origin, so
//! the piece containing `s = 0` always has `q = 0`.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{self, Focus, GaussLegendre};
use crate::trig::TrigPoly;

const BREAK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub numer: TrigPoly,
    pub x_power: u32,
}

impl Piece {
    pub fn eval(&self, s: f64) -> f64 {
        let v = self.numer.eval(s);
        if self.x_power == 0 {
            v
        } else {
            let h = (0.5 * s).sin();
            v / (2.0 * h * h).powi(self.x_power as i32)
        }
    }

    fn contains_zero(&self) -> bool {
        self.lo < 0.0 && self.hi > 0.0
    }

    fn max_width(&self) -> f64 {
        quadrature::MAX_PANEL.min(4.0 / (self.numer.degree() as f64 + 1.0))
    }

    /// Panels for this piece, graded around `foci` and, when the piece
    /// carries a power of `x`, around the origin.
    fn panels(&self, foci: &[Focus]) -> Vec<(f64, f64)> {
        let mut all = foci.to_vec();
        if self.x_power > 0 {
            let d = self.lo.abs().min(self.hi.abs());
            all.push(Focus::new(0.0, 0.25 * d));
        }
        quadrature::panels(self.lo, self.hi, &[], &all, self.max_width())
    }
}

/// How a function was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Built from closed-form pieces with exact breakpoints.
    Exact,
    /// Reconstructed from `grid` equispaced samples.
    Sampled { grid: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    pieces: Vec<Piece>,
    origin: Origin,
}

impl PeriodicFunction {
    pub fn from_trig(p: TrigPoly) -> Self {
        Self {
            pieces: vec![Piece { lo: -PI, hi: PI, numer: p, x_power: 0 }],
            origin: Origin::Exact,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_trig(TrigPoly::constant(c))
    }

    /// Builds a function from `(lo, hi, poly)` triples tiling `[-π, π]`.
    pub fn from_pieces(parts: Vec<(f64, f64, TrigPoly)>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("no pieces given"));
        }
        let mut expect = -PI;
        for (lo, hi, _) in &parts {
            if (lo - expect).abs() > BREAK_TOL || hi <= lo {
                return Err(Error::domain(format!("pieces must tile [-π, π] in order; got [{lo}, {hi}]")));
            }
            expect = *hi;
        }
        if (expect - PI).abs() > BREAK_TOL {
            return Err(Error::domain("pieces must end at π"));
        }
        let n = parts.len();
        let pieces = parts
            .into_iter()
            .enumerate()
            .map(|(i, (lo, hi, numer))| Piece {
                lo: if i == 0 { -PI } else { lo },
                hi: if i + 1 == n { PI } else { hi },
                numer,
                x_power: 0,
            })
            .collect();
        Ok(Self::normalized(pieces, Origin::Exact))
    }

    /// A step function equal to `values[i]` on `[breaks[i], breaks[i+1])`.
    pub fn step(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::domain("step needs one more break than values"));
        }
        let parts = breaks
            .windows(2)
            .zip(values)
            .map(|(w, &v)| (w[0], w[1], TrigPoly::constant(v)))
            .collect();
        Self::from_pieces(parts)
    }

    /// Trigonometric interpolant of samples at `tⱼ = −π + 2πj/M`.
    pub fn from_samples(values: &[f64]) -> Self {
        let m = values.len();
        assert!(m >= 2, "need at least two samples");
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let n = (m - 1) / 2;
        let mut c = vec![0.0; n + 1];
        let mut s = vec![0.0; n + 1];
        for k in 0..=n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let p = buf[k] * sign / m as f64;
            if k == 0 {
                c[0] = p.re;
            } else {
                c[k] = 2.0 * p.re;
                s[k] = -2.0 * p.im;
            }
        }
        let numer = TrigPoly::new(c, s).chop(1e-14);
        Self {
            pieces: vec![Piece { lo: -PI, hi: PI, numer, x_power: 0 }],
            origin: Origin::Sampled { grid: m },
        }
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.lo).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(|p| p.numer.degree()).max().unwrap_or(0)
    }

    fn with_pieces(&self, pieces: Vec<Piece>) -> Self {
        Self::normalized(pieces, self.origin)
    }

    fn normalized(mut pieces: Vec<Piece>, origin: Origin) -> Self {
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if p.hi - p.lo <= BREAK_TOL {
                if let Some(last) = out.last_mut() {
                    last.hi = p.hi;
                }
                continue;
            }
            match out.last_mut() {
                Some(last) if last.numer == p.numer && last.x_power == p.x_power => last.hi = p.hi,
                Some(last) => {
                    let mut p = p;
                    p.lo = last.hi;
                    out.push(p);
                }
                None => out.push(p),
            }
        }
        if let Some(first) = out.first_mut() {
            first.lo = -PI;
        }
        if let Some(last) = out.last_mut() {
            last.hi = PI;
        }
        Self { pieces: out, origin }
    }

    fn locate(&self, s: f64) -> &Piece {
        let idx = self.pieces.partition_point(|p| p.hi <= s);
        &self.pieces[idx.min(self.pieces.len() - 1)]
    }

    pub fn eval(&self, s: f64) -> f64 {
        let u = quadrature::wrap_angle(s);
        let u = if u == PI { -PI } else { u };
        self.locate(u).eval(u)
    }

    /// The piece whose interior contains `s = 0`.
    pub fn central_piece(&self) -> Option<&Piece> {
        self.pieces.iter().find(|p| p.contains_zero())
    }

    /// True when `s = 0` lies strictly inside a single smooth piece.
    pub fn is_smooth_at_zero(&self) -> bool {
        self.central_piece().is_some()
    }

    /// `h^{(order)}(0)` from the exact local representation.
    pub fn derivative_at_zero(&self, order: u32) -> Result<f64> {
        let p = self
            .central_piece()
            .ok_or_else(|| Error::domain("function is not smooth at s = 0"))?;
        Ok(p.numer.derivative_at_zero(order))
    }

    pub fn value_at_zero(&self) -> Result<f64> {
        self.derivative_at_zero(0)
    }

    /// `s ↦ h(s + φ)`. Only defined for functions without powers of `x`.
    pub fn shift(&self, phi: f64) -> Self {
        assert!(
            self.pieces.iter().all(|p| p.x_power == 0),
            "shift is only defined for plain piecewise polynomials"
        );
        let mut out = Vec::new();
        for p in &self.pieces {
            let numer = p.numer.shift(phi);
            let len = p.hi - p.lo;
            let mut a = p.lo - phi;
            while a < -PI - BREAK_TOL {
                a += 2.0 * PI;
            }
            while a >= PI - BREAK_TOL {
                a -= 2.0 * PI;
            }
            let a = a.max(-PI);
            let b = a + len;
            if b <= PI + BREAK_TOL {
                out.push(Piece { lo: a, hi: b.min(PI), numer, x_power: 0 });
            } else {
                out.push(Piece { lo: a, hi: PI, numer: numer.clone(), x_power: 0 });
                out.push(Piece { lo: -PI, hi: b - 2.0 * PI, numer, x_power: 0 });
            }
        }
        self.with_pieces(out)
    }

    /// `s ↦ h(−s)`.
    pub fn reflect(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| Piece { lo: -p.hi, hi: -p.lo, numer: p.numer.reflect(), x_power: p.x_power })
            .collect();
        self.with_pieces(pieces)
    }

    pub fn scale(&self, a: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { numer: p.numer.scale(a), ..p.clone() })
            .collect();
        self.with_pieces(pieces)
    }

    /// Pointwise product with a trigonometric polynomial.
    pub fn mul_trig(&self, m: &TrigPoly) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { numer: p.numer.mul(m), ..p.clone() })
            .collect();
        self.with_pieces(pieces)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut cuts: Vec<f64> = self
            .pieces
            .iter()
            .chain(&other.pieces)
            .flat_map(|p| [p.lo, p.hi])
            .collect();
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup_by(|b, a| (*b - *a).abs() <= BREAK_TOL);
        let mut pieces = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let (p, q) = (self.locate(mid), other.locate(mid));
            let k = p.x_power.max(q.x_power);
            let lift = |piece: &Piece| {
                if piece.x_power == k {
                    piece.numer.clone()
                } else {
                    piece.numer.mul(&TrigPoly::x_pow(k - piece.x_power))
                }
            };
            pieces.push(Piece { lo: w[0], hi: w[1], numer: lift(p).add(&lift(q)), x_power: k });
        }
        let origin = match (self.origin, other.origin) {
            (Origin::Exact, Origin::Exact) => Origin::Exact,
            (Origin::Sampled { grid }, _) | (_, Origin::Sampled { grid }) => Origin::Sampled { grid },
        };
        Self::normalized(pieces, origin)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// `ĥ(s) = (h(s) + h(−s)) / 2`.
    pub fn symmetrize(&self) -> Self {
        self.add(&self.reflect()).scale(0.5)
    }

    /// `ȟ(s) = (h(s) − h(−s)) / 2`.
    pub fn antisymmetrize(&self) -> Self {
        self.sub(&self.reflect()).scale(0.5)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.pieces.iter().map(|p| p.numer.max_abs_coeff()).fold(0.0, f64::max)
    }

    /// True when `h(s) = h(−s)` up to coefficient roundoff.
    pub fn is_even(&self) -> bool {
        let d = self.sub(&self.reflect());
        d.max_abs_coeff() <= 1e-12 * self.max_abs_coeff().max(1e-300)
    }

    pub fn is_odd(&self) -> bool {
        let d = self.add(&self.reflect());
        d.max_abs_coeff() <= 1e-12 * self.max_abs_coeff().max(1e-300)
    }

    /// `Th = (h − h(0)) / (1 − cos s)`, exact on every piece.
    pub fn apply_t(&self) -> Result<Self> {
        let h0 = match self.central_piece() {
            Some(p) => p.numer.eval(0.0),
            None => return Err(Error::domain("T requires a function smooth at s = 0")),
        };
        if self.max_abs_coeff() > 0.0 && !self.is_even() {
            return Err(Error::domain("T requires an even function"));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                if p.contains_zero() {
                    Piece { numer: p.numer.even_part().apply_t(), ..p.clone() }
                } else {
                    let numer = p.numer.sub(&TrigPoly::x_pow(p.x_power).scale(h0));
                    Piece { numer, x_power: p.x_power + 1, ..p.clone() }
                }
            })
            .collect();
        Ok(self.with_pieces(pieces))
    }

    /// `T` applied `power` times.
    pub fn apply_t_pow(&self, power: u32) -> Result<Self> {
        let mut h = self.clone();
        for _ in 0..power {
            h = h.apply_t()?;
        }
        Ok(h)
    }

    /// `h / (1 − cos s)` for `h` vanishing to second order at zero.
    pub fn div_x(&self) -> Result<Self> {
        let c = self
            .central_piece()
            .ok_or_else(|| Error::domain("division by x requires smoothness at s = 0"))?;
        let scale = self.max_abs_coeff().max(1e-300);
        let (v0, v1) = (c.numer.eval(0.0), c.numer.derivative_at_zero(1));
        if v0.abs() > 1e-10 * scale || v1.abs() > 1e-10 * scale {
            return Err(Error::CaseMismatch(format!(
                "division by x needs h(0) = h'(0) = 0, got {v0:e}, {v1:e}"
            )));
        }
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                if p.contains_zero() {
                    Piece { numer: p.numer.div_x(), ..p.clone() }
                } else {
                    Piece { x_power: p.x_power + 1, ..p.clone() }
                }
            })
            .collect();
        Ok(self.with_pieces(pieces))
    }

    /// `∫_{-π}^{π} h(s) ds`.
    pub fn integral(&self) -> f64 {
        let rule = GaussLegendre::standard();
        self.pieces
            .iter()
            .map(|p| {
                if p.x_power == 0 {
                    p.numer.integral(p.lo, p.hi)
                } else {
                    p.panels(&[])
                        .iter()
                        .map(|&(a, b)| rule.integrate(a, b, |s| p.eval(s)))
                        .sum()
                }
            })
            .sum()
    }

    /// `∫ h` over each of `m` equal cells partitioning `[-π, π]`.
    pub fn cell_masses(&self, m: usize) -> Vec<f64> {
        let width = 2.0 * PI / m as f64;
        let edge = |j: usize| -PI + width * j as f64;
        let rule = GaussLegendre::standard();
        let mut out = vec![0.0; m];
        for p in &self.pieces {
            let first = (((p.lo + PI) / width).floor().max(0.0) as usize).min(m - 1);
            let mut j = first;
            while j < m && edge(j) < p.hi {
                let (a, b) = (edge(j).max(p.lo), edge(j + 1).min(p.hi));
                if b > a {
                    out[j] += if p.x_power == 0 {
                        p.numer.integral(a, b)
                    } else {
                        rule.integrate(a, b, |s| p.eval(s))
                    };
                }
                j += 1;
            }
        }
        out
    }

    /// `𝓘(h) = (1/2π) ∫ h(s) ds`.
    pub fn mean(&self) -> f64 {
        self.integral() / (2.0 * PI)
    }

    /// Periodic trapezoid rule on `m` equispaced points.
    pub fn trapezoid_mean(&self, m: usize) -> f64 {
        let step = 2.0 * PI / m as f64;
        (0..m).map(|j| self.eval(-PI + (j as f64 + 0.5) * step)).sum::<f64>() / m as f64
    }

    /// Quadrature nodes, weights and function values, graded around `foci`
    /// and split at the breakpoints.
    pub fn nodes(&self, foci: &[Focus]) -> Nodes {
        let rule = GaussLegendre::standard();
        let mut out = Nodes::default();
        for p in &self.pieces {
            for (a, b) in p.panels(foci) {
                let start = out.s.len();
                rule.push_nodes(a, b, &mut out.s, &mut out.w);
                out.h.extend(out.s[start..].iter().map(|&s| p.eval(s)));
            }
        }
        out
    }

    /// `∫_{-π}^{π} h(s) k(s) ds` with panels refined around `foci`.
    pub fn integrate_with<K: Fn(f64) -> f64>(&self, foci: &[Focus], kernel: K) -> f64 {
        self.nodes(foci).sum(kernel)
    }

    /// Smallest value over an equispaced grid and the piece endpoints.
    pub fn sampled_min(&self, m: usize) -> f64 {
        let grid = (0..m).map(|j| -PI + 2.0 * PI * j as f64 / m as f64);
        let ends = self.pieces.iter().flat_map(|p| {
            let eps = 1e-12 * (p.hi - p.lo);
            [p.lo + eps, p.hi - eps]
        });
        grid.chain(ends).map(|s| self.eval(s)).fold(f64::INFINITY, f64::min)
    }
}

/// Quadrature nodes with cached function values.
#[derive(Debug, Clone, Default)]
pub struct Nodes {
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub h: Vec<f64>,
}

impl Nodes {
    pub fn sum<K: Fn(f64) -> f64>(&self, kernel: K) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.s.len() {
            acc += self.w[i] * self.h[i] * kernel(self.s[i]);
        }
        acc
    }
}
