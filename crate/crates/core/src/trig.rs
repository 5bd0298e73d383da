//! Real trigonometric polynomials `c₀ + Σ (cₖ cos ks + sₖ sin ks)`.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPoly {
    /// Cosine coefficients; `cos[0]` is the constant term.
    cos: Vec<f64>,
    /// Sine coefficients; `sin[0]` is always zero.
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len()).max(1);
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        sin[0] = 0.0;
        let mut p = Self { cos, sin };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self { cos: vec![c], sin: vec![0.0] }
    }

    pub fn cos_k(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Self::new(c, vec![])
    }

    pub fn sin_k(k: usize) -> Self {
        let mut s = vec![0.0; k + 1];
        s[k] = 1.0;
        Self::new(vec![], s)
    }

    /// `x(s) = 1 − cos s`.
    pub fn x() -> Self {
        Self::new(vec![1.0, -1.0], vec![])
    }

    /// `x(s)^q`.
    pub fn x_pow(q: u32) -> Self {
        let x = Self::x();
        let mut p = Self::constant(1.0);
        for _ in 0..q {
            p = p.mul(&x);
        }
        p
    }

    pub fn degree(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn is_zero(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    fn trim(&mut self) {
        while self.cos.len() > 1 {
            let n = self.cos.len() - 1;
            if self.cos[n] == 0.0 && self.sin[n] == 0.0 {
                self.cos.pop();
                self.sin.pop();
            } else {
                break;
            }
        }
    }

    /// Drops coefficients below `tol` times the largest one.
    pub fn chop(&self, tol: f64) -> Self {
        let m = self.max_abs_coeff();
        let cut = tol * m;
        let f = |c: &f64| if c.abs() <= cut { 0.0 } else { *c };
        Self::new(self.cos.iter().map(f).collect(), self.sin.iter().map(f).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.cos.iter().chain(&self.sin).fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Sum of absolute coefficients, a bound on the sup norm.
    pub fn l1_norm(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum()
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.degree();
        if n == 0 {
            return self.cos[0];
        }
        // Clenshaw recurrences for both sums.
        let two_c = 2.0 * s.cos();
        let (mut bc1, mut bc2) = (0.0, 0.0);
        let (mut bs1, mut bs2) = (0.0, 0.0);
        for k in (1..=n).rev() {
            let bc0 = self.cos[k] + two_c * bc1 - bc2;
            bc2 = bc1;
            bc1 = bc0;
            let bs0 = self.sin[k] + two_c * bs1 - bs2;
            bs2 = bs1;
            bs1 = bs0;
        }
        // Σ cₖ cos ks = b₁ cos s − b₂ and Σ sₖ sin ks = b₁ sin s.
        self.cos[0] + bc1 * s.cos() - bc2 + bs1 * s.sin()
    }

    /// Value of the `order`-th derivative at `s = 0`.
    pub fn derivative_at_zero(&self, order: u32) -> f64 {
        let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let coeffs = if order % 2 == 0 { &self.cos } else { &self.sin };
        let mut acc = 0.0;
        for (k, c) in coeffs.iter().enumerate() {
            if order == 0 || k > 0 {
                acc += c * (k as f64).powi(order as i32);
            }
        }
        sign * acc
    }

    pub fn derivative(&self) -> Self {
        let n = self.degree();
        let mut c = vec![0.0; n + 1];
        let mut s = vec![0.0; n + 1];
        for k in 1..=n {
            let kf = k as f64;
            c[k] = kf * self.sin[k];
            s[k] = -kf * self.cos[k];
        }
        Self::new(c, s)
    }

    pub fn even_part(&self) -> Self {
        Self::new(self.cos.clone(), vec![])
    }

    pub fn odd_part(&self) -> Self {
        Self::new(vec![], self.sin.clone())
    }

    /// `s ↦ p(−s)`.
    pub fn reflect(&self) -> Self {
        Self::new(self.cos.clone(), self.sin.iter().map(|c| -c).collect())
    }

    /// `s ↦ p(s + φ)`.
    pub fn shift(&self, phi: f64) -> Self {
        let n = self.degree();
        let mut c = vec![0.0; n + 1];
        let mut s = vec![0.0; n + 1];
        c[0] = self.cos[0];
        for k in 1..=n {
            let (sk, ck) = (k as f64 * phi).sin_cos();
            c[k] = self.cos[k] * ck + self.sin[k] * sk;
            s[k] = self.sin[k] * ck - self.cos[k] * sk;
        }
        Self::new(c, s)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self::new(
            self.cos.iter().map(|c| a * c).collect(),
            self.sin.iter().map(|c| a * c).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.cos.len().max(other.cos.len());
        let get = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let c = (0..n).map(|k| get(&self.cos, k) + get(&other.cos, k)).collect();
        let s = (0..n).map(|k| get(&self.sin, k) + get(&other.sin, k)).collect();
        Self::new(c, s)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (n, m) = (self.degree(), other.degree());
        let mut c = vec![0.0; n + m + 1];
        let mut s = vec![0.0; n + m + 1];
        for j in 0..=n {
            let (aj, bj) = (self.cos[j], self.sin[j]);
            if aj == 0.0 && bj == 0.0 {
                continue;
            }
            for k in 0..=m {
                let (ak, bk) = (other.cos[k], other.sin[k]);
                let sum = j + k;
                let diff = j.abs_diff(k);
                // cos·cos
                c[sum] += 0.5 * aj * ak;
                c[diff] += 0.5 * aj * ak;
                // sin·sin
                c[diff] += 0.5 * bj * bk;
                c[sum] -= 0.5 * bj * bk;
                // sin j · cos k and cos j · sin k
                s[sum] += 0.5 * (bj * ak + aj * bk);
                if j >= k {
                    s[diff] += 0.5 * (bj * ak - aj * bk);
                } else {
                    s[diff] += 0.5 * (aj * bk - bj * ak);
                }
            }
        }
        s[0] = 0.0;
        Self::new(c, s)
    }

    /// Coefficients `p̂ₘ` of `p(s) = Σ p̂ₘ e^{ims}`, indexed `m + degree`.
    fn exp_coeffs(&self) -> Vec<Complex64> {
        let n = self.degree();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        out[n] = Complex64::new(self.cos[0], 0.0);
        for k in 1..=n {
            let half = Complex64::new(0.5 * self.cos[k], -0.5 * self.sin[k]);
            out[n + k] = half;
            out[n - k] = half.conj();
        }
        out
    }

    /// `∫_lo^hi p(s) ds`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = self.cos[0] * (hi - lo);
        for k in 1..=self.degree() {
            let kf = k as f64;
            let (sh, ch) = (kf * hi).sin_cos();
            let (sl, cl) = (kf * lo).sin_cos();
            acc += self.cos[k] * (sh - sl) / kf - self.sin[k] * (ch - cl) / kf;
        }
        acc
    }

    /// `∫_lo^hi p(s) e^{−iks} ds`.
    pub fn exp_integral(&self, lo: f64, hi: f64, k: i64) -> Complex64 {
        let n = self.degree() as i64;
        let coeffs = self.exp_coeffs();
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, c) in coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let m = idx as i64 - n - k;
            acc += c * exp_i_integral(m, lo, hi);
        }
        acc
    }

    /// The exact difference quotient `(p(s) − p(0)) / (1 − cos s)` of the even part.
    pub fn apply_t(&self) -> Self {
        let a = &self.cos;
        let n = self.degree();
        if n == 0 {
            return Self::zero();
        }
        // T(cos ns) = −(n + 2 Σ_{k<n} (n−k) cos ks).
        let mut c = vec![0.0; n];
        let mut suffix_a = 0.0;
        let mut suffix_b = 0.0;
        for k in (1..n).rev() {
            suffix_a += a[k + 1];
            suffix_b += (k + 1) as f64 * a[k + 1];
            c[k] = -2.0 * (suffix_b - k as f64 * suffix_a);
        }
        c[0] = -(1..=n).map(|k| k as f64 * a[k]).sum::<f64>();
        Self::new(c, vec![])
    }

    /// `p(s) / (1 − cos s)` for `p` with `p(0) = p'(0) = 0`; the small
    /// residual values at zero are discarded.
    pub fn div_x(&self) -> Self {
        let even = self.apply_t();
        let odd_over_sin = self.odd_over_sin();
        even.add(&Self::sin_k(1).mul(&odd_over_sin.apply_t()))
    }

    /// Odd part divided by `sin s`, an even polynomial.
    pub fn odd_over_sin(&self) -> Self {
        let n = self.degree();
        let mut c = vec![0.0; n.max(1)];
        for m in 1..=n {
            let b = self.sin[m];
            if b == 0.0 {
                continue;
            }
            // sin(ms)/sin s = U_{m−1}(cos s).
            if m % 2 == 1 {
                c[0] += b;
                for k in (2..m).step_by(2) {
                    c[k] += 2.0 * b;
                }
            } else {
                for k in (1..m).step_by(2) {
                    c[k] += 2.0 * b;
                }
            }
        }
        Self::new(c, vec![])
    }
}

fn exp_i_integral(m: i64, lo: f64, hi: f64) -> Complex64 {
    if m == 0 {
        return Complex64::new(hi - lo, 0.0);
    }
    let mf = m as f64;
    let e = |t: f64| Complex64::from_polar(1.0, mf * t);
    (e(hi) - e(lo)) / Complex64::new(0.0, mf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn direct(p: &TrigPoly, s: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..=p.degree() {
            acc += p.cos[k] * (k as f64 * s).cos() + p.sin[k] * (k as f64 * s).sin();
        }
        acc
    }

    fn poly() -> impl Strategy<Value = TrigPoly> {
        (prop::collection::vec(-1.0..1.0f64, 1..7), prop::collection::vec(-1.0..1.0f64, 1..7))
            .prop_map(|(c, s)| TrigPoly::new(c, s))
    }

    #[test]
    fn cos2_derivatives() {
        let p = TrigPoly::cos_k(2);
        assert_eq!(p.derivative_at_zero(2), -4.0);
        assert_eq!(p.derivative_at_zero(4), 16.0);
        assert_eq!(p.derivative_at_zero(1), 0.0);
    }

    #[test]
    fn t_of_x_is_one() {
        assert_eq!(TrigPoly::x().apply_t(), TrigPoly::constant(1.0));
        assert_eq!(TrigPoly::constant(3.0).apply_t(), TrigPoly::zero());
    }

    #[test]
    fn t_of_cos2() {
        let t = TrigPoly::cos_k(2).apply_t();
        assert_eq!(t, TrigPoly::new(vec![-2.0, -2.0], vec![]));
    }

    #[test]
    fn x_pow_values() {
        let s: f64 = 0.7;
        assert_relative_eq!(TrigPoly::x_pow(3).eval(s), (1.0 - s.cos()).powi(3), epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn clenshaw_matches_direct(p in poly(), s in -PI..PI) {
            prop_assert!((p.eval(s) - direct(&p, s)).abs() < 1e-12);
        }

        #[test]
        fn product_is_pointwise(p in poly(), q in poly(), s in -PI..PI) {
            prop_assert!((p.mul(&q).eval(s) - p.eval(s) * q.eval(s)).abs() < 1e-12);
        }

        #[test]
        fn shift_is_translation(p in poly(), phi in -PI..PI, s in -PI..PI) {
            prop_assert!((p.shift(phi).eval(s) - p.eval(s + phi)).abs() < 1e-12);
        }

        #[test]
        fn t_reconstructs(p in poly(), s in 0.01..PI) {
            let e = p.even_part();
            let t = e.apply_t();
            let x = 1.0 - s.cos();
            prop_assert!((t.eval(s) * x + e.eval(0.0) - e.eval(s)).abs() < 1e-11);
        }

        #[test]
        fn t_at_zero_is_second_derivative(p in poly()) {
            let e = p.even_part();
            prop_assert!((e.apply_t().eval(0.0) - e.derivative_at_zero(2)).abs() < 1e-10);
        }

        #[test]
        fn t_squared_at_zero(p in poly()) {
            let e = p.even_part();
            let want = (e.derivative_at_zero(2) + e.derivative_at_zero(4)) / 6.0;
            prop_assert!((e.apply_t().apply_t().eval(0.0) - want).abs() < 1e-9);
        }

        #[test]
        fn integral_matches_quadrature(p in poly(), lo in -PI..0.0, hi in 0.0..PI) {
            let g = crate::quadrature::GaussLegendre::new(40);
            let want = g.integrate(lo, hi, |s| p.eval(s));
            prop_assert!((p.integral(lo, hi) - want).abs() < 1e-11);
        }

        #[test]
        fn exp_integral_matches_quadrature(p in poly(), k in -5i64..5, lo in -PI..0.0, hi in 0.0..PI) {
            let g = crate::quadrature::GaussLegendre::new(40);
            let re = g.integrate(lo, hi, |s| p.eval(s) * (k as f64 * s).cos());
            let im = g.integrate(lo, hi, |s| -p.eval(s) * (k as f64 * s).sin());
            let got = p.exp_integral(lo, hi, k);
            prop_assert!((got.re - re).abs() < 1e-11 && (got.im - im).abs() < 1e-11);
        }

        #[test]
        fn div_x_of_vanishing(p in poly(), s in 0.05..PI) {
            // q = p·x² vanishes to second order at zero.
            let q = p.mul(&TrigPoly::x_pow(2));
            let d = q.div_x();
            prop_assert!((d.eval(s) - q.eval(s) / (1.0 - s.cos())).abs() < 1e-10);
            prop_assert!((d.eval(-s) - q.eval(-s) / (1.0 - s.cos())).abs() < 1e-10);
        }
    }
}
