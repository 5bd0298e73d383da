//! Roots of truncated series and zero counts in planar regions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 2048;
/// Iteration cap of the simultaneous iteration.
pub const MAX_ITER: usize = 500;
/// Distance from a region boundary treated as a tie.
pub const BOUNDARY_TOL: f64 = 1e-12;

const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub roots: Vec<Complex64>,
    pub degree: usize,
    /// `max |p(zᵢ)| / Σ |c_k| max(1, |zᵢ|)^k`.
    pub residual: f64,
}

/// `p(z)`, `p'(z)` and `Σ |c_k| |z|^k` by Horner's rule.
fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let az = z.norm();
    let mut p = c[c.len() - 1];
    let mut dp = Complex64::new(0.0, 0.0);
    let mut s = p.norm();
    for k in (0..c.len() - 1).rev() {
        dp = dp * z + p;
        p = p * z + c[k];
        s = s * az + c[k].norm();
    }
    (p, dp, s)
}

/// Newton correction `p(z)/p'(z)` and the backward error `|p(z)| / Σ|c_k||z|^k`.
///
/// Outside the unit disk the reversed polynomial is used so that nothing overflows.
fn newton(c: &[Complex64], rev: &[Complex64], z: Complex64) -> (Complex64, f64) {
    let n = (c.len() - 1) as f64;
    if z.norm() <= 1.0 {
        let (p, dp, s) = horner(c, z);
        let err = if s > 0.0 { p.norm() / s } else { 0.0 };
        if p == Complex64::new(0.0, 0.0) {
            return (p, 0.0);
        }
        (p / dp, err)
    } else {
        let w = z.inv();
        let (q, dq, s) = horner(rev, w);
        let err = if s > 0.0 { q.norm() / s } else { 0.0 };
        if q == Complex64::new(0.0, 0.0) {
            return (q, 0.0);
        }
        (z / (n - w * dq / q), err)
    }
}

/// All roots of `Σ c_k z^k`, coefficients in increasing degree.
pub fn find_roots(coeffs: &[Complex64]) -> Result<ZeroSet> {
    find_roots_capped(coeffs, MAX_ITER)
}

/// [`find_roots`] with an explicit iteration cap.
pub fn find_roots_capped(coeffs: &[Complex64], max_iter: usize) -> Result<ZeroSet> {
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::domain("coefficients must be finite"));
    }
    let top = coeffs
        .iter()
        .rposition(|c| c.norm() > 0.0)
        .ok_or_else(|| Error::domain("the zero polynomial has no root set"))?;
    if top > MAX_DEGREE {
        return Err(Error::domain(format!("degree {top} exceeds {MAX_DEGREE}")));
    }
    let low = coeffs.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let scale = coeffs[low..=top].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let c: Vec<Complex64> = coeffs[low..=top].iter().map(|&v| v / scale).collect();
    let n = c.len() - 1;
    if n == 0 {
        return Ok(ZeroSet { roots, degree: top, residual: 0.0 });
    }
    let rev: Vec<Complex64> = c.iter().rev().copied().collect();

    let radius = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(radius, 2.0 * PI * j as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, err) = newton(&c, &rev, z[i]);
            if err <= 4.0 * EPS * n as f64 {
                done[i] = true;
                continue;
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    sum += (z[i] - z[j]).inv();
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            z[i] -= w;
            if w.norm() <= EPS * z[i].norm() {
                done[i] = true;
            }
        }
    }
    let unconverged = done.iter().filter(|d| !**d).count();
    if unconverged > 0 {
        roots.extend(z);
        return Err(Error::Solver { iterations, unconverged, partial: roots });
    }
    for zi in z.iter_mut() {
        let (ratio, err) = newton(&c, &rev, *zi);
        let cand = *zi - ratio;
        if newton(&c, &rev, cand).1 < err {
            *zi = cand;
        }
    }
    let residual = z.iter().map(|&zi| newton(&c, &rev, zi).1).fold(0.0, f64::max);
    roots.extend(z);
    Ok(ZeroSet { roots, degree: top, residual })
}

/// A planar region for zero counting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { r: f64 },
    Annulus { r_lo: f64, r_hi: f64 },
    Sector { r_lo: f64, r_hi: f64, phi_lo: f64, phi_hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Membership {
    Inside,
    Tie,
    Outside,
}

/// Membership in `lo < |z| < hi`; `lo = 0` includes the origin.
fn radial(m: f64, lo: f64, hi: f64) -> Membership {
    if (m - hi).abs() <= BOUNDARY_TOL || (lo > 0.0 && (m - lo).abs() <= BOUNDARY_TOL) {
        Membership::Tie
    } else if (lo == 0.0 || m > lo) && m < hi {
        Membership::Inside
    } else {
        Membership::Outside
    }
}

impl Region {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = match *self {
            Region::Disk { r } => (0.0, r),
            Region::Annulus { r_lo, r_hi } => (r_lo, r_hi),
            Region::Sector { r_lo, r_hi, phi_lo, phi_hi } => {
                let w = phi_hi - phi_lo;
                if !(w > 0.0 && w <= 2.0 * PI) {
                    return Err(Error::domain(format!("sector width {w} must lie in (0, 2π]")));
                }
                (r_lo, r_hi)
            }
        };
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::domain(format!("radii must satisfy 0 ≤ r_lo < r_hi, got {lo}, {hi}")));
        }
        Ok(())
    }

    fn membership(&self, z: Complex64) -> Membership {
        let m = z.norm();
        match *self {
            Region::Disk { r } => radial(m, 0.0, r),
            Region::Annulus { r_lo, r_hi } => radial(m, r_lo, r_hi),
            Region::Sector { r_lo, r_hi, phi_lo, phi_hi } => {
                let rad = radial(m, r_lo, r_hi);
                let w = phi_hi - phi_lo;
                if rad == Membership::Outside || w >= 2.0 * PI {
                    return rad;
                }
                let d = (z.arg() - phi_lo).rem_euclid(2.0 * PI);
                let tie = d <= BOUNDARY_TOL || (d - w).abs() <= BOUNDARY_TOL || d >= 2.0 * PI - BOUNDARY_TOL;
                if tie {
                    Membership::Tie
                } else if d < w {
                    rad
                } else {
                    Membership::Outside
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionCount {
    /// Roots inside, ties included.
    pub count: usize,
    /// Roots within [`BOUNDARY_TOL`] of the boundary.
    pub boundary_ties: usize,
}

pub fn count_region(zs: &ZeroSet, region: &Region) -> Result<RegionCount> {
    count_points(&zs.roots, region)
}

pub fn count_points(points: &[Complex64], region: &Region) -> Result<RegionCount> {
    region.validate()?;
    let mut out = RegionCount { count: 0, boundary_ties: 0 };
    for &z in points {
        match region.membership(z) {
            Membership::Inside => out.count += 1,
            Membership::Tie => {
                out.count += 1;
                out.boundary_ties += 1;
            }
            Membership::Outside => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn gaussian(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..=n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a, b)
            })
            .collect()
    }

    /// Largest distance in a greedy matching of two root sets.
    fn match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut used = vec![false; b.len()];
        let mut worst: f64 = 0.0;
        for &x in a {
            let (j, d) = b
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, &y)| (j, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }

    #[test]
    fn quadratic() {
        let z = find_roots(&[c(-0.25), c(0.0), c(1.0)]).unwrap();
        assert!(match_distance(&z.roots, &[c(0.5), c(-0.5)]) < 1e-14);
        assert_eq!(z.degree, 2);
    }

    #[test]
    fn geometric_sum_gives_roots_of_unity() {
        let n = 40;
        let z = find_roots(&vec![c(1.0); n + 1]).unwrap();
        let want: Vec<Complex64> =
            (1..=n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / (n + 1) as f64)).collect();
        assert!(match_distance(&z.roots, &want) < 1e-12);
    }

    #[test]
    fn zero_low_order_coefficients() {
        let z = find_roots(&[c(0.0), c(0.0), c(-1.0), c(1.0), c(0.0)]).unwrap();
        assert_eq!(z.degree, 3);
        assert!(match_distance(&z.roots, &[c(0.0), c(0.0), c(1.0)]) < 1e-15);
        assert!(find_roots(&[c(0.0), c(0.0)]).is_err());
        assert_eq!(find_roots(&[c(2.0)]).unwrap().roots.len(), 0);
    }

    #[test]
    fn residual_contract_on_random_coefficients() {
        for (n, seed) in [(16, 1), (100, 2), (400, 3), (512, 4)] {
            let z = find_roots(&gaussian(n, seed)).unwrap();
            assert_eq!(z.roots.len(), n);
            assert!(z.residual <= 1e-8, "n={n}: {}", z.residual);
            let p: Vec<Complex64> = gaussian(n, seed);
            let spread = p.iter().map(|v| v.norm()).sum::<f64>();
            for r in z.roots.iter().filter(|r| r.norm() <= 1.0) {
                assert!(horner(&p, *r).0.norm() / spread <= 1e-8);
            }
        }
    }

    #[test]
    fn companion_matrix_oracle() {
        for (n, seed) in [(5, 10), (20, 11), (64, 12)] {
            let p = gaussian(n, seed);
            let lead = p[n];
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = c(1.0);
            }
            for i in 0..n {
                m[(i, n - 1)] = -p[i] / lead;
            }
            let eig: Vec<Complex64> = m.eigenvalues().unwrap().iter().copied().collect();
            let z = find_roots(&p).unwrap();
            assert!(match_distance(&z.roots, &eig) < 1e-9, "n={n}");
        }
    }

    #[test]
    fn conjugation_equivariance() {
        let p = gaussian(60, 7);
        let q: Vec<Complex64> = p.iter().map(|v| v.conj()).collect();
        let a: Vec<Complex64> = find_roots(&p).unwrap().roots.iter().map(|v| v.conj()).collect();
        let b = find_roots(&q).unwrap().roots;
        assert!(match_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn iteration_cap_reports_partial_roots() {
        match find_roots_capped(&gaussian(50, 3), 1) {
            Err(Error::Solver { iterations, unconverged, partial }) => {
                assert_eq!(iterations, 1);
                assert!(unconverged > 0);
                assert_eq!(partial.len(), 50);
            }
            other => panic!("expected a solver error, got {other:?}"),
        }
    }

    #[test]
    fn region_examples() {
        let z = find_roots(&[c(-0.25), c(0.0), c(1.0)]).unwrap();
        assert_eq!(count_region(&z, &Region::Disk { r: 0.6 }).unwrap().count, 2);
        let s = Region::Sector { r_lo: 0.0, r_hi: 1.0, phi_lo: -PI / 4.0, phi_hi: PI / 4.0 };
        assert_eq!(count_region(&z, &s).unwrap().count, 1);
        let tie = count_region(&z, &Region::Disk { r: 0.5 }).unwrap();
        assert_eq!(tie, RegionCount { count: 2, boundary_ties: 2 });
        let wrap = Region::Sector { r_lo: 0.1, r_hi: 1.0, phi_lo: 3.0 * PI / 4.0, phi_hi: 5.0 * PI / 4.0 };
        assert_eq!(count_region(&z, &wrap).unwrap().count, 1);
    }

    #[test]
    fn malformed_regions() {
        let z = find_roots(&[c(-0.25), c(0.0), c(1.0)]).unwrap();
        for r in [
            Region::Disk { r: -1.0 },
            Region::Annulus { r_lo: 0.5, r_hi: 0.2 },
            Region::Sector { r_lo: 0.0, r_hi: 1.0, phi_lo: 1.0, phi_hi: 1.0 },
            Region::Sector { r_lo: 0.0, r_hi: 1.0, phi_lo: 0.0, phi_hi: 7.0 },
        ] {
            assert!(matches!(count_region(&z, &r), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn partition_counts_add_up() {
        let z = find_roots(&gaussian(300, 9)).unwrap();
        let disk = count_region(&z, &Region::Disk { r: 0.95 }).unwrap().count;
        let mut total = count_region(&z, &Region::Disk { r: 0.4 }).unwrap().count;
        let edges = [-PI, -1.0, 0.5, 2.0, PI];
        for w in edges.windows(2) {
            total += count_region(&z, &Region::Sector { r_lo: 0.4, r_hi: 0.95, phi_lo: w[0], phi_hi: w[1] }).unwrap().count;
        }
        assert_eq!(total, disk);
    }
}
