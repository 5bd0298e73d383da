//! Analytic-continuation diagnostics: `Var(α_k)`, the local radius ρ(r) and
//! the regular/singular arcs of the boundary.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::periodic::Origin;
use crate::quadrature::{wrap_angle, Focus};
use crate::spectral_measure::SpectralMeasure;

/// Smallest `k_max` accepted by [`rho_local`].
pub const MIN_K_MAX: usize = 64;
/// Relative disagreement between tail estimates that triggers a [`TailWarning`].
pub const TAIL_TOL: f64 = 0.01;
const PRECISION_TOL: f64 = 1e-6;

/// `ln(1 − 2r cos t + r²)` without cancellation near `t = 0`.
fn ln_dist2(r: f64, t: f64) -> f64 {
    let h = (0.5 * t).sin();
    ((1.0 - r) * (1.0 - r) + 4.0 * r * h * h).ln()
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

fn ln_variance_with(f: &SpectralMeasure, r: f64, k: usize, refine: f64) -> f64 {
    let p = (k + 1) as f64;
    let mut terms = Vec::new();
    if let Some(d) = f.density() {
        let width = (1.0 - r) / (r * p).sqrt().max(1.0);
        let mut foci = vec![Focus::new(0.0, refine * 0.25 * width)];
        foci.extend(d.breakpoints().into_iter().map(|b| Focus::new(b, refine * 0.25 / p)));
        let n = d.nodes(&foci);
        for i in 0..n.s.len() {
            let m = n.w[i] * n.h[i];
            if m > 0.0 {
                terms.push(m.ln() - p * ln_dist2(r, n.s[i]));
            }
        }
    }
    for a in f.atoms() {
        terms.push(a.mass.ln() - p * ln_dist2(r, a.t));
    }
    log_sum_exp(&terms)
}

/// `ln Var(α_k(r)) = ln ∫ (1 − 2r cos t + r²)^{−(k+1)} F(dt)`.
pub fn ln_variance_alpha(f: &SpectralMeasure, r: f64, k: usize) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("radius {r} must lie in (0, 1)")));
    }
    let coarse = ln_variance_with(f, r, k, 1.0);
    if f.density().is_some() {
        let fine = ln_variance_with(f, r, k, 0.25);
        let rel = (coarse - fine).exp_m1().abs();
        if rel > PRECISION_TOL {
            return Err(Error::Precision { r, achievable: rel });
        }
    }
    Ok(coarse)
}

/// `Var(α_k(r))`; overflows to infinity where [`ln_variance_alpha`] does not.
pub fn variance_alpha(f: &SpectralMeasure, r: f64, k: usize) -> Result<f64> {
    Ok(ln_variance_alpha(f, r, k)?.exp())
}

/// The tail of `Var(α_k)^{−1/2k}` did not settle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailWarning {
    pub two_point: f64,
    pub three_point: f64,
    /// `(k, ln Var(α_k))` at the subsampled orders.
    pub tail: Vec<(usize, f64)>,
}

impl fmt::Display for TailWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tail not converged: estimates {} and {} differ by more than 1%", self.two_point, self.three_point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoEstimate {
    /// Extrapolated radius from `ln Var ≈ a k + b ln k + c` at `k_max/4, k_max/2, k_max`.
    pub rho: f64,
    /// `exp(−a/2)` with `a` from the last two orders only.
    pub two_point: f64,
    /// `Var(α_{k_max})^{−1/(2 k_max)}`.
    pub raw: f64,
    pub warning: Option<TailWarning>,
}

/// Local radius of convergence at `z = r`, `lim Var(α_k)^{−1/2k}`.
pub fn rho_local(f: &SpectralMeasure, r: f64, k_max: usize) -> Result<RhoEstimate> {
    if k_max < MIN_K_MAX {
        return Err(Error::domain(format!("k_max must be at least {MIN_K_MAX}")));
    }
    let ks = [k_max / 4, k_max / 2, k_max];
    let l: Vec<f64> = ks.iter().map(|&k| ln_variance_alpha(f, r, k)).collect::<Result<_>>()?;
    let (k1, k2, k3) = (ks[0] as f64, ks[1] as f64, ks[2] as f64);
    let two = (l[2] - l[1]) / (k3 - k2);
    // Orders are in ratio 1:2:4, so the ln k terms cancel in the second difference.
    let three = ((l[2] - l[1]) - (l[1] - l[0])) / ((k3 - k2) - (k2 - k1));
    let two_point = (-0.5 * two).exp();
    let rho = (-0.5 * three).exp();
    let warning = ((rho - two_point).abs() > TAIL_TOL * rho).then(|| TailWarning {
        two_point,
        three_point: rho,
        tail: ks.iter().copied().zip(l.iter().copied()).collect(),
    });
    Ok(RhoEstimate { rho, two_point, raw: (-l[2] / (2.0 * k3)).exp(), warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    Regular,
    Singular,
}

impl fmt::Display for ArcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcKind::Regular => "regular",
            ArcKind::Singular => "singular",
        })
    }
}

/// The arc from `start` counterclockwise to `end`, `start ∈ (−π, π]`, `end − start ∈ [0, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
    pub kind: ArcKind,
}

impl Arc {
    pub fn center(&self) -> f64 {
        wrap_angle(0.5 * (self.start + self.end))
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.end - self.start)
    }

    pub fn contains(&self, t: f64) -> bool {
        let d = (t - self.start).rem_euclid(2.0 * PI);
        d > 0.0 && d < self.end - self.start
    }

    /// `(1 − 2r cos δ + r²)^{1/2}` for the half-width δ of a regular arc.
    pub fn lower_bound(&self, r: f64) -> Option<f64> {
        (self.kind == ArcKind::Regular).then(|| {
            let d = self.half_width();
            let h = (0.5 * d).sin();
            ((1.0 - r) * (1.0 - r) + 4.0 * r * h * h).sqrt()
        })
    }
}

const ZERO_PIECE_TOL: f64 = 1e-14;

/// Maximal arcs outside the support (regular) and the rest (singular).
///
/// Needs an exactly represented density; sampled densities are refused.
pub fn classify_arcs(f: &SpectralMeasure) -> Result<Vec<Arc>> {
    let mut zero = Vec::new();
    match f.density() {
        Some(d) => {
            if let Origin::Sampled { .. } = d.origin() {
                return Err(Error::SupportUnknown("density is only known from samples".into()));
            }
            for p in d.pieces() {
                let vanishes = p.numer.max_abs_coeff() <= ZERO_PIECE_TOL;
                zero.push((p.lo, p.hi, vanishes));
            }
        }
        None => zero.push((-PI, PI, true)),
    }
    // Merge along the circle, joining the last and first pieces across ±π.
    let mut runs: Vec<(f64, f64, bool)> = Vec::new();
    for (lo, hi, z) in zero {
        match runs.last_mut() {
            Some(last) if last.2 == z => last.1 = hi,
            _ => runs.push((lo, hi, z)),
        }
    }
    if runs.len() > 1 && runs[0].2 == runs[runs.len() - 1].2 {
        let first = runs.remove(0);
        let last = runs.last_mut().expect("nonempty");
        last.1 = first.1 + 2.0 * PI;
    }
    let mut regular: Vec<(f64, f64)> = runs.iter().filter(|r| r.2).map(|r| (r.0, r.1)).collect();
    let singular_runs: Vec<(f64, f64)> = runs.iter().filter(|r| !r.2).map(|r| (r.0, r.1)).collect();

    // Atoms split regular arcs.
    let mut atoms: Vec<f64> = f.atoms().iter().map(|a| a.t).collect();
    atoms.sort_by(f64::total_cmp);
    for &t in &atoms {
        let mut next = Vec::new();
        for (a, b) in regular {
            let d = (t - a).rem_euclid(2.0 * PI);
            if d < b - a {
                let cut = a + d;
                if cut > a {
                    next.push((a, cut));
                }
                if b > cut {
                    next.push((cut, b));
                }
            } else {
                next.push((a, b));
            }
        }
        regular = next;
    }
    // Rejoin regular arcs cut only by the seam at ±π.
    let seam_atom = atoms.iter().any(|&t| t == PI);
    let last = regular.iter().position(|a| a.1 == PI);
    let first = regular.iter().position(|a| a.0 == -PI);
    if let (Some(i), Some(j), false) = (last, first, seam_atom) {
        if i != j {
            let joined = (regular[i].0, regular[j].1 + 2.0 * PI);
            regular = regular
                .into_iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, a)| a)
                .chain([joined])
                .collect();
        }
    }

    let mut arcs: Vec<Arc> = regular
        .into_iter()
        .map(|(a, b)| Arc { start: a, end: b, kind: ArcKind::Regular })
        .chain(singular_runs.into_iter().map(|(a, b)| Arc { start: a, end: b, kind: ArcKind::Singular }))
        .collect();
    // Atoms off the singular arcs are singular points.
    for &t in &atoms {
        if !arcs.iter().any(|a| a.kind == ArcKind::Singular && (a.contains(t) || a.start == t || a.end == t)) {
            arcs.push(Arc { start: t, end: t, kind: ArcKind::Singular });
        }
    }
    for a in &mut arcs {
        if a.start <= -PI {
            a.start += 2.0 * PI;
            a.end += 2.0 * PI;
        }
    }
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(arcs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcReport {
    pub arc: Arc,
    /// Lower bound on ρ at the arc center, regular arcs only.
    pub lower_bound: Option<f64>,
    /// ρ estimated on the ray through the arc center, regular arcs only.
    pub rho_at_center: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationReport {
    pub r: f64,
    pub k_max: usize,
    /// `ln Var(α_k)` for `k = 0..=k_max`.
    pub ln_var_sequence: Vec<f64>,
    pub rho_estimate: RhoEstimate,
    /// `None` when the support cannot be determined exactly.
    pub arc_classification: Option<Vec<ArcReport>>,
}

pub fn continuation_report(f: &SpectralMeasure, r: f64, k_max: usize) -> Result<ContinuationReport> {
    let ln_var_sequence = (0..=k_max).map(|k| ln_variance_alpha(f, r, k)).collect::<Result<_>>()?;
    let rho_estimate = rho_local(f, r, k_max)?;
    let arc_classification = match classify_arcs(f) {
        Ok(arcs) => Some(
            arcs.into_iter()
                .map(|arc| {
                    let rho_at_center = match arc.kind {
                        ArcKind::Regular => Some(rho_local(&f.shift(arc.center()), r, k_max)?.rho),
                        ArcKind::Singular => None,
                    };
                    Ok(ArcReport { arc, lower_bound: arc.lower_bound(r), rho_at_center })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Err(Error::SupportUnknown(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ContinuationReport { r, k_max, ln_var_sequence, rho_estimate, arc_classification })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::PeriodicFunction;
    use crate::presets;
    use crate::spectral_measure::Atom;
    use approx::assert_relative_eq;

    fn atom(t: f64) -> SpectralMeasure {
        presets::single_atom(t)
    }

    #[test]
    fn atom_variances() {
        let r = 0.5;
        for k in [0, 3, 40] {
            let p = (k + 1) as f64;
            assert_relative_eq!(ln_variance_alpha(&atom(PI), r, k).unwrap(), -2.0 * p * (1.0 + r).ln(), max_relative = 1e-14);
            assert_relative_eq!(ln_variance_alpha(&atom(0.0), r, k).unwrap(), -2.0 * p * (1.0 - r).ln(), max_relative = 1e-14);
        }
        assert!(ln_variance_alpha(&atom(0.0), 0.5, 2000).unwrap().is_finite());
    }

    #[test]
    fn uniform_variance_is_kernel_diagonal() {
        assert_relative_eq!(variance_alpha(&SpectralMeasure::uniform(), 0.5, 0).unwrap(), 4.0 / 3.0, max_relative = 1e-12);
        // Var(α_k) = Σ_j C(j+k, k)² r^{2j} for i.i.d. coefficients.
        let r: f64 = 0.3;
        let want: f64 = (0..400).map(|j: i32| ((j + 1) as f64 * (j + 2) as f64 / 2.0).powi(2) * r.powi(2 * j)).sum();
        assert_relative_eq!(variance_alpha(&SpectralMeasure::uniform(), r, 2).unwrap(), want, max_relative = 1e-10);
    }

    #[test]
    fn rho_examples() {
        for r in [0.3, 0.5, 0.9] {
            assert_relative_eq!(rho_local(&atom(PI), r, 128).unwrap().rho, 1.0 + r, max_relative = 1e-12);
            assert_relative_eq!(rho_local(&atom(0.0), r, 128).unwrap().rho, 1.0 - r, max_relative = 1e-12);
        }
        let u = rho_local(&SpectralMeasure::uniform(), 0.5, 512).unwrap();
        assert!((u.rho - 0.5).abs() < 1e-3, "{u:?}");
        assert!(u.warning.is_none());
        assert!(rho_local(&atom(0.0), 0.5, 10).is_err());
    }

    #[test]
    fn variance_growth_is_sandwiched() {
        for (f, r) in [(presets::ma1(0.4).unwrap(), 0.6), (presets::half_interval(), 0.5), (SpectralMeasure::uniform(), 0.9)] {
            let lo = (1.0 - r) * (1.0 - r);
            let hi = (1.0 + r) * (1.0 + r);
            for k in 0..30 {
                let (a, b) = (ln_variance_alpha(&f, r, k).unwrap(), ln_variance_alpha(&f, r, k + 1).unwrap());
                assert!(b >= a - hi.ln() - 1e-12 && b <= a - lo.ln() + 1e-12);
            }
        }
    }

    #[test]
    fn arc_examples() {
        let u = classify_arcs(&SpectralMeasure::uniform()).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].kind, ArcKind::Singular);
        assert_relative_eq!(u[0].end - u[0].start, 2.0 * PI);

        let ind = classify_arcs(&presets::half_interval()).unwrap();
        assert_eq!(ind.len(), 2);
        let reg = ind.iter().find(|a| a.kind == ArcKind::Regular).unwrap();
        assert_relative_eq!(reg.start, PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(reg.end, 3.0 * PI / 2.0, epsilon = 1e-15);
        let sing = ind.iter().find(|a| a.kind == ArcKind::Singular).unwrap();
        assert_relative_eq!(sing.start, -PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(sing.end, PI / 2.0, epsilon = 1e-15);

        let two = presets::atoms(&[Atom { t: 0.0, mass: 0.5 }, Atom { t: PI, mass: 0.5 }], "two").unwrap();
        let arcs = classify_arcs(&two).unwrap();
        let regular: Vec<&Arc> = arcs.iter().filter(|a| a.kind == ArcKind::Regular).collect();
        let points: Vec<&Arc> = arcs.iter().filter(|a| a.kind == ArcKind::Singular).collect();
        assert_eq!(regular.len(), 2);
        assert_eq!(points.len(), 2);
        assert!(points.iter().all(|a| a.start == a.end));
        assert_relative_eq!(regular.iter().map(|a| a.end - a.start).sum::<f64>(), 2.0 * PI);

        let one = classify_arcs(&atom(0.0)).unwrap();
        assert_eq!(one.len(), 2);
        let reg = one.iter().find(|a| a.kind == ArcKind::Regular).unwrap();
        assert_eq!((reg.start, reg.end), (0.0, 2.0 * PI));
    }

    #[test]
    fn sampled_density_is_refused() {
        let d = PeriodicFunction::from_samples(&vec![1.0 / (2.0 * PI); 16]);
        let f = SpectralMeasure::new(Some(d), vec![], "sampled").unwrap();
        assert!(matches!(classify_arcs(&f), Err(Error::SupportUnknown(_))));
        assert!(continuation_report(&f, 0.5, 64).unwrap().arc_classification.is_none());
    }

    #[test]
    fn regular_arc_bound_holds() {
        let f = presets::half_interval();
        let reg = *classify_arcs(&f).unwrap().iter().find(|a| a.kind == ArcKind::Regular).unwrap();
        for r in [0.3, 0.6, 0.9] {
            let rho = rho_local(&f.shift(reg.center()), r, 512).unwrap().rho;
            assert!(rho >= reg.lower_bound(r).unwrap() - 1e-3, "r={r}: {rho}");
        }
    }

    #[test]
    fn support_point_upper_bound() {
        let f = presets::ma1(0.3).unwrap();
        for r in [0.3, 0.6] {
            let rho = rho_local(&f, r, 512).unwrap().rho;
            assert!(rho <= 1.0 - r + 1e-3, "{rho}");
        }
    }

    #[test]
    fn report_serializes() {
        let rep = continuation_report(&presets::half_interval(), 0.5, 64).unwrap();
        assert_eq!(rep.ln_var_sequence.len(), 65);
        let arcs = rep.arc_classification.as_ref().unwrap();
        let reg = arcs.iter().find(|a| a.arc.kind == ArcKind::Regular).unwrap();
        assert!(reg.rho_at_center.unwrap() >= reg.lower_bound.unwrap() - 1e-3);
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["arc_classification"].as_array().unwrap().len(), 2);
    }
}
