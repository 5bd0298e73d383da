//! Named spectral measures and the preset grammar.
//!
//! ```text
//! uniform
//! ma1:a=<float>
//! indicator                        (half interval [-π/2, π/2])
//! indicator:lo=<float>,hi=<float>
//! atoms:[(t,m),(t,m),...]
//! randtrig:seed=<u64>,degree=<n>
//! mix:w1*<preset>+w2*<preset>
//! ```
//!
//! Inside `mix`, a component that itself contains `+` must be wrapped in
//! parentheses, e.g. `mix:0.5*uniform+0.5*(mix:0.5*ma1:a=0.2+0.5*uniform)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::periodic::PeriodicFunction;
use crate::spectral_measure::{Atom, SpectralMeasure};
use crate::trig::TrigPoly;

/// One line of the preset catalogue.
#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub syntax: &'static str,
    pub example: &'static str,
    pub description: &'static str,
}

pub const CATALOGUE: &[PresetInfo] = &[
    PresetInfo {
        syntax: "uniform",
        example: "uniform",
        description: "i.i.d. coefficients; zero density 1/(pi(1-|z|^2)^2)",
    },
    PresetInfo {
        syntax: "ma1:a=<float>",
        example: "ma1:a=0.3",
        description: "1-dependent process, density (1+2a cos t)/(2pi), |a|<=1/2; a=1/2 degenerates at pi",
    },
    PresetInfo {
        syntax: "indicator[:lo=<float>,hi=<float>]",
        example: "indicator:lo=-1.5707963267948966,hi=1.5707963267948966",
        description: "uniform density on [lo,hi]; the half interval gives the constant 1/(12pi cos^2 phi)",
    },
    PresetInfo {
        syntax: "atoms:[(t,m),...]",
        example: "atoms:[(0,0.5),(3.141592653589793,0.5)]",
        description: "purely atomic measure; the series continues analytically off the atoms",
    },
    PresetInfo {
        syntax: "randtrig:seed=<u64>,degree=<n>",
        example: "randtrig:seed=7,degree=4",
        description: "random nonnegative trigonometric-polynomial density |sum c_k e^{ikt}|^2",
    },
    PresetInfo {
        syntax: "mix:w1*<preset>+w2*<preset>",
        example: "mix:0.5*ma1:a=0.4+0.5*indicator:lo=-1,hi=1",
        description: "convex combination of presets; weights must sum to 1",
    },
];

/// Parses a preset expression into a normalized measure.
pub fn parse(spec: &str) -> Result<SpectralMeasure> {
    let spec = spec.trim();
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), a.trim()),
        None => (spec, ""),
    };
    match name {
        "uniform" => {
            no_args(name, args)?;
            Ok(SpectralMeasure::uniform())
        }
        "ma1" => {
            let kv = key_values(args, &["a"])?;
            ma1(kv[0])
        }
        "indicator" if args.is_empty() => Ok(half_interval()),
        "indicator" => {
            let kv = key_values(args, &["lo", "hi"])?;
            indicator(kv[0], kv[1])
        }
        "atoms" => atoms(&parse_atoms(args)?, spec),
        "randtrig" => {
            let kv = key_values(args, &["seed", "degree"])?;
            if kv[0] < 0.0 || kv[0].fract() != 0.0 || kv[1] < 0.0 || kv[1].fract() != 0.0 {
                return Err(Error::Parse("randtrig needs integer seed and degree".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(kv[0] as u64);
            let d = random_nonnegative_trig(&mut rng, kv[1] as usize);
            SpectralMeasure::new(Some(d), vec![], spec)
        }
        "mix" => parse_mix(args, spec),
        _ => Err(Error::Parse(format!("unknown preset '{name}'"))),
    }
}

fn no_args(name: &str, args: &str) -> Result<()> {
    if args.is_empty() {
        Ok(())
    } else {
        Err(Error::Parse(format!("preset '{name}' takes no arguments")))
    }
}

fn parse_float(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("not a finite number: '{s}'")))
    }
}

/// Parses `k1=v1,k2=v2` requiring exactly the given keys.
fn key_values(args: &str, keys: &[&str]) -> Result<Vec<f64>> {
    let mut out = vec![None; keys.len()];
    for item in args.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
        let idx = keys
            .iter()
            .position(|&key| key == k.trim())
            .ok_or_else(|| Error::Parse(format!("unknown key '{}'", k.trim())))?;
        if out[idx].is_some() {
            return Err(Error::Parse(format!("duplicate key '{}'", keys[idx])));
        }
        out[idx] = Some(parse_float(v)?);
    }
    out.into_iter()
        .zip(keys)
        .map(|(v, k)| v.ok_or_else(|| Error::Parse(format!("missing key '{k}'"))))
        .collect()
}

fn parse_atoms(args: &str) -> Result<Vec<Atom>> {
    let body = args
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| Error::Parse("atoms must be written as [(t,m),...]".into()))?;
    let mut out = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected '(' in atoms at '{rest}'")))?;
        let close = inner.find(')').ok_or_else(|| Error::Parse("unclosed '(' in atoms".into()))?;
        let (t, m) = inner[..close]
            .split_once(',')
            .ok_or_else(|| Error::Parse("atom must be (t,m)".into()))?;
        out.push(Atom { t: parse_float(t)?, mass: parse_float(m)? });
        rest = inner[close + 1..].trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }
    if out.is_empty() {
        return Err(Error::Parse("atoms list is empty".into()));
    }
    Ok(out)
}

/// Splits on `+` outside brackets and not inside a float exponent.
fn split_terms(args: &str) -> Vec<&str> {
    let bytes = args.as_bytes();
    let mut depth = 0i32;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' | b'[' => depth += 1,
            b')' | b']' => depth -= 1,
            b'+' if depth == 0 => {
                let after_exp = i > 0
                    && matches!(bytes[i - 1], b'e' | b'E')
                    && i > 1
                    && (bytes[i - 2].is_ascii_digit() || bytes[i - 2] == b'.');
                if !after_exp {
                    out.push(&args[start..i]);
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    out.push(&args[start..]);
    out
}

fn parse_mix(args: &str, label: &str) -> Result<SpectralMeasure> {
    let mut parts = Vec::new();
    for term in split_terms(args) {
        let (w, p) = term
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("mix term must be w*preset, got '{term}'")))?;
        let p = p.trim();
        let p = p.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(p);
        parts.push((parse_float(w)?, parse(p)?));
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Normalization { mass: total });
    }
    SpectralMeasure::mixture(&parts, label)
}

/// Density `(1 + 2a cos t)/(2π)`.
pub fn ma1(a: f64) -> Result<SpectralMeasure> {
    if a.abs() > 0.5 {
        return Err(Error::domain(format!("ma1 needs |a| <= 1/2, got {a}")));
    }
    let p = TrigPoly::new(vec![1.0, 2.0 * a], vec![]).scale(1.0 / (2.0 * PI));
    SpectralMeasure::new(Some(PeriodicFunction::from_trig(p)), vec![], format!("ma1:a={a}"))
}

/// Normalized indicator density of `[lo, hi]`.
pub fn indicator(lo: f64, hi: f64) -> Result<SpectralMeasure> {
    if !(lo >= -PI - 1e-12 && hi <= PI + 1e-12 && lo < hi) {
        return Err(Error::domain(format!("indicator needs -π <= lo < hi <= π, got [{lo}, {hi}]")));
    }
    let (lo, hi) = (lo.max(-PI), hi.min(PI));
    let v = 1.0 / (hi - lo);
    let mut breaks = vec![-PI];
    let mut values = Vec::new();
    if lo > -PI {
        breaks.push(lo);
        values.push(0.0);
    }
    values.push(v);
    if hi < PI {
        breaks.push(hi);
        values.push(0.0);
    }
    breaks.push(PI);
    let d = PeriodicFunction::step(&breaks, &values)?;
    SpectralMeasure::new(Some(d), vec![], format!("indicator:lo={lo},hi={hi}"))
}

/// The indicator of `[−π/2, π/2]`.
pub fn half_interval() -> SpectralMeasure {
    indicator(-PI / 2.0, PI / 2.0).expect("valid interval")
}

pub fn atoms(list: &[Atom], label: &str) -> Result<SpectralMeasure> {
    SpectralMeasure::new(None, list.to_vec(), label)
}

pub fn single_atom(t: f64) -> SpectralMeasure {
    atoms(&[Atom { t, mass: 1.0 }], &format!("atoms:[({t},1)]")).expect("unit atom")
}

/// Normalized density `|Σ_{k≤d} cₖ e^{ikt}|²` with complex Gaussian `cₖ`.
pub fn random_nonnegative_trig<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> PeriodicFunction {
    let c: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let mut cos = vec![0.0; degree + 1];
    let mut sin = vec![0.0; degree + 1];
    for m in 0..=degree {
        let g: Complex64 = (0..=degree - m).map(|k| c[k + m] * c[k].conj()).sum();
        if m == 0 {
            cos[0] = g.re;
        } else {
            cos[m] = 2.0 * g.re;
            sin[m] = -2.0 * g.im;
        }
    }
    let norm = 2.0 * PI * cos[0];
    PeriodicFunction::from_trig(TrigPoly::new(cos, sin).scale(1.0 / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_every_catalogue_example() {
        for p in CATALOGUE {
            let m = parse(p.example).unwrap_or_else(|e| panic!("{}: {e}", p.example));
            assert_relative_eq!(m.total_mass(), 1.0, epsilon = 1e-12);
        }
        assert!(CATALOGUE.len() >= 4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse("ma1:a=0.7"), Err(Error::Domain(_))));
        assert!(matches!(parse("ma1:b=0.1"), Err(Error::Parse(_))));
        assert!(matches!(parse("ma1"), Err(Error::Parse(_))));
        assert!(matches!(parse("nope"), Err(Error::Parse(_))));
        assert!(matches!(parse("atoms:[(0,0.5)]"), Err(Error::Normalization { .. })));
        assert!(matches!(parse("mix:0.5*uniform+0.4*uniform"), Err(Error::Normalization { .. })));
        assert!(matches!(parse("uniform:x=1"), Err(Error::Parse(_))));
    }

    #[test]
    fn mix_with_exponents_and_nesting() {
        let m = parse("mix:5e-1*ma1:a=1e-1+0.5*(mix:0.5*uniform+0.5*atoms:[(0,1)])").unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_relative_eq!(m.atoms()[0].mass, 0.25);
        assert_relative_eq!(m.covariance(1).unwrap().re, 0.5 * 0.1 + 0.25, epsilon = 1e-15);
    }

    #[test]
    fn random_trig_is_normalized_and_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = random_nonnegative_trig(&mut rng, 5);
            assert_relative_eq!(d.integral(), 1.0, epsilon = 1e-13);
            assert!(d.sampled_min(2048) >= -1e-15);
        }
    }

    #[test]
    fn randtrig_preset_is_reproducible() {
        let a = parse("randtrig:seed=11,degree=3").unwrap();
        let b = parse("randtrig:seed=11,degree=3").unwrap();
        assert_eq!(a.density(), b.density());
    }
}
