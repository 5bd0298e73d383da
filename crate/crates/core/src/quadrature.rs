//! Gauss–Legendre rules and graded panel meshes.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Default number of nodes per panel.
pub const ORDER: usize = 20;

/// Widest panel allowed in a mesh over the circle.
pub const MAX_PANEL: f64 = PI / 8.0;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule of order [`ORDER`].
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(ORDER))
    }

    /// Shared 16-point rule used for two-dimensional cell integrals.
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Pushes the mapped nodes and weights of `[a, b]` onto the given buffers.
    pub fn push_nodes(&self, a: f64, b: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            xs.push(mid + half * x);
            ws.push(w * half);
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// A point around which panels are refined geometrically, starting from `scale`.
#[derive(Debug, Clone, Copy)]
pub struct Focus {
    pub at: f64,
    pub scale: f64,
}

impl Focus {
    pub fn new(at: f64, scale: f64) -> Self {
        Self { at, scale }
    }
}

/// Panels of `[lo, hi]` split at `breaks`, graded around each focus and
/// capped at `max_width`.
pub fn panels(lo: f64, hi: f64, breaks: &[f64], foci: &[Focus], max_width: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![lo, hi];
    let inside = |p: f64| p > lo && p < hi;
    pts.extend(breaks.iter().copied().filter(|&p| inside(p)));
    for f in foci {
        if f.scale <= 0.0 || !f.scale.is_finite() {
            continue;
        }
        if inside(f.at) {
            pts.push(f.at);
        }
        let mut d = f.scale;
        let reach = (hi - lo).max(f.at - lo).max(hi - f.at);
        while d < reach {
            for p in [f.at - d, f.at + d] {
                if inside(p) {
                    pts.push(p);
                }
            }
            d *= 2.0;
        }
    }
    pts.sort_by(|a, b| a.total_cmp(b));
    let tol = 1e-14 * (1.0 + lo.abs().max(hi.abs()));
    pts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    if let Some(last) = pts.last_mut() {
        *last = hi;
    }
    let mut out = Vec::with_capacity(pts.len());
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / max_width).ceil().max(1.0) as usize;
        let step = (b - a) / n as f64;
        for j in 0..n {
            let pa = a + j as f64 * step;
            let pb = if j + 1 == n { b } else { a + (j + 1) as f64 * step };
            out.push((pa, pb));
        }
    }
    out
}

/// Integrates `f` over the panels with the standard rule.
pub fn integrate_panels<F: FnMut(f64) -> f64>(panels: &[(f64, f64)], mut f: F) -> f64 {
    let rule = GaussLegendre::standard();
    panels.iter().map(|&(a, b)| rule.integrate(a, b, &mut f)).sum()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(t: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut u = (t + PI).rem_euclid(two_pi) - PI;
    if u <= -PI {
        u += two_pi;
    }
    u
}
