//! Gauss–Legendre rules, composite panel integration and a small adaptive
//! integrator.
//!
//! Every integrand in this crate is either smooth on a finite interval once
//! split at the known junction points of the Meyer construction, or smooth
//! with algebraic end behavior. Composite Gauss–Legendre with a doubling check
//! covers the first case and the adaptive bisection rule covers the second.

use std::ops::{Add, Mul};
use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
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

    /// Shared 32-point rule.
    pub fn g32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    /// Shared 16-point rule.
    pub fn g16() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        self.mapped(a, b)
            .fold(T::default(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Splits the breakpoint sequence into panels no wider than `max_width`.
///
/// Breakpoints must be sorted; zero-length gaps are dropped.
pub fn panels(breaks: &[f64], max_width: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let count = ((b - a) / max_width).ceil().max(1.0) as usize;
        let h = (b - a) / count as f64;
        for i in 0..count {
            let lo = a + h * i as f64;
            let hi = if i + 1 == count { b } else { a + h * (i + 1) as f64 };
            out.push((lo, hi));
        }
    }
    out
}

/// Composite rule over the given panels.
pub fn composite<T, F>(rule: &GaussLegendre, panels: &[(f64, f64)], mut f: F) -> T
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    F: FnMut(f64) -> T,
{
    panels
        .iter()
        .fold(T::default(), |acc, &(a, b)| acc + rule.integrate(a, b, &mut f))
}

/// Halves every panel.
pub fn refine(panels: &[(f64, f64)]) -> Vec<(f64, f64)> {
    panels
        .iter()
        .flat_map(|&(a, b)| {
            let m = 0.5 * (a + b);
            [(a, m), (m, b)]
        })
        .collect()
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Recursive bisection with a 16-point rule compared against its two halves.
///
/// Stops a branch when the halves agree to `abs_tol + rel_tol * |value|` or the
/// depth limit is reached; `converged` is false if any branch hit the limit.
pub fn adaptive<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Adaptive
where
    F: Fn(f64) -> f64,
{
    let rule = GaussLegendre::g16();
    let whole = rule.integrate(a, b, &f);
    let mut state = Adaptive {
        value: 0.0,
        error: 0.0,
        converged: true,
    };
    let scale_hint = whole.abs();
    recurse(&f, rule, a, b, whole, abs_tol, rel_tol, scale_hint, 0, &mut state);
    state
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    abs_tol: f64,
    rel_tol: f64,
    scale: f64,
    depth: usize,
    state: &mut Adaptive,
) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let halves = left + right;
    let err = (halves - whole).abs();
    let tol = abs_tol.max(rel_tol * scale.max(halves.abs()));
    if err <= tol || depth >= 40 || (b - a) < 1e-14 * (a.abs() + b.abs()).max(1e-300) {
        if err > tol {
            state.converged = false;
        }
        state.value += halves;
        state.error += err;
        return;
    }
    recurse(f, rule, a, m, left, abs_tol * 0.5, rel_tol, scale, depth + 1, state);
    recurse(f, rule, m, b, right, abs_tol * 0.5, rel_tol, scale, depth + 1, state);
}
