//! One-dimensional quadrature building blocks: Gauss–Legendre rules, adaptive
//! Gauss–Kronrod integration, and deterministic summation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Sums values with a fixed binary tree so the result does not depend on how
/// the slice was produced (serial or parallel).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
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
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

// Kronrod 15-point abscissae; odd indices are the embedded 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Single Gauss–Kronrod 7/15 panel: (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let s = f(center - dx) + f(center + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Tolerances and limits for adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-14, rel_tol: 1e-10, max_panels: 4000 }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

/// Adaptive bisection with GK15 panels over the given breakpoints.
/// Never fails; inspect `converged`.
pub fn adaptive_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = gk15(&mut f, w[0], w[1]);
            heap.push(Panel { a: w[0], b: w[1], value, error });
        }
    }
    loop {
        let (total, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= tol || heap.len() >= opts.max_panels || heap.is_empty() {
            // Deterministic final sum in interval order.
            let mut panels: Vec<Panel> = heap.into_vec();
            panels.sort_by(|p, q| p.a.partial_cmp(&q.a).unwrap_or(Ordering::Equal));
            let vals: Vec<f64> = panels.iter().map(|p| p.value).collect();
            return QuadResult {
                value: pairwise_sum(&vals),
                error: err,
                panels: panels.len(),
                converged: err <= tol,
            };
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in double precision.
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Adaptive integration over [a, b].
pub fn adaptive<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    adaptive_with_breaks(f, &[a, b], opts)
}

/// Adaptive integration over [a, ∞) using w = a + q/(1-q).
pub fn adaptive_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    opts: QuadOptions,
) -> QuadResult {
    adaptive(
        |q| {
            if q >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - q;
            let w = a + q / s;
            let v = f(w) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        opts,
    )
}

/// Like [`adaptive`] but turns non-convergence into an error carrying the
/// panel count and error estimate.
pub fn adaptive_checked<F: FnMut(f64) -> f64>(
    f: F,
    breaks: &[f64],
    opts: QuadOptions,
    what: &'static str,
) -> Result<f64> {
    let r = adaptive_with_breaks(f, breaks, opts);
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence {
            what,
            trace: format!(
                "value={:.6e} est_err={:.3e} panels={}",
                r.value, r.error, r.panels
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for k in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let mut one = |_x: f64| 1.0;
        let (v, e) = gk15(&mut one, -1.0, 1.0);
        assert!((v - 2.0).abs() < 1e-15);
        assert!(e < 1e-15);
    }

    #[test]
    fn adaptive_handles_inverse_sqrt_endpoint() {
        let r = adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadOptions::rel(1e-10));
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_map() {
        let r = adaptive_to_infinity(|w| (-w).exp(), 0.0, QuadOptions::rel(1e-12));
        assert!((r.value - 1.0).abs() < 1e-11);
        // slowly decaying tail: ∫_1^∞ w^-2 = 1
        let r = adaptive_to_infinity(|w| w.powi(-2), 1.0, QuadOptions::rel(1e-12));
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_small_inputs() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
