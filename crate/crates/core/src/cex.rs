//! Singular test pairs `f = |y|^{-n/p₁}(log 1/|y|)^{-2/p₁}` on small balls and
//! the bilinear spherical average `M_{√2R}(f, g)(R e₁)` they produce.
//!
//! Every evaluation runs in logarithmic radial variables so that arbitrarily
//! deep singular shells stay representable.

use std::f64::consts::{LN_2, PI, SQRT_2};
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::harness::{fit_loglog, FitReport};
use crate::quad::{adaptive, adaptive_checked, adaptive_to_infinity, QuadOptions};
use crate::specfn::sphere_area;

/// Smallest accepted scale `R`.
pub const MIN_SCALE: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    F,
    G,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CexPair {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub cutoff_f: f64,
    pub cutoff_g: f64,
}

impl CexPair {
    /// Standard cutoffs: `1/2` for both when `n = 1`, else `1/100` for `f`
    /// and `1/2` for `g`.
    pub fn new(n: usize, p1: f64, p2: f64) -> Result<Self> {
        let cutoff_f = if n == 1 { 0.5 } else { 0.01 };
        Self::with_cutoffs(n, p1, p2, cutoff_f, 0.5)
    }

    /// Both exponents equal, chosen so that `1/p₁ + 1/p₂ = 1/p`.
    pub fn symmetric(n: usize, p: f64) -> Result<Self> {
        Self::new(n, 2.0 * p, 2.0 * p)
    }

    pub fn with_cutoffs(n: usize, p1: f64, p2: f64, cutoff_f: f64, cutoff_g: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(p1 >= 1.0 && p2 >= 1.0) {
            return Err(invalid(format!("exponents must be >= 1, got ({p1}, {p2})")));
        }
        for c in [cutoff_f, cutoff_g] {
            if !(c > 0.0 && c < 1.0) {
                return Err(invalid(format!("cutoff must lie in (0, 1), got {c}")));
            }
        }
        Ok(Self { n, p1, p2, cutoff_f, cutoff_g })
    }

    pub fn inv_p(&self) -> f64 {
        1.0 / self.p1 + 1.0 / self.p2
    }

    pub fn p(&self) -> f64 {
        1.0 / self.inv_p()
    }

    /// `n/(2n-1)`: the average decays like `R^{1-2n}` here and the
    /// singular integral diverges below it.
    pub fn critical_p(&self) -> f64 {
        self.n as f64 / (2 * self.n - 1) as f64
    }

    fn exponent(&self, which: Which) -> (f64, f64) {
        let (p, cut) = match which {
            Which::F => (self.p1, self.cutoff_f),
            Which::G => (self.p2, self.cutoff_g),
        };
        (1.0 / p, cut)
    }

    fn check_finite(&self) -> Result<()> {
        if self.inv_p() > 1.0 / self.critical_p() + 1e-12 {
            return Err(Error::Divergent(format!(
                "p = {:.6} lies below n/(2n-1) = {:.6}",
                self.p(),
                self.critical_p()
            )));
        }
        Ok(())
    }
}

/// Value of `f` or `g` at `y`; `+∞` at the origin.
pub fn eval_cex(pair: &CexPair, which: Which, y: &[f64]) -> f64 {
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    radial(pair, which, r)
}

fn radial(pair: &CexPair, which: Which, r: f64) -> f64 {
    let (q, cut) = pair.exponent(which);
    if r == 0.0 {
        f64::INFINITY
    } else if r > cut {
        0.0
    } else {
        r.powf(-(pair.n as f64) * q) * (1.0 / r).ln().powf(-2.0 * q)
    }
}

/// `∫ |f|^{p₁}` over the shell `2^{-k-1} < |y| < 2^{-k}`.
pub fn shell_mass(pair: &CexPair, which: Which, k: u32) -> Result<f64> {
    let (_, cut) = pair.exponent(which);
    let lo = (k as f64 * LN_2).max(-cut.ln());
    let hi = (k + 1) as f64 * LN_2;
    if hi <= lo {
        return Ok(0.0);
    }
    // |f|^p r^{n-1} dr = r^{-1} (log 1/r)^{-2} dr; in x = log 1/r: x^{-2} dx.
    let area = sphere_area(pair.n);
    adaptive_checked(|x| area * x.powi(-2), &[lo, hi], QuadOptions::rel(1e-12), "shell mass")
}

fn opts(rel: f64) -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: rel, max_panels: 4000 }
}

fn check_scale(r: f64) -> Result<()> {
    if !(r.is_finite() && r >= MIN_SCALE) {
        return Err(invalid(format!("scale R must be finite and >= {MIN_SCALE}, got {r}")));
    }
    Ok(())
}

/// Integrand of `M_{√2R}(f, g)(x)` at `(y, z) ∈ S^{2n-1}`, `t = √2 |x|`.
pub fn sphere_integrand(pair: &CexPair, x: &[f64], yz: &[f64]) -> f64 {
    let n = pair.n;
    let t = SQRT_2 * x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let a: Vec<f64> = (0..n).map(|i| x[i] - t * yz[i]).collect();
    let b: Vec<f64> = (0..n).map(|i| x[i] - t * yz[n + i]).collect();
    let fa = eval_cex(pair, Which::F, &a);
    if fa == 0.0 {
        return 0.0;
    }
    let gb = eval_cex(pair, Which::G, &b);
    if gb == 0.0 {
        0.0
    } else {
        fa * gb
    }
}

// n = 1. With u = 1 - √2 y the average is ∫ f(R|u|) g(b(u)) du/√(1+2u-u²),
// b = R|u(2-u)|/(1+√(1+2u-u²)). The log variable w = -ln(R|u|) runs over
// both signs of u.
struct Line {
    pair: CexPair,
    scale: f64,
}

impl Line {
    fn side(&self, w: f64, sign: f64) -> f64 {
        let (q1, cf) = self.pair.exponent(Which::F);
        let (q2, cg) = self.pair.exponent(Which::G);
        if w < -cf.ln() {
            return 0.0;
        }
        let u = sign * (-w).exp() / self.scale;
        let disc = 1.0 + 2.0 * u - u * u;
        let c = (2.0 - u).abs() / (1.0 + disc.sqrt());
        let wb = w - c.ln();
        if wb < -cg.ln() {
            return 0.0;
        }
        let log = -w * (1.0 - q1) - 2.0 * q1 * w.ln() + q2 * wb - 2.0 * q2 * wb.ln();
        log.exp() / (self.scale * disc.sqrt())
    }

    fn density(&self, w: f64) -> f64 {
        self.side(w, 1.0) + self.side(w, -1.0)
    }

    fn start(&self) -> f64 {
        -self.pair.cutoff_f.ln()
    }

    /// Where the `u < 0` branch enters the support of `g`.
    fn kink(&self) -> f64 {
        let cg = -self.pair.cutoff_g.ln();
        let wb = |w: f64| {
            let u = -(-w).exp() / self.scale;
            w - ((2.0 - u) / (1.0 + (1.0 + 2.0 * u - u * u).sqrt())).ln()
        };
        let (mut lo, mut hi) = (self.start(), self.start() + 1.0);
        if wb(lo) >= cg {
            return lo;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if wb(mid) < cg {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

// n = 2 at x = R(cos φ, sin φ). With y = (x/R + w/R)/√2 and w = ρ(cos ψ, sin ψ),
// ρ = e^{-ξ}, the average is R^{-3} ∫ f(ρ) K ρ² dξ dψ. K integrates g over
// the radius-τ/√2 circle through h = H cosh s, where H = R(1-τ) is the
// distance to the nearest point; H vanishes at ψ - φ = ±ψ*.
struct Plane {
    pair: CexPair,
    scale: f64,
}

impl Plane {
    /// Inner integral times `ρ^{n/p₂ - 1}`.
    fn inner(&self, xi: f64, rel_angle: f64, tol: f64) -> f64 {
        let (q2, cg) = self.pair.exponent(Which::G);
        let k2 = 2.0 * q2;
        let rho = (-xi).exp();
        let r = self.scale;
        let tau2 = 1.0 - 2.0 * rho * rel_angle.cos() / r - rho * rho / (r * r);
        let tau = tau2.sqrt();
        let gap = (2.0 * rel_angle.cos() + rho / r).abs() / (1.0 + tau);
        if gap == 0.0 {
            return 0.0;
        }
        // ln H = ln gap - ξ.
        let ln_h = gap.ln() - xi;
        let ln_y = cg.ln() - ln_h;
        if ln_y <= 0.0 {
            return 0.0;
        }
        let s_max = ln_y + (1.0 + (1.0 - (-2.0 * ln_y).exp()).max(0.0).sqrt()).ln();
        let sq = tau.sqrt();
        let integrand = |s: f64| {
            let e = (-2.0 * s).exp();
            let ln_cosh = s + (0.5 * (1.0 + e)).ln();
            let ln_sinh = s + (0.5 * (1.0 - e)).ln();
            let ln_hh = ln_h + ln_cosh;
            let half = (ln_h + ln_sinh).exp() / (2.0 * r * sq);
            let cos_half = (1.0 - half * half).max(0.0).sqrt();
            ((1.0 - 2.0 * q2) * (gap.ln() + ln_cosh)).exp() * (-ln_hh).powf(-k2) / (sq * cos_half)
        };
        adaptive(integrand, 0.0, s_max, opts(tol)).value
    }

    fn angular(&self, xi: f64, phase: f64, tol: f64) -> f64 {
        let rho = (-xi).exp();
        let star = (-rho / (2.0 * self.scale)).acos();
        let two_pi = 2.0 * PI;
        let mut cuts: Vec<f64> = if phase == 0.0 {
            vec![0.0, star, PI]
        } else {
            let mut c = vec![0.0, two_pi, (phase + star).rem_euclid(two_pi), (phase - star).rem_euclid(two_pi)];
            c.sort_by(f64::total_cmp);
            c
        };
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let piece = |th: f64| {
                let psi = a + half * (1.0 - th.cos());
                half * th.sin() * self.inner(xi, psi - phase, tol * 0.1)
            };
            total += adaptive(piece, 0.0, PI, opts(tol)).value;
        }
        if phase == 0.0 {
            2.0 * total
        } else {
            total
        }
    }

    fn density(&self, xi: f64, phase: f64, tol: f64) -> f64 {
        let (q1, _) = self.pair.exponent(Which::F);
        let (q2, _) = self.pair.exponent(Which::G);
        // ρ² f(ρ) times the ρ^{1-2q₂} taken out of the inner integral.
        let pre = (-xi * (3.0 - 2.0 * (q1 + q2))).exp() * xi.powf(-2.0 * q1);
        pre * self.angular(xi, phase, tol) / self.scale.powi(3)
    }

    fn start(&self) -> f64 {
        -self.pair.cutoff_f.ln()
    }
}

/// Closed chain `R^{1-2n} ω_{n-1} ∫_δ^{1/100} r^{-n/p+2n-2} (log 1/r)^{-2/p} dr`
/// in the log variable.
fn chain_density(n: usize, inv_p: f64, scale: f64, x: f64) -> f64 {
    let nf = n as f64;
    let e = 2.0 * nf - 1.0 - nf * inv_p;
    sphere_area(n) * scale.powf(1.0 - 2.0 * nf) * (-e * x - 2.0 * inv_p * x.ln()).exp()
}

const CHAIN_START: f64 = 4.605_170_185_988_091; // ln 100

/// `M_{√2R}(f, g)(R e₁)`. For `n ≥ 3` this is the reduced lower-bound chain
/// without its unspecified constant.
pub fn cex_average(pair: &CexPair, scale: f64) -> Result<f64> {
    let mut x = vec![0.0; pair.n];
    x[0] = scale;
    cex_average_at(pair, &x)
}

/// `M_{√2|x|}(f, g)(x)` at an arbitrary point; for `n = 2` the angular
/// integral is laid out in absolute coordinates.
pub fn cex_average_at(pair: &CexPair, x: &[f64]) -> Result<f64> {
    if x.len() != pair.n {
        return Err(invalid(format!("point has dimension {}, pair has {}", x.len(), pair.n)));
    }
    let scale = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    check_scale(scale)?;
    pair.check_finite()?;
    match pair.n {
        1 => {
            let line = Line { pair: *pair, scale };
            let k = line.kink();
            let head = adaptive_checked(|w| line.density(w), &[line.start(), k], opts(1e-10), "cex line head")?;
            let tail = adaptive_to_infinity(|w| line.density(w), k, opts(1e-9));
            converged(tail, "cex line tail").map(|t| head + t)
        }
        2 => {
            let plane = Plane { pair: *pair, scale };
            let phase = if x[1] == 0.0 && x[0] > 0.0 { 0.0 } else { x[1].atan2(x[0]).rem_euclid(2.0 * PI) };
            let r = adaptive_to_infinity(|xi| plane.density(xi, phase, 1e-8), plane.start(), opts(1e-6));
            converged(r, "cex plane")
        }
        n => reduced_chain(n, pair.inv_p(), scale),
    }
}

fn converged(r: crate::quad::QuadResult, what: &'static str) -> Result<f64> {
    if r.converged {
        Ok(r.value)
    } else {
        Err(Error::NonConvergence {
            what,
            trace: format!("value={:.6e} est_err={:.3e} panels={}", r.value, r.error, r.panels),
        })
    }
}

/// `R^{1-2n} ω_{n-1} ∫_0^{1/100} r^{-n/p+2n-2}(log 1/r)^{-2/p} dr`.
pub fn reduced_chain(n: usize, inv_p: f64, scale: f64) -> Result<f64> {
    let nf = n as f64;
    let e = 2.0 * nf - 1.0 - nf * inv_p;
    if e < -1e-12 || (e.abs() <= 1e-12 && 2.0 * inv_p <= 1.0) {
        return Err(Error::Divergent(format!("reduced chain with n = {n}, 1/p = {inv_p}")));
    }
    let r = adaptive_to_infinity(|x| chain_density(n, inv_p, scale, x), CHAIN_START, opts(1e-12));
    converged(r, "reduced chain")
}

/// `2R^{-1} ∫_0^{1/100} t^{-1/p}(log 1/t)^{-2/p} dt`, the explicit lower
/// bound for the one-dimensional average.
pub fn line_lower_bound(p: f64, scale: f64) -> Result<f64> {
    let q = 1.0 / p;
    if q > 1.0 + 1e-12 {
        return Err(Error::Divergent(format!("lower bound with p = {p} < 1")));
    }
    let r = adaptive_to_infinity(|x| (-(1.0 - q) * x - 2.0 * q * x.ln()).exp(), CHAIN_START, opts(1e-12));
    converged(r, "line lower bound").map(|v| 2.0 * v / scale)
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub ks: Vec<u32>,
    /// Average restricted to radial parameter `≥ 2^{-k}`.
    pub values: Vec<f64>,
    pub growth_factor: f64,
    /// Last increment over first increment.
    pub gap_ratio: f64,
    pub strictly_increasing: bool,
    /// Last increment `≤ 1e-6 ×` last value.
    pub cauchy: bool,
}

impl DivergenceReport {
    pub fn diverges(&self) -> bool {
        self.strictly_increasing && self.growth_factor > 10.0 && self.gap_ratio > 10.0 && !self.cauchy
    }
}

/// Truncated averages that drop the singular shell where the radial
/// parameter of `f` is below `2^{-k}`.
pub fn divergence_probe(pair: &CexPair, scale: f64, ks: RangeInclusive<u32>) -> Result<DivergenceReport> {
    check_scale(scale)?;
    let ks: Vec<u32> = ks.collect();
    if ks.len() < 2 {
        return Err(invalid("divergence probe needs at least two truncation levels"));
    }
    let density: Box<dyn Fn(f64) -> f64 + Sync> = match pair.n {
        1 => {
            let line = Line { pair: *pair, scale };
            Box::new(move |w| line.density(w))
        }
        2 => {
            let plane = Plane { pair: *pair, scale };
            Box::new(move |xi| plane.density(xi, 0.0, 1e-8))
        }
        n => {
            let inv = pair.inv_p();
            Box::new(move |x| if x < CHAIN_START { 0.0 } else { chain_density(n, inv, scale, x) })
        }
    };
    let start = match pair.n {
        1 | 2 => -pair.cutoff_f.ln(),
        _ => CHAIN_START,
    };
    let jumps = if pair.n == 1 { vec![Line { pair: *pair, scale }.kink()] } else { Vec::new() };
    let edges: Vec<f64> = std::iter::once(start)
        .chain(ks.iter().map(|&k| (k as f64 * LN_2).max(start)))
        .collect();
    let pieces: Vec<f64> = edges
        .par_windows(2)
        .map(|w| {
            if w[1] <= w[0] {
                return Ok(0.0);
            }
            let mut breaks = vec![w[0]];
            breaks.extend(jumps.iter().copied().filter(|&j| j > w[0] && j < w[1]));
            breaks.push(w[1]);
            adaptive_checked(&density, &breaks, opts(1e-10), "divergence probe")
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(ks.len());
    let mut acc = 0.0;
    for p in &pieces {
        acc += p;
        values.push(acc);
    }
    let first_gap = values[1] - values[0];
    let last = values.len() - 1;
    let last_gap = values[last] - values[last - 1];
    Ok(DivergenceReport {
        growth_factor: values[last] / values[0],
        gap_ratio: last_gap / first_gap,
        strictly_increasing: values.windows(2).all(|w| w[1] > w[0]),
        cauchy: last_gap <= 1e-6 * values[last],
        ks,
        values,
    })
}

/// Log-log fit of the average against `R`.
pub fn growth_floor(pair: &CexPair, scales: &[f64]) -> Result<FitReport> {
    if scales.len() < 5 {
        return Err(invalid(format!("growth fit needs at least 5 scales, got {}", scales.len())));
    }
    let values: Vec<f64> = scales.par_iter().map(|&r| cex_average(pair, r)).collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = scales.iter().copied().zip(values).collect();
    fit_loglog(&pts)
}

/// `x₀ = exp(r₂/r₁)`: `F(x) = x^{r₁}(log x)^{-r₂}` increases on `[x₀, ∞)`.
pub fn monotone_since(r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 >= 0.0 && r1.is_finite() && r2.is_finite()) {
        return Err(invalid(format!("need r1 > 0, r2 >= 0, got ({r1}, {r2})")));
    }
    Ok((r2 / r1).exp())
}

/// `ln F(x)` for `x > 1`.
pub fn log_power_log(x: f64, r1: f64, r2: f64) -> f64 {
    r1 * x.ln() - r2 * x.ln().ln()
}

/// A constant `C'` with `s^{-r₁}(log 1/s)^{-r₂} ≤ C' t^{-r₁}(log 1/t)^{-r₂}`
/// whenever `s, t ≤ 1/10` and `t ≤ Cs`.
///
/// With `X = 1/s`: if `X/C ≥ max(10, x₀)` then `F(X) ≤ C^{r₁} F(X/C) ≤
/// C^{r₁} F(1/t)`. Otherwise `X < C·max(10, x₀)`, `F(X)` is at most its value
/// at an end of `[10, C·max(10, x₀)]` and `F(1/t) ≥ F(max(10, x₀))`.
pub fn rescale_constant(c: f64, r1: f64, r2: f64) -> Result<f64> {
    if !(c >= 1.0 && c.is_finite()) {
        return Err(invalid(format!("need C >= 1, got {c}")));
    }
    let x0 = monotone_since(r1, r2)?.max(10.0);
    let lf = |x: f64| log_power_log(x, r1, r2);
    let near = lf(10.0).max(lf(c * x0)) - lf(x0);
    Ok((r1 * c.ln()).max(near).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_with_breaks;

    #[test]
    fn pointwise_values() {
        let p = CexPair::new(1, 2.0, 2.0).unwrap();
        let y = (-1f64).exp();
        assert!((eval_cex(&p, Which::F, &[y]) - 0.5f64.exp()).abs() < 1e-14);
        assert_eq!(eval_cex(&p, Which::F, &[0.6]), 0.0);
        assert_eq!(eval_cex(&p, Which::G, &[0.0]), f64::INFINITY);
        let q = CexPair::new(3, 1.5, 2.0).unwrap();
        assert_eq!(eval_cex(&q, Which::F, &[0.02, 0.0, 0.0]), 0.0);
        assert!(eval_cex(&q, Which::G, &[0.02, 0.0, 0.0]) > 0.0);
        assert!(CexPair::new(2, 0.5, 2.0).is_err());
    }

    #[test]
    fn shells_sum_to_finite_mass() {
        let p = CexPair::new(2, 1.5, 1.5).unwrap();
        let mut total = 0.0;
        let mut partial = Vec::new();
        for k in 1..20000 {
            total += shell_mass(&p, Which::F, k).unwrap();
            partial.push(total);
        }
        // ∫_{ln 100}^∞ ω x^{-2} dx; the remainder past shell k is ω/(k ln 2).
        let want = sphere_area(2) / 100f64.ln();
        let tail = sphere_area(2) / (20000.0 * LN_2);
        assert!((total + tail - want).abs() < 1e-9 * want);
        assert!(partial[19998] - partial[9998] < 1e-3 * want);
    }

    fn direct_line(pair: &CexPair, scale: f64) -> f64 {
        // Arclength over the arc of S¹ near (1/√2, 1/√2).
        let f = |th: f64| {
            let v = sphere_integrand(pair, &[scale], &[th.cos(), th.sin()]);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let lo = (1.0 - 0.5 / scale) / SQRT_2;
        let hi = (1.0 + 0.5 / scale) / SQRT_2;
        let mut breaks = vec![lo.acos(), hi.acos(), lo.asin(), hi.asin(), PI / 4.0];
        breaks.sort_by(f64::total_cmp);
        adaptive_with_breaks(f, &breaks, QuadOptions::rel(1e-10)).value
    }

    #[test]
    fn line_matches_direct_arclength_quadrature() {
        let pair = CexPair::new(1, 4.0, 5.0).unwrap();
        for scale in [100.0, 1000.0] {
            let a = cex_average(&pair, scale).unwrap();
            let b = direct_line(&pair, scale);
            assert!((a - b).abs() < 1e-6 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn integrand_vanishes_off_support() {
        let pair = CexPair::new(1, 2.0, 2.0).unwrap();
        let r = 1000.0;
        let edge = 1.0 / (2.0 * SQRT_2 * r);
        for s in [1.0, -1.0] {
            let y = 1.0 / SQRT_2 + s * edge * 1.001;
            let z = (1.0 - y * y).sqrt();
            assert_eq!(sphere_integrand(&pair, &[r], &[y, z]), 0.0);
        }
        let pair = CexPair::new(2, 1.5, 1.5).unwrap();
        let w = 0.01 * 1.001 / (SQRT_2 * r);
        let y = [1.0 / SQRT_2 + w, 0.0];
        let rest = (1.0 - y[0] * y[0]).sqrt();
        for a in [0.0, 0.3, 1.0] {
            let yz = [y[0], y[1], rest * f64::cos(a), rest * f64::sin(a)];
            assert_eq!(sphere_integrand(&pair, &[r, 0.0], &yz), 0.0);
        }
    }

    #[test]
    fn line_dominates_lower_bound_and_decays() {
        let pair = CexPair::new(1, 2.0, 2.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 7..12 {
            let r = 2f64.powi(k);
            let v = cex_average(&pair, r).unwrap();
            assert!(v >= line_lower_bound(1.0, r).unwrap());
            assert!(v < prev);
            prev = v;
        }
        // For p = 1 the bound has the closed form 2/(R ln 100).
        assert!((line_lower_bound(1.0, 1.0).unwrap() - 2.0 / 100f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn subcritical_average_is_divergent() {
        let pair = CexPair::symmetric(1, 0.9).unwrap();
        assert!(matches!(cex_average(&pair, 1000.0), Err(Error::Divergent(_))));
        assert!(cex_average(&CexPair::new(1, 2.0, 2.0).unwrap(), 50.0).is_err());
    }

    #[test]
    fn chain_closed_form_at_critical_exponent() {
        // At p = n/(2n-1) the log integral is (ln 100)^{1-2/p}/(2/p - 1).
        for n in [3usize, 5] {
            let inv_p = (2 * n - 1) as f64 / n as f64;
            let v = reduced_chain(n, inv_p, 1.0).unwrap();
            let want = sphere_area(n) * CHAIN_START.powf(1.0 - 2.0 * inv_p) / (2.0 * inv_p - 1.0);
            assert!((v - want).abs() < 1e-9 * want);
        }
        assert!(reduced_chain(3, 2.0, 1.0).is_err());
    }

    #[test]
    fn plane_matches_direct_nested_quadrature() {
        // Outer over y near e₁/√2 in polar form, inner over the circle of
        // radius √(1-|y|²) in its own angle.
        let pair = CexPair::new(2, 8.0, 8.0).unwrap();
        let r: f64 = 150.0;
        let x = [r, 0.0];
        let o = QuadOptions::rel(1e-9);
        let inner = |y: [f64; 2]| {
            let ry = (1.0 - y[0] * y[0] - y[1] * y[1]).sqrt();
            let tau = SQRT_2 * ry;
            let s2 = ((0.5 / r).powi(2) - (1.0 - tau).powi(2)) / (4.0 * tau);
            if s2 <= 0.0 {
                return 0.0;
            }
            let edge = 2.0 * s2.sqrt().min(1.0).asin();
            let g = |a: f64| ry * radial(&pair, Which::G, (x[0] - SQRT_2 * r * ry * a.cos()).hypot(SQRT_2 * r * ry * a.sin()));
            2.0 * adaptive_with_breaks(g, &[0.0, edge], o).value / ry
        };
        let rad = 0.01 / (SQRT_2 * r);
        let outer = |rr: f64| {
            let ang = |psi: f64| {
                let y = [1.0 / SQRT_2 + rr * psi.cos(), rr * psi.sin()];
                inner(y)
            };
            let f = radial(&pair, Which::F, SQRT_2 * r * rr);
            rr * f * 2.0 * adaptive_with_breaks(ang, &[0.0, PI / 2.0, PI], QuadOptions::rel(1e-8)).value
        };
        let direct = adaptive_with_breaks(outer, &[0.0, rad], QuadOptions::rel(1e-7)).value;
        let v = cex_average(&pair, r).unwrap();
        assert!((v - direct).abs() < 1e-5 * direct, "{v} vs {direct}");
    }

    #[test]
    fn plane_rotation_invariance() {
        let pair = CexPair::symmetric(2, 2.0 / 3.0).unwrap();
        let r = 256.0;
        let a = cex_average(&pair, r).unwrap();
        let b = cex_average_at(&pair, &[r * 0.6, -r * 0.8]).unwrap();
        assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
    }

    #[test]
    fn probe_contrasts_sub_and_supercritical() {
        let low = divergence_probe(&CexPair::symmetric(1, 0.9).unwrap(), 1024.0, 4..=200).unwrap();
        assert!(low.diverges(), "{low:?}");
        let high = divergence_probe(&CexPair::symmetric(1, 1.1).unwrap(), 1024.0, 4..=200).unwrap();
        assert!(high.cauchy && !high.diverges());
        assert!(high.values.windows(2).all(|w| w[1] >= w[0]));
        let full = cex_average(&CexPair::symmetric(1, 1.1).unwrap(), 1024.0).unwrap();
        assert!((high.values.last().unwrap() - full).abs() < 1e-6 * full);
    }

    #[test]
    fn monotonicity_threshold() {
        assert!((monotone_since(1.0, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(monotone_since(2.0, 0.0).unwrap(), 1.0);
        let f = |x: f64| log_power_log(x, 1.0, 1.0).exp();
        let e = std::f64::consts::E;
        assert!((f(e) - e).abs() < 1e-12);
        assert!(f(e * e) > f(e));
        assert!(monotone_since(0.0, 1.0).is_err());
    }

    #[test]
    fn rescale_constant_holds_on_grid() {
        for (c, r1, r2) in [(1.0, 1.0, 1.0), (3.0, 0.5, 2.0), (10.0, 2.0, 0.3)] {
            let cp = rescale_constant(c, r1, r2).unwrap();
            let lhs = |s: f64| log_power_log(1.0 / s, r1, r2);
            for i in 1..60 {
                let s = 0.1 * 0.7f64.powi(i);
                for j in 0..60 {
                    let t = (c * s).min(0.1) * 0.8f64.powi(j);
                    assert!(lhs(s) <= cp.ln() + lhs(t) + 1e-12, "C={c} s={s} t={t}");
                }
            }
        }
    }
}
