//! Bilinear multiplier operators on periodic grids: spherical averages, the
//! maximal operator and its dyadic pieces, the linear maximal multiplier,
//! square functions, and empirical operator-norm lower bounds.
//!
//! For grid functions `f = Σ a_k e^{2πi k·x/L}`, `g = Σ b_l e^{2πi l·x/L}`,
//! `T_t(f, g) = Σ_{k,l} a_k b_l σ(t k/L, t l/L) e^{2πi (k+l)·x/L}`, evaluated
//! exactly on the grid (frequency sums wrap modulo N).

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::{lp_norm, GridFunction};
use crate::specfn::dsigma_hat_unchecked;
use crate::squad::{shard_rng, SphereRule};
use crate::symbols::{make_symbol, RadialBilinearSymbol, SymbolKind};
use crate::testfn::TestFunctionFamily;

/// A bilinear Fourier multiplier `σ(ξ, η)`.
pub trait Multiplier: Sync {
    fn eval(&self, xi: &[f64], eta: &[f64]) -> f64;

    /// True when `eval` depends only on `(|ξ|, |η|)`; values are then cached
    /// per pair of frequency norms.
    fn is_radial(&self) -> bool {
        false
    }
}

impl Multiplier for RadialBilinearSymbol {
    fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        self.eval_vec(xi, eta)
    }
    fn is_radial(&self) -> bool {
        true
    }
}

/// `σ ≡ 1`: the pointwise product.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unit;

impl Multiplier for Unit {
    fn eval(&self, _: &[f64], _: &[f64]) -> f64 {
        1.0
    }
    fn is_radial(&self) -> bool {
        true
    }
}

/// `σ(ξ, η) = s(|ξ|, |η|)` for a closure `s`.
pub struct RadialProfile<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Sync> Multiplier for RadialProfile<F> {
    fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let u = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        (self.0)(u, v)
    }
    fn is_radial(&self) -> bool {
        true
    }
}

/// An arbitrary closure `σ(ξ, η)`.
pub struct General<F>(pub F);

impl<F: Fn(&[f64], &[f64]) -> f64 + Sync> Multiplier for General<F> {
    fn eval(&self, xi: &[f64], eta: &[f64]) -> f64 {
        (self.0)(xi, eta)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PlanOptions {
    /// Drop input modes with `|c_k| ≤ prune_tol · max |c|`. Zero keeps all.
    pub prune_tol: f64,
}

struct Mode {
    coef: Complex64,
    freq: Vec<f64>,
    unsigned: Vec<usize>,
    norm_slot: usize,
}

/// Spectra of a fixed pair `(f, g)`, reusable across radii and symbols.
pub struct BilinearPlan {
    n: usize,
    size: usize,
    period: f64,
    f_modes: Vec<Mode>,
    g_modes: Vec<Mode>,
    f_norms: Vec<f64>,
    g_norms: Vec<f64>,
}

fn modes(g: &GridFunction, prune_tol: f64) -> (Vec<Mode>, Vec<f64>) {
    let spec = g.spectrum();
    let cap = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cut = prune_tol * cap;
    let mut slots: BTreeMap<i64, usize> = BTreeMap::new();
    let mut raw = Vec::new();
    for (i, &c) in spec.iter().enumerate() {
        if c.norm() <= cut || c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let unsigned = g.index(i);
        let signed: Vec<i64> = unsigned.iter().map(|&k| g.signed(k)).collect();
        let norm2: i64 = signed.iter().map(|k| k * k).sum();
        slots.entry(norm2).or_insert(0);
        raw.push((c, signed, unsigned, norm2));
    }
    for (slot, v) in slots.values_mut().enumerate() {
        *v = slot;
    }
    let norms = slots.keys().map(|&k| (k as f64).sqrt() / g.period()).collect();
    let modes = raw
        .into_iter()
        .map(|(coef, signed, unsigned, norm2)| Mode {
            coef,
            freq: signed.iter().map(|&k| k as f64 / g.period()).collect(),
            unsigned,
            norm_slot: slots[&norm2],
        })
        .collect();
    (modes, norms)
}

const CHUNKS: usize = 64;

impl BilinearPlan {
    pub fn new(f: &GridFunction, g: &GridFunction, opts: PlanOptions) -> Result<Self> {
        f.check_same_shape(g)?;
        if !(opts.prune_tol >= 0.0 && opts.prune_tol < 1.0) {
            return Err(invalid("prune tolerance must lie in [0, 1)"));
        }
        let (f_modes, f_norms) = modes(f, opts.prune_tol);
        let (g_modes, g_norms) = modes(g, opts.prune_tol);
        Ok(Self { n: f.n(), size: f.size(), period: f.period(), f_modes, g_modes, f_norms, g_norms })
    }

    /// Number of retained `(k, l)` pairs.
    pub fn pairs(&self) -> usize {
        self.f_modes.len() * self.g_modes.len()
    }

    /// `T_t(f, g)` for the multiplier `σ(t·, t·)`.
    pub fn apply(&self, sym: &dyn Multiplier, t: f64) -> Result<GridFunction> {
        if !(t.is_finite() && t > 0.0) {
            return Err(invalid(format!("radius t must be positive, got {t}")));
        }
        let table: Option<Vec<f64>> = sym.is_radial().then(|| {
            let gn = self.g_norms.len();
            (0..self.f_norms.len() * gn)
                .into_par_iter()
                .map(|i| sym.eval(&[t * self.f_norms[i / gn]], &[t * self.g_norms[i % gn]]))
                .collect()
        });
        let total = self.size.pow(self.n as u32);
        let mask = self.size - 1;
        let strides: Vec<usize> = (0..self.n).map(|a| self.size.pow((self.n - 1 - a) as u32)).collect();
        let chunk = self.f_modes.len().div_ceil(CHUNKS).max(1);
        let buffers: Vec<Vec<Complex64>> = self
            .f_modes
            .par_chunks(chunk)
            .map(|fs| {
                let mut buf = vec![Complex64::new(0.0, 0.0); total];
                let mut xi = vec![0.0; self.n];
                let mut eta = vec![0.0; self.n];
                for fm in fs {
                    for gm in &self.g_modes {
                        let s = match &table {
                            Some(tab) => tab[fm.norm_slot * self.g_norms.len() + gm.norm_slot],
                            None => {
                                for a in 0..self.n {
                                    xi[a] = t * fm.freq[a];
                                    eta[a] = t * gm.freq[a];
                                }
                                sym.eval(&xi, &eta)
                            }
                        };
                        if s == 0.0 {
                            continue;
                        }
                        let mut q = 0;
                        for a in 0..self.n {
                            q += ((fm.unsigned[a] + gm.unsigned[a]) & mask) * strides[a];
                        }
                        buf[q] += fm.coef * gm.coef * s;
                    }
                }
                buf
            })
            .collect();
        let mut spec = vec![Complex64::new(0.0, 0.0); total];
        for buf in &buffers {
            for (o, v) in spec.iter_mut().zip(buf) {
                *o += v;
            }
        }
        let scale = 1.0 / total as f64;
        for v in &mut spec {
            *v *= scale;
        }
        GridFunction::from_spectrum(self.n, self.size, self.period, spec)
    }
}

/// `T_t(f, g)` with multiplier `σ(tξ, tη)`.
pub fn average_mult(sym: &dyn Multiplier, f: &GridFunction, g: &GridFunction, t: f64) -> Result<GridFunction> {
    BilinearPlan::new(f, g, PlanOptions::default())?.apply(sym, t)
}

/// Quadrature value of `∫_{S^{2n-1}} f(x - ty) g(x - tz) dσ(y, z)`.
pub fn average_quad<F, G>(f: F, g: G, x: &[f64], t: f64, rule: &SphereRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("radius t must be positive, got {t}")));
    }
    let n = x.len();
    if rule.d() != 2 * n {
        return Err(invalid(format!("rule lives on S^{}, need S^{}", rule.d() - 1, 2 * n - 1)));
    }
    Ok(rule.integrate(|w| {
        let a: Vec<f64> = (0..n).map(|i| x[i] - t * w[i]).collect();
        let b: Vec<f64> = (0..n).map(|i| x[i] - t * w[n + i]).collect();
        f(&a) * g(&b)
    }))
}

/// Geometric grid `t_min · ratio^k` up to `t_max` (inclusive within rounding).
pub fn geometric_grid(t_min: f64, t_max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && ratio > 1.0 && t_max.is_finite()) {
        return Err(invalid(format!("bad geometric grid [{t_min}, {t_max}] ratio {ratio}")));
    }
    let steps = ((t_max / t_min).ln() / ratio.ln() + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| t_min * ratio.powi(k as i32)).collect())
}

/// Default radii: ratio `2^{1/16}` over `[2^{-6}, 2^6]` grid spacings.
pub fn default_t_grid(spacing: f64) -> Vec<f64> {
    geometric_grid(spacing / 64.0, spacing * 64.0, 2f64.powf(1.0 / 16.0)).expect("valid default grid")
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(invalid("t grid is empty"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(invalid("t grid must contain positive radii"));
    }
    Ok(())
}

fn pointwise_max(acc: &mut [f64], h: &GridFunction) {
    for (a, v) in acc.iter_mut().zip(h.values()) {
        *a = a.max(v.norm());
    }
}

fn real_grid(like: &GridFunction, vals: Vec<f64>) -> Result<GridFunction> {
    GridFunction::new(
        like.n(),
        like.size(),
        like.period(),
        vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// `max_t |T_t(f, g)|` over the radii in `t_grid`.
pub fn maximal(sym: &dyn Multiplier, f: &GridFunction, g: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    maximal_with(sym, f, g, t_grid, PlanOptions::default())
}

pub fn maximal_with(
    sym: &dyn Multiplier,
    f: &GridFunction,
    g: &GridFunction,
    t_grid: &[f64],
    opts: PlanOptions,
) -> Result<GridFunction> {
    check_t_grid(t_grid)?;
    let plan = BilinearPlan::new(f, g, opts)?;
    let mut acc = vec![0.0f64; f.len()];
    for &t in t_grid {
        pointwise_max(&mut acc, &plan.apply(sym, t)?);
    }
    real_grid(f, acc)
}

/// Spherical average of `|f|` over `S^{2n-1}` with the `z` variable
/// integrated out: multiplier `dσ̂(tξ, 0)`.
pub fn linear_average(f: &GridFunction, t: f64) -> Result<GridFunction> {
    linear_spectrum_apply(f.n(), &f.abs(), &f.abs().spectrum(), t)
}

fn linear_spectrum_apply(n: usize, like: &GridFunction, spec: &[Complex64], t: f64) -> Result<GridFunction> {
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("radius t must be positive, got {t}")));
    }
    let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
    let out: Vec<Complex64> = spec
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k2: i64 = like.index(i).iter().map(|&k| like.signed(k).pow(2)).sum();
            let m = *cache
                .entry(k2)
                .or_insert_with(|| dsigma_hat_unchecked(2 * n, t * (k2 as f64).sqrt() / like.period()));
            c * m
        })
        .collect();
    GridFunction::from_spectrum(like.n(), like.size(), like.period(), out)
}

/// `max_t` of the linear average of `|f|` over `t_grid`.
pub fn linear_max(f: &GridFunction, t_grid: &[f64]) -> Result<GridFunction> {
    check_t_grid(t_grid)?;
    let a = f.abs();
    let spec = a.spectrum();
    let parts: Vec<GridFunction> = t_grid
        .par_iter()
        .map(|&t| linear_spectrum_apply(f.n(), &a, &spec, t))
        .collect::<Result<_>>()?;
    let mut acc = vec![0.0f64; f.len()];
    for p in &parts {
        pointwise_max(&mut acc, p);
    }
    real_grid(f, acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SquareVariant {
    /// Built from the off-diagonal pieces `m_j²`.
    Plain,
    /// Built from the Euler-derivative pieces `m̃_j²`.
    Euler,
}

/// Weights `Δ log t` for a sorted radius grid (midpoint rule in `log t`).
pub fn log_weights(t_grid: &[f64]) -> Vec<f64> {
    let l: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let k = l.len();
    if k == 1 {
        return vec![1.0];
    }
    (0..k)
        .map(|i| {
            let lo = if i == 0 { l[0] - (l[1] - l[0]) / 2.0 } else { (l[i - 1] + l[i]) / 2.0 };
            let hi = if i == k - 1 { l[k - 1] + (l[k - 1] - l[k - 2]) / 2.0 } else { (l[i] + l[i + 1]) / 2.0 };
            hi - lo
        })
        .collect()
}

/// Output of [`square_function_parts`].
pub struct SquareParts {
    /// `(Σ_s |T_s|² Δlog s)^{1/2}`.
    pub square: GridFunction,
    /// `max_s |T_s|`.
    pub sup: GridFunction,
}

/// Discrete square function of the off-diagonal family at level `j`.
pub fn square_function(
    f: &GridFunction,
    g: &GridFunction,
    j: u32,
    variant: SquareVariant,
    epsilon: f64,
    t_grid: &[f64],
) -> Result<GridFunction> {
    Ok(square_function_parts(f, g, j, variant, epsilon, t_grid, PlanOptions::default())?.square)
}

pub fn square_function_parts(
    f: &GridFunction,
    g: &GridFunction,
    j: u32,
    variant: SquareVariant,
    epsilon: f64,
    t_grid: &[f64],
    opts: PlanOptions,
) -> Result<SquareParts> {
    check_t_grid(t_grid)?;
    if j == 0 {
        return Err(invalid("square functions need j >= 1"));
    }
    let kind = match variant {
        SquareVariant::Plain => SymbolKind::OffDiagonal,
        SquareVariant::Euler => SymbolKind::EulerOffDiagonal,
    };
    let sym = make_symbol(f.n() as u32, j, kind, epsilon)?;
    let plan = BilinearPlan::new(f, g, opts)?;
    let w = log_weights(t_grid);
    let mut sq = vec![0.0f64; f.len()];
    let mut sup = vec![0.0f64; f.len()];
    for (&t, wt) in t_grid.iter().zip(&w) {
        let h = plan.apply(&sym, t)?;
        for ((s, m), v) in sq.iter_mut().zip(sup.iter_mut()).zip(h.values()) {
            let a = v.norm();
            *s += a * a * wt;
            *m = m.max(a);
        }
    }
    Ok(SquareParts {
        square: real_grid(f, sq.into_iter().map(f64::sqrt).collect())?,
        sup: real_grid(f, sup)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OpnormReport {
    /// `max ‖op(f, g)‖_p / (‖f‖_{p₁} ‖g‖_{p₂})` over the trials.
    pub lower_bound: f64,
    pub best_trial: usize,
    pub ratios: Vec<f64>,
}

/// Empirical lower bound for the norm of a bilinear grid operator
/// `L^{p₁} × L^{p₂} → L^p`, using `trials` random pairs from `family`
/// sampled on `size` points per axis. Trial `i` draws from substream `i` of
/// `seed`.
#[allow(clippy::too_many_arguments)]
pub fn opnorm_lower<Op>(
    op: Op,
    p1: f64,
    p2: f64,
    p: f64,
    family: &TestFunctionFamily,
    size: usize,
    trials: usize,
    seed: u64,
) -> Result<OpnormReport>
where
    Op: Fn(&GridFunction, &GridFunction) -> Result<GridFunction>,
{
    opnorm_lower_pairs(op, (p1, p2, p), trials, seed, |rng| {
        let f = family.draw(rng).sample(size, family.period)?;
        let g = family.draw(rng).sample(size, family.period)?;
        Ok((f, g))
    })
}

/// As [`opnorm_lower`] with a caller-supplied pair generator.
pub fn opnorm_lower_pairs<Op, D>(op: Op, exps: (f64, f64, f64), trials: usize, seed: u64, draw: D) -> Result<OpnormReport>
where
    Op: Fn(&GridFunction, &GridFunction) -> Result<GridFunction>,
    D: Fn(&mut ChaCha8Rng) -> Result<(GridFunction, GridFunction)>,
{
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let (p1, p2, p) = exps;
    let mut ratios = Vec::with_capacity(trials);
    for i in 0..trials {
        let (f, g) = draw(&mut shard_rng(seed, i as u64))?;
        let denom = lp_norm(&f, p1)? * lp_norm(&g, p2)?;
        let r = if denom > 0.0 { lp_norm(&op(&f, &g)?, p)? / denom } else { 0.0 };
        ratios.push(r);
    }
    let (best_trial, lower_bound) = ratios
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |b, (i, r)| if r > b.1 { (i, r) } else { b });
    Ok(OpnormReport { lower_bound, best_trial, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfn::{dsigma_hat, sphere_area};
    use crate::squad::SphereMethod;
    use crate::symbols::DEFAULT_EPSILON;
    use crate::testfn::TestFunction;
    use std::f64::consts::PI;

    fn gauss(n: usize, size: usize, l: f64, c: f64, w: f64) -> GridFunction {
        TestFunction::gaussian(vec![c * l; n], w * l).sample(size, l).unwrap()
    }

    #[test]
    fn unit_symbol_gives_pointwise_product() {
        for (n, size) in [(1, 64), (2, 16)] {
            let f = gauss(n, size, 1.0, 0.45, 0.06);
            let g = TestFunction::ModulatedGaussian {
                center: vec![0.55; n],
                width: 0.07,
                frequency: vec![2.0; n],
                amplitude: 1.0,
            }
            .sample(size, 1.0)
            .unwrap();
            let out = average_mult(&Unit, &f, &g, 1.0).unwrap();
            for i in 0..f.len() {
                assert!((out.values()[i] - f.values()[i] * g.values()[i]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn exponentials_are_eigenfunctions() {
        let (n, size, l) = (2, 8, 2.0);
        let (k, m) = ([1i64, 2], [-3i64, 1]);
        let wave = |kk: [i64; 2]| {
            GridFunction::from_complex_fn(n, size, l, move |x| {
                Complex64::from_polar(1.0, 2.0 * PI * (kk[0] as f64 * x[0] + kk[1] as f64 * x[1]) / l)
            })
            .unwrap()
        };
        let sym = RadialBilinearSymbol::full(2).unwrap();
        let t = 0.7;
        let out = average_mult(&sym, &wave(k), &wave(m), t).unwrap();
        let r = t * 15f64.sqrt() / l;
        let coef = dsigma_hat(4, r).unwrap();
        let sum = wave([k[0] + m[0], k[1] + m[1]]);
        for i in 0..out.len() {
            assert!((out.values()[i] - sum.values()[i] * coef).norm() < 1e-12);
        }
    }

    #[test]
    fn bilinear_and_symmetric() {
        let size = 32;
        let f1 = gauss(1, size, 1.0, 0.4, 0.05);
        let f2 = gauss(1, size, 1.0, 0.6, 0.04);
        let g = gauss(1, size, 1.0, 0.5, 0.06);
        let sym = RadialBilinearSymbol::full(1).unwrap();
        let a = 1.7;
        let lhs = average_mult(&sym, &f1.scale(a).add(&f2).unwrap(), &g, 0.05).unwrap();
        let rhs = average_mult(&sym, &f1, &g, 0.05)
            .unwrap()
            .scale(a)
            .add(&average_mult(&sym, &f2, &g, 0.05).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12 * lhs.max_abs());
        let fg = average_mult(&sym, &f1, &g, 0.05).unwrap();
        let gf = average_mult(&sym, &g, &f1, 0.05).unwrap();
        assert!(fg.max_abs_diff(&gf).unwrap() < 1e-13 * fg.max_abs());
    }

    #[test]
    fn mismatched_grids_rejected() {
        let f = gauss(1, 32, 1.0, 0.5, 0.05);
        let g = gauss(1, 64, 1.0, 0.5, 0.05);
        assert!(average_mult(&Unit, &f, &g, 1.0).is_err());
        assert!(maximal(&Unit, &f, &f, &[]).is_err());
        assert!(linear_max(&f, &[]).is_err());
    }

    #[test]
    fn constant_inputs_give_sphere_measure() {
        let one = GridFunction::from_fn(2, 8, 1.0, |_| 1.0).unwrap();
        let sym = RadialBilinearSymbol::full(2).unwrap();
        let w = sphere_area(4);
        let out = average_mult(&sym, &one, &one, 0.3).unwrap();
        assert!(out.values().iter().all(|v| (v.re - w).abs() < 1e-12));
        let lm = linear_max(&one, &[0.1, 0.2]).unwrap();
        assert!(lm.values().iter().all(|v| (v.re - w).abs() < 1e-12));
    }

    #[test]
    fn quadrature_and_multiplier_paths_agree() {
        let (size, l) = (256, 1.0);
        let ff = TestFunction::gaussian(vec![0.48], 0.05);
        let gf = TestFunction::gaussian(vec![0.53], 0.06);
        let f = ff.sample(size, l).unwrap();
        let g = gf.sample(size, l).unwrap();
        let sym = RadialBilinearSymbol::full(1).unwrap();
        let rule = SphereRule::new(2, SphereMethod::Product { resolution: 64 }).unwrap();
        for t in [0.02, 0.08, 0.15] {
            let m = average_mult(&sym, &f, &g, t).unwrap();
            for i in (0..size).step_by(16) {
                let x = f.point(i);
                let q = average_quad(|y| ff.eval_periodic(y, l).re, |y| gf.eval_periodic(y, l).re, &x, t, &rule).unwrap();
                assert!((q - m.values()[i].re).abs() < 1e-9 * m.max_abs(), "t={t} i={i}");
            }
        }
    }

    #[test]
    fn maximal_is_monotone_in_grid() {
        let f = gauss(1, 64, 1.0, 0.5, 0.05);
        let sym = RadialBilinearSymbol::full(1).unwrap();
        let a = maximal(&sym, &f, &f, &[0.01, 0.04]).unwrap();
        let b = maximal(&sym, &f, &f, &[0.01, 0.02, 0.04]).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!(x.re <= y.re);
        }
    }

    #[test]
    fn linear_max_is_translation_equivariant() {
        let f = gauss(2, 16, 1.0, 0.5, 0.07);
        let t = [0.05, 0.1];
        let a = linear_max(&f.roll(&[3, -2]).unwrap(), &t).unwrap();
        let b = linear_max(&f, &t).unwrap().roll(&[3, -2]).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn square_function_of_zero_is_zero() {
        let f = gauss(1, 64, 1.0, 0.5, 0.05);
        let z = GridFunction::zeros(1, 64, 1.0).unwrap();
        let g = square_function(&f, &z, 3, SquareVariant::Plain, DEFAULT_EPSILON, &[0.1, 0.2]).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert!(square_function(&f, &z, 0, SquareVariant::Plain, DEFAULT_EPSILON, &[0.1]).is_err());
    }

    #[test]
    fn log_weights_for_geometric_grid() {
        let g = geometric_grid(1.0, 16.0, 2.0).unwrap();
        assert_eq!(g.len(), 5);
        for w in log_weights(&g) {
            assert!((w - 2f64.ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn product_opnorm_probe() {
        let fam = TestFunctionFamily::gaussians(1, 1.0);
        let rep = opnorm_lower(|f, g| average_mult(&Unit, f, g, 1.0), 2.0, 2.0, 1.0, &fam, 128, 8, 9).unwrap();
        assert!(rep.lower_bound <= 1.0 + 1e-12 && rep.lower_bound > 0.0);
        let zero = opnorm_lower(|f, _| Ok(f.scale(0.0)), 2.0, 2.0, 1.0, &fam, 128, 3, 9).unwrap();
        assert_eq!(zero.lower_bound, 0.0);
    }
}
