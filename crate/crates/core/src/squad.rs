//! Quadrature on spheres `S^{d-1} ⊂ ℝ^d`: seeded Monte Carlo, nested product
//! rules, the ball/sphere change of variables, and the hemisphere-graph rule.
//!
//! Change of variables on `S^{2n-1}`, with `y = sin θ·ω`, `z = cos θ·ω'`:
//! `∫ F dσ = ∫_0^{π/2} sin^{n-1}θ cos^{n-1}θ ∫_{S^{n-1}} ∫_{S^{n-1}} F(y, z) dω dω' dθ`.
//! Hemisphere graph over the ball `B_{2n-1}`, with `x = sin θ·ω`:
//! `∫ F dσ = ∫_0^{π/2} sin^{2n-2}θ ∫_{S^{2n-2}} [F(x, cos θ) + F(x, -cos θ)] dω dθ`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quad::{gauss_legendre_on, pairwise_sum};
use crate::specfn::sphere_area;

/// Monte Carlo samples per independent substream.
pub const SHARD: usize = 4096;

/// A uniformly distributed point on `S^{d-1}` (normalized Gaussian vector).
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    assert!(d >= 1, "sphere dimension must be >= 1");
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-150 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Generator for substream `shard` of a run seeded with `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `|S^{d-1}| · mean(F)` over `samples` uniform points. Shards of
/// [`SHARD`] samples draw from their own substream and are reduced in a
/// fixed order, so the result does not depend on the thread count.
pub fn integrate_mc<F>(d: usize, f: F, samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if d == 0 {
        return Err(invalid("sphere dimension must be >= 1"));
    }
    if samples == 0 {
        return Err(invalid("Monte Carlo needs at least one sample"));
    }
    let shards = samples.div_ceil(SHARD);
    let partial: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD.min(samples - s * SHARD);
            let mut rng = shard_rng(seed, s as u64);
            let vals: Vec<f64> = (0..count).map(|_| f(&sample_sphere(d, &mut rng))).collect();
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            (pairwise_sum(&vals), pairwise_sum(&sq))
        })
        .collect();
    let sums: Vec<f64> = partial.iter().map(|p| p.0).collect();
    let sqs: Vec<f64> = partial.iter().map(|p| p.1).collect();
    let n = samples as f64;
    let mean = pairwise_sum(&sums) / n;
    let var = if samples > 1 {
        ((pairwise_sum(&sqs) - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let area = sphere_area(d);
    Ok(McEstimate { value: area * mean, std_error: area * (var / n).sqrt(), samples })
}

/// How the nodes of a [`SphereRule`] are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SphereMethod {
    MonteCarlo { samples: usize, seed: u64 },
    /// Even `d = 2n` only: ball/sphere split with `outer` nodes in θ and
    /// product rules of resolution `inner` on both `S^{n-1}` factors.
    ChangeOfVariables { outer: usize, inner: usize },
    HemisphereGraph { resolution: usize },
    /// Recursive product rule of the given resolution.
    Product { resolution: usize },
}

/// Explicit nodes and positive weights on `S^{d-1}`.
#[derive(Clone, Debug)]
pub struct SphereRule {
    d: usize,
    method: SphereMethod,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(d: usize, method: SphereMethod) -> Result<Self> {
        if d == 0 {
            return Err(invalid("sphere dimension must be >= 1"));
        }
        let (nodes, weights) = match method {
            SphereMethod::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(invalid("Monte Carlo needs at least one sample"));
                }
                let w = sphere_area(d) / samples as f64;
                let mut nodes = Vec::with_capacity(samples * d);
                for s in 0..samples.div_ceil(SHARD) {
                    let mut rng = shard_rng(seed, s as u64);
                    for _ in 0..SHARD.min(samples - s * SHARD) {
                        nodes.extend(sample_sphere(d, &mut rng));
                    }
                }
                (nodes, vec![w; samples])
            }
            SphereMethod::ChangeOfVariables { outer, inner } => {
                if !d.is_multiple_of(2) {
                    return Err(invalid(format!("change of variables needs even d, got {d}")));
                }
                check_resolution(outer)?;
                check_resolution(inner)?;
                split_rule(d / 2, outer, inner)
            }
            SphereMethod::HemisphereGraph { resolution } => {
                if d < 2 {
                    return Err(invalid("hemisphere graph needs d >= 2"));
                }
                check_resolution(resolution)?;
                hemigraph_rule(d, resolution)
            }
            SphereMethod::Product { resolution } => {
                check_resolution(resolution)?;
                product_rule(d, resolution)
            }
        };
        Ok(Self { d, method, nodes, weights })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn method(&self) -> SphereMethod {
        self.method
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.d..(i + 1) * self.d]
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// `Σ wᵢ F(xᵢ)`, summed in a fixed order.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let vals: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| self.weights[i] * f(self.node(i)))
            .collect();
        pairwise_sum(&vals)
    }
}

fn check_resolution(res: usize) -> Result<()> {
    if res == 0 {
        return Err(invalid("rule resolution must be >= 1"));
    }
    Ok(())
}

/// Deterministic product rule on `S^{d-1}`: two points on `S⁰`, a
/// trapezoid rule with `4·res` points on `S¹`, the ball/sphere split for even
/// `d ≥ 4`, and Gauss slices along the first axis for odd `d ≥ 3`.
pub fn product_rule(d: usize, res: usize) -> (Vec<f64>, Vec<f64>) {
    match d {
        1 => (vec![1.0, -1.0], vec![1.0, 1.0]),
        2 => {
            let m = 4 * res;
            let mut nodes = Vec::with_capacity(2 * m);
            for k in 0..m {
                let a = 2.0 * PI * k as f64 / m as f64;
                nodes.push(a.cos());
                nodes.push(a.sin());
            }
            (nodes, vec![2.0 * PI / m as f64; m])
        }
        _ if d.is_multiple_of(2) => split_rule(d / 2, res.max(2), res),
        _ => {
            // slices t = x₀ ∈ [-1, 1] with weight (1 - t²)^{(d-3)/2}
            let (ts, tw) = gauss_legendre_on(res.max(2), -1.0, 1.0);
            let (sub, sw) = product_rule(d - 1, res);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for (t, w) in ts.iter().zip(&tw) {
                let s2 = 1.0 - t * t;
                let s = s2.sqrt();
                let wt = w * s2.powi((d as i32 - 3) / 2);
                for (k, ws) in sw.iter().enumerate() {
                    nodes.push(*t);
                    nodes.extend(sub[k * (d - 1)..(k + 1) * (d - 1)].iter().map(|x| s * x));
                    weights.push(wt * ws);
                }
            }
            (nodes, weights)
        }
    }
}

/// Ball/sphere split of `S^{2m-1}`: Gauss–Legendre in θ times product
/// rules on both `S^{m-1}` factors.
fn split_rule(m: usize, outer: usize, inner: usize) -> (Vec<f64>, Vec<f64>) {
    let (base, bw) = product_rule(m, inner);
    let (ts, tw) = gauss_legendre_on(outer, 0.0, FRAC_PI_2);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (t, w) in ts.iter().zip(&tw) {
        let (s, c) = t.sin_cos();
        let wt = w * (s * c).powi(m as i32 - 1);
        for (a, wa) in bw.iter().enumerate() {
            for (b, wb) in bw.iter().enumerate() {
                nodes.extend(base[a * m..(a + 1) * m].iter().map(|x| s * x));
                nodes.extend(base[b * m..(b + 1) * m].iter().map(|x| c * x));
                weights.push(wt * wa * wb);
            }
        }
    }
    (nodes, weights)
}

fn hemigraph_rule(d: usize, res: usize) -> (Vec<f64>, Vec<f64>) {
    let (ts, tw) = gauss_legendre_on(res, 0.0, FRAC_PI_2);
    let (sub, sw) = product_rule(d - 1, res);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (t, w) in ts.iter().zip(&tw) {
        let (s, c) = t.sin_cos();
        let wt = w * s.powi(d as i32 - 2);
        for (k, ws) in sw.iter().enumerate() {
            for sign in [1.0, -1.0] {
                nodes.extend(sub[k * (d - 1)..(k + 1) * (d - 1)].iter().map(|x| s * x));
                nodes.push(sign * c);
                weights.push(wt * ws);
            }
        }
    }
    (nodes, weights)
}

/// Resolution schedule for the nested rules.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NestedOptions {
    pub outer: usize,
    pub inner: usize,
    /// Accept when doubling both resolutions changes the value by at most
    /// `rel_tol·|value| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_doublings: u32,
}

impl Default for NestedOptions {
    fn default() -> Self {
        Self { outer: 12, inner: 6, rel_tol: 1e-9, abs_tol: 1e-13, max_doublings: 3 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NestedResult {
    pub value: f64,
    /// |finest - previous|.
    pub change: f64,
    pub outer: usize,
    pub inner: usize,
}

fn refine<G>(what: &'static str, opts: NestedOptions, mut eval: G) -> Result<NestedResult>
where
    G: FnMut(usize, usize) -> f64,
{
    check_resolution(opts.outer)?;
    check_resolution(opts.inner)?;
    let (mut o, mut i) = (opts.outer, opts.inner);
    let mut prev = eval(o, i);
    let mut trace = vec![format!("({o},{i}) -> {prev:.15e}")];
    for _ in 0..opts.max_doublings {
        o *= 2;
        i *= 2;
        let cur = eval(o, i);
        trace.push(format!("({o},{i}) -> {cur:.15e}"));
        let change = (cur - prev).abs();
        if change <= opts.rel_tol * cur.abs() + opts.abs_tol {
            return Ok(NestedResult { value: cur, change, outer: o, inner: i });
        }
        prev = cur;
    }
    Err(Error::NonConvergence { what, trace: trace.join("; ") })
}

/// `∫_{S^{2n-1}} F(y, z) dσ` through the ball/sphere change of variables.
pub fn integrate_cov<F>(n: usize, f: F, opts: NestedOptions) -> Result<NestedResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if n == 0 {
        return Err(invalid("base dimension n must be >= 1"));
    }
    refine("integrate_cov", opts, |outer, inner| cov_fixed(n, &f, outer, inner))
}

/// One evaluation of the change-of-variables rule at fixed resolutions.
pub fn cov_fixed<F>(n: usize, f: &F, outer: usize, inner: usize) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let (base, bw) = product_rule(n, inner);
    let (ts, tw) = gauss_legendre_on(outer, 0.0, FRAC_PI_2);
    let per_theta: Vec<f64> = ts
        .par_iter()
        .zip(tw.par_iter())
        .map(|(t, w)| {
            let (s, c) = t.sin_cos();
            let mut y = vec![0.0; n];
            let mut z = vec![0.0; n];
            let mut rows = Vec::with_capacity(bw.len());
            for (a, wa) in bw.iter().enumerate() {
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk = s * base[a * n + k];
                }
                let mut row = Vec::with_capacity(bw.len());
                for (b, wb) in bw.iter().enumerate() {
                    for (k, zk) in z.iter_mut().enumerate() {
                        *zk = c * base[b * n + k];
                    }
                    row.push(wb * f(&y, &z));
                }
                rows.push(wa * pairwise_sum(&row));
            }
            w * (s * c).powi(n as i32 - 1) * pairwise_sum(&rows)
        })
        .collect();
    pairwise_sum(&per_theta)
}

/// `∫_{S^{2n-1}} F(y, z) dσ` as two graphs over the unit ball of ℝ^{2n-1},
/// split at the last coordinate of z.
pub fn integrate_hemigraph<F>(n: usize, f: F, opts: NestedOptions) -> Result<NestedResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if n == 0 {
        return Err(invalid("base dimension n must be >= 1"));
    }
    refine("integrate_hemigraph", opts, |outer, inner| hemigraph_fixed(n, &f, outer, inner))
}

pub fn hemigraph_fixed<F>(n: usize, f: &F, outer: usize, inner: usize) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let d = 2 * n;
    let (sub, sw) = product_rule(d - 1, inner);
    let (ts, tw) = gauss_legendre_on(outer, 0.0, FRAC_PI_2);
    let per_theta: Vec<f64> = ts
        .par_iter()
        .zip(tw.par_iter())
        .map(|(t, w)| {
            let (s, c) = t.sin_cos();
            let mut x = vec![0.0; d];
            let mut row = Vec::with_capacity(sw.len());
            for (k, ws) in sw.iter().enumerate() {
                for (i, xi) in x.iter_mut().take(d - 1).enumerate() {
                    *xi = s * sub[k * (d - 1) + i];
                }
                x[d - 1] = c;
                let up = f(&x[..n], &x[n..]);
                x[d - 1] = -c;
                let down = f(&x[..n], &x[n..]);
                row.push(ws * (up + down));
            }
            w * s.powi(d as i32 - 2) * pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&per_theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega(d: usize) -> f64 {
        sphere_area(d)
    }

    #[test]
    fn samples_are_unit_and_deterministic() {
        let mut a = shard_rng(7, 3);
        let mut b = shard_rng(7, 3);
        for _ in 0..100 {
            let x = sample_sphere(5, &mut a);
            assert_eq!(x, sample_sphere(5, &mut b));
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mc_constant_is_exact() {
        for d in 1..7 {
            let e = integrate_mc(d, |_| 1.0, 10_000, 1).unwrap();
            assert!((e.value - omega(d)).abs() < 1e-12 * omega(d));
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn mc_second_moment() {
        let e = integrate_mc(4, |w| w[0] * w[0], 400_000, 11).unwrap();
        let want = 0.25 * omega(4);
        assert!((e.value - want).abs() < 3.0 * e.std_error, "{e:?} vs {want}");
    }

    #[test]
    fn mc_is_thread_count_independent() {
        let f = |w: &[f64]| (3.0 * w[0]).sin() + w[1];
        let a = integrate_mc(3, f, 50_000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| integrate_mc(3, f, 50_000, 5).unwrap());
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn rules_have_unit_nodes_and_right_mass() {
        let methods = |d: usize| {
            let mut v = vec![
                SphereMethod::Product { resolution: 8 },
                SphereMethod::HemisphereGraph { resolution: 8 },
                SphereMethod::MonteCarlo { samples: 1000, seed: 2 },
            ];
            if d.is_multiple_of(2) {
                v.push(SphereMethod::ChangeOfVariables { outer: 10, inner: 6 });
            }
            v
        };
        for d in 2..7 {
            for m in methods(d) {
                let rule = SphereRule::new(d, m).unwrap();
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                for i in 0..rule.len() {
                    let norm: f64 = rule.node(i).iter().map(|x| x * x).sum::<f64>().sqrt();
                    assert!((norm - 1.0).abs() < 1e-12);
                }
                assert!((rule.total_weight() - omega(d)).abs() < 1e-9 * omega(d), "d={d} {m:?}");
            }
        }
        assert!(SphereRule::new(3, SphereMethod::ChangeOfVariables { outer: 4, inner: 4 }).is_err());
    }

    #[test]
    fn product_rule_second_moments() {
        for d in 2..7 {
            let rule = SphereRule::new(d, SphereMethod::Product { resolution: 8 }).unwrap();
            for k in 0..d {
                let m = rule.integrate(|x| x[k] * x[k]);
                assert!((m - omega(d) / d as f64).abs() < 1e-9, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn cov_constant_and_moment() {
        for n in 1..4 {
            let w = omega(2 * n);
            let one = integrate_cov(n, |_, _| 1.0, NestedOptions::default()).unwrap();
            assert!((one.value - w).abs() < 1e-10 * w);
            let y2 = integrate_cov(n, |y, _| y.iter().map(|v| v * v).sum(), NestedOptions::default()).unwrap();
            assert!((y2.value - w / 2.0).abs() < 1e-10 * w);
        }
    }

    #[test]
    fn circle_case_matches_arclength() {
        let f = |y: &[f64], z: &[f64]| (y[0] + 0.3 * z[0]).exp() * (1.0 + y[0] * z[0]);
        let cov = integrate_cov(1, f, NestedOptions::default()).unwrap().value;
        let m = 256;
        let arc: f64 = (0..m)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / m as f64;
                f(&[a.cos()], &[a.sin()])
            })
            .sum::<f64>()
            * 2.0
            * PI
            / m as f64;
        assert!((cov - arc).abs() < 1e-8 * arc.abs());
    }

    #[test]
    fn hemigraph_agrees_with_cov() {
        for n in 1..4 {
            let f = |y: &[f64], z: &[f64]| {
                (0.7 * y[0] - 0.4 * z[z.len() - 1]).exp() + y.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
            };
            let a = integrate_cov(n, f, NestedOptions::default()).unwrap().value;
            let b = integrate_hemigraph(n, f, NestedOptions::default()).unwrap().value;
            assert!((a - b).abs() < 1e-8 * a.abs(), "n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn odd_in_last_coordinate_cancels() {
        let even = |y: &[f64], _z: &[f64]| 1.0 + y[0] * y[0];
        let with_odd = |y: &[f64], z: &[f64]| even(y, z) + z[z.len() - 1].powi(3);
        let a = hemigraph_fixed(2, &even, 12, 6);
        let b = hemigraph_fixed(2, &with_odd, 12, 6);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn rejects_zero_dimension() {
        assert!(integrate_cov(0, |_, _| 1.0, NestedOptions::default()).is_err());
        assert!(integrate_mc(0, |_| 1.0, 10, 0).is_err());
    }
}
