//! Analytic test functions with exact point evaluation and, where
//! available, closed-form Fourier transforms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::GridFunction;

/// Largest value allowed at distance `L/2` from the center before sampling
/// on a period-`L` grid.
pub const TAIL_LIMIT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TestFunction {
    /// `a·exp(-|x-c|²/(2w²))`.
    Gaussian { center: Vec<f64>, width: f64, amplitude: f64 },
    /// `a·exp(1 - 1/(1 - |x-c|²/ρ²))` inside the ball of radius ρ.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    /// Gaussian times `e^{2πi ν·(x-c)}`.
    ModulatedGaussian { center: Vec<f64>, width: f64, frequency: Vec<f64>, amplitude: f64 },
}

impl TestFunction {
    pub fn gaussian(center: Vec<f64>, width: f64) -> Self {
        Self::Gaussian { center, width, amplitude: 1.0 }
    }

    pub fn center(&self) -> &[f64] {
        match self {
            Self::Gaussian { center, .. }
            | Self::Bump { center, .. }
            | Self::ModulatedGaussian { center, .. } => center,
        }
    }

    pub fn dim(&self) -> usize {
        self.center().len()
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Gaussian { amplitude, .. } | Self::Bump { amplitude, .. } => *amplitude >= 0.0,
            Self::ModulatedGaussian { frequency, amplitude, .. } => {
                *amplitude >= 0.0 && frequency.iter().all(|&f| f == 0.0)
            }
        }
    }

    fn profile(&self, r2: f64) -> f64 {
        match self {
            Self::Gaussian { width, amplitude, .. } | Self::ModulatedGaussian { width, amplitude, .. } => {
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Self::Bump { radius, amplitude, .. } => {
                let q = r2 / (radius * radius);
                if q >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
        }
    }

    /// Value on ℝⁿ.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let c = self.center();
        let r2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        let base = self.profile(r2);
        match self {
            Self::ModulatedGaussian { frequency, .. } => {
                let ph: f64 = x.iter().zip(c).zip(frequency).map(|((a, b), f)| (a - b) * f).sum();
                Complex64::from_polar(base, 2.0 * PI * ph)
            }
            _ => Complex64::new(base, 0.0),
        }
    }

    /// Value of the copy on the torus of period `L`, taking for each axis the
    /// image of `x` nearest to the center.
    pub fn eval_periodic(&self, x: &[f64], period: f64) -> Complex64 {
        let c = self.center();
        let y: Vec<f64> = x
            .iter()
            .zip(c)
            .map(|(a, b)| b + (a - b + period / 2.0).rem_euclid(period) - period / 2.0)
            .collect();
        self.eval(&y)
    }

    /// `∫ f(x) e^{-2πi x·ξ} dx` when known in closed form.
    pub fn fourier(&self, xi: &[f64]) -> Option<Complex64> {
        let n = self.dim() as i32;
        let gauss = |c: &[f64], w: f64, a: f64, shift: &[f64]| {
            let k2: f64 = xi.iter().zip(shift).map(|(x, s)| (x - s) * (x - s)).sum();
            let ph: f64 = xi.iter().zip(c).map(|(x, cc)| x * cc).sum();
            let mag = a * (w * (2.0 * PI).sqrt()).powi(n) * (-2.0 * PI * PI * w * w * k2).exp();
            Complex64::from_polar(mag, -2.0 * PI * ph)
        };
        match self {
            Self::Gaussian { center, width, amplitude } => {
                Some(gauss(center, *width, *amplitude, &vec![0.0; xi.len()]))
            }
            Self::ModulatedGaussian { center, width, frequency, amplitude } => {
                Some(gauss(center, *width, *amplitude, frequency))
            }
            Self::Bump { .. } => None,
        }
    }

    /// Largest modulus at distance `L/2` from the center.
    pub fn tail(&self, period: f64) -> f64 {
        let half = period / 2.0;
        self.profile(half * half).abs()
    }

    pub fn check_decay(&self, period: f64) -> Result<()> {
        let t = self.tail(period);
        if t >= TAIL_LIMIT {
            return Err(invalid(format!(
                "test function is {t:.3e} at distance L/2; needs < {TAIL_LIMIT:e} for period {period}"
            )));
        }
        Ok(())
    }

    /// Samples on a period-`L` grid after checking decay.
    pub fn sample(&self, size: usize, period: f64) -> Result<GridFunction> {
        self.check_decay(period)?;
        GridFunction::from_complex_fn(self.dim(), size, period, |x| self.eval_periodic(x, period))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    Gaussian,
    Bump,
    ModulatedGaussian,
}

/// Random test functions on a period-`L` torus, all satisfying the decay
/// requirement.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunctionFamily {
    pub n: usize,
    pub period: f64,
    pub kinds: Vec<FamilyKind>,
    /// Gaussian widths as fractions of `L`.
    pub width_range: (f64, f64),
    pub nonnegative: bool,
}

impl TestFunctionFamily {
    pub fn gaussians(n: usize, period: f64) -> Self {
        Self { n, period, kinds: vec![FamilyKind::Gaussian], width_range: (0.03, 0.07), nonnegative: true }
    }

    pub fn mixed(n: usize, period: f64) -> Self {
        Self {
            n,
            period,
            kinds: vec![FamilyKind::Gaussian, FamilyKind::Bump, FamilyKind::ModulatedGaussian],
            width_range: (0.03, 0.07),
            nonnegative: false,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> TestFunction {
        let l = self.period;
        let center: Vec<f64> = (0..self.n).map(|_| l * (0.5 + rng.random_range(-0.2..0.2))).collect();
        let (lo, hi) = self.width_range;
        let width = l * rng.random_range(lo..=hi);
        let amplitude = if self.nonnegative { rng.random_range(0.5..2.0) } else { rng.random_range(-2.0..2.0) };
        match self.kinds[rng.random_range(0..self.kinds.len())] {
            FamilyKind::Gaussian => TestFunction::Gaussian { center, width, amplitude },
            FamilyKind::Bump => TestFunction::Bump { center, radius: 4.0 * width, amplitude },
            FamilyKind::ModulatedGaussian => {
                let frequency = (0..self.n).map(|_| rng.random_range(-3..=3) as f64 / l).collect();
                TestFunction::ModulatedGaussian { center, width, frequency, amplitude }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::squad::shard_rng;

    #[test]
    fn sampling_agrees_with_evaluator_at_nodes() {
        let f = TestFunction::ModulatedGaussian {
            center: vec![0.4, 0.6],
            width: 0.05,
            frequency: vec![2.0, -1.0],
            amplitude: 1.3,
        };
        let g = f.sample(16, 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.values()[i], f.eval_periodic(&g.point(i), 1.0));
        }
    }

    #[test]
    fn decay_requirement() {
        assert!(TestFunction::gaussian(vec![0.5], 0.05).check_decay(1.0).is_ok());
        assert!(TestFunction::gaussian(vec![0.5], 0.2).check_decay(1.0).is_err());
        let b = TestFunction::Bump { center: vec![0.5], radius: 0.3, amplitude: 1.0 };
        assert!(b.check_decay(1.0).is_ok());
    }

    #[test]
    fn gaussian_transform_matches_grid_spectrum() {
        let (size, l) = (128usize, 1.0);
        for f in [
            TestFunction::gaussian(vec![0.45], 0.05),
            TestFunction::ModulatedGaussian { center: vec![0.52], width: 0.04, frequency: vec![3.0], amplitude: 0.7 },
        ] {
            let g = f.sample(size, l).unwrap();
            let spec = g.spectrum();
            for k in 0..10usize {
                let xi = [g.signed(k) as f64 / l];
                let want = f.fourier(&xi).unwrap();
                let got = spec[k] * g.spacing();
                assert!((got - want).norm() < 1e-10, "k={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn family_draws_are_valid() {
        let mut rng = shard_rng(3, 0);
        let fam = TestFunctionFamily::mixed(2, 1.0);
        for _ in 0..50 {
            let f = fam.draw(&mut rng);
            assert!(f.check_decay(1.0).is_ok());
        }
        let fam = TestFunctionFamily::gaussians(1, 1.0);
        for _ in 0..50 {
            assert!(fam.draw(&mut rng).is_nonnegative());
        }
    }
}
