//! Bessel functions of the first kind, the Gamma function, and the Fourier
//! transform of surface measure on the unit sphere `S^{d-1}`.
//!
//! Conventions: `dσ̂(ξ) = ∫ e^{-2πi ξ·ω} dσ(ω) = 2π J_ν(2π|ξ|)/|ξ|^ν` with
//! `ν = (d-2)/2`. At the origin it equals the total surface measure.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Power series is used up to this argument.
pub const SERIES_LIMIT: f64 = 12.0;
/// Hankel asymptotics are used from this argument on (for ν < x/2).
pub const HANKEL_LIMIT: f64 = 30.0;

/// A non-negative, finite Bessel order.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(domain("BesselOrder::new", format!("order must be finite and >= 0, got {nu}")));
        }
        Ok(Self(nu))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos, g = 7) with reflection for x < 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let t = x + 7.5;
    (2.0 * PI).sqrt() * a * ((x + 0.5) * t.ln() - t).exp()
}

/// Surface measure of the unit sphere `S^{d-1} ⊂ ℝ^d`, `2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// `J_ν(x) / (x/2)^ν`, by its power series. Accurate for x ≤ [`SERIES_LIMIT`].
pub fn bessel_j_scaled_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 0.5 * x {
            break;
        }
        if k > 500.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Bessel function of the first kind `J_ν(x)` for real `ν ≥ 0`, `x ≥ 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !nu.is_finite() || nu < 0.0 {
        return Err(domain("bessel_j", format!("order must be finite and >= 0, got {nu}")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(domain("bessel_j", format!("argument must be finite and >= 0, got {x}")));
    }
    Ok(bessel_j_unchecked(nu, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        return (0.5 * x).powf(nu) * bessel_j_scaled_series(nu, x);
    }
    if x < HANKEL_LIMIT || nu >= 0.5 * x {
        return bessel_j_miller(nu, x);
    }
    let mu = nu.fract();
    let steps = nu.floor() as usize;
    let j0 = hankel(mu, x);
    if steps == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = hankel(mu + 1.0, x);
    for k in 1..steps {
        let next = 2.0 * (mu + k as f64) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Large-argument Hankel expansion; terms are summed until they stop
/// decreasing.
fn hankel(mu: f64, x: f64) -> f64 {
    let m4 = 4.0 * mu * mu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut k = 1usize;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (m4 - odd * odd) / (k as f64 * 8.0 * x);
        if next == 0.0 || next.abs() >= term.abs() || next.abs() < 1e-18 {
            if next.abs() < term.abs() {
                let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
                if k.is_multiple_of(2) {
                    p += sign * next;
                } else {
                    q += sign * next;
                }
            }
            break;
        }
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k.is_multiple_of(2) {
            p += sign * next;
        } else {
            q += sign * next;
        }
        term = next;
        k += 1;
        if k > 200 {
            break;
        }
    }
    let chi = x - (0.5 * mu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Miller's backward recurrence normalized by
/// `(x/2)^μ = Σ_k (μ+2k) Γ(μ+k)/k! · J_{μ+2k}(x)`.
fn bessel_j_miller(nu: f64, x: f64) -> f64 {
    let mu = nu.fract();
    let target = nu.floor() as usize;
    let scale = target.max(x.ceil() as usize) as f64;
    let mut top = target.max(x.ceil() as usize) + 20 + (40.0 * scale).sqrt().ceil() as usize;
    if top % 2 == 1 {
        top += 1;
    }
    // c_i for i = 0..=top/2
    let half = top / 2;
    let mut coef = Vec::with_capacity(half + 1);
    coef.push(gamma(mu + 1.0));
    let mut g = gamma(mu + 1.0);
    for i in 1..=half {
        if i > 1 {
            g *= (mu + i as f64 - 1.0) / i as f64;
        }
        coef.push((mu + 2.0 * i as f64) * g);
    }
    let mut y_next = 0.0f64;
    let mut y = 1e-30f64;
    let mut norm = 0.0f64;
    let mut at_target = 0.0f64;
    let mut k = top;
    loop {
        if k == target {
            at_target = y;
        }
        if k.is_multiple_of(2) {
            norm += coef[k / 2] * y;
        }
        if k == 0 {
            break;
        }
        let y_prev = 2.0 * (mu + k as f64) / x * y - y_next;
        y_next = y;
        y = y_prev;
        k -= 1;
        if y.abs() > 1e250 {
            y *= 1e-250;
            y_next *= 1e-250;
            norm *= 1e-250;
            at_target *= 1e-250;
        }
    }
    at_target * (0.5 * x).powf(mu) / norm
}

/// `F_k(z) = J_{ν+k}(z) / z^{ν+k}`, regular at z = 0.
fn bessel_ratio(nu: f64, k: usize, z: f64) -> f64 {
    let order = nu + k as f64;
    if z <= SERIES_LIMIT {
        bessel_j_scaled_series(order, z) / 2f64.powf(order)
    } else {
        bessel_j_unchecked(order, z) / z.powf(order)
    }
}

fn check_dim(func: &'static str, d: usize) -> Result<()> {
    if d < 2 {
        return Err(domain(func, format!("ambient dimension must be >= 2, got {d}")));
    }
    Ok(())
}

/// Fourier transform of surface measure on `S^{d-1}` at radius `r = |ξ|`.
pub fn dsigma_hat(d: usize, r: f64) -> Result<f64> {
    check_dim("dsigma_hat", d)?;
    if !r.is_finite() || r < 0.0 {
        return Err(domain("dsigma_hat", format!("radius must be finite and >= 0, got {r}")));
    }
    Ok(dsigma_hat_unchecked(d, r))
}

pub(crate) fn dsigma_hat_unchecked(d: usize, r: f64) -> f64 {
    let nu = (d as f64 - 2.0) / 2.0;
    let z = 2.0 * PI * r;
    if z <= SERIES_LIMIT {
        2.0 * PI * PI.powf(nu) * bessel_j_scaled_series(nu, z)
    } else {
        2.0 * PI * bessel_j_unchecked(nu, z) / r.powf(nu)
    }
}

/// Radial derivative of [`dsigma_hat`]: `-(2π)^2 J_{d/2}(2πr) / r^{(d-2)/2}`.
pub fn dsigma_hat_deriv(d: usize, r: f64) -> Result<f64> {
    check_dim("dsigma_hat_deriv", d)?;
    if !r.is_finite() || r <= 0.0 {
        return Err(domain("dsigma_hat_deriv", format!("radius must be finite and > 0, got {r}")));
    }
    Ok(dsigma_hat_radial_derivs(d, r, 1)[1])
}

/// `[D, D', D'', D''']` of `D(r) = dsigma_hat(d, r)` up to `order` (≤ 3);
/// unused entries are zero.
pub fn dsigma_hat_radial_derivs(d: usize, r: f64, order: usize) -> [f64; 4] {
    assert!(order <= 3, "radial derivatives only through third order");
    let nu = (d as f64 - 2.0) / 2.0;
    let two_pi = 2.0 * PI;
    let z = two_pi * r;
    let pre = two_pi * two_pi.powf(nu);
    let mut f = [0.0; 4];
    for (k, slot) in f.iter_mut().enumerate().take(order + 1) {
        *slot = bessel_ratio(nu, k, z);
    }
    let mut out = [0.0; 4];
    out[0] = pre * f[0];
    if order >= 1 {
        out[1] = pre * two_pi * (-z * f[1]);
    }
    if order >= 2 {
        out[2] = pre * two_pi * two_pi * (-f[1] + z * z * f[2]);
    }
    if order >= 3 {
        out[3] = pre * two_pi.powi(3) * (3.0 * z * f[2] - z * z * z * f[3]);
    }
    out
}
