//! Smooth cutoffs, dyadic pieces of the bilinear sphere multiplier, the
//! diagonal/off-diagonal split, Euler-derivative symbols, and sup/L² norm
//! estimates of all of them.
//!
//! A symbol `σ(ξ, η)` on `ℝⁿ × ℝⁿ` is stored through its reduced profile
//! `s(u, v)` with `u = |ξ|`, `v = |η|`. Every profile here factors as
//! `A(w)·R(r)` with `r = √(u² + v²)` and `w = log₂(u/v)`.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::jet::{Jet2, Scalar, Taylor1};
use crate::quad::{adaptive_with_breaks, QuadOptions};
use crate::specfn::{dsigma_hat_radial_derivs, sphere_area};

pub const DEFAULT_EPSILON: f64 = 0.1;

fn h<T: Scalar>(t: T) -> T {
    if t.value() <= 0.0 {
        T::constant(0.0)
    } else {
        (-t.recip()).exp()
    }
}

fn phi0_g<T: Scalar>(s: T) -> T {
    let x = s.value();
    if x <= 1.0 {
        T::constant(1.0)
    } else if x >= 2.0 {
        T::constant(0.0)
    } else {
        let a = h(-s + 2.0);
        let b = h(s - 1.0);
        a.div(a + b)
    }
}

fn phi_g<T: Scalar>(s: T) -> T {
    phi0_g(s) - phi0_g(s * 2.0)
}

fn rho_g<T: Scalar>(u: T, epsilon: f64) -> T {
    let a = if u.value() < 0.0 { -u } else { u };
    phi0_g((a - (1.0 - epsilon)) * (1.0 / epsilon) + 1.0)
}

/// Smooth radial cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`, strictly decreasing
/// in between.
pub fn phi0(s: f64) -> f64 {
    phi0_g(s)
}

/// Dyadic bump `phi0(s) - phi0(2s)`, supported in `[1/2, 2]`.
pub fn phi(s: f64) -> f64 {
    phi_g(s)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
    }
    Ok(())
}

/// Even window: 1 on `[ε-1, 1-ε]`, 0 outside `[-1, 1]`.
pub fn rho(u: f64, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(rho_g(u, epsilon))
}

/// Which member of the decomposition a symbol is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SymbolKind {
    /// The whole multiplier `dσ̂(ξ, η)` on `S^{2n-1}`.
    Full,
    /// `m_j = dσ̂ · φ(2^{-j}·)`, or `dσ̂ · φ₀` when j = 0.
    Piece,
    /// `m_j¹ = m_j · ρ(log₂(|ξ|/|η|)/j)`: frequencies of comparable size.
    Diagonal,
    /// `m_j² = m_j - m_j¹`.
    OffDiagonal,
    /// `m̃_j = (ξ, η)·∇m_j`.
    EulerPiece,
    /// `m̃_j¹ = (ξ, η)·∇m_j¹ = ρ(·)·r∂_r(dσ̂ φ(2^{-j}r))`.
    EulerDiagonal,
    /// `m̃_j² = m̃_j - m̃_j¹`.
    EulerOffDiagonal,
}

impl SymbolKind {
    pub const ALL: [SymbolKind; 7] = [
        SymbolKind::Full,
        SymbolKind::Piece,
        SymbolKind::Diagonal,
        SymbolKind::OffDiagonal,
        SymbolKind::EulerPiece,
        SymbolKind::EulerDiagonal,
        SymbolKind::EulerOffDiagonal,
    ];

    pub fn is_euler(self) -> bool {
        matches!(self, Self::EulerPiece | Self::EulerDiagonal | Self::EulerOffDiagonal)
    }

    pub fn is_split(self) -> bool {
        matches!(
            self,
            Self::Diagonal | Self::OffDiagonal | Self::EulerDiagonal | Self::EulerOffDiagonal
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "m",
            Self::Piece => "m_j",
            Self::Diagonal => "m_j1",
            Self::OffDiagonal => "m_j2",
            Self::EulerPiece => "mt_j",
            Self::EulerDiagonal => "mt_j1",
            Self::EulerOffDiagonal => "mt_j2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// A bilinear radial multiplier given by its reduced profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialBilinearSymbol {
    n: u32,
    j: u32,
    kind: SymbolKind,
    epsilon: f64,
}

/// Shorthand for [`RadialBilinearSymbol::new`].
pub fn make_symbol(n: u32, j: u32, kind: SymbolKind, epsilon: f64) -> Result<RadialBilinearSymbol> {
    RadialBilinearSymbol::new(n, j, kind, epsilon)
}

impl RadialBilinearSymbol {
    pub fn new(n: u32, j: u32, kind: SymbolKind, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension n must be >= 1"));
        }
        check_epsilon(epsilon)?;
        if kind.is_split() && j == 0 {
            return Err(invalid(format!("{} needs j >= 1", kind.name())));
        }
        if kind == SymbolKind::Full && j != 0 {
            return Err(invalid("the full symbol takes no dyadic index (use j = 0)"));
        }
        Ok(Self { n, j, kind, epsilon })
    }

    pub fn full(n: u32) -> Result<Self> {
        Self::new(n, 0, SymbolKind::Full, DEFAULT_EPSILON)
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn j(&self) -> u32 {
        self.j
    }
    pub fn kind(&self) -> SymbolKind {
        self.kind
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Closed radial support `[r_lo, r_hi]`, or `None` when unbounded.
    pub fn radial_support(&self) -> Option<(f64, f64)> {
        match (self.kind, self.j) {
            (SymbolKind::Full, _) => None,
            (_, 0) => Some((0.0, 2.0)),
            (_, j) => Some((2f64.powi(j as i32 - 1), 2f64.powi(j as i32 + 1))),
        }
    }

    /// Taylor coefficients in r of the radial factor `R` (or `E = rR'` for
    /// Euler kinds), correct through `order`.
    fn radial_taylor(&self, r: f64, order: usize) -> Taylor1 {
        let euler = self.kind.is_euler();
        let need = order + euler as usize;
        let d = dsigma_hat_radial_derivs(2 * self.n as usize, r, need);
        let dt = Taylor1([d[0], d[1], d[2] / 2.0, d[3] / 6.0]);
        let x = Taylor1::variable(r);
        let cut = match (self.kind, self.j) {
            (SymbolKind::Full, _) => Taylor1::constant(1.0),
            (_, 0) => phi0_g(x),
            (_, j) => phi_g(x * 2f64.powi(-(j as i32))),
        };
        let rt = dt * cut;
        if euler {
            let c = rt.0;
            let dr = Taylor1([c[1], 2.0 * c[2], 3.0 * c[3], 0.0]);
            let mut e = x * dr;
            e.0[3] = 0.0;
            e
        } else {
            rt
        }
    }

    /// `[R, R', R'']` of the radial factor.
    pub fn radial_derivs(&self, r: f64) -> [f64; 3] {
        let t = self.radial_taylor(r, 2);
        [t.derivative(0), t.derivative(1), t.derivative(2)]
    }

    pub fn radial_value(&self, r: f64) -> f64 {
        self.radial_taylor(r, 0).0[0]
    }

    /// Angular factor as a function of `w = log₂(u/v)`.
    fn angular_g<T: Scalar>(&self, w: T) -> T {
        let diag = || rho_g(w * (1.0 / self.j as f64), self.epsilon);
        match self.kind {
            SymbolKind::Diagonal | SymbolKind::EulerDiagonal => diag(),
            SymbolKind::OffDiagonal | SymbolKind::EulerOffDiagonal => -diag() + 1.0,
            _ => T::constant(1.0),
        }
    }

    /// `[A, A', A'']` in w.
    pub fn angular_derivs(&self, w: f64) -> [f64; 3] {
        let t = self.angular_g(Taylor1::variable(w));
        [t.derivative(0), t.derivative(1), t.derivative(2)]
    }

    /// Angular factor on an axis (`u = 0` or `v = 0`, so `|w| = ∞`).
    fn angular_on_axis(&self) -> f64 {
        match self.kind {
            SymbolKind::Diagonal | SymbolKind::EulerDiagonal => 0.0,
            _ => 1.0,
        }
    }

    /// Profile value `s(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let r = u.hypot(v);
        if let Some((lo, hi)) = self.radial_support() {
            if r < lo || r > hi {
                return 0.0;
            }
        }
        match self.kind {
            SymbolKind::OffDiagonal | SymbolKind::EulerOffDiagonal => {
                let whole = self.radial_value(r);
                let diag = if u > 0.0 && v > 0.0 {
                    let w = (u.ln() - v.ln()) / LN_2;
                    rho_g(w / self.j as f64, self.epsilon) * whole
                } else {
                    0.0
                };
                whole - diag
            }
            _ => {
                let a = if u > 0.0 && v > 0.0 {
                    self.angular_g((u.ln() - v.ln()) / LN_2)
                } else if self.kind.is_split() {
                    self.angular_on_axis()
                } else {
                    1.0
                };
                if a == 0.0 {
                    return 0.0;
                }
                a * self.radial_value(r)
            }
        }
    }

    /// Profile evaluated at full frequency vectors.
    pub fn eval_vec(&self, xi: &[f64], eta: &[f64]) -> f64 {
        let u = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.eval(u, v)
    }

    /// Second-order jet of `s` in `(u, v)`.
    pub fn jet(&self, u: f64, v: f64) -> Jet2 {
        let r = u.hypot(v);
        let rd = self.radial_derivs(r);
        let radial = if r == 0.0 {
            Jet2 { v0: rd[0], uu: 0.5 * rd[2], vv: 0.5 * rd[2], ..Jet2::default() }
        } else {
            r_jet(u, v, r).compose(&rd)
        };
        if u > 0.0 && v > 0.0 {
            let ad = self.angular_derivs((u.ln() - v.ln()) / LN_2);
            radial * w_jet(u, v).compose(&ad)
        } else if self.kind.is_split() {
            radial * self.angular_on_axis()
        } else {
            radial
        }
    }
}

fn r_jet(u: f64, v: f64, r: f64) -> Jet2 {
    let r3 = r * r * r;
    Jet2 {
        v0: r,
        u1: u / r,
        v1: v / r,
        uu: 0.5 * v * v / r3,
        uv: -u * v / r3,
        vv: 0.5 * u * u / r3,
    }
}

fn w_jet(u: f64, v: f64) -> Jet2 {
    Jet2 {
        v0: (u.ln() - v.ln()) / LN_2,
        u1: 1.0 / (u * LN_2),
        v1: -1.0 / (v * LN_2),
        uu: -0.5 / (u * u * LN_2),
        uv: 0.0,
        vv: 0.5 / (v * v * LN_2),
    }
}

/// A partial derivative of order ≤ 2 of `σ(ξ, η)` up to rotations in each
/// factor. `Mixed` variants differentiate twice in the same factor along two
/// different coordinates (only possible when n ≥ 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Partial {
    Value,
    Xi,
    Eta,
    XiXi,
    XiXiMixed,
    XiEta,
    EtaEta,
    EtaEtaMixed,
}

impl Partial {
    /// Reduces a multi-index `(α_ξ, α_η)` to its rotation class.
    pub fn from_multiindex(n: u32, alpha_xi: &[u32], alpha_eta: &[u32]) -> Result<Self> {
        if alpha_xi.len() != n as usize || alpha_eta.len() != n as usize {
            return Err(invalid(format!("multi-index must have {n} + {n} entries")));
        }
        let oxi: u32 = alpha_xi.iter().sum();
        let oeta: u32 = alpha_eta.iter().sum();
        let distinct = |a: &[u32]| a.iter().filter(|&&k| k > 0).count();
        Ok(match (oxi, oeta) {
            (0, 0) => Self::Value,
            (1, 0) => Self::Xi,
            (0, 1) => Self::Eta,
            (1, 1) => Self::XiEta,
            (2, 0) if distinct(alpha_xi) == 1 => Self::XiXi,
            (2, 0) => Self::XiXiMixed,
            (0, 2) if distinct(alpha_eta) == 1 => Self::EtaEta,
            (0, 2) => Self::EtaEtaMixed,
            _ => {
                return Err(invalid(format!(
                    "unsupported derivative order {} (at most 2)",
                    oxi + oeta
                )))
            }
        })
    }

    pub fn order(self) -> usize {
        match self {
            Self::Value => 0,
            Self::Xi | Self::Eta => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Value => "value",
            Self::Xi => "d_xi1",
            Self::Eta => "d_eta1",
            Self::XiXi => "d_xi1_xi1",
            Self::XiXiMixed => "d_xi1_xi2",
            Self::XiEta => "d_xi1_eta1",
            Self::EtaEta => "d_eta1_eta1",
            Self::EtaEtaMixed => "d_eta1_eta2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Value,
            Self::Xi,
            Self::Eta,
            Self::XiXi,
            Self::XiXiMixed,
            Self::XiEta,
            Self::EtaEta,
            Self::EtaEtaMixed,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }

    /// Maximum of `|∂^α σ|` over all `(ξ, η)` with `|ξ| = u`, `|η| = v`.
    pub fn sup_over_directions(self, n: u32, s: &Jet2, u: f64, v: f64) -> f64 {
        let first_u = s.d_u().abs();
        let first_v = s.d_v().abs();
        match self {
            Self::Value => s.value().abs(),
            Self::Xi => first_u,
            Self::Eta => first_v,
            Self::XiEta => s.d_uv().abs(),
            Self::XiXi if n == 1 => s.d_uu().abs(),
            Self::EtaEta if n == 1 => s.d_vv().abs(),
            Self::XiXi => s.d_uu().abs().max(if u > 0.0 { first_u / u } else { 0.0 }),
            Self::EtaEta => s.d_vv().abs().max(if v > 0.0 { first_v / v } else { 0.0 }),
            Self::XiXiMixed => {
                if u > 0.0 {
                    0.5 * (s.d_uu() - s.d_u() / u).abs()
                } else {
                    0.0
                }
            }
            Self::EtaEtaMixed => {
                if v > 0.0 {
                    0.5 * (s.d_vv() - s.d_v() / v).abs()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SupOptions {
    /// Initial radial samples per unit of r.
    pub r_density: f64,
    /// Initial samples in w = log₂(u/v).
    pub w_points: usize,
    /// Stop when successive estimates differ by less than this fraction.
    pub rel_change: f64,
    pub max_doublings: u32,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self { r_density: 4.0, w_points: 32, rel_change: 0.05, max_doublings: 5 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub u: f64,
    pub v: f64,
    pub r_density: f64,
    pub w_points: usize,
    pub converged: bool,
}

fn grid_points(lo: f64, hi: f64, count: usize, extra: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64)
        .collect();
    pts.extend(extra.iter().copied().filter(|x| (lo..=hi).contains(x)));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn sup_on_grid(sym: &RadialBilinearSymbol, partial: Partial, rs: &[f64], ws: &[f64]) -> (f64, f64, f64) {
    let angular: Vec<[f64; 3]> = ws.iter().map(|&w| sym.angular_derivs(w)).collect();
    let dirs: Vec<(f64, f64)> = ws
        .iter()
        .map(|&w| {
            let c = 1.0 / (1.0 + 4f64.powf(-w)).sqrt();
            (c, c * 2f64.powf(-w))
        })
        .collect();
    let per_r: Vec<(f64, f64, f64)> = rs
        .par_iter()
        .map(|&r| {
            let rd = sym.radial_derivs(r);
            let mut best = (0.0, 0.0, 0.0);
            for (k, &(c, s)) in dirs.iter().enumerate() {
                let (u, v) = (r * c, r * s);
                if u <= 0.0 || v <= 0.0 {
                    continue;
                }
                let jet = r_jet(u, v, r).compose(&rd) * w_jet(u, v).compose(&angular[k]);
                let val = partial.sup_over_directions(sym.n, &jet, u, v);
                if val > best.0 {
                    best = (val, u, v);
                }
            }
            best
        })
        .collect();
    per_r
        .into_iter()
        .fold((0.0, 0.0, 0.0), |b, x| if x.0 > b.0 { x } else { b })
}

/// Sup over the support of `|∂^α σ|` with default refinement options.
pub fn sup_norm_partial(sym: &RadialBilinearSymbol, partial: Partial) -> Result<f64> {
    let est = sup_norm_partial_with(sym, partial, SupOptions::default())?;
    if !est.converged {
        return Err(Error::NonConvergence {
            what: "sup_norm_partial",
            trace: format!(
                "last estimate {:.6e} at r-density {} and {} w-points",
                est.value, est.r_density, est.w_points
            ),
        });
    }
    Ok(est.value)
}

pub fn sup_norm_partial_with(
    sym: &RadialBilinearSymbol,
    partial: Partial,
    opts: SupOptions,
) -> Result<SupEstimate> {
    let (lo, hi) = match sym.radial_support() {
        Some(s) if sym.j >= 1 => s,
        _ => return Err(invalid("sup norms need an annular support (j >= 1)")),
    };
    let j = sym.j as f64;
    let e = sym.epsilon;
    let (w_max, breaks) = match sym.kind {
        SymbolKind::Diagonal | SymbolKind::EulerDiagonal => (j, vec![-(1.0 - e) * j, (1.0 - e) * j]),
        SymbolKind::OffDiagonal | SymbolKind::EulerOffDiagonal => {
            (j + 4.0, vec![-j, -(1.0 - e) * j, (1.0 - e) * j, j, -50.0, 50.0])
        }
        _ => (j + 4.0, vec![-50.0, 50.0]),
    };
    let mut density = opts.r_density;
    let mut wn = opts.w_points;
    let mut prev: Option<(f64, f64, f64)> = None;
    for level in 0..=opts.max_doublings {
        let nr = ((hi - lo) * density).ceil() as usize + 1;
        let rs = grid_points(lo, hi, nr, &[]);
        let ws = grid_points(-w_max, w_max, wn, &breaks);
        let cur = sup_on_grid(sym, partial, &rs, &ws);
        if let Some(p) = prev {
            let scale = cur.0.abs().max(p.0.abs());
            if scale == 0.0 || (cur.0 - p.0).abs() <= opts.rel_change * scale {
                return Ok(SupEstimate {
                    value: cur.0,
                    u: cur.1,
                    v: cur.2,
                    r_density: density,
                    w_points: wn,
                    converged: true,
                });
            }
        }
        prev = Some(cur);
        if level < opts.max_doublings {
            density *= 2.0;
            wn *= 2;
        }
    }
    let p = prev.expect("at least one level");
    Ok(SupEstimate { value: p.0, u: p.1, v: p.2, r_density: density, w_points: wn, converged: false })
}

/// `L²(ℝ^{2n})` norm of a compactly supported symbol, using the product
/// structure `s = A(w)·R(r)`:
/// `‖σ‖² = ω_{n-1}² ∫|R|² r^{2n-1} dr · ∫_0^{π/2} |A|² cos^{n-1}θ sin^{n-1}θ dθ`.
pub fn l2_norm(sym: &RadialBilinearSymbol) -> Result<f64> {
    let (lo, hi) = sym
        .radial_support()
        .ok_or_else(|| invalid("L2 norm needs a compactly supported symbol"))?;
    let n = sym.n as i32;
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-9, max_panels: 200_000 };
    let nb = ((hi - lo).ceil() as usize).max(1);
    let rbreaks: Vec<f64> = (0..=nb).map(|i| lo + (hi - lo) * i as f64 / nb as f64).collect();
    let radial = adaptive_with_breaks(
        |r| {
            let v = sym.radial_value(r);
            v * v * r.powi(2 * n - 1)
        },
        &rbreaks,
        opts,
    );
    let angular = angular_l2(sym, opts);
    if !radial.converged || !angular.1 {
        return Err(Error::NonConvergence {
            what: "l2_norm",
            trace: format!("radial est_err {:.3e}, panels {}", radial.error, radial.panels),
        });
    }
    let omega = sphere_area(sym.n as usize);
    Ok(omega * (radial.value * angular.0).max(0.0).sqrt())
}

fn angular_l2(sym: &RadialBilinearSymbol, opts: QuadOptions) -> (f64, bool) {
    let n = sym.n as i32;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut breaks = vec![0.0, half_pi];
    if sym.kind.is_split() {
        let j = sym.j as f64;
        for w in [-j, -(1.0 - sym.epsilon) * j, (1.0 - sym.epsilon) * j, j] {
            // tan θ = v/u = 2^{-w}
            breaks.push(2f64.powf(-w).atan());
        }
    }
    breaks.sort_by(f64::total_cmp);
    let res = adaptive_with_breaks(
        |t: f64| {
            let (s, c) = t.sin_cos();
            if s <= 0.0 || c <= 0.0 {
                return 0.0;
            }
            let a = sym.angular_g((c.ln() - s.ln()) / LN_2);
            a * a * (c * s).powi(n - 1)
        },
        &breaks,
        opts,
    );
    (res.value, res.converged)
}

/// `L²(ℝ^{2n})` norm of an arbitrary radial-in-each-factor profile, by
/// nested adaptive quadrature of `ω_{n-1}² ∫∫ |s|² u^{n-1} v^{n-1} du dv` over
/// `[0, u_max] × [0, v_max]`.
pub fn l2_norm_profile<F>(n: u32, profile: F, u_max: f64, v_max: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if n == 0 {
        return Err(invalid("dimension n must be >= 1"));
    }
    let k = n as i32 - 1;
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-7, max_panels: 20_000 };
    let mut ok = true;
    let outer = adaptive_with_breaks(
        |u| {
            let inner = adaptive_with_breaks(
                |v| {
                    let s = profile(u, v);
                    s * s * v.powi(k)
                },
                &[0.0, v_max],
                opts,
            );
            ok &= inner.converged;
            inner.value * u.powi(k)
        },
        &[0.0, u_max],
        opts,
    );
    if !(ok && outer.converged) {
        return Err(Error::NonConvergence {
            what: "l2_norm_profile",
            trace: format!("outer est_err {:.3e}, panels {}", outer.error, outer.panels),
        });
    }
    Ok(sphere_area(n as usize) * outer.value.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_examples() {
        assert_eq!(phi0(0.5), 1.0);
        assert_eq!(phi0(3.0), 0.0);
        assert!((phi0(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(phi(0.25), 0.0);
        assert_eq!(phi(4.0), 0.0);
        assert_eq!(rho(0.0, 0.1).unwrap(), 1.0);
        assert_eq!(rho(1.5, 0.1).unwrap(), 0.0);
        assert!(rho(0.3, 0.0).is_err());
        assert!(rho(0.3, 0.5).is_err());
        for i in 0..100 {
            let u = i as f64 / 50.0 - 1.0;
            assert_eq!(rho(u, 0.2).unwrap(), rho(-u, 0.2).unwrap());
        }
    }

    #[test]
    fn phi0_strictly_decreasing_on_transition() {
        // near s = 1 the deficit from 1 is below double precision
        let mut prev = 1.0;
        for i in 30..1000 {
            let v = phi0(1.0 + i as f64 / 1000.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn telescoping_sum() {
        let s = 100.0;
        let total: f64 = phi0(s) + (1..=20).map(|j| phi(s / 2f64.powi(j))).sum::<f64>();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        let h = 1e-6;
        for &s in &[1.1, 1.37, 1.5, 1.8, 1.95] {
            let t = phi0_g(Taylor1::variable(s));
            let fd1 = (phi0(s + h) - phi0(s - h)) / (2.0 * h);
            let fd2 = (phi0(s + h) - 2.0 * phi0(s) + phi0(s - h)) / (h * h);
            assert!((t.derivative(1) - fd1).abs() < 1e-7);
            assert!((t.derivative(2) - fd2).abs() < 1e-3);
        }
    }

    #[test]
    fn construction_rules() {
        assert!(make_symbol(2, 0, SymbolKind::Diagonal, 0.1).is_err());
        assert!(make_symbol(0, 3, SymbolKind::Piece, 0.1).is_err());
        assert!(make_symbol(2, 3, SymbolKind::Full, 0.1).is_err());
        assert!(make_symbol(2, 3, SymbolKind::Piece, 0.7).is_err());
        assert!(make_symbol(2, 0, SymbolKind::Piece, 0.1).is_ok());
    }

    #[test]
    fn piece_zero_at_origin_is_total_measure() {
        let m0 = make_symbol(2, 0, SymbolKind::Piece, 0.1).unwrap();
        assert!((m0.eval(0.0, 0.0) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn support_of_pieces() {
        let m = make_symbol(2, 5, SymbolKind::Piece, 0.1).unwrap();
        let r = 2f64.powi(7);
        assert_eq!(m.eval(r / 2f64.sqrt(), r / 2f64.sqrt()), 0.0);
        let d = make_symbol(2, 5, SymbolKind::Diagonal, 0.1).unwrap();
        // u/v = 2^6 is outside the diagonal band |w| <= 5
        assert_eq!(d.eval(40.0, 40.0 / 64.0), 0.0);
    }

    #[test]
    fn split_adds_up() {
        for kind in [SymbolKind::Piece, SymbolKind::EulerPiece] {
            let (d, o) = if kind == SymbolKind::Piece {
                (SymbolKind::Diagonal, SymbolKind::OffDiagonal)
            } else {
                (SymbolKind::EulerDiagonal, SymbolKind::EulerOffDiagonal)
            };
            let whole = make_symbol(2, 4, kind, 0.1).unwrap();
            let a = make_symbol(2, 4, d, 0.1).unwrap();
            let b = make_symbol(2, 4, o, 0.1).unwrap();
            for i in 0..200 {
                let t = i as f64 / 199.0 * std::f64::consts::FRAC_PI_2;
                let r = 8.0 + 24.0 * (i as f64 * 0.618).fract();
                let (u, v) = (r * t.cos(), r * t.sin());
                let sum = a.eval(u, v) + b.eval(u, v);
                assert!((sum - whole.eval(u, v)).abs() < 1e-14, "{kind:?} at ({u}, {v})");
            }
        }
    }

    #[test]
    fn euler_profile_matches_finite_differences() {
        for kind in [SymbolKind::EulerPiece, SymbolKind::EulerDiagonal] {
            let base = if kind == SymbolKind::EulerPiece { SymbolKind::Piece } else { SymbolKind::Diagonal };
            let e = make_symbol(2, 3, kind, 0.1).unwrap();
            let m = make_symbol(2, 3, base, 0.1).unwrap();
            for &(u, v) in &[(5.0, 4.0), (7.3, 1.2), (3.0, 9.5), (12.0, 2.0)] {
                let h = 1e-5;
                let su = (m.eval(u + h, v) - m.eval(u - h, v)) / (2.0 * h);
                let sv = (m.eval(u, v + h) - m.eval(u, v - h)) / (2.0 * h);
                let fd = u * su + v * sv;
                let got = e.eval(u, v);
                assert!((fd - got).abs() < 1e-5 * got.abs().max(1e-3), "{kind:?} ({u},{v}): {fd} vs {got}");
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let sym = make_symbol(2, 3, SymbolKind::EulerDiagonal, 0.2).unwrap();
        let (u, v) = (6.0, 3.5);
        let h = 1e-4;
        let jet = sym.jet(u, v);
        let f = |a: f64, b: f64| sym.eval(a, b);
        assert!((jet.value() - f(u, v)).abs() < 1e-13);
        assert!((jet.d_u() - (f(u + h, v) - f(u - h, v)) / (2.0 * h)).abs() < 1e-5);
        assert!((jet.d_v() - (f(u, v + h) - f(u, v - h)) / (2.0 * h)).abs() < 1e-5);
        let fuu = (f(u + h, v) - 2.0 * f(u, v) + f(u - h, v)) / (h * h);
        let fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h);
        assert!((jet.d_uu() - fuu).abs() < 1e-3 * (1.0 + fuu.abs()));
        assert!((jet.d_uv() - fuv).abs() < 1e-3 * (1.0 + fuv.abs()));
    }

    #[test]
    fn multiindex_reduction() {
        assert_eq!(Partial::from_multiindex(2, &[1, 0], &[0, 0]).unwrap(), Partial::Xi);
        assert_eq!(Partial::from_multiindex(2, &[0, 2], &[0, 0]).unwrap(), Partial::XiXi);
        assert_eq!(Partial::from_multiindex(2, &[1, 1], &[0, 0]).unwrap(), Partial::XiXiMixed);
        assert_eq!(Partial::from_multiindex(2, &[0, 1], &[1, 0]).unwrap(), Partial::XiEta);
        assert!(Partial::from_multiindex(2, &[2, 1], &[0, 0]).is_err());
        assert!(Partial::from_multiindex(2, &[1], &[0]).is_err());
    }

    #[test]
    fn directional_sup_matches_brute_force_in_four_dimensions() {
        // σ(ξ, η) = s(|ξ|, |η|) on ℝ² × ℝ²; differentiate numerically in ξ₁
        // over many directions of ξ and compare with the closed form.
        let sym = make_symbol(2, 2, SymbolKind::Diagonal, 0.1).unwrap();
        let (u, v) = (3.1, 2.2);
        let jet = sym.jet(u, v);
        let sigma = |x1: f64, x2: f64| sym.eval(x1.hypot(x2), v);
        let h = 1e-4;
        let mut best1: f64 = 0.0;
        let mut best2: f64 = 0.0;
        for i in 0..2000 {
            let a = i as f64 / 2000.0 * std::f64::consts::TAU;
            let (x1, x2) = (u * a.cos(), u * a.sin());
            best1 = best1.max(((sigma(x1 + h, x2) - sigma(x1 - h, x2)) / (2.0 * h)).abs());
            best2 = best2
                .max(((sigma(x1 + h, x2) - 2.0 * sigma(x1, x2) + sigma(x1 - h, x2)) / (h * h)).abs());
        }
        let c1 = Partial::Xi.sup_over_directions(2, &jet, u, v);
        let c2 = Partial::XiXi.sup_over_directions(2, &jet, u, v);
        assert!((best1 - c1).abs() < 1e-5 * c1.max(1.0));
        assert!((best2 - c2).abs() < 1e-3 * c2.max(1.0));
    }

    #[test]
    fn sup_norm_rejects_full_and_ball() {
        let full = RadialBilinearSymbol::full(2).unwrap();
        assert!(sup_norm_partial(&full, Partial::Xi).is_err());
        let m0 = make_symbol(2, 0, SymbolKind::Piece, 0.1).unwrap();
        assert!(sup_norm_partial(&m0, Partial::Xi).is_err());
    }

    #[test]
    fn sup_norm_value_matches_dense_radial_scan() {
        let sym = make_symbol(2, 4, SymbolKind::Piece, 0.1).unwrap();
        let s = sup_norm_partial(&sym, Partial::Value).unwrap();
        let scan = |a: f64, b: f64| {
            (0..=20_000)
                .map(|i| crate::specfn::dsigma_hat(4, a + (b - a) * i as f64 / 20_000.0).unwrap().abs())
                .fold(0.0, f64::max)
        };
        assert!(s <= scan(8.0, 32.0) * 1.0001);
        assert!(s >= 0.95 * scan(15.2, 16.8));
    }

    #[test]
    fn l2_norm_rejects_full_and_zero_profile() {
        let full = RadialBilinearSymbol::full(2).unwrap();
        assert!(l2_norm(&full).is_err());
        let z = l2_norm_profile(2, |_, _| 0.0, 1.0, 1.0).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn separable_l2_matches_nested_quadrature() {
        let sym = make_symbol(2, 2, SymbolKind::Diagonal, 0.1).unwrap();
        let a = l2_norm(&sym).unwrap();
        let b = l2_norm_profile(2, |u, v| sym.eval(u, v), 8.0, 8.0).unwrap();
        assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
    }
}
