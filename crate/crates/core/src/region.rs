//! Hölder-triple geometry: the rhombus of boundedness, the Banach range, and
//! the unbounded range forced by the counterexample family.

use std::fmt;
use std::ops::{Mul, Sub};

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{invalid, Result};

/// Tolerance for floating inputs on region boundaries.
pub const FLOAT_TOL: f64 = 1e-12;

/// `(1/p₁, 1/p₂, 1/p)` with `1/p = 1/p₁ + 1/p₂`. Rational inputs keep an
/// exact copy so boundary tests are decided without rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentPoint {
    inv_p1: f64,
    inv_p2: f64,
    inv_p: f64,
    #[serde(skip)]
    exact: Option<(Rational64, Rational64)>,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn r2f(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl ExponentPoint {
    pub fn new(inv_p1: f64, inv_p2: f64) -> Result<Self> {
        check_unit("inv_p1", inv_p1)?;
        check_unit("inv_p2", inv_p2)?;
        Ok(Self { inv_p1, inv_p2, inv_p: inv_p1 + inv_p2, exact: None })
    }

    /// Builds a point from all three reciprocals, rejecting triples that
    /// violate the Hölder relation by more than [`FLOAT_TOL`].
    pub fn from_triple(inv_p1: f64, inv_p2: f64, inv_p: f64) -> Result<Self> {
        let pt = Self::new(inv_p1, inv_p2)?;
        if (pt.inv_p - inv_p).abs() > FLOAT_TOL {
            return Err(invalid(format!(
                "1/p = {inv_p} but 1/p1 + 1/p2 = {}",
                pt.inv_p
            )));
        }
        Ok(pt)
    }

    pub fn exact(inv_p1: Rational64, inv_p2: Rational64) -> Result<Self> {
        let zero = Rational64::from_integer(0);
        let one = Rational64::from_integer(1);
        for (name, v) in [("inv_p1", inv_p1), ("inv_p2", inv_p2)] {
            if v < zero || v > one {
                return Err(invalid(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(Self {
            inv_p1: r2f(inv_p1),
            inv_p2: r2f(inv_p2),
            inv_p: r2f(inv_p1 + inv_p2),
            exact: Some((inv_p1, inv_p2)),
        })
    }

    pub fn inv_p1(&self) -> f64 {
        self.inv_p1
    }
    pub fn inv_p2(&self) -> f64 {
        self.inv_p2
    }
    pub fn inv_p(&self) -> f64 {
        self.inv_p
    }

    /// Exact `(1/p₁, 1/p₂, 1/p)` when the point was built from rationals.
    pub fn exact_coords(&self) -> Option<(Rational64, Rational64, Rational64)> {
        self.exact.map(|(a, b)| (a, b, a + b))
    }

    /// The point with the roles of f and g exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            inv_p1: self.inv_p2,
            inv_p2: self.inv_p1,
            inv_p: self.inv_p,
            exact: self.exact.map(|(a, b)| (b, a)),
        }
    }
}

impl fmt::Display for ExponentPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_coords() {
            Some((a, b, c)) => write!(f, "({a}, {b}, {c})"),
            None => write!(f, "({}, {}, {})", self.inv_p1, self.inv_p2, self.inv_p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RegionStatus {
    BoundedRhombus,
    BoundedBanach,
    Unbounded,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub status: RegionStatus,
    /// Which known result decides the status; empty for `Unknown`.
    pub witness: String,
}

/// Which vertex set defines the open rhombus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum RhombusVariant {
    /// Side vertices `(1, 0, 1)` and `(0, 1, 1)`.
    #[default]
    Standard,
    /// Side vertices `(b, 0, b)` and `(0, b, b)` with `b = (2n - 3/2)/(2n - 1)`.
    Interpolation,
}

/// `δ_n = (2n - 15)/10`.
pub fn delta_n(n: u32) -> f64 {
    r2f(delta_exact(n))
}

pub fn delta_exact(n: u32) -> Rational64 {
    Rational64::new(2 * n as i64 - 15, 10)
}

fn require_rhombus_dim(n: u32) -> Result<()> {
    if n < 8 {
        return Err(invalid(format!("rhombus needs n >= 8 (δ_n > 0), got n = {n}")));
    }
    Ok(())
}

/// Diagonal coordinate `(1 + 2δ)/(2 + 2δ)` of the top vertex.
fn apex(n: u32) -> Rational64 {
    let d = delta_exact(n);
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    (one + two * d) / (two + two * d)
}

fn side(n: u32, variant: RhombusVariant) -> Rational64 {
    match variant {
        RhombusVariant::Standard => Rational64::from_integer(1),
        RhombusVariant::Interpolation => {
            Rational64::new(4 * n as i64 - 3, 2) / Rational64::from_integer(2 * n as i64 - 1)
        }
    }
}

/// Vertices `[P₀, P₁, P₂, P₃]` of the standard rhombus.
pub fn rhombus_vertices(n: u32) -> Result<[ExponentPoint; 4]> {
    rhombus_vertices_with(n, RhombusVariant::Standard)
}

pub fn rhombus_vertices_with(n: u32, variant: RhombusVariant) -> Result<[ExponentPoint; 4]> {
    require_rhombus_dim(n)?;
    let zero = Rational64::from_integer(0);
    let s = side(n, variant);
    let a = apex(n);
    Ok([
        ExponentPoint::exact(zero, zero)?,
        ExponentPoint::exact(s, zero)?,
        ExponentPoint::exact(zero, s)?,
        ExponentPoint::exact(a, a)?,
    ])
}

/// `(1+δ_n)/(1+2δ_n) - n/(2n-1)`: distance in `p` along the diagonal between
/// the rhombus tip and the unbounded range.
pub fn diagonal_gap(n: u32) -> Result<f64> {
    require_rhombus_dim(n)?;
    let d = delta_exact(n);
    let one = Rational64::from_integer(1);
    let two = Rational64::from_integer(2);
    let gap = (one + d) / (one + two * d) - Rational64::new(n as i64, 2 * n as i64 - 1);
    Ok(r2f(gap))
}

fn cross<T>(o: (T, T), a: (T, T), b: (T, T)) -> T
where
    T: Copy + Sub<Output = T> + Mul<Output = T>,
{
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Strict interior test for the convex polygon `poly` (counter-clockwise):
/// every edge cross product must exceed `margin`.
fn strictly_inside<T>(poly: &[(T, T); 4], p: (T, T), margin: T) -> bool
where
    T: Copy + Sub<Output = T> + Mul<Output = T> + PartialOrd,
{
    (0..4).all(|i| cross(poly[i], poly[(i + 1) % 4], p) > margin)
}

/// Raw membership flags, computed independently of each other.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Memberships {
    pub rhombus: bool,
    pub l2_point: bool,
    pub banach: bool,
    pub unbounded: bool,
}

impl Memberships {
    pub fn bounded(&self) -> bool {
        self.rhombus || self.l2_point || self.banach
    }

    pub fn overlap(&self) -> bool {
        self.bounded() && self.unbounded
    }
}

pub fn memberships(n: u32, pt: &ExponentPoint, variant: RhombusVariant) -> Memberships {
    let mut m = Memberships::default();
    if n == 0 {
        return m;
    }
    let threshold = Rational64::new(2 * n as i64 - 1, n as i64);
    let half = Rational64::new(1, 2);
    let one = Rational64::from_integer(1);
    match pt.exact {
        Some((x, y)) => {
            m.unbounded = x + y >= threshold;
            m.banach = n >= 2 && x < one && y < one && x + y < one;
            if n >= 8 {
                let z = Rational64::from_integer(0);
                let (s, a) = (side(n, variant), apex(n));
                let poly = [(z, z), (s, z), (a, a), (z, s)];
                m.rhombus = strictly_inside(&poly, (x, y), z);
                m.l2_point = x == half && y == half;
            }
        }
        None => {
            let (x, y) = (pt.inv_p1, pt.inv_p2);
            m.unbounded = x + y >= r2f(threshold) - FLOAT_TOL;
            m.banach = n >= 2 && x < 1.0 - FLOAT_TOL && y < 1.0 - FLOAT_TOL && x + y < 1.0 - FLOAT_TOL;
            if n >= 8 {
                let (s, a) = (r2f(side(n, variant)), r2f(apex(n)));
                let poly = [(0.0, 0.0), (s, 0.0), (a, a), (0.0, s)];
                m.rhombus = strictly_inside(&poly, (x, y), FLOAT_TOL);
                m.l2_point = (x - 0.5).abs() <= FLOAT_TOL && (y - 0.5).abs() <= FLOAT_TOL;
            }
        }
    }
    m
}

pub fn classify(n: u32, pt: &ExponentPoint) -> RegionVerdict {
    classify_with(n, pt, RhombusVariant::Standard)
}

pub fn classify_with(n: u32, pt: &ExponentPoint, variant: RhombusVariant) -> RegionVerdict {
    let m = memberships(n, pt, variant);
    assert!(!m.overlap(), "bounded and unbounded ranges overlap at n={n}, {pt}");
    let (status, witness) = if m.unbounded {
        (RegionStatus::Unbounded, "1/p >= (2n-1)/n: singular counterexample pair")
    } else if m.rhombus {
        (RegionStatus::BoundedRhombus, "open rhombus of boundedness")
    } else if m.l2_point {
        (RegionStatus::BoundedRhombus, "direct L2 x L2 -> L1 estimate")
    } else if m.banach {
        (RegionStatus::BoundedBanach, "Banach range: domination by the linear maximal operator")
    } else {
        (RegionStatus::Unknown, "")
    };
    RegionVerdict { status, witness: witness.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta_n(8), 0.1);
        assert_eq!(delta_n(10), 0.5);
        assert_eq!(delta_n(7), -0.1);
    }

    #[test]
    fn vertices_for_n8() {
        let v = rhombus_vertices(8).unwrap();
        assert_eq!(v[0].exact_coords().unwrap(), (q(0, 1), q(0, 1), q(0, 1)));
        assert_eq!(v[1].exact_coords().unwrap(), (q(1, 1), q(0, 1), q(1, 1)));
        assert_eq!(v[3].exact_coords().unwrap(), (q(6, 11), q(6, 11), q(12, 11)));
        assert!(rhombus_vertices(7).is_err());
    }

    #[test]
    fn apex_sits_between_l2_point_and_unbounded_line() {
        for n in 8..200 {
            let p3 = rhombus_vertices(n).unwrap()[3];
            let (a, b, c) = p3.exact_coords().unwrap();
            assert_eq!(a, b);
            assert!(c > q(1, 1) && c < q(2 * n as i64 - 1, n as i64));
        }
    }

    #[test]
    fn classify_examples() {
        let half = ExponentPoint::exact(q(1, 2), q(1, 2)).unwrap();
        assert_eq!(classify(8, &half).status, RegionStatus::BoundedRhombus);
        assert_eq!(classify(1, &half).status, RegionStatus::Unbounded);
        let p = ExponentPoint::new(0.9, 0.9).unwrap();
        assert_eq!(classify(2, &p).status, RegionStatus::Unbounded);
        let p = ExponentPoint::exact(q(1, 3), q(1, 3)).unwrap();
        assert_eq!(classify(2, &p).status, RegionStatus::BoundedBanach);
        assert!(!classify(2, &p).witness.is_empty());
    }

    #[test]
    fn boundary_points_are_unknown() {
        let v = rhombus_vertices(8).unwrap();
        for p in &v[1..] {
            assert_eq!(classify(8, p).status, RegionStatus::Unknown, "{p}");
        }
        // midpoint of edge P1-P3
        let (a, _, _) = v[3].exact_coords().unwrap();
        let mid = ExponentPoint::exact((q(1, 1) + a) / 2, a / 2).unwrap();
        assert_eq!(classify(8, &mid).status, RegionStatus::Unknown);
        // just inside
        let inside = ExponentPoint::exact(q(1, 2), q(1, 2) + q(1, 1000)).unwrap();
        assert_eq!(classify(8, &inside).status, RegionStatus::BoundedRhombus);
    }

    #[test]
    fn gap_values() {
        assert!((diagonal_gap(8).unwrap() - 0.383_333_333_333_333_3).abs() < 1e-15);
        let (g8, g100, g1000) =
            (diagonal_gap(8).unwrap(), diagonal_gap(100).unwrap(), diagonal_gap(1000).unwrap());
        assert!(g1000 < g100 && g100 < g8 && g1000 > 0.0);
        for n in [8u32, 50, 1000, 100_000] {
            let s = n as f64 * diagonal_gap(n).unwrap();
            assert!((0.9..4.0).contains(&s), "n*gap = {s}");
        }
        assert!(diagonal_gap(7).is_err());
    }

    #[test]
    fn interpolation_variant_differs() {
        let v = rhombus_vertices_with(8, RhombusVariant::Interpolation).unwrap();
        assert_eq!(v[1].exact_coords().unwrap().0, q(29, 30));
        // (0.98, 0.01) is inside the standard rhombus but outside the variant
        let p = ExponentPoint::exact(q(98, 100), q(1, 100)).unwrap();
        assert_eq!(classify(8, &p).status, RegionStatus::BoundedRhombus);
        assert_ne!(
            classify_with(8, &p, RhombusVariant::Interpolation).status,
            RegionStatus::BoundedRhombus
        );
    }

    #[test]
    fn rejects_out_of_range_and_non_hoelder() {
        assert!(ExponentPoint::new(1.2, 0.0).is_err());
        assert!(ExponentPoint::from_triple(0.2, 0.3, 0.6).is_err());
        assert!(ExponentPoint::from_triple(0.2, 0.3, 0.5).is_ok());
    }
}
