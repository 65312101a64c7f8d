use num_complex::Complex64;
use proptest::prelude::*;
use spheremax::grid::GridFunction;
use spheremax::harness::fit_loglog;
use spheremax::region::{memberships, ExponentPoint, RhombusVariant, classify};
use spheremax::specfn::{bessel_j, dsigma_hat, sphere_area};
use spheremax::symbols::{make_symbol, phi, phi0, SymbolKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bessel_three_term_recurrence(nu in 1.0f64..12.0, x in 0.1f64..80.0) {
        let a = bessel_j(nu - 1.0, x).unwrap();
        let b = bessel_j(nu, x).unwrap();
        let c = bessel_j(nu + 1.0, x).unwrap();
        let scale = a.abs().max(b.abs()).max(c.abs()).max(1e-300);
        prop_assert!((a + c - 2.0 * nu / x * b).abs() <= 1e-10 * scale.max(2.0 * nu / x * b.abs()));
    }

    #[test]
    fn dsigma_bounded_by_area(n in 1usize..5, r in 0.0f64..200.0) {
        let d = 2 * n;
        prop_assert!(dsigma_hat(d, r).unwrap().abs() <= sphere_area(d) * (1.0 + 1e-12));
    }

    #[test]
    fn region_swap_and_disjoint(n in 1u32..30, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let pt = ExponentPoint::new(a, b).unwrap();
        prop_assert!(!memberships(n, &pt, RhombusVariant::Standard).overlap());
        prop_assert_eq!(classify(n, &pt).status, classify(n, &pt.swapped()).status);
    }

    #[test]
    fn dyadic_partition_of_unity(r in 0.0f64..1e6) {
        let s = phi0(r) + (1..=24).map(|j| phi(r / 2f64.powi(j))).sum::<f64>();
        prop_assert!((s - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn pieces_split(j in 1u32..12, r in 0.0f64..1e4, a in 0.0f64..std::f64::consts::FRAC_PI_2) {
        let (u, v) = (r * a.cos(), r * a.sin());
        let e = |k| make_symbol(2, j, k, 0.1).unwrap().eval(u, v);
        let d = e(SymbolKind::Diagonal) + e(SymbolKind::OffDiagonal) - e(SymbolKind::Piece);
        prop_assert!(d.abs() <= 1e-14);
    }

    #[test]
    fn loglog_recovers_power_law(slope in -4.0f64..4.0, c in 0.01f64..100.0) {
        let pts: Vec<(f64, f64)> = (0..8).map(|k| { let x = 2f64.powi(k); (x, c * x.powf(slope)) }).collect();
        let fit = fit_loglog(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-10);
        prop_assert!(fit.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn spectrum_round_trip(vals in prop::collection::vec(-1.0f64..1.0, 16)) {
        let g = GridFunction::new(1, 16, 1.0, vals.iter().map(|&v| Complex64::new(v, 0.0)).collect()).unwrap();
        let back = GridFunction::from_spectrum(1, 16, 1.0, g.spectrum()).unwrap();
        prop_assert!(g.max_abs_diff(&back).unwrap() <= 1e-14);
    }
}
