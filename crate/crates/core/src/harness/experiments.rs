use std::f64::consts::PI;

use num_rational::Rational64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fit_loglog, num, ExperimentConfig, Report, Table};
use crate::bilop::{
    average_mult, average_quad, geometric_grid, linear_max, maximal, opnorm_lower, opnorm_lower_pairs,
    square_function_parts, BilinearPlan, PlanOptions, SquareVariant, Unit,
};
use crate::cex::{
    cex_average, cex_average_at, divergence_probe, growth_floor, rescale_constant, line_lower_bound,
    log_power_log, monotone_since, reduced_chain, CexPair,
};
use crate::error::{Error, Result};
use crate::grid::{lp_norm, GridFunction};
use crate::region::{classify, delta_exact, memberships, rhombus_vertices, ExponentPoint, RegionStatus, RhombusVariant};
use crate::specfn::{dsigma_hat, dsigma_hat_deriv, gamma, sphere_area};
use crate::squad::{
    integrate_cov, integrate_hemigraph, integrate_mc, sample_sphere, shard_rng, NestedOptions, SphereMethod, SphereRule,
    SHARD,
};
use crate::symbols::{l2_norm, l2_norm_profile, make_symbol, phi, phi0, sup_norm_partial, Partial, SymbolKind};
use crate::testfn::{TestFunction, TestFunctionFamily};

pub(super) fn dispatch(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment.as_str() {
        "region-table" => region_table(cfg),
        "dsigma-decay" => dsigma_decay(cfg),
        "symbol-sup-decay" => symbol_sup_decay(cfg),
        "symbol-l2-growth" => symbol_l2_growth(cfg),
        "partition-check" => partition_check(cfg),
        "cov-identity" => cov_identity(cfg),
        "avg-crosscheck" => avg_crosscheck(cfg),
        "maximal-sanity" => maximal_sanity(cfg),
        "squarefn-bound" => squarefn_bound(cfg),
        "opnorm-trend" => opnorm_trend(cfg),
        "cex-growth" => cex_growth(cfg),
        "cex-divergence" => cex_divergence(cfg),
        "monotone-lemma" => monotone_lemma(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }
}

fn q(a: i64, b: i64) -> Rational64 {
    Rational64::new(a, b)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn j_range(cfg: &ExperimentConfig, lo: u32, hi: u32) -> Vec<u32> {
    (cfg.j_min.unwrap_or(lo)..=cfg.j_max.unwrap_or(hi)).collect()
}

fn t_grid(cfg: &ExperimentConfig, spacing: f64) -> Result<Vec<f64>> {
    geometric_grid(spacing / 64.0, spacing * 64.0, cfg.t_ratio)
}

fn region_table(cfg: &ExperimentConfig) -> Result<Report> {
    let mut table = Table::new(&["n", "delta_n", "vertex", "inv_p1", "inv_p2", "inv_p"]);
    let main = cfg.n.unwrap_or(8);
    let mut ns: Vec<u32> = vec![8, 10, 12, 16, 20, main];
    ns.retain(|&n| n >= 8);
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        for (i, v) in rhombus_vertices(n)?.iter().enumerate() {
            let (a, b, c) = v.exact_coords().expect("vertices are exact");
            table.push(vec![n.to_string(), delta_exact(n).to_string(), format!("P{i}"), a.to_string(), b.to_string(), c.to_string()]);
        }
    }
    let mut rep = Report::new(cfg, table);

    let d8 = delta_exact(8);
    rep.check("delta_8", d8 == q(1, 10), Some(*d8.numer() as f64 / *d8.denom() as f64), "= 1/10", d8.to_string());
    let apex = rhombus_vertices(8)?[3].exact_coords().expect("exact");
    rep.check(
        "apex_n8",
        apex == (q(6, 11), q(6, 11), q(12, 11)),
        None,
        "= (6/11, 6/11, 12/11)",
        format!("({}, {}, {})", apex.0, apex.1, apex.2),
    );
    rep.value("vertices_n8", rhombus_vertices(8)?.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    let l2 = classify(1, &ExponentPoint::exact(q(1, 2), q(1, 2))?);
    rep.check("n1_l2xl2_to_l1_unbounded", l2.status == RegionStatus::Unbounded, None, "Unbounded", format!("{:?}", l2.status));

    const SAMPLES: usize = 1_000_000;
    for n in [1u32, 2, 8, 20] {
        let shards = SAMPLES.div_ceil(SHARD);
        let counts: Vec<[usize; 4]> = (0..shards)
            .into_par_iter()
            .map(|s| {
                let mut rng = shard_rng(cfg.seed ^ (n as u64) << 32, s as u64);
                let mut c = [0usize; 4];
                let len = SHARD.min(SAMPLES - s * SHARD);
                for _ in 0..len {
                    let pt = ExponentPoint::new(rng.random_range(0.0..=1.0), rng.random_range(0.0..=1.0))
                        .expect("sample lies in the unit square");
                    let m = memberships(n, &pt, RhombusVariant::Standard);
                    if m.overlap() {
                        c[0] += 1;
                        continue;
                    }
                    let v = classify(n, &pt);
                    if pt.inv_p() >= (2 * n - 1) as f64 / n as f64 {
                        c[1] += 1;
                        if v.status != RegionStatus::Unbounded {
                            c[2] += 1;
                        }
                    }
                    if classify(n, &pt.swapped()).status != v.status {
                        c[3] += 1;
                    }
                }
                c
            })
            .collect();
        let tot = counts.iter().fold([0usize; 4], |a, c| [a[0] + c[0], a[1] + c[1], a[2] + c[2], a[3] + c[3]]);
        rep.check(format!("no_overlap_n{n}"), tot[0] == 0, Some(tot[0] as f64), "= 0", format!("{SAMPLES} samples"));
        rep.check(
            format!("unbounded_above_threshold_n{n}"),
            tot[2] == 0,
            Some(tot[2] as f64),
            "= 0 misclassified",
            format!("{} samples with 1/p >= (2n-1)/n", tot[1]),
        );
        rep.check(format!("swap_symmetry_n{n}"), tot[3] == 0, Some(tot[3] as f64), "= 0", "classify(p1, p2) = classify(p2, p1)");
    }
    Ok(rep)
}

fn envelope(f: impl Fn(f64) -> Result<f64>, r: f64) -> Result<f64> {
    // One oscillation period of J(2πr) is about 1 in r.
    let mut m: f64 = 0.0;
    for i in 0..400 {
        m = m.max(f(r + i as f64 / 400.0)?.abs());
    }
    Ok(m)
}

fn dsigma_decay(cfg: &ExperimentConfig) -> Result<Report> {
    let ns: Vec<usize> = cfg.n.map(|n| vec![n as usize]).unwrap_or(vec![1, 2, 3]);
    let mut rep = Report::new(cfg, Table::new(&["n", "quantity", "r", "value", "reference", "std_error"]));
    let radii: Vec<f64> = (0..=20).map(|k| 2f64.powf(5.0 + k as f64 / 4.0)).collect();
    for &n in &ns {
        let d = 2 * n;
        let at0 = dsigma_hat(d, 0.0)?;
        let want = 2.0 * PI.powi(n as i32) / gamma(n as f64);
        rep.check(format!("origin_n{n}"), (at0 - want).abs() <= 1e-10, Some(at0), format!("= {want} ± 1e-10"), "");

        let target = -(n as f64 - 0.5);
        for (name, deriv) in [("envelope", false), ("deriv_envelope", true)] {
            let mut pts = Vec::new();
            for &r in &radii {
                let e = if deriv { envelope(|x| dsigma_hat_deriv(d, x), r)? } else { envelope(|x| dsigma_hat(d, x), r)? };
                rep.table.push(vec![n.to_string(), name.into(), num(r), num(e), String::new(), String::new()]);
                pts.push((r, e));
            }
            let fit = fit_loglog(&pts)?;
            rep.check(
                format!("{name}_slope_n{n}"),
                (fit.slope - target).abs() <= 0.1,
                Some(fit.slope),
                format!("{target} ± 0.1"),
                format!("r^2 = {:.6}", fit.r_squared),
            );
            rep.fit(format!("{name}_n{n}"), fit);
        }

        for (i, r) in [0.0, 0.5, 1.0, 2.0, 5.0].into_iter().enumerate() {
            let seed = cfg.seed.wrapping_add(1000 * n as u64 + i as u64);
            let mc = integrate_mc(d, |w| (2.0 * PI * r * w[0]).cos(), 200_000, seed)?;
            let exact = dsigma_hat(d, r)?;
            let ok = if mc.std_error == 0.0 {
                (mc.value - exact).abs() <= 1e-10 * exact.abs()
            } else {
                (mc.value - exact).abs() <= 3.0 * mc.std_error
            };
            rep.table.push(vec![n.to_string(), "mc".into(), num(r), num(mc.value), num(exact), num(mc.std_error)]);
            rep.check(format!("mc_n{n}_r{r}"), ok, Some(mc.value - exact), "within 3 standard errors", format!("se = {:.3e}", mc.std_error));
        }
    }
    let key = format!("envelope_n{}", if ns.contains(&2) { 2 } else { ns[0] });
    rep.plot = Some(key);
    Ok(rep)
}

fn symbol_sup_decay(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(2);
    let js = j_range(cfg, 4, 10);
    let mut rep = Report::new(cfg, Table::new(&["j", "symbol", "partial", "sup"]));
    let nf = n as f64;
    let series = [
        (SymbolKind::Diagonal, Partial::Xi, -(2.0 * nf - 1.0) / 2.0),
        (SymbolKind::EulerDiagonal, Partial::Xi, -(2.0 * nf - 3.0) / 2.0),
        (SymbolKind::Piece, Partial::Value, -(2.0 * nf - 1.0) / 2.0),
    ];
    for (kind, partial, target) in series {
        let mut pts = Vec::new();
        for &j in &js {
            let sym = make_symbol(n, j, kind, cfg.epsilon)?;
            let s = sup_norm_partial(&sym, partial)?;
            rep.table.push(vec![j.to_string(), kind.name().into(), partial.name().into(), num(s)]);
            pts.push((2f64.powi(j as i32), s));
        }
        let fit = fit_loglog(&pts)?;
        let key = format!("{}_{}", partial.name(), kind.name());
        rep.check(
            format!("slope_{key}"),
            fit.slope <= target + 0.2,
            Some(fit.slope),
            format!("<= {}", target + 0.2),
            format!("target {target}, r^2 = {:.6}", fit.r_squared),
        );
        rep.fit(key, fit);
    }
    rep.plot = Some(format!("{}_{}", Partial::Xi.name(), SymbolKind::Diagonal.name()));
    Ok(rep)
}

fn symbol_l2_growth(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(2);
    let js = j_range(cfg, 4, 10);
    let mut rep = Report::new(cfg, Table::new(&["j", "symbol", "l2_norm"]));
    let mut pts = Vec::new();
    for &j in &js {
        for kind in [SymbolKind::EulerDiagonal, SymbolKind::Diagonal] {
            let v = l2_norm(&make_symbol(n, j, kind, cfg.epsilon)?)?;
            rep.table.push(vec![j.to_string(), kind.name().into(), num(v)]);
            if kind == SymbolKind::EulerDiagonal {
                pts.push((2f64.powi(j as i32), v));
            }
        }
    }
    let fit = fit_loglog(&pts)?;
    rep.check("slope_l2_mt_j1", fit.slope <= 1.6, Some(fit.slope), "<= 1.6", format!("target 1.5, r^2 = {:.6}", fit.r_squared));
    rep.fit("l2_mt_j1", fit);
    rep.plot = Some("l2_mt_j1".into());

    // Monte Carlo oracle for the profile phi(2^{-j} r) on ℝ^{2n}.
    let (jj, d) = (2, 2 * n as usize);
    let radius = 2f64.powi(jj + 1);
    let profile = |u: f64, v: f64| phi(2f64.powi(-jj) * u.hypot(v));
    let quad = l2_norm_profile(n, profile, radius, radius)?;
    let vol = PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0) * radius.powi(d as i32);
    let samples = 400_000;
    let shards = samples / SHARD;
    let vals: Vec<f64> = (0..shards)
        .into_par_iter()
        .flat_map_iter(|s| {
            let mut rng = shard_rng(cfg.seed.wrapping_add(77), s as u64);
            (0..SHARD)
                .map(|_| {
                    let w = sample_sphere(d, &mut rng);
                    let rr = radius * rng.random::<f64>().powf(1.0 / d as f64);
                    let u = rr * w[..d / 2].iter().map(|x| x * x).sum::<f64>().sqrt();
                    let v = rr * w[d / 2..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    profile(u, v).powi(2)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let (mc, se) = (vol * mean, vol * (var / m).sqrt());
    rep.check(
        "l2_profile_vs_mc",
        (quad * quad - mc).abs() <= 3.0 * se,
        Some(quad * quad - mc),
        "within 3 standard errors",
        format!("squared norm {:.6e}, mc {:.6e} ± {:.2e}", quad * quad, mc, se),
    );
    Ok(rep)
}

fn partition_check(cfg: &ExperimentConfig) -> Result<Report> {
    let n = cfg.n.unwrap_or(2);
    let eps = cfg.epsilon;
    let mut rep = Report::new(cfg, Table::new(&["check", "samples", "max_error"]));
    let mut rng = shard_rng(cfg.seed, 0);

    let tele = (0..1000)
        .map(|_| {
            let r = rng.random_range(0.0..2f64.powi(15));
            (phi0(r) + (1..=16).map(|j| phi(2f64.powi(-j) * r)).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    rep.table.push(vec!["telescoping".into(), "1000".into(), num(tele)]);
    rep.check("telescoping", tele <= 1e-14, Some(tele), "<= 1e-14", "phi0(r) + sum_{j=1}^{16} phi(2^-j r) = 1");

    let big = 14;
    let full = make_symbol(n, 0, SymbolKind::Full, eps)?;
    let pieces: Vec<_> = (0..=big).map(|j| make_symbol(n, j, SymbolKind::Piece, eps)).collect::<Result<_>>()?;
    let recon = (0..1000)
        .map(|_| {
            let r = rng.random_range(0.0..2f64.powi(big as i32));
            let a = rng.random_range(0.0..PI / 2.0);
            let (u, v) = (r * a.cos(), r * a.sin());
            (pieces.iter().map(|s| s.eval(u, v)).sum::<f64>() - full.eval(u, v)).abs()
        })
        .fold(0.0, f64::max);
    rep.table.push(vec!["reconstruction".into(), "1000".into(), num(recon)]);
    rep.check("reconstruction", recon <= 1e-12, Some(recon), "<= 1e-12", format!("sum_{{j<={big}}} m_j = m"));

    let mut split: f64 = 0.0;
    let mut esplit: f64 = 0.0;
    for _ in 0..10_000 {
        let j = rng.random_range(1..=10u32);
        let r = rng.random_range(0.0..2f64.powi(j as i32 + 2));
        let a = rng.random_range(0.0..PI / 2.0);
        let (u, v) = (r * a.cos(), r * a.sin());
        let e = |k| make_symbol(n, j, k, eps).map(|s| s.eval(u, v));
        split = split.max((e(SymbolKind::Diagonal)? + e(SymbolKind::OffDiagonal)? - e(SymbolKind::Piece)?).abs());
        esplit = esplit.max((e(SymbolKind::EulerDiagonal)? + e(SymbolKind::EulerOffDiagonal)? - e(SymbolKind::EulerPiece)?).abs());
    }
    rep.table.push(vec!["split".into(), "10000".into(), num(split)]);
    rep.table.push(vec!["euler_split".into(), "10000".into(), num(esplit)]);
    rep.check("split", split <= 1e-14, Some(split), "<= 1e-14", "m_j1 + m_j2 = m_j");
    rep.check("euler_split", esplit <= 1e-14, Some(esplit), "<= 1e-14", "mt_j1 + mt_j2 = mt_j");

    let mut bad = [0usize; 3];
    for _ in 0..100_000 {
        let j = rng.random_range(1..=12u32);
        let r = rng.random_range(0.0..2f64.powi(j as i32 + 2));
        let a = rng.random_range(0.0..PI / 2.0);
        let (u, v) = (r * a.cos(), r * a.sin());
        let w = (u / v).log2().abs();
        let jf = j as f64;
        let piece = make_symbol(n, j, SymbolKind::Piece, eps)?.eval(u, v);
        if (r < 2f64.powi(j as i32 - 1) || r > 2f64.powi(j as i32 + 1)) && piece != 0.0 {
            bad[0] += 1;
        }
        if w > jf && make_symbol(n, j, SymbolKind::Diagonal, eps)?.eval(u, v) != 0.0 {
            bad[1] += 1;
        }
        if w <= (1.0 - eps) * jf && make_symbol(n, j, SymbolKind::OffDiagonal, eps)?.eval(u, v) != 0.0 {
            bad[2] += 1;
        }
    }
    for (name, b) in ["support_annulus", "support_diagonal_band", "offdiagonal_vanishes_on_band"].iter().zip(bad) {
        rep.table.push(vec![name.to_string(), "100000".into(), b.to_string()]);
        rep.check(*name, b == 0, Some(b as f64), "= 0 violations", "");
    }
    Ok(rep)
}

fn smooth_integrand(rng: &mut ChaCha8Rng, n: usize) -> impl Fn(&[f64], &[f64]) -> f64 + Sync + Clone {
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c = rng.random_range(-0.5..0.5);
    move |y: &[f64], z: &[f64]| {
        let lin: f64 = a.iter().zip(y).map(|(p, q)| p * q).sum::<f64>() + b.iter().zip(z).map(|(p, q)| p * q).sum::<f64>();
        lin.exp() * (1.0 + c * y[0] * z[0])
    }
}

fn cov_identity(cfg: &ExperimentConfig) -> Result<Report> {
    let ns: Vec<usize> = cfg.n.map(|n| vec![n as usize]).unwrap_or(vec![1, 2, 3]);
    let mut rep = Report::new(cfg, Table::new(&["n", "integrand", "cov", "reference", "std_error"]));
    let opts = NestedOptions::default();
    for &n in &ns {
        let omega = sphere_area(2 * n);
        let one = integrate_cov(n, |_, _| 1.0, opts)?.value;
        rep.table.push(vec![n.to_string(), "one".into(), num(one), num(omega), String::new()]);
        rep.check(format!("constant_n{n}"), rel_err(one, omega) <= 1e-6, Some(rel_err(one, omega)), "<= 1e-6 relative", "");
        let y2 = integrate_cov(n, |y, _| y.iter().map(|v| v * v).sum(), opts)?.value;
        rep.table.push(vec![n.to_string(), "y_squared".into(), num(y2), num(omega / 2.0), String::new()]);
        rep.check(format!("y_squared_n{n}"), rel_err(y2, omega / 2.0) <= 1e-5, Some(rel_err(y2, omega / 2.0)), "<= 1e-5 relative", "");

        let mut rng = shard_rng(cfg.seed, 100 + n as u64);
        for k in 0..5 {
            let f = smooth_integrand(&mut rng, n);
            let cov = integrate_cov(n, f.clone(), opts)?.value;
            let g = f.clone();
            let mc = integrate_mc(2 * n, move |w| g(&w[..n], &w[n..]), 200_000, cfg.seed.wrapping_add(10 * n as u64 + k))?;
            let hemi = integrate_hemigraph(n, f, opts)?.value;
            rep.table.push(vec![n.to_string(), format!("random_{k}"), num(cov), num(mc.value), num(mc.std_error)]);
            rep.table.push(vec![n.to_string(), format!("random_{k}_hemigraph"), num(cov), num(hemi), String::new()]);
            rep.check(
                format!("random_{k}_vs_mc_n{n}"),
                (cov - mc.value).abs() <= 3.0 * mc.std_error,
                Some(cov - mc.value),
                "within 3 standard errors",
                format!("se = {:.3e}", mc.std_error),
            );
            rep.check(format!("random_{k}_hemigraph_n{n}"), rel_err(hemi, cov) <= 1e-4, Some(rel_err(hemi, cov)), "<= 1e-4 relative", "");
        }

        if n == 1 {
            let f = smooth_integrand(&mut rng, 1);
            let cov = integrate_cov(1, f.clone(), opts)?.value;
            let m = 4096;
            let arc = (0..m)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / m as f64;
                    f(&[a.cos()], &[a.sin()])
                })
                .sum::<f64>()
                * 2.0
                * PI
                / m as f64;
            rep.table.push(vec!["1".into(), "arclength".into(), num(cov), num(arc), String::new()]);
            rep.check("circle_arclength", rel_err(cov, arc) <= 1e-8, Some(rel_err(cov, arc)), "<= 1e-8 relative", "");
        }

        if n >= 2 {
            // √(1-|ω'|²)·√(1-|y|²) = √(1-|y|²-|z'|²) for z' = r_y ω'.
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let y: Vec<f64> = sample_sphere(n, &mut rng).iter().map(|v| v * rng.random::<f64>()).collect();
                let y2: f64 = y.iter().map(|v| v * v).sum();
                let ry = (1.0 - y2).sqrt();
                let om = sample_sphere(n, &mut rng);
                let op2: f64 = om[..n - 1].iter().map(|v| v * v).sum();
                let zp2: f64 = om[..n - 1].iter().map(|v| (ry * v).powi(2)).sum();
                // Compared squared, so no cancellation under the root.
                let lhs = (1.0 - op2) * (1.0 - y2);
                let rhs = 1.0 - y2 - zp2;
                worst = worst.max((lhs - rhs).abs());
            }
            rep.check(format!("weight_factorization_n{n}"), worst <= 1e-14, Some(worst), "<= 1e-14", "1000 samples");
        }
    }
    Ok(rep)
}

struct CrossCase {
    n: usize,
    size: usize,
    width: f64,
    resolution: usize,
}

fn avg_crosscheck(cfg: &ExperimentConfig) -> Result<Report> {
    let l = cfg.grid_l;
    let cases = [
        CrossCase { n: 1, size: cfg.grid_n.unwrap_or(256), width: 0.05, resolution: 64 },
        CrossCase { n: 2, size: 32, width: 0.07, resolution: 24 },
    ];
    let mut rep = Report::new(cfg, Table::new(&["n", "t", "point", "quadrature", "multiplier"]));
    for case in cases.iter().filter(|c| cfg.n.is_none_or(|n| n as usize == c.n)) {
        let n = case.n;
        let mut cf = vec![0.5 * l; n];
        cf[0] = 0.46 * l;
        let mut cg = vec![0.5 * l; n];
        cg[0] = 0.55 * l;
        let ff = TestFunction::gaussian(cf, case.width * l);
        let gf = TestFunction::Gaussian { center: cg, width: 0.8 * case.width * l, amplitude: 1.3 };
        let f = ff.sample(case.size, l)?;
        let g = gf.sample(case.size, l)?;
        let full = make_symbol(n as u32, 0, SymbolKind::Full, cfg.epsilon)?;
        let rule = SphereRule::new(2 * n, SphereMethod::Product { resolution: case.resolution })?;
        let plan = BilinearPlan::new(&f, &g, PlanOptions::default())?;
        let points: Vec<usize> = if n == 1 {
            (0..16).map(|k| case.size / 2 - 48 * case.size / 256 + k * 6 * case.size / 256).collect()
        } else {
            let s = case.size;
            let axis = [s / 2 - 6 * s / 32, s / 2 - 2 * s / 32, s / 2 + 2 * s / 32, s / 2 + 6 * s / 32];
            axis.iter().flat_map(|&a| axis.iter().map(move |&b| a * s + b)).collect()
        };
        for t in [0.05 * l, 0.1 * l, 0.2 * l] {
            let m = plan.apply(&full, t)?;
            let quad: Vec<f64> = points
                .par_iter()
                .map(|&i| {
                    let x = m.point(i);
                    average_quad(|y| ff.eval_periodic(y, l).re, |y| gf.eval_periodic(y, l).re, &x, t, &rule)
                })
                .collect::<Result<_>>()?;
            let scale = points.iter().map(|&i| m.values()[i].norm()).fold(0.0, f64::max);
            let mut err: f64 = 0.0;
            for (&i, qv) in points.iter().zip(&quad) {
                err = err.max((qv - m.values()[i].re).abs());
                rep.table.push(vec![n.to_string(), num(t), i.to_string(), num(*qv), num(m.values()[i].re)]);
            }
            rep.check(format!("paths_agree_n{n}_t{t}"), err <= 1e-2 * scale, Some(err / scale), "<= 1e-2 relative", "max over 16 points");
        }

        let t = 0.1 * l;
        let f2 = TestFunction::gaussian(vec![0.52 * l; n], 0.9 * case.width * l).sample(case.size, l)?;
        let alpha = 1.7;
        let lhs = average_mult(&full, &f.scale(alpha).add(&f2)?, &g, t)?;
        let rhs = average_mult(&full, &f, &g, t)?.scale(alpha).add(&average_mult(&full, &f2, &g, t)?)?;
        let e = lhs.max_abs_diff(&rhs)? / lhs.max_abs();
        rep.check(format!("bilinearity_n{n}"), e <= 1e-10, Some(e), "<= 1e-10 relative", "");

        let top = t * (n as f64 * 2.0).sqrt() * (case.size / 2) as f64 / l;
        let jmax = top.log2().ceil().max(0.0) as u32 + 1;
        let mut sum = GridFunction::zeros(n, case.size, l)?;
        for j in 0..=jmax {
            sum = sum.add(&plan.apply(&make_symbol(n as u32, j, SymbolKind::Piece, cfg.epsilon)?, t)?)?;
        }
        let whole = plan.apply(&full, t)?;
        let e = sum.max_abs_diff(&whole)? / whole.max_abs();
        rep.check(format!("decomposition_n{n}"), e <= 1e-10, Some(e), "<= 1e-10 relative", format!("pieces j = 0..={jmax}"));
    }
    Ok(rep)
}

fn maximal_sanity(cfg: &ExperimentConfig) -> Result<Report> {
    let l = cfg.grid_l;
    let size = cfg.grid_n.unwrap_or(256);
    let spacing = l / size as f64;
    let ts = t_grid(cfg, spacing)?;
    let full1 = make_symbol(1, 0, SymbolKind::Full, cfg.epsilon)?;
    let mut rep = Report::new(cfg, Table::new(&["pair", "x", "maximal", "g_sup_times_linear_max"]));
    let fam = TestFunctionFamily::gaussians(1, l);
    let lm_cache: Vec<(GridFunction, GridFunction)> = (0..5)
        .map(|i| {
            let mut rng = shard_rng(cfg.seed, 200 + i);
            Ok((fam.draw(&mut rng).sample(size, l)?, fam.draw(&mut rng).sample(size, l)?))
        })
        .collect::<Result<_>>()?;
    for (i, (f, g)) in lm_cache.iter().enumerate() {
        let m = maximal(&full1, f, g, &ts)?;
        let m0 = linear_max(f, &ts)?;
        let gs = g.max_abs();
        let slack = 1e-10 * gs * m0.max_abs();
        let mut worst = f64::NEG_INFINITY;
        for k in 0..m.len() {
            let (a, b) = (m.values()[k].re, gs * m0.values()[k].re);
            worst = worst.max(a - b);
            if k % (size / 32).max(1) == 0 {
                rep.table.push(vec![i.to_string(), num(m.point(k)[0]), num(a), num(b)]);
            }
        }
        rep.check(format!("linear_domination_pair{i}"), worst <= slack, Some(worst), format!("<= {slack:.3e}"), "max_x M - |g|_inf M0");
    }

    let (f, g) = &lm_cache[0];
    let mut fine = ts.clone();
    fine.extend(ts.windows(2).map(|w| (w[0] * w[1]).sqrt()));
    fine.sort_by(f64::total_cmp);
    let coarse = maximal(&full1, f, g, &ts)?;
    let refined = maximal(&full1, f, g, &fine)?;
    let drops = coarse.values().iter().zip(refined.values()).filter(|(a, b)| b.re < a.re).count();
    rep.check("refinement_monotone", drops == 0, Some(drops as f64), "= 0 points decrease", format!("{} -> {} radii", ts.len(), fine.len()));

    // Radial pair centered on a grid node of the n = 2 grid.
    let s2 = 32;
    let ts2 = t_grid(cfg, l / s2 as f64)?;
    let fr = TestFunction::gaussian(vec![0.5 * l; 2], 0.05 * l).sample(s2, l)?;
    let gr = TestFunction::Gaussian { center: vec![0.5 * l; 2], width: 0.07 * l, amplitude: 0.8 }.sample(s2, l)?;
    let full2 = make_symbol(2, 0, SymbolKind::Full, cfg.epsilon)?;
    let m = maximal(&full2, &fr, &gr, &ts2)?;
    let refl = |i: usize| (s2 - i) % s2;
    type Map<'a> = Box<dyn Fn(usize, usize) -> (usize, usize) + 'a>;
    let maps: [(&str, Map<'_>); 3] = [
        ("reflect_x1", Box::new(move |a, b| (refl(a), b))),
        ("reflect_x2", Box::new(move |a, b| (a, refl(b)))),
        ("swap_axes", Box::new(|a, b| (b, a))),
    ];
    for (name, map) in maps.iter() {
        let mut worst: f64 = 0.0;
        for a in 0..s2 {
            for b in 0..s2 {
                let (c, d) = map(a, b);
                worst = worst.max((m.values()[a * s2 + b].re - m.values()[c * s2 + d].re).abs());
            }
        }
        let rel = worst / m.max_abs();
        rep.check(format!("radial_equivariance_{name}"), rel <= 1e-12, Some(rel), "<= 1e-12 relative", "");
    }

    // Pieces whose support lies beyond every representable frequency.
    let t_max = *ts.last().expect("nonempty grid");
    let reach = 2f64.sqrt() * size as f64 / (2.0 * l) * t_max;
    let j_out = (reach.log2() + 1.0).floor() as u32 + 1;
    let mut prev = f64::INFINITY;
    let mut norms = Vec::new();
    for j in 0..=j_out {
        let v = lp_norm(&maximal(&make_symbol(1, j, SymbolKind::Piece, cfg.epsilon)?, f, g, &ts)?, 1.0)?;
        norms.push(v);
        prev = v;
    }
    rep.value("piece_l1_norms", &norms);
    rep.check(format!("beyond_band_j{j_out}"), prev < 1e-8, Some(prev), "< 1e-8", format!("2^(j-1) > {reach:.2}"));
    Ok(rep)
}

fn squarefn_bound(cfg: &ExperimentConfig) -> Result<Report> {
    let l = cfg.grid_l;
    let size = cfg.grid_n.unwrap_or(256);
    let f = TestFunction::gaussian(vec![0.47 * l], 0.03 * l).sample(size, l)?;
    let g = TestFunction::Gaussian { center: vec![0.52 * l], width: 0.06 * l, amplitude: 1.2 }.sample(size, l)?;
    let opts = PlanOptions { prune_tol: 1e-16 };
    let mut rep = Report::new(cfg, Table::new(&["j", "x", "sup_t", "sqrt2_g_gt", "g", "g_tilde"]));
    for j in j_range(cfg, 3, 5) {
        // T_s vanishes unless the annulus 2^{j-1} ≤ s|(k,l)|/L ≤ 2^{j+1} meets the frequency set.
        let lo = 2f64.powi(j as i32 - 1) * l / (2f64.sqrt() * (size / 2) as f64) / 1.1;
        let hi = 2f64.powi(j as i32 + 1) * l * 1.1;
        let step = (2f64.powi(-(j as i32)) / 8.0).exp();
        let ts = geometric_grid(lo, hi, step)?;
        let plain = square_function_parts(&f, &g, j, SquareVariant::Plain, cfg.epsilon, &ts, opts)?;
        let euler = square_function_parts(&f, &g, j, SquareVariant::Euler, cfg.epsilon, &ts, opts)?;
        let top = plain.sup.max_abs();
        let mut worst: f64 = 0.0;
        for k in 0..plain.sup.len() {
            let s = plain.sup.values()[k].re;
            let (gg, gt) = (plain.square.values()[k].re, euler.square.values()[k].re);
            let bound = 2f64.sqrt() * (gg * gt).sqrt();
            worst = worst.max((s - 1e-12 * top) / bound.max(f64::MIN_POSITIVE));
            if k % 8 == 0 {
                rep.table.push(vec![j.to_string(), num(plain.sup.point(k)[0]), num(s), num(bound), num(gg), num(gt)]);
            }
        }
        rep.check(format!("pointwise_bound_j{j}"), worst <= 1.05, Some(worst), "sup_t |T| / (sqrt2 (G Gt)^1/2) <= 1.05", format!("{} radii", ts.len()));

        let dense = geometric_grid(lo, hi, step.sqrt())?;
        let g2 = square_function_parts(&f, &g, j, SquareVariant::Plain, cfg.epsilon, &dense, opts)?.square;
        let change = g2.max_abs_diff(&plain.square)? / plain.square.max_abs();
        rep.check(format!("grid_refinement_j{j}"), change < 0.05, Some(change), "< 0.05 relative", "doubling radius density");
    }
    Ok(rep)
}

fn opnorm_trend(cfg: &ExperimentConfig) -> Result<Report> {
    let l = cfg.grid_l;
    let size = cfg.grid_n.unwrap_or(128);
    let ts = t_grid(cfg, l / size as f64)?;
    let fam = TestFunctionFamily::gaussians(1, l);
    let trials = 6;
    let mut rep = Report::new(cfg, Table::new(&["j", "lower_bound", "best_trial"]));
    let mut bounds = Vec::new();
    for j in j_range(cfg, 0, 8) {
        let sym = make_symbol(1, j, SymbolKind::Piece, cfg.epsilon)?;
        let r = opnorm_lower(|f, g| maximal(&sym, f, g, &ts), 2.0, 2.0, 1.0, &fam, size, trials, cfg.seed)?;
        rep.table.push(vec![j.to_string(), num(r.lower_bound), r.best_trial.to_string()]);
        bounds.push((j, r.lower_bound));
    }
    rep.value("lower_bounds", &bounds);
    let tail: Vec<f64> = bounds.iter().skip(3).map(|b| b.1).collect();
    let rises = tail.windows(2).filter(|w| w[1] > w[0]).count();
    rep.value("increases_past_j3", rises);
    rep.check("nonincreasing_past_j3", rises == 0, Some(rises as f64), "= 0 increases", "trend only");

    let matched = opnorm_lower_pairs(
        |f, g| average_mult(&Unit, f, g, 1.0),
        (2.0, 2.0, 1.0),
        trials,
        cfg.seed,
        |rng| {
            let f = fam.draw(rng).sample(size, l)?;
            Ok((f.clone(), f))
        },
    )?;
    rep.check(
        "product_matched_pairs",
        matched.lower_bound <= 1.0 + 1e-12 && matched.lower_bound >= 0.9,
        Some(matched.lower_bound),
        "in [0.9, 1]",
        "Cauchy-Schwarz equality case",
    );
    let zero = opnorm_lower(|f, _| Ok(f.scale(0.0)), 2.0, 2.0, 1.0, &fam, size, 2, cfg.seed)?;
    rep.check("zero_operator", zero.lower_bound == 0.0, Some(zero.lower_bound), "= 0", "");
    Ok(rep)
}

fn scales(cfg: &ExperimentConfig) -> Vec<f64> {
    let lo = cfg.r_min.unwrap_or(1024.0);
    let hi = cfg.r_max.unwrap_or(65536.0);
    let mut v = Vec::new();
    let mut r = lo;
    while r <= hi * (1.0 + 1e-12) {
        v.push(r);
        r *= 2.0;
    }
    v
}

fn cex_growth(cfg: &ExperimentConfig) -> Result<Report> {
    let rs = scales(cfg);
    let mut rep = Report::new(cfg, Table::new(&["n", "p", "R", "average", "lower_bound"]));
    let extra = cfg.n.filter(|&n| n >= 3).map(|n| n as usize);
    let cases: Vec<(usize, f64, f64)> = [(1usize, 1.0, 0.1), (2, 2.0 / 3.0, 0.15)]
        .into_iter()
        .chain(extra.map(|n| (n, n as f64 / (2 * n - 1) as f64, 0.15)))
        .collect();
    for (n, p, tol) in cases {
        let pair = CexPair::symmetric(n, p)?;
        let fit = growth_floor(&pair, &rs)?;
        let values: Vec<f64> = fit.points.iter().map(|pt| pt.1.exp2()).collect();
        let target = 1.0 - 2.0 * n as f64;
        for (r, v) in rs.iter().zip(&values) {
            let lb = if n == 1 { num(line_lower_bound(p, *r)?) } else { String::new() };
            rep.table.push(vec![n.to_string(), num(p), num(*r), num(*v), lb]);
        }
        rep.check(format!("slope_n{n}"), (fit.slope - target).abs() <= tol, Some(fit.slope), format!("{target} ± {tol}"), "");
        rep.check(format!("fit_quality_n{n}"), fit.r_squared > 0.99, Some(fit.r_squared), "> 0.99", "");
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        rep.check(format!("decreasing_in_R_n{n}"), decreasing, None, "strictly decreasing", "");
        let pred = fit.slope.exp2();
        let worst = values.windows(2).map(|w| rel_err(w[1] / w[0], pred)).fold(0.0, f64::max);
        rep.check(format!("doubling_ratio_n{n}"), worst <= 0.1, Some(worst), "within 10% of 2^slope", "");
        if n == 1 {
            let viol = rs
                .iter()
                .zip(&values)
                .map(|(r, v)| line_lower_bound(p, *r).map(|lb| *v < lb))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .filter(|&b| b)
                .count();
            rep.check("lower_bound_chain_n1", viol == 0, Some(viol as f64), "= 0 violations", "average >= 2/R int t^-1/p log^-2/p");
        }
        if n == 2 {
            let r = rs[0];
            let a = cex_average(&pair, r)?;
            let b = cex_average_at(&pair, &[r * 1f64.cos(), r * 1f64.sin()])?;
            rep.check("rotation_invariance_n2", rel_err(b, a) <= 1e-4, Some(rel_err(b, a)), "<= 1e-4 relative", "x = R(cos 1, sin 1)");
        }
        if n >= 3 {
            let v = reduced_chain(n, 1.0 / p, rs[0])?;
            rep.value(format!("reduced_chain_n{n}_first"), v);
        }
        rep.fit(format!("n{n}"), fit);
    }
    rep.plot = Some("n2".into());
    Ok(rep)
}

fn cex_divergence(cfg: &ExperimentConfig) -> Result<Report> {
    let r = cfg.r_min.unwrap_or(1024.0);
    let ks = cfg.j_min.unwrap_or(4)..=cfg.j_max.unwrap_or(200);
    let mut rep = Report::new(cfg, Table::new(&["p", "k", "truncated_average"]));
    let below = divergence_probe(&CexPair::symmetric(1, 0.9)?, r, ks.clone())?;
    let above = divergence_probe(&CexPair::symmetric(1, 1.1)?, r, ks.clone())?;
    for (p, rep_) in [(0.9, &below), (1.1, &above)] {
        for (k, v) in rep_.ks.iter().zip(&rep_.values) {
            rep.table.push(vec![num(p), k.to_string(), num(*v)]);
        }
    }
    rep.check("subcritical_increasing", below.strictly_increasing, None, "strictly increasing", "");
    rep.check("subcritical_growth", below.growth_factor > 10.0, Some(below.growth_factor), "> 10", "last / first");
    rep.check("subcritical_gap_ratio", below.gap_ratio > 10.0, Some(below.gap_ratio), "> 10", "last gap / first gap");
    rep.check("subcritical_not_cauchy", !below.cauchy, None, "last gap > 1e-6 of value", "");
    rep.check("control_monotone", above.values.windows(2).all(|w| w[1] >= w[0]), None, "non-decreasing", "");
    rep.check("control_cauchy", above.cauchy, None, "last gap <= 1e-6 of value", "");
    let full = cex_average(&CexPair::symmetric(1, 1.1)?, r)?;
    let last = *above.values.last().expect("nonempty probe");
    rep.check("control_converges", rel_err(last, full) <= 1e-6, Some(rel_err(last, full)), "<= 1e-6 relative to the full average", "");

    let short = divergence_probe(&CexPair::symmetric(1, 0.9)?, r, 4..=20)?;
    rep.value("short_range_growth_factor", short.growth_factor);
    rep.value("short_range_gap_ratio", short.gap_ratio);
    Ok(rep)
}

fn monotone_lemma(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = shard_rng(cfg.seed, 300);
    let mut rep = Report::new(cfg, Table::new(&["r1", "r2", "x0", "increasing_after", "decreasing_before"]));
    let e = monotone_since(1.0, 1.0)?;
    rep.check("r1_r2_one", (e - std::f64::consts::E).abs() < 1e-15, Some(e), "= e", "");
    let one = monotone_since(1.5, 0.0)?;
    rep.check("pure_power", one == 1.0, Some(one), "= 1", "r2 = 0");

    let mut bad = 0;
    for _ in 0..20 {
        let r1 = rng.random_range(0.1..3.0);
        let r2 = rng.random_range(0.1..3.0);
        let x0 = monotone_since(r1, r2)?;
        let lf = |x: f64| log_power_log(x, r1, r2);
        let top = (1e6f64).max(100.0 * x0);
        let after: Vec<f64> = (0..=1000).map(|i| lf(x0 * (top / x0).powf(i as f64 / 1000.0))).collect();
        let inc = after.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs());
        let start = (x0.ln() / 2.0).exp().max(1.0 + 1e-3);
        let before: Vec<f64> = (0..=200).map(|i| lf(start * (x0 / start).powf(i as f64 / 200.0))).collect();
        let dec = before.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs());
        if !(inc && dec) {
            bad += 1;
        }
        rep.table.push(vec![num(r1), num(r2), num(x0), inc.to_string(), dec.to_string()]);
    }
    rep.check("threshold_confirmed", bad == 0, Some(bad as f64), "= 0 failures", "20 random (r1, r2)");

    let mut viol = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let c = rng.random_range(1.0..10.0);
        let r1 = rng.random_range(0.1..3.0);
        let r2 = rng.random_range(0.1..3.0);
        let s = 0.1 * 10f64.powf(-12.0 * rng.random::<f64>());
        let t = (c * s).min(0.1) * 10f64.powf(-12.0 * rng.random::<f64>());
        let cp = rescale_constant(c, r1, r2)?;
        let gap = log_power_log(1.0 / s, r1, r2) - cp.ln() - log_power_log(1.0 / t, r1, r2);
        worst = worst.max(gap);
        if gap > 1e-12 {
            viol += 1;
        }
    }
    rep.check("inequality_holds", viol == 0, Some(viol as f64), "= 0 violations", format!("10000 triples; max log gap {worst:.3e}"));
    Ok(rep)
}
