//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use bdk_core::invariants::{sigma0, sigma1, sigma_gap, Truncation};
use bdk_core::lift::{
    kernel_psd_check, lift, littlewood_sandwich, rk_factor, szego_kernel, verify_core_pullback,
    verify_invariant_pullback, verify_kernel_identity, LiftedSubmodule,
};
use bdk_core::nevanlinna::{
    counting_closed_form, counting_function, shapiro_change_of_variable, QuadratureConfig,
};
use bdk_core::report::{seeded_points, standard_grid};
use bdk_core::submodule::DEFAULT_RANK_TOL;
use bdk_core::zw::{hs_corollary_check, lemma64_grid, lemma65_sum, sigma1_zw};
use bdk_core::{
    build_submodule, model_space_basis, BiPoint, BlaschkeProduct, Complex64, GeneratorSource,
    RadiusGuard, Series1D, Series2D, SubmoduleApprox,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod tol {
    pub const ORIGIN_SERIES: f64 = 1e-9;
    pub const ORIGIN_SERIES_TIME_S: f64 = 1.0;
    pub const ZW_BOUND: f64 = 2.0;
    pub const ZW_GRID_TIME_S: f64 = 10.0;
    pub const ENGINE_ORIGIN: f64 = 5e-3;
    pub const ENGINE_TIME_S: f64 = 120.0;
    pub const EXAMPLES: f64 = 5e-3;
    pub const GAP: f64 = 1e-2;
    pub const KERNEL: f64 = 1e-3;
    pub const SIGMA_PULLBACK: f64 = 1e-2;
    pub const SANDWICH_EQUALITY: f64 = 1e-2;
    pub const HS_BOUND: f64 = 5.0;
    pub const HS_ORIGIN: f64 = 1e-6;
    pub const COUNTING: f64 = 1e-8;
    pub const COUNTING_TIME_S: f64 = 10.0;
    pub const SHAPIRO_EXACT: f64 = 1e-6;
    pub const SHAPIRO: f64 = 1e-3;
    pub const ISOMETRY: f64 = 1e-6;
    pub const LEMMA65: f64 = 1e-5;
    pub const PSD: f64 = -1e-9;
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

fn poly(terms: &[(f64, usize, usize)]) -> Series2D {
    let t: Vec<(Complex64, usize, usize)> =
        terms.iter().map(|&(v, i, j)| (c(v, 0.0), i, j)).collect();
    Series2D::from_terms(&t)
}

fn z_minus_w() -> Series2D {
    poly(&[(1.0, 1, 0), (-1.0, 0, 1)])
}

fn origin_value() -> f64 {
    PI * PI / 6.0 - 1.0
}

type Outcome = Result<(bool, String), String>;

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let v = sigma1_zw(c(0.0, 0.0), c(0.0, 0.0), 100_000).map_err(err)?;
    let dt = secs(t.elapsed());
    let gap = (v.value - origin_value()).abs();
    Ok((
        gap <= tol::ORIGIN_SERIES && dt < tol::ORIGIN_SERIES_TIME_S,
        format!("|value - (pi^2/6 - 1)| = {gap:.2e}, {dt:.3} s"),
    ))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..21 {
        for j in 0..21 {
            let r = 0.95 * i as f64 / 20.0;
            let angle = 2.0 * PI * j as f64 / 21.0;
            for s in [0.0, 0.5, 0.95] {
                let a = Complex64::from_polar(r, angle);
                let b = c(s, 0.0);
                let v = sigma1_zw(a, b, 10_000).map_err(err)?;
                worst = worst.max(v.value);
            }
        }
    }
    let dt = secs(t.elapsed());
    Ok((
        worst <= tol::ZW_BOUND && dt < tol::ZW_GRID_TIME_S,
        format!(
            "max = {worst:.6} (origin value {:.6}), {dt:.2} s",
            origin_value()
        ),
    ))
}

fn criterion_3() -> Outcome {
    let t = Instant::now();
    let mut values = Vec::new();
    for n in [30, 60, 90] {
        let m = build_submodule(&[z_minus_w()], n, DEFAULT_RANK_TOL).map_err(err)?;
        values.push(
            sigma1(&m, BiPoint::origin(), Truncation::default())
                .map_err(err)?
                .value,
        );
    }
    let dt = secs(t.elapsed());
    let gap = (values[1] - origin_value()).abs();
    let d1 = (values[1] - values[0]).abs();
    let d2 = (values[2] - values[1]).abs();
    Ok((
        gap <= tol::ENGINE_ORIGIN && d2 < d1 && dt < tol::ENGINE_TIME_S,
        format!("N=60 gap {gap:.2e}; deltas {d1:.2e} -> {d2:.2e}; {dt:.1} s"),
    ))
}

fn criterion_4() -> Outcome {
    let m = build_submodule(
        &[poly(&[(1.0, 1, 0)]), poly(&[(1.0, 0, 1)])],
        40,
        DEFAULT_RANK_TOL,
    )
    .map_err(err)?;
    let firsts = [c(0.0, 0.0), c(0.3, 0.0), c(0.0, -0.5)];
    let seconds = [
        c(0.0, 0.0),
        c(0.4, 0.0),
        Complex64::from_polar(0.6, PI / 3.0),
    ];
    let mut worst: f64 = 0.0;
    for a in firsts {
        for b in seconds {
            let p = BiPoint::new(a, b);
            let weight = (1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr());
            let s0 = sigma0(&m, p, Truncation::default()).map_err(err)?.value;
            let s1 = sigma1(&m, p, Truncation::default()).map_err(err)?.value;
            worst = worst
                .max((s0 - weight - 1.0).abs())
                .max((s1 - weight).abs());
        }
    }
    let source = GeneratorSource::Composed {
        base: vec![poly(&[(1.0, 1, 0)])],
        theta: BlaschkeProduct::factor(c(0.5, 0.0)).map_err(err)?,
        phi: BlaschkeProduct::identity(),
    };
    let beurling = SubmoduleApprox::build(source, 40, DEFAULT_RANK_TOL).map_err(err)?;
    let mut worst_b: f64 = 0.0;
    for p in [
        BiPoint::origin(),
        BiPoint::real(0.3, -0.2),
        BiPoint::new(c(0.0, 0.5), c(0.4, 0.4)),
    ] {
        let s0 = sigma0(&beurling, p, Truncation::default())
            .map_err(err)?
            .value;
        let s1 = sigma1(&beurling, p, Truncation::default())
            .map_err(err)?
            .value;
        worst_b = worst_b.max((s0 - 1.0).abs()).max(s1.abs());
    }
    Ok((
        worst <= tol::EXAMPLES && worst_b <= tol::EXAMPLES,
        format!("zH2+wH2 max error {worst:.2e} on 9 points; Beurling max error {worst_b:.2e}"),
    ))
}

fn criterion_5() -> Outcome {
    let cases: Vec<(&str, Vec<Series2D>)> = vec![
        ("[z-w]", vec![z_minus_w()]),
        ("[z^2-w^3]", vec![poly(&[(1.0, 2, 0), (-1.0, 0, 3)])]),
        ("zH2+wH2", vec![poly(&[(1.0, 1, 0)]), poly(&[(1.0, 0, 1)])]),
        ("[z-w, z^2]", vec![z_minus_w(), poly(&[(1.0, 2, 0)])]),
    ];
    let points = [BiPoint::origin(), BiPoint::new(c(0.3, 0.0), c(0.0, -0.4))];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, gens) in cases {
        let m = build_submodule(&gens, 60, DEFAULT_RANK_TOL).map_err(err)?;
        for p in points {
            let g = sigma_gap(&m, p, Truncation::default()).map_err(err)?.value;
            worst = worst.max((g - 1.0).abs());
            detail.push(format!("{name}:{g:.4}"));
        }
    }
    Ok((
        worst <= tol::GAP,
        format!("max |gap - 1| = {worst:.2e} [{}]", detail.join(" ")),
    ))
}

struct Battery {
    lifts: Vec<(String, LiftedSubmodule)>,
}

fn battery() -> Result<Battery, String> {
    let n = 40;
    let sources = [
        ("H2", Series2D::constant(one())),
        ("[z-w]", z_minus_w()),
        ("[z]", poly(&[(1.0, 1, 0)])),
    ];
    let maps = [
        (
            "(z^2,w^2)",
            BlaschkeProduct::power(2).map_err(err)?,
            BlaschkeProduct::power(2).map_err(err)?,
        ),
        (
            "(mob0.5,w^3)",
            BlaschkeProduct::factor(c(0.5, 0.0)).map_err(err)?,
            BlaschkeProduct::power(3).map_err(err)?,
        ),
    ];
    let mut lifts = Vec::new();
    for (sname, g) in &sources {
        let m = build_submodule(std::slice::from_ref(g), n, DEFAULT_RANK_TOL).map_err(err)?;
        for (mname, theta, phi) in &maps {
            lifts.push((
                format!("{sname}{mname}"),
                lift(&m, theta, phi, n).map_err(err)?,
            ));
        }
    }
    Ok(Battery { lifts })
}

fn criterion_6(b: &Battery) -> Outcome {
    let grid = standard_grid();
    let mut worst: f64 = 0.0;
    for (_, l) in &b.lifts {
        let r =
            verify_kernel_identity(l, &grid, RadiusGuard::default(), tol::KERNEL).map_err(err)?;
        worst = worst.max(r.max_residual);
    }
    Ok((
        worst <= tol::KERNEL,
        format!(
            "max residual {worst:.2e} over {} lifts x {} pairs",
            b.lifts.len(),
            grid.len()
        ),
    ))
}

fn criterion_7(b: &Battery) -> Outcome {
    let grid = standard_grid();
    let (mut core, mut sigma): (f64, f64) = (0.0, 0.0);
    for (_, l) in &b.lifts {
        core = core.max(
            verify_core_pullback(l, &grid, RadiusGuard::default(), tol::KERNEL)
                .map_err(err)?
                .max_residual,
        );
        sigma = sigma.max(
            verify_invariant_pullback(l, &grid, Truncation::default(), tol::SIGMA_PULLBACK)
                .map_err(err)?
                .max_residual,
        );
    }
    Ok((
        core <= tol::KERNEL && sigma <= tol::SIGMA_PULLBACK,
        format!("core residual {core:.2e}; invariant residual {sigma:.2e}"),
    ))
}

fn criterion_8(b: &Battery) -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, l) in &b.lifts {
        let s = littlewood_sandwich(l, Truncation::default()).map_err(err)?;
        // Independent factors from the base points.
        let f = |x: Complex64| (1.0 - x.norm()) / (1.0 + x.norm());
        let lower = f(l.theta().at_origin()) * f(l.phi().at_origin());
        let inside = lower * s.source_norm <= s.lifted_norm + s.slack
            && s.lifted_norm <= s.source_norm / lower + s.slack;
        ok &= inside;
        if s.equality_expected {
            ok &= s.norm_gap() <= tol::SANDWICH_EQUALITY;
        }
        detail.push(format!("{name}:{:.4}/{:.4}", s.lifted_norm, s.source_norm));
    }
    Ok((ok, detail.join(" ")))
}

fn random_blaschke(rng: &mut ChaCha8Rng, max_degree: usize) -> Result<BlaschkeProduct, String> {
    let degree = rng.random_range(1..=max_degree);
    let zeros = (0..degree)
        .map(|_| {
            Complex64::from_polar(
                0.9 * rng.random::<f64>().sqrt(),
                2.0 * PI * rng.random::<f64>(),
            )
        })
        .collect();
    let gamma = Complex64::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
    BlaschkeProduct::new(zeros, gamma).map_err(err)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = random_blaschke(&mut rng, 3)?;
        let phi = random_blaschke(&mut rng, 3)?;
        let r = hs_corollary_check(&theta, &phi, None, Truncation::default()).map_err(err)?;
        worst = worst.max(2.0 * r.sigma1.value + 1.0);
    }
    let r = hs_corollary_check(
        &BlaschkeProduct::power(2).map_err(err)?,
        &BlaschkeProduct::power(3).map_err(err)?,
        None,
        Truncation::default(),
    )
    .map_err(err)?;
    let exact = PI * PI / 3.0 - 1.0;
    let gap = (r.hs_norm_sqr - exact).abs();
    Ok((
        worst <= tol::HS_BOUND && gap <= tol::HS_ORIGIN,
        format!("max 2S1+1 = {worst:.4}; (z^2, w^3) gap to pi^2/3 - 1 = {gap:.2e}"),
    ))
}

fn criterion_10() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let phi = random_blaschke(&mut rng, 5)?;
        let mut count = 0;
        while count < 100 {
            let w = Complex64::from_polar(
                0.95 * rng.random::<f64>().sqrt(),
                2.0 * PI * rng.random::<f64>(),
            );
            if (w - phi.at_origin()).norm() < 1e-6 {
                continue;
            }
            let root = counting_function(&phi, w).map_err(err)?.value;
            let closed = counting_closed_form(&phi, w).map_err(err)?;
            worst = worst.max((root - closed).abs());
            count += 1;
        }
    }
    let dt = secs(t.elapsed());
    Ok((
        worst <= tol::COUNTING && dt < tol::COUNTING_TIME_S,
        format!("max gap {worst:.2e}, {dt:.2} s"),
    ))
}

fn criterion_11() -> Outcome {
    let quad = QuadratureConfig::default();
    let base =
        shapiro_change_of_variable(&Series1D::identity(1), &BlaschkeProduct::identity(), quad)
            .map_err(err)?;
    let exact_ok = (base.lhs - 1.0).abs() <= tol::SHAPIRO_EXACT
        && (base.rhs - 1.0).abs() <= tol::SHAPIRO_EXACT;
    let cases = [
        (
            Series1D::from_real(&[0.0, 0.5, 1.0]),
            BlaschkeProduct::factor(c(0.5, 0.0)).map_err(err)?,
        ),
        (
            Series1D::from_real(&[1.0, 1.0, 0.0, -1.0]),
            BlaschkeProduct::power(2).map_err(err)?,
        ),
        (
            Series1D::from_real(&[0.0, 1.0]),
            BlaschkeProduct::new(vec![c(0.0, 0.3), c(-0.5, 0.0)], one()).map_err(err)?,
        ),
    ];
    let mut worst: f64 = 0.0;
    for (f, phi) in &cases {
        worst = worst.max(
            shapiro_change_of_variable(f, phi, quad)
                .map_err(err)?
                .abs_gap,
        );
    }
    Ok((
        exact_ok && worst <= tol::SHAPIRO,
        format!(
            "f=z: lhs {:.8} rhs {:.8}; other cases max gap {worst:.2e}",
            base.lhs, base.rhs
        ),
    ))
}

fn random_polynomial(rng: &mut ChaCha8Rng) -> Series2D {
    let mut terms = Vec::new();
    for i in 0..=3usize {
        for j in 0..=(3 - i) {
            terms.push((
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                i,
                j,
            ));
        }
    }
    Series2D::from_terms(&terms)
}

fn criterion_12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let samples: Vec<Series2D> = (0..20).map(|_| random_polynomial(&mut rng)).collect();
    let mob = BlaschkeProduct::factor(c(0.5, 0.0)).map_err(err)?;
    let alpha0 = model_space_basis(&mob, 60).elements()[0].clone();
    let f2 = Series2D::from_univariate(&alpha0, bdk_core::Variable::Z);
    let configs = [
        (
            Series2D::constant(one()),
            BlaschkeProduct::power(2).map_err(err)?,
            BlaschkeProduct::power(2).map_err(err)?,
        ),
        (f2, mob, BlaschkeProduct::identity()),
    ];
    let mut worst: f64 = 0.0;
    for (f, theta, phi) in &configs {
        let r =
            bdk_core::lift::weighted_composition_isometry(f, theta, phi, &samples, tol::ISOMETRY)
                .map_err(err)?;
        worst = worst.max(r.max_residual);
    }
    Ok((
        worst <= tol::ISOMETRY,
        format!("max | ||f (p o B)|| - ||p|| | = {worst:.2e}"),
    ))
}

fn criterion_13() -> Outcome {
    let grid = lemma64_grid().map_err(err)?;
    let holds = grid.iter().all(|r| r.holds);
    let boundary = grid.iter().filter(|r| r.boundary_case).all(|r| r.equality);
    let s = lemma65_sum(0.5, 10_000).map_err(err)?;
    let gap = (s.total() - 1.0).abs();
    Ok((
        grid.len() == 50 && holds && boundary && gap <= tol::LEMMA65,
        format!(
            "{} cases hold, boundary equalities detected; lemma65(0.5) gap {gap:.2e}",
            grid.len()
        ),
    ))
}

fn criterion_14() -> Outcome {
    let points = seeded_points(14, 20, 0.7);
    let guard = RadiusGuard::default();
    let n = 30;
    let zw = build_submodule(&[z_minus_w()], n, DEFAULT_RANK_TOL).map_err(err)?;
    let zpw = build_submodule(
        &[poly(&[(1.0, 1, 0)]), poly(&[(1.0, 0, 1)])],
        n,
        DEFAULT_RANK_TOL,
    )
    .map_err(err)?;
    let sq = BlaschkeProduct::power(2).map_err(err)?;
    let mob = BlaschkeProduct::factor(c(0.5, 0.0)).map_err(err)?;
    let b = |p: BiPoint| BiPoint::new(sq.eval(p.z), sq.eval(p.w));
    let one_minus = |lm: BiPoint, zwp: BiPoint| one() - lm.z.conj() * zwp.z;
    let reports = [
        kernel_psd_check("szego", &|l, q| Ok(szego_kernel(l, q)), &points).map_err(err)?,
        kernel_psd_check("K[z-w]", &|l, q| zw.kernel_eval(l, q, guard), &points).map_err(err)?,
        kernel_psd_check("K[zH2+wH2]", &|l, q| zpw.kernel_eval(l, q, guard), &points)
            .map_err(err)?,
        kernel_psd_check(
            "R(z^2,w^2)",
            &|l, q| rk_factor(&sq, &sq, l, q, guard),
            &points,
        )
        .map_err(err)?,
        kernel_psd_check(
            "R(mob,w^2)",
            &|l, q| rk_factor(&mob, &sq, l, q, guard),
            &points,
        )
        .map_err(err)?,
        kernel_psd_check(
            "S-K[z-w]",
            &|l, q| Ok(szego_kernel(l, q) - zw.kernel_eval(l, q, guard)?),
            &points,
        )
        .map_err(err)?,
        kernel_psd_check(
            "(1-lz)K o B R",
            &|l, q| {
                Ok(one_minus(l, q)
                    * zw.kernel_eval(b(l), b(q), guard)?
                    * rk_factor(&sq, &sq, l, q, guard)?)
            },
            &points,
        )
        .map_err(err)?,
    ];
    let worst = reports
        .iter()
        .map(|r| r.min_eigenvalue)
        .fold(f64::INFINITY, f64::min);
    let detail: Vec<String> = reports
        .iter()
        .map(|r| format!("{}:{:.1e}", r.name, r.min_eigenvalue))
        .collect();
    Ok((
        worst >= tol::PSD,
        format!("min eigenvalue {worst:.2e} [{}]", detail.join(" ")),
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| {
        let (pass, detail) = match outcome {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    };
    report(1, "sigma1 series at the origin", criterion_1());
    report(2, "sigma1 series bound on the polar grid", criterion_2());
    report(3, "engine sigma1 of [z-w] at the origin", criterion_3());
    report(4, "closed-form example submodules", criterion_4());
    report(5, "sigma0 - sigma1 = 1", criterion_5());
    match battery() {
        Ok(b) => {
            report(6, "kernel identity", criterion_6(&b));
            report(7, "core and invariant pullback", criterion_7(&b));
            report(8, "HS sandwich", criterion_8(&b));
        }
        Err(e) => {
            for (id, name) in [
                (6, "kernel identity"),
                (7, "core and invariant pullback"),
                (8, "HS sandwich"),
            ] {
                report(id, name, Err(e.clone()));
            }
        }
    }
    report(9, "HS corollary", criterion_9());
    report(10, "counting function agreement", criterion_10());
    report(11, "change of variable formula", criterion_11());
    report(12, "weighted composition isometry", criterion_12());
    report(13, "scalar lemmas", criterion_13());
    report(14, "positive kernels", criterion_14());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
