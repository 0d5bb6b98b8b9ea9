use std::f64::consts::{PI, TAU};

use bdk_core::invariants::{hs_norm_core, InvariantValue, Quantity, SigmaEngine, SweepRow};
use bdk_core::lift::{
    lift, littlewood_sandwich, verify_core_pullback, verify_invariant_pullback,
    verify_kernel_identity, LiftedSubmodule,
};
use bdk_core::nevanlinna::{
    counting_row, shapiro_change_of_variable, CountingRow, QuadratureConfig,
};
use bdk_core::report::{standard_grid, Report};
use bdk_core::submodule::DEFAULT_RANK_TOL;
use bdk_core::zw::{
    lemma64_grid, lemma65_sum, sigma1_at_origin, sigma1_zw, sigma1_zw_auto, SIGMA1_BOUND,
};
use bdk_core::{
    BiPoint, BlaschkeProduct, Complex64, GeneratorSource, Series1D, Series2D, SubmoduleApprox,
};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::grammar::{parse_complex, Polynomial};

/// Σ-level identities are checked at this multiple of the kernel tolerance.
pub const SIGMA_TOL_FACTOR: f64 = 10.0;

/// Cutoff of the closed-form Σ₁ series used by the `zw` suite.
const ZW_CUTOFF: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    /// Closed-form series of the submodule [z − w].
    Zw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepQuantity {
    /// Σ_k for every requested order.
    Sigma,
    /// Σ₀ − Σ₁.
    Gap,
    /// ‖C‖²_HS of the core operator.
    Hs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    KernelIdentity,
    CorePullback,
    InvariantPullback,
    Sandwich,
    Zw,
    Nevanlinna,
    All,
}

/// Submodule description shared by `invariants` and `sweep`.
pub struct Target {
    pub generators: Vec<Polynomial>,
    pub theta: Option<BlaschkeProduct>,
    pub phi: Option<BlaschkeProduct>,
    pub oracle: Option<Oracle>,
}

impl Target {
    fn build(&self, config: &RunConfig) -> Result<SubmoduleApprox, CliError> {
        let base: Vec<Series2D> = self.generators.iter().map(Polynomial::to_series).collect();
        let source = match (&self.theta, &self.phi) {
            (None, None) => GeneratorSource::Polynomial(base),
            (theta, phi) => GeneratorSource::Composed {
                base,
                theta: theta.clone().unwrap_or_else(BlaschkeProduct::identity),
                phi: phi.clone().unwrap_or_else(BlaschkeProduct::identity),
            },
        };
        Ok(SubmoduleApprox::build(
            source,
            config.level,
            DEFAULT_RANK_TOL,
        )?)
    }

    fn check_oracle(&self) -> Result<(), CliError> {
        let is_zw = match self.generators.as_slice() {
            [g] => {
                let terms: Vec<_> = g.terms().collect();
                matches!(terms.as_slice(), [((0, 1), cw), ((1, 0), cz)] if (*cw + *cz).norm() <= 1e-14 * cz.norm())
            }
            _ => false,
        };
        if !is_zw || self.theta.is_some() || self.phi.is_some() {
            return Err(CliError::Config(
                "--oracle zw applies only to the single generator z - w".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluates one quantity at a batch of points.
enum Evaluator {
    Engine(Box<EngineParts>),
    Oracle,
}

struct EngineParts {
    engine: SigmaEngine,
    submodule: SubmoduleApprox,
}

impl Evaluator {
    fn new(
        target: &Target,
        config: &RunConfig,
        quantity: SweepQuantity,
        orders: &[usize],
    ) -> Result<Self, CliError> {
        if target.oracle.is_some() {
            target.check_oracle()?;
            if quantity == SweepQuantity::Sigma && orders.iter().any(|&k| k > 1) {
                return Err(CliError::Config(
                    "the zw oracle provides orders 0 and 1 only".into(),
                ));
            }
            return Ok(Evaluator::Oracle);
        }
        let submodule = target.build(config)?;
        let engine = SigmaEngine::new(&submodule, config.truncation())?;
        Ok(Evaluator::Engine(Box::new(EngineParts {
            engine,
            submodule,
        })))
    }

    fn eval(
        &self,
        config: &RunConfig,
        quantity: SweepQuantity,
        order: usize,
        point: BiPoint,
    ) -> Result<InvariantValue, CliError> {
        config.guard.check_point(point)?;
        match self {
            Evaluator::Engine(parts) => Ok(match quantity {
                SweepQuantity::Sigma => parts.engine.sigma(order, point)?,
                SweepQuantity::Gap => parts.engine.gap(point)?,
                SweepQuantity::Hs => hs_norm_core(&parts.submodule, point, config.truncation())?,
            }),
            Evaluator::Oracle => {
                let mut v = sigma1_zw_auto(point.z, point.w, config.tolerance * 1e-3)?;
                match quantity {
                    SweepQuantity::Sigma if order == 0 => {
                        v.value += 1.0;
                        v.raw += 1.0;
                        v.order = 0;
                    }
                    SweepQuantity::Sigma => {}
                    SweepQuantity::Gap => {
                        v.quantity = Quantity::Gap;
                        v.value = 1.0;
                        v.raw = 1.0;
                        v.tail_estimate = 0.0;
                        v.order = 0;
                    }
                    SweepQuantity::Hs => {
                        v.quantity = Quantity::HsNormCore;
                        v.value = 2.0 * v.value + 1.0;
                        v.raw = 2.0 * v.raw + 1.0;
                        v.tail_estimate *= 2.0;
                        v.order = 0;
                    }
                }
                Ok(v)
            }
        }
    }
}

fn orders_for(quantity: SweepQuantity, orders: &[usize]) -> Vec<usize> {
    match quantity {
        SweepQuantity::Sigma => orders.to_vec(),
        _ => vec![0],
    }
}

/// Evaluates every (point, order) pair on the configured pool, keeping input order.
pub fn evaluate_grid(
    target: &Target,
    points: &[BiPoint],
    orders: &[usize],
    quantity: SweepQuantity,
    config: &RunConfig,
) -> Result<Vec<InvariantValue>, CliError> {
    for p in points {
        config.guard.check_point(*p)?;
    }
    let orders = orders_for(quantity, orders);
    let tasks: Vec<(BiPoint, usize)> = points
        .iter()
        .flat_map(|p| orders.iter().map(move |&k| (*p, k)))
        .collect();
    if tasks.is_empty() {
        return Ok(Vec::new());
    }
    let evaluator = Evaluator::new(target, config, quantity, &orders)?;
    config.pool()?.install(|| {
        tasks
            .par_iter()
            .map(|&(p, k)| evaluator.eval(config, quantity, k, p))
            .collect::<Result<Vec<_>, CliError>>()
    })
}

/// Serializes invariant values as CSV rows or a JSON array.
pub fn render_values(values: &[InvariantValue], format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let rows: Vec<SweepRow> = values.iter().map(SweepRow::from).collect();
            render_csv(
                &rows,
                &[
                    "a_re", "a_im", "b_re", "b_im", "order", "value", "tail", "level",
                ],
            )
        }
        Format::Json => render_json(values),
    }
}

fn render_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.to_string()))
}

fn render_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Sweep grid over pairs (a, b).
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// a = r_i e^{iθ_j} with `radii` radii in [0, r_max] and `angles` angles;
    /// b fixed.
    Polar {
        radii: usize,
        angles: usize,
        second: Complex64,
    },
    /// Real pairs (r_i, r_j) on a `first` × `second` grid of [0, r_max]².
    Moduli { first: usize, second: usize },
}

impl GridSpec {
    /// Parses `polar:RxA` or `moduli:RxS`.
    pub fn parse(source: &str, second: Complex64) -> Result<Self, CliError> {
        let bad = || CliError::Parse(format!("grid {source:?} must be polar:RxA or moduli:RxS"));
        let (kind, dims) = source.trim().split_once(':').ok_or_else(bad)?;
        let (x, y) = dims.split_once('x').ok_or_else(bad)?;
        let x: usize = x.trim().parse().map_err(|_| bad())?;
        let y: usize = y.trim().parse().map_err(|_| bad())?;
        match kind {
            "polar" => Ok(GridSpec::Polar {
                radii: x,
                angles: y,
                second,
            }),
            "moduli" => Ok(GridSpec::Moduli {
                first: x,
                second: y,
            }),
            _ => Err(bad()),
        }
    }

    /// Grid points in row-major order.
    pub fn points(&self, r_max: f64) -> Vec<BiPoint> {
        let radius = |i: usize, n: usize| {
            if n <= 1 {
                0.0
            } else {
                r_max * i as f64 / (n - 1) as f64
            }
        };
        match *self {
            GridSpec::Polar {
                radii,
                angles,
                second,
            } => (0..radii)
                .flat_map(|i| {
                    (0..angles).map(move |j| {
                        BiPoint::new(
                            Complex64::from_polar(radius(i, radii), TAU * j as f64 / angles as f64),
                            second,
                        )
                    })
                })
                .collect(),
            GridSpec::Moduli { first, second } => (0..first)
                .flat_map(|i| {
                    (0..second).map(move |j| BiPoint::real(radius(i, first), radius(j, second)))
                })
                .collect(),
        }
    }
}

/// Verification battery: sources × symbol pairs.
pub struct Battery {
    pub lifts: Vec<LiftedSubmodule>,
}

impl Battery {
    pub fn build(
        sources: Option<&[Polynomial]>,
        maps: Option<(BlaschkeProduct, BlaschkeProduct)>,
        level: usize,
    ) -> Result<Self, CliError> {
        let sources: Vec<Vec<Series2D>> = match sources {
            Some(g) => vec![g.iter().map(Polynomial::to_series).collect()],
            None => {
                let one = Complex64::new(1.0, 0.0);
                vec![
                    vec![Series2D::constant(one)],
                    vec![Series2D::from_terms(&[(one, 1, 0), (-one, 0, 1)])],
                    vec![Series2D::monomial(1, 0)],
                ]
            }
        };
        let maps = match maps {
            Some(m) => vec![m],
            None => vec![
                (BlaschkeProduct::power(2)?, BlaschkeProduct::power(2)?),
                (
                    BlaschkeProduct::factor(Complex64::new(0.5, 0.0))?,
                    BlaschkeProduct::power(3)?,
                ),
            ],
        };
        let mut lifts = Vec::new();
        for gens in &sources {
            let m = SubmoduleApprox::build(
                GeneratorSource::Polynomial(gens.clone()),
                level,
                DEFAULT_RANK_TOL,
            )?;
            for (theta, phi) in &maps {
                lifts.push(lift(&m, theta, phi, level)?);
            }
        }
        Ok(Self { lifts })
    }
}

fn merged(identity: &str, parts: Vec<Report>, tol: f64) -> Report {
    Report::merge(identity, parts, tol)
}

fn kernel_identity(b: &Battery, config: &RunConfig) -> Result<Report, CliError> {
    let grid = standard_grid();
    let parts = b
        .lifts
        .iter()
        .map(|l| verify_kernel_identity(l, &grid, config.guard, config.tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merged("kernel-identity", parts, config.tolerance))
}

fn core_pullback(b: &Battery, config: &RunConfig) -> Result<Report, CliError> {
    let grid = standard_grid();
    let parts = b
        .lifts
        .iter()
        .map(|l| verify_core_pullback(l, &grid, config.guard, config.tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merged("core-pullback", parts, config.tolerance))
}

fn invariant_pullback(b: &Battery, config: &RunConfig) -> Result<Report, CliError> {
    let grid = standard_grid();
    let tol = config.tolerance * SIGMA_TOL_FACTOR;
    let parts = b
        .lifts
        .iter()
        .map(|l| verify_invariant_pullback(l, &grid, config.truncation(), tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merged("invariant-pullback", parts, tol))
}

/// Residuals are bound violations, plus the norm gap where equality is expected.
fn sandwich(b: &Battery, config: &RunConfig) -> Result<Report, CliError> {
    let tol = config.tolerance * SIGMA_TOL_FACTOR;
    let mut residuals = Vec::new();
    for l in &b.lifts {
        let s = littlewood_sandwich(l, config.truncation())?;
        let below = (s.lower * s.source_norm - s.lifted_norm - s.slack).max(0.0);
        let above = (s.lifted_norm - s.upper * s.source_norm - s.slack).max(0.0);
        let equality = if s.equality_expected {
            s.norm_gap()
        } else {
            0.0
        };
        residuals.push(below.max(above).max(equality));
    }
    Ok(Report::new(
        "sandwich",
        config.level,
        Vec::new(),
        residuals,
        tol,
    ))
}

fn zw_reports(config: &RunConfig) -> Result<Vec<Report>, CliError> {
    let tol = config.tolerance;
    let zero = Complex64::new(0.0, 0.0);
    let origin = sigma1_zw(zero, zero, ZW_CUTOFF)?;
    let mut reports = vec![Report::new(
        "sigma1-zw-origin",
        ZW_CUTOFF,
        Vec::new(),
        vec![(origin.value - sigma1_at_origin()).abs()],
        tol,
    )];
    let mut excess = Vec::new();
    for i in 0..21 {
        for j in 0..21 {
            let a = Complex64::from_polar(0.95 * i as f64 / 20.0, TAU * j as f64 / 21.0);
            for s in [0.0, 0.5, 0.95] {
                let v = sigma1_zw(a, Complex64::new(s, 0.0), bdk_core::zw::DEFAULT_CUTOFF)?;
                excess.push((v.value - SIGMA1_BOUND).max(0.0));
            }
        }
    }
    reports.push(Report::new(
        "sigma1-zw-bound",
        bdk_core::zw::DEFAULT_CUTOFF,
        Vec::new(),
        excess,
        tol,
    ));
    let hs = 2.0 * origin.value + 1.0;
    reports.push(Report::new(
        "hs-corollary-origin",
        ZW_CUTOFF,
        Vec::new(),
        vec![(hs - (PI * PI / 3.0 - 1.0)).abs()],
        tol,
    ));
    let lemma64: Vec<f64> = lemma64_grid()?
        .iter()
        .map(|r| (r.lhs - r.rhs).max(0.0))
        .collect();
    reports.push(Report::new("power-inequality", 0, Vec::new(), lemma64, tol));
    let s = lemma65_sum(0.5, 10_000)?;
    reports.push(Report::new(
        "double-sum",
        s.cutoff,
        Vec::new(),
        vec![(s.total() - 1.0).abs()],
        tol,
    ));
    Ok(reports)
}

fn random_blaschke(rng: &mut ChaCha8Rng, max_degree: usize) -> Result<BlaschkeProduct, CliError> {
    let degree = rng.random_range(1..=max_degree);
    let zeros = (0..degree)
        .map(|_| Complex64::from_polar(0.9 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>()))
        .collect();
    let gamma = Complex64::from_polar(1.0, TAU * rng.random::<f64>());
    Ok(BlaschkeProduct::new(zeros, gamma)?)
}

/// Counting-function rows: 100 targets for each of 5 seeded products.
pub fn counting_rows(seed: u64) -> Result<Vec<CountingRow>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(500);
    for _ in 0..5 {
        let phi = random_blaschke(&mut rng, 5)?;
        let mut count = 0;
        while count < 100 {
            let w =
                Complex64::from_polar(0.95 * rng.random::<f64>().sqrt(), TAU * rng.random::<f64>());
            if (w - phi.at_origin()).norm() < 1e-6 {
                continue;
            }
            rows.push(counting_row(&phi, w)?);
            count += 1;
        }
    }
    Ok(rows)
}

fn nevanlinna_reports(config: &RunConfig) -> Result<Vec<Report>, CliError> {
    let rows = counting_rows(config.seed)?;
    let mut reports = vec![Report::new(
        "counting-function",
        0,
        Vec::new(),
        rows.iter().map(|r| r.abs_gap).collect(),
        config.tolerance,
    )];
    let quad = QuadratureConfig::default();
    let c = Complex64::new;
    let cases = [
        (Series1D::identity(1), BlaschkeProduct::identity()),
        (
            Series1D::from_real(&[0.0, 0.5, 1.0]),
            BlaschkeProduct::factor(c(0.5, 0.0))?,
        ),
        (
            Series1D::from_real(&[1.0, 1.0, 0.0, -1.0]),
            BlaschkeProduct::power(2)?,
        ),
        (
            Series1D::identity(1),
            BlaschkeProduct::new(vec![c(0.0, 0.3), c(-0.5, 0.0)], c(1.0, 0.0))?,
        ),
    ];
    let mut gaps = Vec::new();
    for (f, phi) in &cases {
        gaps.push(shapiro_change_of_variable(f, phi, quad)?.abs_gap);
    }
    reports.push(Report::new(
        "change-of-variable",
        quad.radial,
        Vec::new(),
        gaps,
        config.tolerance,
    ));
    Ok(reports)
}

/// Runs a suite; the battery is built once and shared by the operator suites.
pub fn run_suite(
    suite: Suite,
    config: &RunConfig,
    sources: Option<&[Polynomial]>,
    maps: Option<(BlaschkeProduct, BlaschkeProduct)>,
) -> Result<Vec<Report>, CliError> {
    let needs_battery = matches!(
        suite,
        Suite::KernelIdentity
            | Suite::CorePullback
            | Suite::InvariantPullback
            | Suite::Sandwich
            | Suite::All
    );
    let battery = if needs_battery {
        Some(Battery::build(sources, maps, config.level)?)
    } else {
        None
    };
    let b = || battery.as_ref().expect("battery built for operator suites");
    let mut reports = Vec::new();
    if matches!(suite, Suite::KernelIdentity | Suite::All) {
        reports.push(kernel_identity(b(), config)?);
    }
    if matches!(suite, Suite::CorePullback | Suite::All) {
        reports.push(core_pullback(b(), config)?);
    }
    if matches!(suite, Suite::InvariantPullback | Suite::All) {
        reports.push(invariant_pullback(b(), config)?);
    }
    if matches!(suite, Suite::Sandwich | Suite::All) {
        reports.push(sandwich(b(), config)?);
    }
    if matches!(suite, Suite::Zw | Suite::All) {
        reports.extend(zw_reports(config)?);
    }
    if matches!(suite, Suite::Nevanlinna | Suite::All) {
        reports.extend(nevanlinna_reports(config)?);
    }
    Ok(reports)
}

/// Reports as JSON, or counting rows as CSV for the nevanlinna suite.
pub fn render_reports(
    suite: Suite,
    reports: &[Report],
    config: &RunConfig,
) -> Result<Vec<u8>, CliError> {
    match (suite, config.format) {
        (Suite::Nevanlinna, Format::Csv) => render_csv(
            &counting_rows(config.seed)?,
            &["w_re", "w_im", "N_root", "N_closed", "abs_gap"],
        ),
        _ => render_json(reports),
    }
}

/// Parses an optional complex literal, defaulting to 0.
pub fn parse_second(source: Option<&str>) -> Result<Complex64, CliError> {
    source
        .map(parse_complex)
        .transpose()
        .map(|c| c.unwrap_or_default())
}
