//! Seeded randomized invariant suites.
//!
//! Each suite draws at least [`MIN_CASES`] cases from a fixed seed, records
//! the worst observed value of its checked quantity and compares it with a
//! fixed threshold.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::legendre::{LegendreKind, LegendreSpec};
use crate::oracle::{grid_argmin, GridSpec};
use crate::presets::worked_example_problem;
use crate::problem::{prox_certificate, prox_step, resolvent_descent_check, Bifunction, QuadraticBifunction};
use crate::sets::ConvexSet;
use crate::vector::Vector;

pub const MIN_CASES: usize = 100;
pub const DEFAULT_SEED: u64 = 0x5eed_b4e6;

/// Sampled points of `C` added to the probe points of every certificate.
const CERTIFICATE_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `worst ≤ threshold`.
    AtMost,
    /// Passes when `worst ≥ threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub bound: Bound,
    pub threshold: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.cases >= MIN_CASES
            && match self.bound {
                Bound::AtMost => self.worst <= self.threshold,
                Bound::AtLeast => self.worst >= self.threshold,
            }
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "[{}] {:<40} cases={:<5} worst={:+.3e} (need {op} {:.1e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.threshold
        )
    }
}

struct Tally {
    cases: usize,
    worst: f64,
    bound: Bound,
}

impl Tally {
    fn new(bound: Bound) -> Self {
        Tally {
            cases: 0,
            worst: match bound {
                Bound::AtMost => f64::NEG_INFINITY,
                Bound::AtLeast => f64::INFINITY,
            },
            bound,
        }
    }

    fn record(&mut self, value: f64) {
        self.cases += 1;
        self.worst = match self.bound {
            _ if value.is_nan() => f64::NAN,
            Bound::AtMost => self.worst.max(value),
            Bound::AtLeast => self.worst.min(value),
        };
    }

    fn finish(self, name: &'static str, threshold: f64) -> SuiteResult {
        SuiteResult {
            name,
            cases: self.cases,
            worst: self.worst,
            bound: self.bound,
            threshold,
        }
    }
}

fn specs() -> Vec<LegendreSpec> {
    (1..=3)
        .flat_map(|d| [LegendreSpec::squared_norm(d), LegendreSpec::negative_entropy(d)])
        .collect()
}

fn random_point(rng: &mut ChaCha8Rng, spec: &LegendreSpec) -> Result<Vector> {
    Vector::new(
        (0..spec.dim)
            .map(|_| match spec.kind {
                LegendreKind::SquaredNorm => rng.random_range(-5.0..5.0),
                LegendreKind::NegativeEntropy => rng.random_range(0.05..5.0),
            })
            .collect(),
    )
}

fn random_weights(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let head: f64 = w[..count - 1].iter().sum();
    w[count - 1] = 1.0 - head;
    w
}

/// Set/spec pairings exercised by the projection suites, with a sampler for
/// the point being projected.
fn projection_cases() -> Result<Vec<(LegendreSpec, ConvexSet)>> {
    let sq = |d| LegendreSpec::squared_norm(d);
    let ent = |d| LegendreSpec::negative_entropy(d);
    Ok(vec![
        (sq(1), ConvexSet::interval(0.0, 2.0)?),
        (sq(2), ConvexSet::boxed(vec![-1.0, 0.0], vec![1.0, 3.0])?),
        (sq(2), ConvexSet::ball(vec![0.5, -0.5], 1.5)?),
        (sq(3), ConvexSet::halfspace(vec![1.0, -2.0, 0.5], 0.7)?),
        (sq(3), ConvexSet::simplex(3)?),
        (ent(2), ConvexSet::boxed(vec![0.1, 0.5], vec![2.0, 3.0])?),
        (ent(3), ConvexSet::simplex(3)?),
        (ent(2), ConvexSet::halfspace(vec![1.0, 2.0], 2.0)?),
        (ent(2), ConvexSet::ball(vec![1.0, 1.0], 0.8)?),
    ])
}

fn sample_in_domain(rng: &mut ChaCha8Rng, spec: &LegendreSpec, set: &ConvexSet) -> Result<Vector> {
    loop {
        let y = set.sample(rng)?;
        if spec.in_domain(&y) {
            return Ok(y);
        }
    }
}

/// `‖∇f*(∇f(x)) − x‖∞` and `‖∇f(∇f*(ξ)) − ξ‖∞`.
pub fn dual_inverse(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    for spec in specs() {
        for _ in 0..MIN_CASES / 2 {
            let x = random_point(&mut rng, &spec)?;
            t.record(spec.grad_conjugate(&spec.grad(&x)?)?.dist_inf(&x)?);
            let xi = Vector::new((0..spec.dim).map(|_| rng.random_range(-3.0..3.0)).collect())?;
            t.record(spec.grad(&spec.grad_conjugate(&xi)?)?.dist_inf(&xi)?);
        }
    }
    Ok(t.finish("dual-inverse identity", 1e-10))
}

/// Central differences of `f` against `∇f`, step `1e-4·(1 + ‖x‖∞)`.
pub fn gradient_consistency(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    for spec in specs() {
        for _ in 0..MIN_CASES {
            let x = match spec.kind {
                LegendreKind::SquaredNorm => random_point(&mut rng, &spec)?,
                LegendreKind::NegativeEntropy => {
                    Vector::new((0..spec.dim).map(|_| rng.random_range(0.2..5.0)).collect())?
                }
            };
            let g = spec.grad(&x)?;
            let h = 1e-4 * (1.0 + x.norm_inf());
            let mut worst: f64 = 0.0;
            for i in 0..spec.dim {
                let e = Vector::basis(spec.dim, i);
                let fd = (spec.f(&x.axpy(h, &e)?)? - spec.f(&x.axpy(-h, &e)?)?) / (2.0 * h);
                worst = worst.max((fd - g[i]).abs());
            }
            t.record(worst);
        }
    }
    Ok(t.finish("gradient consistency", 1e-5))
}

/// `D_f(y, x) ≥ 0`, `D_f(x, x) = 0`, and `D_f(y, x) > 0` for `y ≠ x`.
///
/// The recorded value is `max(D_f(x, x), −D_f(y, x))` for distinct pairs,
/// with a strictly positive distance for distinct points counted as a
/// failure (value `+∞`) when it is zero.
pub fn bregman_nonnegativity(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    for spec in specs() {
        for _ in 0..MIN_CASES {
            let x = random_point(&mut rng, &spec)?;
            let y = random_point(&mut rng, &spec)?;
            let same = spec.bregman_distance(&x, &x)?;
            let apart = spec.bregman_distance(&y, &x)?;
            let strict = if y != x && apart <= 0.0 { f64::INFINITY } else { -apart };
            t.record(same.max(strict));
        }
    }
    Ok(t.finish("Bregman nonnegativity", 1e-10))
}

/// `D_f(x, y) + ⟨z − x, ∇f(x) − ∇f(y)⟩ ≤ D_f(z, y)`.
pub fn three_point(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtLeast);
    for spec in specs() {
        for _ in 0..MIN_CASES {
            let x = random_point(&mut rng, &spec)?;
            let y = random_point(&mut rng, &spec)?;
            let z = random_point(&mut rng, &spec)?;
            let gap = spec.grad(&x)?.sub(&spec.grad(&y)?)?;
            let lhs = spec.bregman_distance(&x, &y)? + z.sub(&x)?.dot(&gap)?;
            let rhs = spec.bregman_distance(&z, &y)?;
            t.record((rhs - lhs) / (1.0 + rhs.abs()));
        }
    }
    Ok(t.finish("three-point inequality", -1e-9))
}

/// `Σ tᵢ D_f(z, xᵢ) − D_f(z, ∇f*(Σ tᵢ ∇f(xᵢ)))` for 2 to 4 points.
pub fn dual_average_jensen(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtLeast);
    for spec in specs() {
        for count in 2..=4 {
            for _ in 0..MIN_CASES / 2 {
                let weights = random_weights(&mut rng, count);
                let points: Vec<Vector> = (0..count).map(|_| random_point(&mut rng, &spec)).collect::<Result<_>>()?;
                let refs: Vec<&Vector> = points.iter().collect();
                let z = random_point(&mut rng, &spec)?;
                let avg = spec.dual_average(&weights, &refs)?;
                let rhs: f64 = weights
                    .iter()
                    .zip(&points)
                    .map(|(w, p)| Ok(w * spec.bregman_distance(&z, p)?))
                    .sum::<Result<f64>>()?;
                t.record(rhs - spec.bregman_distance(&z, &avg)?);
            }
        }
    }
    Ok(t.finish("dual-average Jensen inequality", -1e-9))
}

/// Variational certificate `max_y ⟨z − y, ∇f(z) − ∇f(x)⟩` of `z = Proj x`
/// over probe points and 64 sampled points of `C`.
pub fn projection_certificate(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    for (spec, set) in projection_cases()? {
        for _ in 0..MIN_CASES / 4 {
            let x = random_point(&mut rng, &spec)?;
            let z = set.bregman_project(&spec, &x)?;
            let mut probes = set.probe_points(&z)?;
            for _ in 0..CERTIFICATE_SAMPLES {
                probes.push(set.sample(&mut rng)?);
            }
            t.record(set.projection_certificate(&spec, &x, &z, &probes)?);
        }
    }
    Ok(t.finish("projection certificate", 1e-8))
}

/// `D_f(y, x) − D_f(y, z) − D_f(z, x)` for `z = Proj x`, `y ∈ C`.
pub fn projection_descent(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtLeast);
    for (spec, set) in projection_cases()? {
        for _ in 0..MIN_CASES / 4 {
            let x = random_point(&mut rng, &spec)?;
            let y = sample_in_domain(&mut rng, &spec, &set)?;
            t.record(set.projection_descent_check(&spec, &x, &y)?);
        }
    }
    Ok(t.finish("projection three-point descent", -1e-9))
}

/// `‖Proj(Proj x) − Proj x‖∞`.
pub fn projection_idempotence(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    for (spec, set) in projection_cases()? {
        for _ in 0..MIN_CASES / 4 {
            let x = random_point(&mut rng, &spec)?;
            let z = set.bregman_project(&spec, &x)?;
            t.record(set.bregman_project(&spec, &z)?.dist_inf(&z)?);
        }
    }
    Ok(t.finish("projection idempotence", 1e-10))
}

/// Closed-form projection against exhaustive grid search, in units of grid
/// pitch, on instances where the grid minimizer is within a pitch or two of
/// the true one: every variant in 1D, boxes and the entropy simplex in 2D.
pub fn projection_oracle_agreement(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    let sq1 = LegendreSpec::squared_norm(1);
    let line = GridSpec::new(vec![-4.0], vec![4.0], 1601)?;
    let one_d = [
        (sq1, ConvexSet::interval(-0.5, 1.5)?, line.clone()),
        (sq1, ConvexSet::ball(vec![0.3], 1.2)?, line.clone()),
        (sq1, ConvexSet::halfspace(vec![-2.0], 1.0)?, line.clone()),
        (sq1, ConvexSet::simplex(1)?, line),
        (
            LegendreSpec::negative_entropy(1),
            ConvexSet::interval(0.2, 3.0)?,
            GridSpec::new(vec![0.01], vec![4.0], 1601)?,
        ),
    ];
    let two_d = [
        (
            LegendreSpec::squared_norm(2),
            ConvexSet::boxed(vec![-1.0, 0.0], vec![1.0, 3.0])?,
            GridSpec::new(vec![-4.0, -4.0], vec![4.0, 4.0], 201)?,
        ),
        (
            LegendreSpec::negative_entropy(2),
            ConvexSet::boxed(vec![0.1, 0.5], vec![2.0, 3.0])?,
            GridSpec::new(vec![0.02, 0.02], vec![4.0, 4.0], 200)?,
        ),
        (
            LegendreSpec::negative_entropy(2),
            ConvexSet::simplex(2)?,
            GridSpec::new(vec![0.0, 0.0], vec![1.0, 1.0], 201)?,
        ),
    ];
    for (spec, set, grid) in one_d.iter().chain(two_d.iter()) {
        let cases = if spec.dim == 1 { MIN_CASES / 2 } else { MIN_CASES / 4 };
        for _ in 0..cases {
            let x = match spec.kind {
                LegendreKind::SquaredNorm => {
                    Vector::new((0..spec.dim).map(|_| rng.random_range(-3.5..3.5)).collect())?
                }
                LegendreKind::NegativeEntropy => {
                    Vector::new((0..spec.dim).map(|_| rng.random_range(0.05..3.5)).collect())?
                }
            };
            let closed = set.bregman_project(spec, &x)?;
            let best = grid_argmin(
                |y| spec.bregman_distance(y, &x).unwrap_or(f64::INFINITY),
                set,
                grid,
            )?;
            t.record(best.dist_inf(&closed)? / grid.pitch());
        }
    }
    Ok(t.finish("projection oracle agreement (pitches)", 2.0))
}

/// 2D ball and halfspace projections against grid search. Strong convexity
/// of `½‖· − x‖²` bounds the Euclidean gap by `√(2 d h + h²)` with `d` the
/// distance from `x` to `C` and `h = √2·pitch`; the recorded value is the
/// observed gap over that bound.
pub fn projection_oracle_agreement_curved(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    let spec = LegendreSpec::squared_norm(2);
    let grid = GridSpec::new(vec![-4.0, -4.0], vec![4.0, 4.0], 201)?;
    let sets = [
        ConvexSet::ball(vec![0.3, -0.2], 1.0)?,
        ConvexSet::halfspace(vec![1.0, 0.7], 0.4)?,
    ];
    for set in &sets {
        for _ in 0..MIN_CASES / 2 {
            let x = Vector::new(vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])?;
            let closed = set.bregman_project(&spec, &x)?;
            let best = grid_argmin(|y| spec.bregman_distance(y, &x).unwrap_or(f64::INFINITY), set, &grid)?;
            let d = closed.sub(&x)?.norm2();
            let h = std::f64::consts::SQRT_2 * grid.pitch();
            t.record(best.sub(&closed)?.norm2() / (2.0 * d * h + h * h).sqrt());
        }
    }
    Ok(t.finish("projection oracle agreement (2D curved)", 1.0))
}

/// First-order certificate of prox points on the worked example and on a
/// coupled 2D quadratic, with 64 sampled directions per case.
pub fn prox_certificate_suite(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtMost);
    let worked = worked_example_problem();
    let coupled: Bifunction = QuadraticBifunction::from_rows(
        &[vec![2.0, 0.5], vec![0.5, 1.0]],
        &[vec![-2.0, 1.0], vec![-2.0, -1.0]],
        &[vec![0.0, 0.0], vec![0.0, 0.0]],
    )?
    .into();
    let cases = [
        (worked.spec, worked.g.clone(), worked.set.clone()),
        (LegendreSpec::squared_norm(2), coupled.clone(), ConvexSet::ball(vec![0.5, 0.5], 1.0)?),
        (LegendreSpec::negative_entropy(2), coupled, ConvexSet::boxed(vec![0.0, 0.0], vec![1.0, 2.0])?),
    ];
    for (spec, g, set) in &cases {
        for _ in 0..MIN_CASES / 2 {
            let a = sample_in_domain(&mut rng, spec, set)?;
            let b = sample_in_domain(&mut rng, spec, set)?;
            let lam = rng.random_range(0.01..0.1);
            let y = prox_step(spec, g, set, &a, &b, lam)?;
            let mut worst = prox_certificate(spec, g, set, &a, &b, lam, &y)?;
            let direction = g.grad_y(&a, &y)?.scale(lam)?.add(&spec.grad(&y)?.sub(&spec.grad(&b)?)?)?;
            for _ in 0..CERTIFICATE_SAMPLES {
                let w = set.sample(&mut rng)?;
                worst = worst.max(y.sub(&w)?.dot(&direction)?);
            }
            t.record(worst);
        }
    }
    Ok(t.finish("prox first-order certificate", 1e-8))
}

/// `D_f(u, x) − D_f(u, Res x) − D_f(Res x, x)` for `φ ≡ 0`, `u ∈ C`.
pub fn resolvent_descent(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new(Bound::AtLeast);
    for (spec, set) in projection_cases()? {
        for _ in 0..MIN_CASES / 4 {
            let u = sample_in_domain(&mut rng, &spec, &set)?;
            let x = random_point(&mut rng, &spec)?;
            t.record(resolvent_descent_check(&spec, &Bifunction::Zero, &set, &u, &x)?);
        }
    }
    Ok(t.finish("resolvent descent", -1e-9))
}

type Suite = fn(u64) -> Result<SuiteResult>;

/// The suites behind the property acceptance criterion.
pub const ACCEPTANCE_SUITES: [Suite; 6] = [
    dual_inverse,
    bregman_nonnegativity,
    projection_certificate,
    projection_descent,
    dual_average_jensen,
    projection_oracle_agreement,
];

/// Every suite, in reporting order.
pub const ALL_SUITES: [Suite; 12] = [
    dual_inverse,
    gradient_consistency,
    bregman_nonnegativity,
    three_point,
    dual_average_jensen,
    projection_certificate,
    projection_descent,
    projection_idempotence,
    projection_oracle_agreement,
    projection_oracle_agreement_curved,
    prox_certificate_suite,
    resolvent_descent,
];

/// Runs `suites` with one seed; a suite that errors is reported as a failure.
pub fn run_suites(suites: &[Suite], seed: u64) -> Vec<std::result::Result<SuiteResult, crate::error::Error>> {
    suites.iter().map(|suite| suite(seed)).collect()
}
