//! Bifunctions, the fixed-point map, assumption checkers, the prox
//! subproblem and the resolvent.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::legendre::{LegendreKind, LegendreSpec};
use crate::oracle::{grid_argmin, projected_gradient, GradientControl, GridSpec};
use crate::sets::ConvexSet;
use crate::vector::Vector;

/// Symmetry and `g(x, x) = 0` checks on matrix entries.
const MATRIX_TOL: f64 = 1e-12;

/// Resolvent fixed-point iteration controls.
const RESOLVENT_RELAXATION: f64 = 0.5;
const RESOLVENT_MAX_ITERS: usize = 10_000;
const RESOLVENT_TOL: f64 = 1e-12;

fn to_dvector(x: &Vector) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

fn from_dvector(x: &DVector<f64>) -> Result<Vector> {
    Vector::new(x.as_slice().to_vec())
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("{what} must be a non-empty square matrix")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} has a non-finite entry")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= MATRIX_TOL * (1.0 + m[(i, j)].abs())))
}

/// `g(x, y) = yᵀQy + xᵀRy + xᵀPx` with `Q + R + P` skew (so `g(x, x) = 0`)
/// and `Q` positive semidefinite (so `g(x, ·)` is convex).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBifunction {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    p: DMatrix<f64>,
}

impl QuadraticBifunction {
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>, p: DMatrix<f64>) -> Result<Self> {
        let n = q.nrows();
        for (m, name) in [(&q, "Q"), (&r, "R"), (&p, "P")] {
            if m.nrows() != n || m.ncols() != n || n == 0 {
                return Err(Error::InvalidInput(format!("{name} must be {n}x{n}")));
            }
        }
        if !is_symmetric(&q) || !is_symmetric(&p) {
            return Err(Error::InvalidInput("Q and P must be symmetric".into()));
        }
        let sum = &q + &r + &p;
        let sym = (&sum + sum.transpose()) * 0.5;
        if sym.iter().any(|v| v.abs() > MATRIX_TOL * (1.0 + q.amax() + r.amax() + p.amax())) {
            return Err(Error::InvalidInput(
                "g(x, x) must vanish: Q + R + P has a nonzero symmetric part".into(),
            ));
        }
        let min_eig = q.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -MATRIX_TOL * (1.0 + q.amax()) {
            return Err(Error::InvalidInput(format!(
                "Q must be positive semidefinite, smallest eigenvalue {min_eig}"
            )));
        }
        Ok(QuadraticBifunction { q, r, p })
    }

    pub fn from_rows(q: &[Vec<f64>], r: &[Vec<f64>], p: &[Vec<f64>]) -> Result<Self> {
        QuadraticBifunction::new(
            matrix_from_rows(q, "Q")?,
            matrix_from_rows(r, "R")?,
            matrix_from_rows(p, "P")?,
        )
    }

    /// One-dimensional `g(x, y) = q y² + r x y + p x²`.
    pub fn scalar(q: f64, r: f64, p: f64) -> Result<Self> {
        QuadraticBifunction::from_rows(&[vec![q]], &[vec![r]], &[vec![p]])
    }

    /// `16y² + 9xy − 25x²`, the one-dimensional worked example.
    pub fn worked_example() -> Self {
        QuadraticBifunction::scalar(16.0, 9.0, -25.0).expect("valid coefficients")
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Evaluated as `(y − x)ᵀ(Q(y + x) + Rᵀx)`, which equals
    /// `yᵀQy + xᵀRy + xᵀPx` because `xᵀ(Q + R + P)x = 0`, and vanishes
    /// exactly on the diagonal.
    fn evaluate(&self, x: &Vector, y: &Vector) -> f64 {
        let (x, y) = (to_dvector(x), to_dvector(y));
        let d = &y - &x;
        d.dot(&(&self.q * (&y + &x) + self.r.tr_mul(&x)))
    }

    fn grad_y(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        let (xd, yd) = (to_dvector(x), to_dvector(y));
        from_dvector(&(&self.q * yd * 2.0 + self.r.tr_mul(&xd)))
    }
}

/// A bifunction `C × C → ℝ` vanishing on the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum Bifunction {
    Zero,
    Quadratic(QuadraticBifunction),
}

impl Bifunction {
    pub fn is_zero(&self) -> bool {
        matches!(self, Bifunction::Zero)
    }

    fn check_dims(&self, x: &Vector, y: &Vector) -> Result<()> {
        y.check_dim(x.dim())?;
        if let Bifunction::Quadratic(q) = self {
            x.check_dim(q.dim())?;
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check_dims(x, y)?;
        Ok(match self {
            Bifunction::Zero => 0.0,
            Bifunction::Quadratic(q) => q.evaluate(x, y),
        })
    }

    /// Gradient of `y ↦ g(x, y)`.
    pub fn grad_y(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_dims(x, y)?;
        match self {
            Bifunction::Zero => Ok(Vector::zeros(x.dim())),
            Bifunction::Quadratic(q) => q.grad_y(x, y),
        }
    }
}

impl From<QuadraticBifunction> for Bifunction {
    fn from(value: QuadraticBifunction) -> Self {
        Bifunction::Quadratic(value)
    }
}

/// `S(x) = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    a: DMatrix<f64>,
}

impl LinearMap {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.nrows() != a.ncols() {
            return Err(Error::InvalidInput("linear map needs a non-empty square matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear map has a non-finite entry".into()));
        }
        Ok(LinearMap { a })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        LinearMap::new(matrix_from_rows(rows, "A")?)
    }

    pub fn identity(dim: usize) -> Self {
        LinearMap {
            a: DMatrix::identity(dim.max(1), dim.max(1)),
        }
    }

    /// `S(x) = factor · x`.
    pub fn scaling(dim: usize, factor: f64) -> Result<Self> {
        LinearMap::new(DMatrix::identity(dim.max(1), dim.max(1)) * factor)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        from_dvector(&(&self.a * to_dvector(x)))
    }
}

/// Everything that defines one problem instance; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemBundle {
    pub spec: LegendreSpec,
    pub set: ConvexSet,
    pub g: Bifunction,
    pub phi: Bifunction,
    pub map: LinearMap,
    pub c1: f64,
    pub c2: f64,
}

impl ProblemBundle {
    pub fn new(
        spec: LegendreSpec,
        set: ConvexSet,
        g: Bifunction,
        phi: Bifunction,
        map: LinearMap,
        c1: f64,
        c2: f64,
    ) -> Result<Self> {
        let dim = spec.dim;
        if set.dim() != dim || map.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: if set.dim() != dim { set.dim() } else { map.dim() },
            });
        }
        for b in [&g, &phi] {
            if let Bifunction::Quadratic(q) = b {
                if q.dim() != dim {
                    return Err(Error::Dimension {
                        expected: dim,
                        found: q.dim(),
                    });
                }
            }
        }
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Bregman-Lipschitz coefficients must be positive, got c1 = {c1}, c2 = {c2}"
            )));
        }
        Ok(ProblemBundle {
            spec,
            set,
            g,
            phi,
            map,
            c1,
            c2,
        })
    }

    /// Upper limit `min(1/c₁, 1/c₂)` for the prox step sizes.
    pub fn step_limit(&self) -> f64 {
        (1.0 / self.c1).min(1.0 / self.c2)
    }

    pub fn prox(&self, bifunction_at: &Vector, bregman_at: &Vector, lam: f64) -> Result<Vector> {
        prox_step(&self.spec, &self.g, &self.set, bifunction_at, bregman_at, lam)
    }

    pub fn resolvent(&self, x: &Vector) -> Result<Vector> {
        resolvent(&self.spec, &self.phi, &self.set, x)
    }
}

/// `argmin_{y ∈ C} λ g(a, y) + D_f(y, b)` with bifunction anchor `a` and
/// Bregman anchor `b`.
///
/// `a = b` gives the `y`-step of the iteration; `a = y`, `b = x` gives the
/// `z`-step. Under the squared norm with a quadratic bifunction the
/// objective is `½(y − y₀)ᵀH(y − y₀)` with `H = I + 2λQ`, so the constrained
/// minimizer is the projection of `y₀` whenever that projection is exact for
/// `H`: one dimension, `H` a multiple of the identity, or a box with diagonal
/// `H`. Other cases use projected gradient.
pub fn prox_step(
    spec: &LegendreSpec,
    g: &Bifunction,
    set: &ConvexSet,
    bifunction_at: &Vector,
    bregman_at: &Vector,
    lam: f64,
) -> Result<Vector> {
    if !(lam >= 0.0 && lam.is_finite()) {
        return Err(Error::InvalidInput(format!("prox step size {lam} must be non-negative")));
    }
    spec.check_domain(bregman_at)?;
    bifunction_at.check_dim(spec.dim)?;
    let quad = match g {
        Bifunction::Quadratic(q) if lam > 0.0 => q,
        _ => return set.bregman_project(spec, bregman_at),
    };
    if spec.kind == LegendreKind::SquaredNorm {
        let n = spec.dim;
        let h = DMatrix::<f64>::identity(n, n) + quad.q() * (2.0 * lam);
        let rhs = to_dvector(bregman_at) - quad.r().tr_mul(&to_dvector(bifunction_at)) * lam;
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)] == 0.0));
        let scalar = diagonal && (0..n).all(|i| h[(i, i)] == h[(0, 0)]);
        let boxed = matches!(set, ConvexSet::Box { .. });
        if diagonal && (n == 1 || scalar || boxed) {
            let unconstrained = Vector::new((0..n).map(|i| rhs[i] / h[(i, i)]).collect())?;
            return set.euclidean_project(&unconstrained);
        }
    }
    prox_iterative(spec, quad, set, bifunction_at, bregman_at, lam)
}

fn prox_iterative(
    spec: &LegendreSpec,
    g: &QuadraticBifunction,
    set: &ConvexSet,
    bifunction_at: &Vector,
    bregman_at: &Vector,
    lam: f64,
) -> Result<Vector> {
    let grad_anchor = spec.grad(bregman_at)?;
    let start = set.interior_start(spec, bregman_at)?;
    projected_gradient(
        |y| match spec.bregman_distance(y, bregman_at) {
            Ok(d) => lam * g.evaluate(bifunction_at, y) + d,
            Err(_) => f64::INFINITY,
        },
        |y| g.grad_y(bifunction_at, y)?.scale(lam)?.add(&spec.grad(y)?.sub(&grad_anchor)?),
        |y| set.euclidean_project(y),
        &start,
        GradientControl::default(),
    )
}

/// First-order optimality residual of a prox point `y`:
/// `max_w ⟨y − w, λ∂₂g(a, y) + ∇f(y) − ∇f(b)⟩` over probe points `w ∈ C`.
/// At most `tol` when `y` solves the prox subproblem.
pub fn prox_certificate(
    spec: &LegendreSpec,
    g: &Bifunction,
    set: &ConvexSet,
    bifunction_at: &Vector,
    bregman_at: &Vector,
    lam: f64,
    y: &Vector,
) -> Result<f64> {
    let direction = g
        .grad_y(bifunction_at, y)?
        .scale(lam)?
        .add(&spec.grad(y)?.sub(&spec.grad(bregman_at)?)?)?;
    set.probe_points(y)?
        .iter()
        .try_fold(f64::NEG_INFINITY, |worst, w| Ok(worst.max(y.sub(w)?.dot(&direction)?)))
}

/// Resolvent `Res^f_φ(x)`: the `z ∈ C` with
/// `φ(z, y) + ⟨∇f(z) − ∇f(x), y − z⟩ ≥ 0` for all `y ∈ C`.
///
/// For `φ ≡ 0` this is exactly the Bregman projection (same code path).
/// Otherwise a relaxed fixed-point iteration
/// `z ← ½ z + ½ argmin_y {φ(z, y) + D_f(y, x)}` runs until successive
/// iterates agree to `1e-12`.
pub fn resolvent(spec: &LegendreSpec, phi: &Bifunction, set: &ConvexSet, x: &Vector) -> Result<Vector> {
    let mut z = set.bregman_project(spec, x)?;
    if phi.is_zero() {
        return Ok(z);
    }
    let mut displacement = f64::INFINITY;
    for _ in 0..RESOLVENT_MAX_ITERS {
        let target = prox_step(spec, phi, set, &z, x, 1.0)?;
        let next = z.zip_map(&target, |a, b| (1.0 - RESOLVENT_RELAXATION) * a + RESOLVENT_RELAXATION * b)?;
        displacement = next.dist_inf(&z)?;
        z = next;
        if displacement < RESOLVENT_TOL {
            return Ok(z);
        }
    }
    Err(Error::Convergence {
        what: "resolvent fixed-point iteration",
        iterations: RESOLVENT_MAX_ITERS,
        displacement,
    })
}

/// Worst violation `−min_y [φ(z, y) + ⟨∇f(z) − ∇f(x), y − z⟩]` of the
/// resolvent inequality over probe points; at most `tol` for the true
/// resolvent.
pub fn resolvent_certificate(
    spec: &LegendreSpec,
    phi: &Bifunction,
    x: &Vector,
    z: &Vector,
    probes: &[Vector],
) -> Result<f64> {
    let gap = spec.grad(z)?.sub(&spec.grad(x)?)?;
    probes.iter().try_fold(f64::NEG_INFINITY, |worst, y| {
        let value = phi.evaluate(z, y)? + gap.dot(&y.sub(z)?)?;
        Ok(worst.max(-value))
    })
}

/// `D_f(u, x) − D_f(u, Res(x)) − D_f(Res(x), x)` for a fixed point `u` of
/// the resolvent; non-negative.
pub fn resolvent_descent_check(
    spec: &LegendreSpec,
    phi: &Bifunction,
    set: &ConvexSet,
    u: &Vector,
    x: &Vector,
) -> Result<f64> {
    let r = resolvent(spec, phi, set, x)?;
    Ok(spec.bregman_distance(u, x)? - spec.bregman_distance(u, &r)? - spec.bregman_distance(&r, x)?)
}

/// Outcome of a sampled assumption check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleReport {
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub samples: usize,
    pub passed: bool,
}

/// Monotonicity: `max g(x, y) + g(y, x)` over the samples, passing when `≤ tol`.
pub fn check_monotone(g: &Bifunction, samples: &[(Vector, Vector)], tol: f64) -> Result<SampleReport> {
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in samples {
        worst = worst.max(g.evaluate(x, y)? + g.evaluate(y, x)?);
    }
    Ok(SampleReport {
        worst,
        samples: samples.len(),
        passed: samples.is_empty() || worst <= tol,
    })
}

/// Pseudomonotonicity implied by monotonicity: over samples with
/// `g(x, y) ≥ 0`, the largest `g(y, x)`, passing when `≤ tol`.
pub fn check_pseudomonotone(g: &Bifunction, samples: &[(Vector, Vector)], tol: f64) -> Result<SampleReport> {
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    for (x, y) in samples {
        if g.evaluate(x, y)? >= 0.0 {
            used += 1;
            worst = worst.max(g.evaluate(y, x)?);
        }
    }
    Ok(SampleReport {
        worst,
        samples: used,
        passed: used == 0 || worst <= tol,
    })
}

/// Bregman-Lipschitz condition: smallest
/// `g(x, y) + g(y, z) − g(x, z) + c₁ D_f(y, x) + c₂ D_f(z, y)` over the
/// samples, passing when `≥ −tol`.
pub fn check_bregman_lipschitz(
    g: &Bifunction,
    spec: &LegendreSpec,
    c1: f64,
    c2: f64,
    samples: &[(Vector, Vector, Vector)],
    tol: f64,
) -> Result<SampleReport> {
    let mut worst = f64::INFINITY;
    for (x, y, z) in samples {
        worst = worst.min(bregman_lipschitz_slack(g, spec, c1, c2, x, y, z)?);
    }
    Ok(SampleReport {
        worst,
        samples: samples.len(),
        passed: samples.is_empty() || worst >= -tol,
    })
}

pub fn bregman_lipschitz_slack(
    g: &Bifunction,
    spec: &LegendreSpec,
    c1: f64,
    c2: f64,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<f64> {
    Ok(g.evaluate(x, y)? + g.evaluate(y, z)? - g.evaluate(x, z)?
        + c1 * spec.bregman_distance(y, x)?
        + c2 * spec.bregman_distance(z, y)?)
}

/// Bregman nonexpansiveness: largest `D_f(Sx, Sy) / D_f(x, y)` over the
/// samples, passing when `≤ 1 + tol`.
pub fn check_bregman_nonexpansive(
    map: &LinearMap,
    spec: &LegendreSpec,
    samples: &[(Vector, Vector)],
    tol: f64,
) -> Result<SampleReport> {
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in samples {
        let base = spec.bregman_distance(x, y)?;
        if base == 0.0 {
            return Err(Error::DegenerateSample(format!("pair ({x}, {y}) has zero distance")));
        }
        let image = spec.bregman_distance(&map.apply(x)?, &map.apply(y)?)?;
        worst = worst.max(image / base);
    }
    Ok(SampleReport {
        worst,
        samples: samples.len(),
        passed: samples.is_empty() || worst <= 1.0 + tol,
    })
}

/// Absolute slack allowed by [`ProblemBundle::check_assumptions`].
pub const ASSUMPTION_TOL: f64 = 1e-9;

/// One sampled assumption check.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub report: SampleReport,
}

impl ProblemBundle {
    /// Samples `C` with a fixed seed and checks monotonicity of `g` and `φ`,
    /// the Bregman-Lipschitz condition on `g` with `(c₁, c₂)` and Bregman
    /// nonexpansiveness of `S`. Pseudomonotonicity follows from monotonicity
    /// and is reported as well.
    pub fn check_assumptions(&self, samples: usize, seed: u64) -> Result<Vec<AssumptionCheck>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Result<Vector> {
            loop {
                let x = self.set.sample(&mut rng)?;
                if self.spec.in_domain(&x) {
                    return Ok(x);
                }
            }
        };
        let mut pairs = Vec::with_capacity(samples);
        let mut triples = Vec::with_capacity(samples);
        while pairs.len() < samples {
            let (x, y, z) = (draw()?, draw()?, draw()?);
            if x == y {
                continue;
            }
            triples.push((x.clone(), y.clone(), z));
            pairs.push((x, y));
        }
        let tol = ASSUMPTION_TOL;
        Ok(vec![
            AssumptionCheck {
                name: "g monotone",
                report: check_monotone(&self.g, &pairs, tol)?,
            },
            AssumptionCheck {
                name: "g pseudomonotone",
                report: check_pseudomonotone(&self.g, &pairs, tol)?,
            },
            AssumptionCheck {
                name: "g Bregman-Lipschitz",
                report: check_bregman_lipschitz(&self.g, &self.spec, self.c1, self.c2, &triples, tol)?,
            },
            AssumptionCheck {
                name: "phi monotone",
                report: check_monotone(&self.phi, &pairs, tol)?,
            },
            AssumptionCheck {
                name: "S Bregman nonexpansive",
                report: check_bregman_nonexpansive(&self.map, &self.spec, &pairs, tol)?,
            },
        ])
    }
}

/// Equilibrium-problem membership residual of a candidate `y*`:
/// `max_{x ∈ grid ∩ C} g(x, y*)`, which is `≤ 0` for members of `EP(g)`.
pub fn ep_violation(g: &Bifunction, set: &ConvexSet, candidate: &Vector, grid: &GridSpec) -> Result<f64> {
    let x = grid_argmin(
        |x| g.evaluate(x, candidate).map(|v| -v).unwrap_or(f64::INFINITY),
        set,
        grid,
    )?;
    g.evaluate(&x, candidate)
}
