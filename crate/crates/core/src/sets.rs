//! Closed convex feasible sets and Bregman projections onto them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{LegendreKind, LegendreSpec};
use crate::oracle::{projected_gradient, GradientControl};
use crate::vector::Vector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConvexSet {
    /// `lower ≤ x ≤ upper` componentwise.
    Box { lower: Vector, upper: Vector },
    /// `‖x − center‖ ≤ radius`.
    Ball { center: Vector, radius: f64 },
    /// `⟨normal, x⟩ ≤ offset`.
    Halfspace { normal: Vector, offset: f64 },
    /// Standard simplex `{x ≥ 0, Σ xᵢ = 1}`.
    Simplex { dim: usize },
}

impl ConvexSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        ConvexSet::Box {
            lower: Vector::new(lower)?,
            upper: Vector::new(upper)?,
        }
        .validated()
    }

    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        ConvexSet::boxed(vec![lower], vec![upper])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        ConvexSet::Ball {
            center: Vector::new(center)?,
            radius,
        }
        .validated()
    }

    pub fn halfspace(normal: Vec<f64>, offset: f64) -> Result<Self> {
        ConvexSet::Halfspace {
            normal: Vector::new(normal)?,
            offset,
        }
        .validated()
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        ConvexSet::Simplex { dim }.validated()
    }

    /// Checks the structural invariants; deserialized sets go through this too.
    pub fn validated(self) -> Result<Self> {
        match &self {
            ConvexSet::Box { lower, upper } => {
                upper.check_dim(lower.dim())?;
                if let Some(i) = (0..lower.dim()).find(|&i| lower[i] > upper[i]) {
                    return Err(Error::InvalidInput(format!(
                        "box lower bound {} exceeds upper bound {} in component {i}",
                        lower[i], upper[i]
                    )));
                }
            }
            ConvexSet::Ball { radius, .. } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidInput(format!("ball radius {radius} must be positive")));
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                if !(normal.norm2() > 0.0) || !offset.is_finite() {
                    return Err(Error::InvalidInput("halfspace needs a nonzero normal and finite offset".into()));
                }
            }
            ConvexSet::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidInput("simplex dimension must be positive".into()));
                }
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.dim(),
            ConvexSet::Ball { center, .. } => center.dim(),
            ConvexSet::Halfspace { normal, .. } => normal.dim(),
            ConvexSet::Simplex { dim } => *dim,
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        x.check_dim(self.dim())?;
        Ok(match self {
            ConvexSet::Box { lower, upper } => {
                (0..x.dim()).all(|i| x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)
            }
            ConvexSet::Ball { center, radius } => x.sub(center)?.norm2() <= radius + tol,
            ConvexSet::Halfspace { normal, offset } => {
                normal.dot(x)? <= offset + tol * normal.norm2()
            }
            ConvexSet::Simplex { .. } => {
                x.iter().all(|&c| c >= -tol) && (x.sum() - 1.0).abs() <= tol
            }
        })
    }

    /// Axis-aligned bounding box, `None` for unbounded sets.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        match self {
            ConvexSet::Box { lower, upper } => Some((lower.clone(), upper.clone())),
            ConvexSet::Ball { center, radius } => Some((
                center.map(|c| c - radius).ok()?,
                center.map(|c| c + radius).ok()?,
            )),
            ConvexSet::Halfspace { .. } => None,
            ConvexSet::Simplex { dim } => Some((Vector::zeros(*dim), Vector::filled(*dim, 1.0).ok()?)),
        }
    }

    /// Euclidean (nearest-point) projection.
    pub fn euclidean_project(&self, x: &Vector) -> Result<Vector> {
        x.check_dim(self.dim())?;
        match self {
            ConvexSet::Box { lower, upper } => {
                Vector::new((0..x.dim()).map(|i| x[i].clamp(lower[i], upper[i])).collect())
            }
            ConvexSet::Ball { center, radius } => {
                let offset = x.sub(center)?;
                let dist = offset.norm2();
                if dist <= *radius {
                    Ok(x.clone())
                } else {
                    center.axpy(radius / dist, &offset)
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                let excess = normal.dot(x)? - offset;
                if excess <= 0.0 {
                    Ok(x.clone())
                } else {
                    x.axpy(-excess / normal.dot(normal)?, normal)
                }
            }
            ConvexSet::Simplex { .. } => simplex_euclidean(x),
        }
    }

    /// Bregman projection `argmin_{y ∈ C} D_f(y, x)`.
    ///
    /// Closed forms: every set under the squared norm (Euclidean projection),
    /// negative entropy on a box (componentwise clamp, since the distance is
    /// separable) and negative entropy on the simplex (normalization). Other
    /// pairs run the projected-gradient fallback on `y ↦ D_f(y, x)`.
    pub fn bregman_project(&self, spec: &LegendreSpec, x: &Vector) -> Result<Vector> {
        spec.check_domain(x)?;
        x.check_dim(self.dim())?;
        match (spec.kind, self) {
            (LegendreKind::SquaredNorm, _) => self.euclidean_project(x),
            (LegendreKind::NegativeEntropy, ConvexSet::Box { upper, .. }) => {
                if let Some(i) = upper.iter().position(|&u| u <= 0.0) {
                    return Err(Error::Infeasible(format!(
                        "box upper bound {} in component {i} leaves no positive point",
                        upper[i]
                    )));
                }
                self.euclidean_project(x)
            }
            (LegendreKind::NegativeEntropy, ConvexSet::Simplex { .. }) => x.scale(1.0 / x.sum()),
            (LegendreKind::NegativeEntropy, _) => self.bregman_project_iterative(spec, x),
        }
    }

    fn bregman_project_iterative(&self, spec: &LegendreSpec, x: &Vector) -> Result<Vector> {
        if self.contains(x, 0.0)? {
            return Ok(x.clone());
        }
        let grad_x = spec.grad(x)?;
        let start = self.interior_start(spec, x)?;
        projected_gradient(
            |y| spec.bregman_distance(y, x).unwrap_or(f64::INFINITY),
            |y| spec.grad(y)?.sub(&grad_x),
            |y| self.euclidean_project(y),
            &start,
            GradientControl::default(),
        )
    }

    /// A point of `C ∩ int dom f`: the Euclidean projection of `x` when that
    /// lands in the domain, otherwise an explicit interior point.
    pub(crate) fn interior_start(&self, spec: &LegendreSpec, x: &Vector) -> Result<Vector> {
        let projected = self.euclidean_project(x)?;
        if spec.in_domain(&projected) {
            return Ok(projected);
        }
        if spec.kind == LegendreKind::SquaredNorm {
            return Ok(projected);
        }
        let dim = self.dim();
        let point = match self {
            ConvexSet::Box { lower, upper } => {
                if upper.iter().any(|&u| u <= 0.0) {
                    return Err(Error::Infeasible("box misses the positive orthant".into()));
                }
                (0..dim).map(|i| 0.5 * (lower[i].max(0.0) + upper[i])).collect()
            }
            ConvexSet::Ball { center, radius } => {
                let shifted: Vec<f64> = center.iter().map(|&c| c.max(0.0)).collect();
                let gap = center.iter().map(|&c| c.min(0.0).powi(2)).sum::<f64>().sqrt();
                if gap >= *radius {
                    return Err(Error::Infeasible(
                        "ball does not reach the open positive orthant".into(),
                    ));
                }
                let t = 0.5 * (radius - gap) / (dim as f64).sqrt();
                shifted.iter().map(|c| c + t).collect()
            }
            ConvexSet::Halfspace { normal, offset } => {
                let abs_sum: f64 = normal.iter().map(|a| a.abs()).sum();
                if *offset > 0.0 {
                    vec![0.5 * offset / abs_sum; dim]
                } else if let Some(j) = (0..dim).min_by(|&a, &b| normal[a].total_cmp(&normal[b])).filter(|&j| normal[j] < 0.0) {
                    let mut p = vec![1.0; dim];
                    p[j] += (normal.sum() - offset).max(0.0) / normal[j].abs() + 1.0;
                    p
                } else {
                    return Err(Error::Infeasible(
                        "halfspace does not meet the open positive orthant".into(),
                    ));
                }
            }
            ConvexSet::Simplex { .. } => vec![1.0 / dim as f64; dim],
        };
        Vector::new(point)
    }

    /// Lemma-2.5-style variational certificate of a projection:
    /// `max_y ⟨z − y, ∇f(z) − ∇f(x)⟩` over the probe points `y ∈ C`.
    /// Non-positive (up to tolerance) exactly when `z` is the Bregman
    /// projection of `x`.
    pub fn projection_certificate(
        &self,
        spec: &LegendreSpec,
        x: &Vector,
        z: &Vector,
        probes: &[Vector],
    ) -> Result<f64> {
        let gap = spec.grad(z)?.sub(&spec.grad(x)?)?;
        probes.iter().try_fold(f64::NEG_INFINITY, |worst, y| {
            Ok(worst.max(z.sub(y)?.dot(&gap)?))
        })
    }

    /// `D_f(y, x) − D_f(y, z) − D_f(z, x)` with `z` the Bregman projection of
    /// `x`; non-negative for every `y ∈ C`.
    pub fn projection_descent_check(&self, spec: &LegendreSpec, x: &Vector, y: &Vector) -> Result<f64> {
        let z = self.bregman_project(spec, x)?;
        Ok(spec.bregman_distance(y, x)? - spec.bregman_distance(y, &z)? - spec.bregman_distance(&z, x)?)
    }

    /// Deterministic points of `C` for variational certificates: extreme
    /// points where they are finite in number, plus projections of unit
    /// perturbations of `near`.
    pub fn probe_points(&self, near: &Vector) -> Result<Vec<Vector>> {
        near.check_dim(self.dim())?;
        let dim = self.dim();
        let mut probes = Vec::new();
        match self {
            ConvexSet::Box { lower, upper } => {
                if dim <= 8 {
                    for mask in 0u32..(1 << dim) {
                        probes.push(Vector::new(
                            (0..dim)
                                .map(|i| if mask & (1 << i) == 0 { lower[i] } else { upper[i] })
                                .collect(),
                        )?);
                    }
                } else {
                    probes.push(lower.clone());
                    probes.push(upper.clone());
                }
            }
            ConvexSet::Ball { center, radius } => {
                probes.push(center.clone());
                for i in 0..dim {
                    let e = Vector::basis(dim, i);
                    probes.push(center.axpy(*radius, &e)?);
                    probes.push(center.axpy(-radius, &e)?);
                }
            }
            ConvexSet::Halfspace { normal, offset } => {
                probes.push(normal.scale(offset / normal.dot(normal)?)?);
            }
            ConvexSet::Simplex { .. } => {
                probes.extend((0..dim).map(|i| Vector::basis(dim, i)));
                probes.push(Vector::filled(dim, 1.0 / dim as f64)?);
            }
        }
        for i in 0..dim {
            let e = Vector::basis(dim, i);
            for s in [1.0, -1.0] {
                probes.push(self.euclidean_project(&near.axpy(s, &e)?)?);
            }
        }
        Ok(probes)
    }

    /// Random point of `C`; unbounded sets are sampled from the projection of
    /// a box of half-width `1 + |offset|` around the origin.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vector> {
        let dim = self.dim();
        match self {
            ConvexSet::Box { lower, upper } => Vector::new(
                (0..dim)
                    .map(|i| {
                        if lower[i] < upper[i] {
                            rng.random_range(lower[i]..=upper[i])
                        } else {
                            lower[i]
                        }
                    })
                    .collect(),
            ),
            ConvexSet::Ball { center, radius } => {
                let dir: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
                let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(1e-300);
                let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
                Vector::new(dir.iter().enumerate().map(|(i, d)| center[i] + r * d / norm).collect())
            }
            ConvexSet::Halfspace { offset, .. } => {
                let half = 1.0 + offset.abs();
                let raw = Vector::new((0..dim).map(|_| rng.random_range(-half..=half)).collect())?;
                self.euclidean_project(&raw)
            }
            ConvexSet::Simplex { .. } => {
                let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let total: f64 = e.iter().sum();
                Vector::new(e.iter().map(|v| v / total).collect())
            }
        }
    }
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Euclidean projection onto the standard simplex (sort and threshold).
fn simplex_euclidean(x: &Vector) -> Result<Vector> {
    let mut sorted = x.as_slice().to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|c| (c - theta).max(0.0))
}
