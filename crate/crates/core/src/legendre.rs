//! Legendre functions on real coordinate space and the quantities built from
//! them: gradient, Fenchel conjugate, Bregman distance, `V_f` and dual
//! averaging.
//!
//! Two kinds ship:
//!
//! | kind | `f(x)` | `∇f(x)` | `f*(ξ)` | `∇f*(ξ)` | domain |
//! |------|--------|---------|---------|----------|--------|
//! | [`LegendreKind::SquaredNorm`] | ½‖x‖² | x | ½‖ξ‖² | ξ | ℝᵈ |
//! | [`LegendreKind::NegativeEntropy`] | Σ xᵢ log xᵢ | 1 + log xᵢ | Σ exp(ξᵢ − 1) | exp(ξᵢ − 1) | xᵢ > 0 |
//!
//! The Euclidean inner product is the duality pairing, so primal and dual
//! points share the [`Vector`] representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// Largest argument for which `exp` stays finite in double precision.
const EXP_ARG_MAX: f64 = 709.782_712_893_384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LegendreKind {
    SquaredNorm,
    NegativeEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegendreSpec {
    pub kind: LegendreKind,
    pub dim: usize,
}

/// A Bregman distance together with whether roundoff clamping was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BregmanValue {
    pub value: f64,
    pub clamped: bool,
}

impl LegendreSpec {
    pub fn new(kind: LegendreKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(LegendreSpec { kind, dim })
    }

    pub fn squared_norm(dim: usize) -> Self {
        LegendreSpec {
            kind: LegendreKind::SquaredNorm,
            dim: dim.max(1),
        }
    }

    pub fn negative_entropy(dim: usize) -> Self {
        LegendreSpec {
            kind: LegendreKind::NegativeEntropy,
            dim: dim.max(1),
        }
    }

    /// Whether `x` lies in the interior of the domain of `f`.
    pub fn in_domain(&self, x: &Vector) -> bool {
        x.dim() == self.dim
            && match self.kind {
                LegendreKind::SquaredNorm => true,
                LegendreKind::NegativeEntropy => x.iter().all(|&c| c > 0.0),
            }
    }

    pub fn check_domain(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.dim)?;
        match self.kind {
            LegendreKind::SquaredNorm => Ok(()),
            LegendreKind::NegativeEntropy => match x.iter().position(|&c| c <= 0.0) {
                None => Ok(()),
                Some(i) => Err(Error::Domain(format!(
                    "negative entropy needs strictly positive components, component {i} is {}",
                    x[i]
                ))),
            },
        }
    }

    pub fn f(&self, x: &Vector) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self.kind {
            LegendreKind::SquaredNorm => 0.5 * x.iter().map(|c| c * c).sum::<f64>(),
            LegendreKind::NegativeEntropy => x.iter().map(|&c| c * c.ln()).sum(),
        })
    }

    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        self.check_domain(x)?;
        match self.kind {
            LegendreKind::SquaredNorm => Ok(x.clone()),
            LegendreKind::NegativeEntropy => x.map(|c| 1.0 + c.ln()),
        }
    }

    /// Fenchel conjugate `f*`. Finite on the whole dual space for both kinds.
    pub fn conjugate(&self, xstar: &Vector) -> Result<f64> {
        xstar.check_dim(self.dim)?;
        let value = match self.kind {
            LegendreKind::SquaredNorm => 0.5 * xstar.iter().map(|c| c * c).sum::<f64>(),
            LegendreKind::NegativeEntropy => {
                self.check_exp_args(xstar)?;
                xstar.iter().map(|&c| (c - 1.0).exp()).sum()
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite(format!("conjugate value {value}")))
        }
    }

    /// `∇f*`, the inverse of [`LegendreSpec::grad`].
    pub fn grad_conjugate(&self, xstar: &Vector) -> Result<Vector> {
        xstar.check_dim(self.dim)?;
        match self.kind {
            LegendreKind::SquaredNorm => Ok(xstar.clone()),
            LegendreKind::NegativeEntropy => {
                self.check_exp_args(xstar)?;
                let out = xstar.map(|c| (c - 1.0).exp())?;
                // deep negative arguments underflow to zero, which leaves the domain
                self.check_domain(&out)?;
                Ok(out)
            }
        }
    }

    fn check_exp_args(&self, xstar: &Vector) -> Result<()> {
        match xstar.iter().position(|&c| c - 1.0 > EXP_ARG_MAX) {
            None => Ok(()),
            Some(index) => Err(Error::Overflow {
                index,
                argument: xstar[index] - 1.0,
            }),
        }
    }

    /// `D_f(y, x) = f(y) − f(x) − ⟨y − x, ∇f(x)⟩`, with roundoff clamping
    /// reported in the result.
    ///
    /// Evaluated per component in a cancellation-free form; roundoff
    /// negatives down to `-tol.roundoff_floor` become zero, anything lower
    /// is [`Error::NegativeDistance`].
    pub fn bregman_distance_detailed(
        &self,
        y: &Vector,
        x: &Vector,
        tol: &Tolerances,
    ) -> Result<BregmanValue> {
        self.check_domain(y)?;
        self.check_domain(x)?;
        let raw: f64 = match self.kind {
            LegendreKind::SquaredNorm => {
                0.5 * y
                    .iter()
                    .zip(x.iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            }
            LegendreKind::NegativeEntropy => y
                .iter()
                .zip(x.iter())
                .map(|(&a, &b)| a * ((a - b) / b).ln_1p() - (a - b))
                .sum(),
        };
        if !raw.is_finite() {
            return Err(Error::NonFinite(format!("Bregman distance {raw}")));
        }
        if raw >= 0.0 {
            Ok(BregmanValue {
                value: raw,
                clamped: false,
            })
        } else if raw >= -tol.roundoff_floor {
            Ok(BregmanValue {
                value: 0.0,
                clamped: true,
            })
        } else {
            Err(Error::NegativeDistance(raw))
        }
    }

    pub fn bregman_distance(&self, y: &Vector, x: &Vector) -> Result<f64> {
        self.bregman_distance_detailed(y, x, &Tolerances::default())
            .map(|d| d.value)
    }

    /// `V_f(x, x*) = f(x) − ⟨x, x*⟩ + f*(x*)`.
    pub fn v_f(&self, x: &Vector, xstar: &Vector) -> Result<f64> {
        Ok(self.f(x)? - x.dot(xstar)? + self.conjugate(xstar)?)
    }

    /// `∇f*(Σ tᵢ ∇f(xᵢ))`: a convex combination formed in the dual space.
    ///
    /// Weighted arithmetic mean for the squared norm, weighted geometric mean
    /// for negative entropy.
    pub fn dual_average(&self, weights: &[f64], points: &[&Vector]) -> Result<Vector> {
        self.dual_average_with(weights, points, &Tolerances::default())
    }

    pub fn dual_average_with(
        &self,
        weights: &[f64],
        points: &[&Vector],
        tol: &Tolerances,
    ) -> Result<Vector> {
        if weights.len() != points.len() || weights.is_empty() {
            return Err(Error::Weight(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if let Some(t) = weights.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::Weight(format!("weight {t} is not positive")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.weight_sum {
            return Err(Error::Weight(format!("weights sum to {total}, not 1")));
        }
        let mut dual = vec![0.0; self.dim];
        for (&t, p) in weights.iter().zip(points) {
            let g = self.grad(p)?;
            for (acc, gi) in dual.iter_mut().zip(g.iter()) {
                *acc += t * gi;
            }
        }
        self.grad_conjugate(&Vector::new(dual)?)
    }
}
