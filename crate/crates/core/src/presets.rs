//! Ready-made problem instances.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::legendre::LegendreSpec;
use crate::problem::{Bifunction, LinearMap, ProblemBundle, QuadraticBifunction};
use crate::schedule::ParamSchedule;
use crate::sets::ConvexSet;
use crate::solver::{RunConfig, Solver, Wiring};
use crate::vector::Vector;

/// `f = ½x²`, `C = [0, 2]`, `g(x, y) = 16y² + 9xy − 25x²` with
/// `c₁ = c₂ = 9`, `S(x) = x/3`, `φ ≡ 0`. The common solution set is `{0}`.
pub fn worked_example_problem() -> ProblemBundle {
    ProblemBundle::new(
        LegendreSpec::squared_norm(1),
        ConvexSet::interval(0.0, 2.0).expect("valid interval"),
        QuadraticBifunction::worked_example().into(),
        Bifunction::Zero,
        LinearMap::scaling(1, 1.0 / 3.0).expect("finite"),
        9.0,
        9.0,
    )
    .expect("consistent dimensions")
}

/// `g ≡ 0`, `φ ≡ 0`, `S = id` on `C = [0, 2]`: every point of `C` is a
/// solution, so the limit is the projection of the anchor.
pub fn multi_omega_problem() -> ProblemBundle {
    ProblemBundle::new(
        LegendreSpec::squared_norm(1),
        ConvexSet::interval(0.0, 2.0).expect("valid interval"),
        Bifunction::Zero,
        Bifunction::Zero,
        LinearMap::identity(1),
        1.0,
        1.0,
    )
    .expect("consistent dimensions")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Worked example with repaired schedules.
    PaperExample,
    /// Worked example with projections wired in place of resolvents.
    ProjectionOnly,
    /// Zero bifunctions and identity map, anchor 0.7.
    MultiOmega,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::PaperExample, Preset::ProjectionOnly, Preset::MultiOmega];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PaperExample => "paper-example",
            Preset::ProjectionOnly => "projection-only",
            Preset::MultiOmega => "multi-omega",
        }
    }

    pub fn problem(&self) -> ProblemBundle {
        match self {
            Preset::PaperExample | Preset::ProjectionOnly => worked_example_problem(),
            Preset::MultiOmega => multi_omega_problem(),
        }
    }

    pub fn schedule(&self) -> ParamSchedule {
        match self {
            Preset::PaperExample | Preset::ProjectionOnly => ParamSchedule::paper_example(),
            Preset::MultiOmega => ParamSchedule::multi_omega(),
        }
    }

    pub fn wiring(&self) -> Wiring {
        match self {
            Preset::ProjectionOnly => Wiring::Projection,
            _ => Wiring::Resolvent,
        }
    }

    pub fn solver(&self) -> Solver {
        Solver::new(self.problem(), self.schedule()).with_wiring(self.wiring())
    }

    /// Default run: the anchor equals the starting point unless a preset
    /// fixes it.
    pub fn run_config(&self) -> RunConfig {
        let s = |v: f64| Vector::scalar(v).expect("finite");
        match self {
            Preset::PaperExample | Preset::ProjectionOnly => {
                RunConfig::new(s(5.0), s(5.0)).with_target(s(0.0))
            }
            Preset::MultiOmega => RunConfig::new(s(1.8), s(0.7))
                .with_max_iters(2_000)
                .with_tol(1e-12)
                .with_target(s(0.7)),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown preset '{s}'")))
    }
}
