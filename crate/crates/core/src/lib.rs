pub mod error;
pub mod legendre;
pub mod oracle;
pub mod problem;
pub mod properties;
pub mod presets;
pub mod schedule;
pub mod solver;
pub mod sets;
pub mod tolerance;
pub mod trace;
pub mod vector;

pub use error::{Error, Result, Stage};
pub use legendre::{LegendreKind, LegendreSpec};
pub use sets::ConvexSet;
pub use tolerance::Tolerances;
pub use vector::Vector;
pub use presets::Preset;
pub use problem::{Bifunction, LinearMap, ProblemBundle, QuadraticBifunction};
pub use schedule::{ParamSchedule, Sequence};
pub use solver::{RunConfig, RunOutcome, RunStatus, Solver, TraceRow, Wiring};
