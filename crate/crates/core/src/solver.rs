//! The anchored projection-type iteration.
//!
//! One step from `x_n`:
//!
//! ```text
//! y = argmin_C { λ g(x, ·) + D_f(·, x) }
//! z = argmin_C { λ g(y, ·) + D_f(·, x) }
//! v = ∇f*( δ ∇f(Res x) + (1 − δ) ∇f(Res z) )
//! w = ∇f*( γ₁ ∇f(v) + γ₂ ∇f(z) + γ₃ ∇f(S z) )
//! u = Res w
//! k = ∇f*( β ∇f(w) + (1 − β) ∇f(S w) )
//! h = ∇f*( α₁ ∇f(anchor) + α₂ ∇f(x) + α₃ ∇f(u) + α₄ ∇f(k) )
//! x⁺ = Proj_C h
//! ```
//!
//! `Res` is the resolvent of `φ`; with [`Wiring::Projection`] it is replaced
//! by the Bregman projection onto `C` outright.

use serde::Serialize;

use crate::error::{Error, Result, Stage};
use crate::problem::ProblemBundle;
use crate::schedule::{validate_schedule, ParamSchedule, ValidationOptions};
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// How `Res^f_φ` is realized inside a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wiring {
    /// Resolvent of the problem's `φ`.
    #[default]
    Resolvent,
    /// Bregman projection onto `C`, regardless of `φ`.
    Projection,
}

/// Intermediate points of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Stages {
    pub y: Vector,
    pub z: Vector,
    pub v: Vector,
    pub w: Vector,
    pub u: Vector,
    pub k: Vector,
    pub h: Vector,
}

/// Iterate `x_n` together with the intermediates of the step that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub n: usize,
    pub x: Vector,
    /// `None` for the starting point.
    pub stages: Option<Stages>,
}

impl IterateState {
    pub fn initial(x1: Vector) -> Self {
        IterateState {
            n: 1,
            x: x1,
            stages: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub x1: Vector,
    pub anchor: Vector,
    pub max_iters: usize,
    pub residual_tol: f64,
    /// A known solution, used only for diagnostics.
    pub target: Option<Vector>,
}

impl RunConfig {
    pub fn new(x1: Vector, anchor: Vector) -> Self {
        RunConfig {
            x1,
            anchor,
            max_iters: 20_000,
            residual_tol: 1e-10,
            target: None,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }

    pub fn with_target(mut self, target: Vector) -> Self {
        self.target = Some(target);
        self
    }
}

/// Diagnostics for iteration `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    /// `‖x_{n+1} − x_n‖∞`
    pub residual: f64,
    /// `D_f(target, x_n)`
    pub df_target: Option<f64>,
    /// Two-step descent slack with the target as `x*`.
    pub lemma_arg_slack: Option<f64>,
    /// Variational certificate of `x_{n+1} = Proj_C h_n`; at most a small
    /// tolerance when the projection is exact.
    pub projection_cert_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Converged,
    MaxIters,
    Error(Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Last computed iterate.
    pub solution: Vector,
    pub trace: Vec<TraceRow>,
    pub status: RunStatus,
    /// First iteration from which `D_f(target, x_n)` never increases again.
    pub monotone_from: Option<usize>,
    /// Bregman distances in the diagnostics that needed roundoff clamping.
    pub roundoff_clamps: usize,
}

impl RunOutcome {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// `D_f(x*, x) − (1 − λc₁) D_f(y, x) − (1 − λc₂) D_f(z, y) − D_f(x*, z)`,
/// non-negative when `x*` solves the equilibrium problem and `y`, `z` are
/// the two prox points from `x`.
pub fn lemma_arg_slack(
    problem: &ProblemBundle,
    xstar: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    lam: f64,
) -> Result<f64> {
    let spec = &problem.spec;
    Ok(spec.bregman_distance(xstar, x)?
        - (1.0 - lam * problem.c1) * spec.bregman_distance(y, x)?
        - (1.0 - lam * problem.c2) * spec.bregman_distance(z, y)?
        - spec.bregman_distance(xstar, z)?)
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub problem: ProblemBundle,
    pub schedule: ParamSchedule,
    pub wiring: Wiring,
    pub tolerances: Tolerances,
}

impl Solver {
    pub fn new(problem: ProblemBundle, schedule: ParamSchedule) -> Self {
        Solver {
            problem,
            schedule,
            wiring: Wiring::Resolvent,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_wiring(mut self, wiring: Wiring) -> Self {
        self.wiring = wiring;
        self
    }

    fn res(&self, x: &Vector) -> Result<Vector> {
        match self.wiring {
            Wiring::Resolvent => self.problem.resolvent(x),
            Wiring::Projection => self.problem.set.bregman_project(&self.problem.spec, x),
        }
    }

    fn average(&self, weights: &[f64], points: &[&Vector]) -> Result<Vector> {
        self.problem
            .spec
            .dual_average_with(weights, points, &self.tolerances)
    }

    /// Advances `state` by one iteration, returning `x_{n+1}` with the
    /// intermediates that produced it. Failures carry the stage name.
    pub fn step(&self, state: &IterateState, anchor: &Vector) -> Result<IterateState> {
        let p = &self.problem;
        let s = &self.schedule;
        let n = state.n;
        let x = &state.x;
        let lam = s.lambda(n);
        let delta = s.delta(n);
        let gammas = s.gammas(n);
        let beta = s.beta(n);
        let alphas = s.alphas(n);

        let y = p.prox(x, x, lam).map_err(|e| e.at(Stage::ProxY))?;
        let z = p.prox(&y, x, lam).map_err(|e| e.at(Stage::ProxZ))?;
        let v = (|| {
            let rx = self.res(x)?;
            let rz = self.res(&z)?;
            self.average(&[delta, 1.0 - delta], &[&rx, &rz])
        })()
        .map_err(|e| e.at(Stage::AverageV))?;
        let w = (|| {
            let sz = p.map.apply(&z)?;
            self.average(&gammas, &[&v, &z, &sz])
        })()
        .map_err(|e| e.at(Stage::AverageW))?;
        let u = self.res(&w).map_err(|e| e.at(Stage::ResolventU))?;
        let k = (|| {
            let sw = p.map.apply(&w)?;
            self.average(&[beta, 1.0 - beta], &[&w, &sw])
        })()
        .map_err(|e| e.at(Stage::AverageK))?;
        let h = self
            .average(&alphas, &[anchor, x, &u, &k])
            .map_err(|e| e.at(Stage::AverageH))?;
        let next = p
            .set
            .bregman_project(&p.spec, &h)
            .map_err(|e| e.at(Stage::ProjectX))?;

        Ok(IterateState {
            n: n + 1,
            x: next,
            stages: Some(Stages { y, z, v, w, u, k, h }),
        })
    }

    /// Checks the schedule on the run's horizon; a failing report is an
    /// [`Error::Schedule`].
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let report = validate_schedule(
            &self.schedule,
            horizon,
            self.problem.c1,
            self.problem.c2,
            ValidationOptions::default(),
        );
        if report.passed() {
            Ok(())
        } else {
            Err(Error::Schedule(report.to_string()))
        }
    }

    /// Iterates until `‖x_{n+1} − x_n‖∞ < residual_tol` or `max_iters` steps.
    ///
    /// A failing stage ends the run with [`RunStatus::Error`] and the trace
    /// gathered so far; only an invalid schedule or configuration is an `Err`.
    pub fn run(&self, cfg: &RunConfig) -> Result<RunOutcome> {
        if !(cfg.residual_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "residual tolerance {} must be positive",
                cfg.residual_tol
            )));
        }
        if cfg.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        let dim = self.problem.spec.dim;
        cfg.x1.check_dim(dim)?;
        cfg.anchor.check_dim(dim)?;
        if let Some(t) = &cfg.target {
            t.check_dim(dim)?;
        }
        self.validate(cfg.max_iters)?;

        let mut state = IterateState::initial(cfg.x1.clone());
        let mut trace = Vec::new();
        let mut clamps = 0;
        let mut status = RunStatus::MaxIters;
        for _ in 0..cfg.max_iters {
            let next = match self.step(&state, &cfg.anchor) {
                Ok(next) => next,
                Err(e) => {
                    status = RunStatus::Error(e);
                    break;
                }
            };
            let row = match self.trace_row(&state, &next, cfg, &mut clamps) {
                Ok(row) => row,
                Err(e) => {
                    status = RunStatus::Error(e.at(Stage::Diagnostics));
                    break;
                }
            };
            let residual = row.residual;
            trace.push(row);
            state = next;
            if residual < cfg.residual_tol {
                status = RunStatus::Converged;
                break;
            }
        }
        let monotone_from = monotone_from(&trace);
        Ok(RunOutcome {
            solution: state.x,
            trace,
            status,
            monotone_from,
            roundoff_clamps: clamps,
        })
    }

    fn trace_row(
        &self,
        state: &IterateState,
        next: &IterateState,
        cfg: &RunConfig,
        clamps: &mut usize,
    ) -> Result<TraceRow> {
        let p = &self.problem;
        let stages = next.stages.as_ref().expect("step records its stages");
        let mut distance = |a: &Vector, b: &Vector| -> Result<f64> {
            let d = p.spec.bregman_distance_detailed(a, b, &self.tolerances)?;
            *clamps += usize::from(d.clamped);
            Ok(d.value)
        };
        let (df_target, lemma) = match &cfg.target {
            Some(t) => {
                let lam = self.schedule.lambda(state.n);
                let slack = distance(t, &state.x)?
                    - (1.0 - lam * p.c1) * distance(&stages.y, &state.x)?
                    - (1.0 - lam * p.c2) * distance(&stages.z, &stages.y)?
                    - distance(t, &stages.z)?;
                (Some(distance(t, &state.x)?), Some(slack))
            }
            None => (None, None),
        };
        let probes = p.set.probe_points(&next.x)?;
        let cert = p
            .set
            .projection_certificate(&p.spec, &stages.h, &next.x, &probes)?;
        Ok(TraceRow {
            n: state.n,
            x: state.x.clone(),
            y: stages.y.clone(),
            z: stages.z.clone(),
            residual: next.x.dist_inf(&state.x)?,
            df_target,
            lemma_arg_slack: lemma,
            projection_cert_slack: cert,
        })
    }
}

fn monotone_from(trace: &[TraceRow]) -> Option<usize> {
    let values: Vec<(usize, f64)> = trace
        .iter()
        .map(|r| r.df_target.map(|d| (r.n, d)))
        .collect::<Option<_>>()?;
    let mut start = values.first()?.0;
    for pair in values.windows(2) {
        if pair[1].1 > pair[0].1 {
            start = pair[1].0;
        }
    }
    Some(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    use crate::legendre::LegendreSpec;
    use crate::presets::worked_example_problem;
    use crate::problem::{Bifunction, LinearMap};
    use crate::sets::ConvexSet;

    fn s(x: f64) -> Vector {
        Vector::scalar(x).unwrap()
    }

    fn solver() -> Solver {
        Solver::new(worked_example_problem(), ParamSchedule::paper_example())
    }

    #[test]
    fn first_step_prox_points() {
        let next = solver().step(&IterateState::initial(s(5.0)), &s(1.0)).unwrap();
        let st = next.stages.unwrap();
        assert_eq!(next.n, 2);
        assert_abs_diff_eq!(st.y[0], 115.0 / 64.0, epsilon = 1e-15);
        // unconstrained 9205/4096 lies outside [0, 2]
        assert_eq!(st.z[0], 2.0);
        assert_eq!(st.v[0], 2.0);
    }

    #[test]
    fn common_solution_is_fixed() {
        let next = solver().step(&IterateState::initial(s(0.0)), &s(0.0)).unwrap();
        assert_eq!(next.x, s(0.0));
        let st = next.stages.unwrap();
        for p in [&st.y, &st.z, &st.v, &st.w, &st.u, &st.k, &st.h] {
            assert_eq!(p, &s(0.0));
        }
    }

    #[test]
    fn run_from_solution_converges_immediately() {
        let out = solver().run(&RunConfig::new(s(0.0), s(0.0))).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert_eq!(out.iterations(), 1);
        assert_eq!(out.solution, s(0.0));
    }

    #[test]
    fn max_iters_caps_the_trace() {
        let out = solver()
            .run(&RunConfig::new(s(5.0), s(1.0)).with_max_iters(10))
            .unwrap();
        assert_eq!(out.status, RunStatus::MaxIters);
        assert_eq!(out.trace.len(), 10);
        assert_eq!(out.trace[0].n, 1);
        assert_eq!(out.trace[9].n, 10);
    }

    #[test]
    fn invalid_schedule_is_rejected_before_iterating() {
        let solver = Solver::new(worked_example_problem(), ParamSchedule::paper_literal());
        assert!(matches!(
            solver.run(&RunConfig::new(s(5.0), s(1.0))),
            Err(Error::Schedule(_))
        ));
    }

    #[test]
    fn stage_errors_end_the_run_with_partial_trace() {
        // S maps the positive orthant outside the entropy domain
        let spec = LegendreSpec::negative_entropy(1);
        let problem = ProblemBundle::new(
            spec,
            ConvexSet::interval(0.5, 2.0).unwrap(),
            Bifunction::Zero,
            Bifunction::Zero,
            LinearMap::scaling(1, -1.0).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        let solver = Solver::new(problem, ParamSchedule::multi_omega());
        let out = solver.run(&RunConfig::new(s(1.0), s(1.0))).unwrap();
        match out.status {
            RunStatus::Error(Error::Stage { stage, .. }) => assert_eq!(stage, Stage::AverageW),
            other => panic!("unexpected status {other:?}"),
        }
        assert!(out.trace.is_empty());
        assert!(Error::Stage {
            stage: Stage::AverageW,
            source: Box::new(Error::Domain("x".into()))
        }
        .to_string()
        .contains("w (fixed-point average)"));
    }

    #[test]
    fn lemma_arg_slack_examples() {
        let p = worked_example_problem();
        let lam = 1.0 / 32.0;
        let (y, z) = (s(23.0 / 64.0), s(1841.0 / 4096.0));
        let slack = lemma_arg_slack(&p, &s(0.0), &s(1.0), &y, &z, lam).unwrap();
        let expected = 0.5
            - (23.0 / 32.0) * 0.5 * (1.0f64 - 23.0 / 64.0).powi(2)
            - (23.0 / 32.0) * 0.5 * (1841.0f64 / 4096.0 - 23.0 / 64.0).powi(2)
            - 0.5 * (1841.0f64 / 4096.0).powi(2);
        assert_abs_diff_eq!(slack, expected, epsilon = 1e-15);
        assert!(slack >= 0.0);
        assert_eq!(lemma_arg_slack(&p, &s(0.0), &s(0.0), &s(0.0), &s(0.0), lam).unwrap(), 0.0);
    }

    #[test]
    fn trace_records_target_diagnostics() {
        let out = solver()
            .run(&RunConfig::new(s(5.0), s(1.0)).with_max_iters(50).with_target(s(0.0)))
            .unwrap();
        for row in &out.trace {
            assert!(row.residual >= 0.0);
            assert!(row.lemma_arg_slack.unwrap() >= -1e-8);
            assert!(row.projection_cert_slack <= 1e-8);
            assert_abs_diff_eq!(row.df_target.unwrap(), 0.5 * row.x[0] * row.x[0], epsilon = 1e-15);
        }
        assert!(out.monotone_from.is_some());
    }
}
