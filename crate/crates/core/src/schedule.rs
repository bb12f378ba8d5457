//! Parameter sequences `α_{n,1..4}`, `γ_{n,1..3}`, `β_n`, `δ_n`, `λ_n` and
//! their validation against the convergence conditions.

use std::fmt;

use serde::{Deserialize, Serialize};

/// `base + scale / (n + shift)^power`, evaluated at `n ≥ 1`.
///
/// Covers constants (`scale = 0`), harmonic sequences and power decays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "SequenceRepr", into = "SequenceRepr")]
pub struct Sequence {
    pub base: f64,
    pub scale: f64,
    pub shift: f64,
    pub power: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SequenceRepr {
    Constant(f64),
    Decay {
        #[serde(default)]
        base: f64,
        #[serde(default)]
        scale: f64,
        #[serde(default)]
        shift: f64,
        #[serde(default = "unit")]
        power: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl From<SequenceRepr> for Sequence {
    fn from(value: SequenceRepr) -> Self {
        match value {
            SequenceRepr::Constant(c) => Sequence::constant(c),
            SequenceRepr::Decay {
                base,
                scale,
                shift,
                power,
            } => Sequence {
                base,
                scale,
                shift,
                power,
            },
        }
    }
}

impl From<Sequence> for SequenceRepr {
    fn from(s: Sequence) -> Self {
        if s.scale == 0.0 {
            SequenceRepr::Constant(s.base)
        } else {
            SequenceRepr::Decay {
                base: s.base,
                scale: s.scale,
                shift: s.shift,
                power: s.power,
            }
        }
    }
}

impl Sequence {
    pub const fn constant(value: f64) -> Self {
        Sequence {
            base: value,
            scale: 0.0,
            shift: 0.0,
            power: 1.0,
        }
    }

    /// `base + scale / (n + shift)`
    pub const fn harmonic(base: f64, scale: f64, shift: f64) -> Self {
        Sequence {
            base,
            scale,
            shift,
            power: 1.0,
        }
    }

    pub fn at(&self, n: usize) -> f64 {
        if self.scale == 0.0 {
            return self.base;
        }
        let denom = n as f64 + self.shift;
        if self.power == 1.0 {
            self.base + self.scale / denom
        } else {
            self.base + self.scale / denom.powf(self.power)
        }
    }
}

/// How `α_{n,2}, α_{n,3}, α_{n,4}` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaRest {
    /// Each equals `(1 − α_{n,1}) / 3`.
    Complement,
    Explicit([Sequence; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub alpha1: Sequence,
    pub alpha_rest: AlphaRest,
    pub gamma: [Sequence; 3],
    pub beta: Sequence,
    pub delta: Sequence,
    pub lambda: Sequence,
}

impl ParamSchedule {
    /// Worked-example schedule with the weights repaired so that the
    /// α's sum to one and every β lies in `(0, 1)`:
    /// `α_{n,1} = 1/(4n)`, `α_{n,i} = (1 − α_{n,1})/3`, `β_n = ½ + 1/(n+2)`,
    /// `δ_n = ½`, `γ_{n,i} = ⅓`, `λ_n = 1/32`.
    pub fn paper_example() -> Self {
        ParamSchedule {
            alpha1: Sequence::harmonic(0.0, 0.25, 0.0),
            alpha_rest: AlphaRest::Complement,
            gamma: [Sequence::constant(1.0 / 3.0); 3],
            beta: Sequence::harmonic(0.5, 1.0, 2.0),
            delta: Sequence::constant(0.5),
            lambda: Sequence::constant(1.0 / 32.0),
        }
    }

    /// The worked-example schedule exactly as printed:
    /// `α_{n,2..4} = 1/3 − 3/(4n)`, `β_n = ½ + 1/n`. Fails validation.
    pub fn paper_literal() -> Self {
        let rest = Sequence::harmonic(1.0 / 3.0, -0.75, 0.0);
        ParamSchedule {
            alpha_rest: AlphaRest::Explicit([rest; 3]),
            beta: Sequence::harmonic(0.5, 1.0, 0.0),
            ..ParamSchedule::paper_example()
        }
    }

    /// Schedule for the anchored-limit experiment: `α_{n,1} = 1/√(n+1)`
    /// decays slowly enough to diverge in sum yet pulls iterates to the
    /// anchor within a few hundred steps; `λ_n = ½`.
    pub fn multi_omega() -> Self {
        ParamSchedule {
            alpha1: Sequence {
                base: 0.0,
                scale: 1.0,
                shift: 1.0,
                power: 0.5,
            },
            lambda: Sequence::constant(0.5),
            ..ParamSchedule::paper_example()
        }
    }

    pub fn alphas(&self, n: usize) -> [f64; 4] {
        let a1 = self.alpha1.at(n);
        match &self.alpha_rest {
            AlphaRest::Complement => {
                let rest = (1.0 - a1) / 3.0;
                [a1, rest, rest, rest]
            }
            AlphaRest::Explicit(seqs) => [a1, seqs[0].at(n), seqs[1].at(n), seqs[2].at(n)],
        }
    }

    pub fn gammas(&self, n: usize) -> [f64; 3] {
        [self.gamma[0].at(n), self.gamma[1].at(n), self.gamma[2].at(n)]
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.beta.at(n)
    }

    pub fn delta(&self, n: usize) -> f64 {
        self.delta.at(n)
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda.at(n)
    }
}

/// Thresholds for [`validate_schedule`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Lower bound standing in for the `liminf … > 0` conditions, applied to
    /// the minimum over the second half of the horizon.
    pub floor: f64,
    pub sum_tol: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            floor: 1e-3,
            sum_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: String,
    /// Iteration index; `None` for conditions over the whole tail.
    pub n: Option<usize>,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.n {
            Some(n) => write!(f, "n={n}: {} (value {})", self.condition, self.value),
            None => write!(f, "tail: {} (value {})", self.condition, self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub horizon: usize,
    pub step_limit: f64,
    /// Smallest and largest `λ_n` seen, the `[a, b]` of the step-size condition.
    pub lambda_range: (f64, f64),
    pub violations: Vec<Violation>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ScheduleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "schedule over n = 1..{}: lambda in [{}, {}], limit p = {}",
            self.horizon, self.lambda_range.0, self.lambda_range.1, self.step_limit
        )?;
        if self.passed() {
            return writeln!(f, "all conditions hold");
        }
        const SHOWN: usize = 20;
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in self.violations.iter().take(SHOWN) {
            writeln!(f, "  {v}")?;
        }
        if self.violations.len() > SHOWN {
            writeln!(f, "  ... {} more", self.violations.len() - SHOWN)?;
        }
        Ok(())
    }
}

fn in_open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Checks the pointwise conditions for `n = 1..=horizon` and the asymptotic
/// ones on the second half of the horizon.
///
/// Pointwise: every α, γ, β, δ in `(0, 1)`; α's and γ's sum to one;
/// `0 < λ_n < p = min(1/c₁, 1/c₂)`. Tail: `α_{n,2}α_{n,3}`, every
/// `γ_{n,i}γ_{n,j}` and `β_n(1 − β_n)` stay above `options.floor`;
/// `α_{n,1}` decreases across the tail and its tail sum is at least
/// `options.floor` (finite-horizon stand-ins for `α_{n,1} → 0` and
/// `Σ α_{n,1} = ∞`).
pub fn validate_schedule(
    schedule: &ParamSchedule,
    horizon: usize,
    c1: f64,
    c2: f64,
    options: ValidationOptions,
) -> ScheduleReport {
    let horizon = horizon.max(1);
    let step_limit = (1.0 / c1).min(1.0 / c2);
    let mut violations = Vec::new();
    let mut push = |condition: String, n: Option<usize>, value: f64| {
        violations.push(Violation { condition, n, value })
    };
    let mut lambda_range = (f64::INFINITY, f64::NEG_INFINITY);
    let tail_start = horizon / 2 + 1;
    let mut tail_alpha_pair = f64::INFINITY;
    let mut tail_gamma_pair = f64::INFINITY;
    let mut tail_beta = f64::INFINITY;
    let mut tail_alpha1_sum = 0.0;

    for n in 1..=horizon {
        let alphas = schedule.alphas(n);
        for (i, a) in alphas.iter().enumerate() {
            if !in_open_unit(*a) {
                push(format!("alpha{} not in (0,1)", i + 1), Some(n), *a);
            }
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > options.sum_tol {
            push("alpha weights do not sum to 1".into(), Some(n), sum);
        }
        let gammas = schedule.gammas(n);
        for (i, g) in gammas.iter().enumerate() {
            if !in_open_unit(*g) {
                push(format!("gamma{} not in (0,1)", i + 1), Some(n), *g);
            }
        }
        let sum: f64 = gammas.iter().sum();
        if (sum - 1.0).abs() > options.sum_tol {
            push("gamma weights do not sum to 1".into(), Some(n), sum);
        }
        let beta = schedule.beta(n);
        if !in_open_unit(beta) {
            push("beta not in (0,1)".into(), Some(n), beta);
        }
        let delta = schedule.delta(n);
        if !in_open_unit(delta) {
            push("delta not in (0,1)".into(), Some(n), delta);
        }
        let lambda = schedule.lambda(n);
        lambda_range = (lambda_range.0.min(lambda), lambda_range.1.max(lambda));
        if !(lambda > 0.0 && lambda < step_limit) {
            push(format!("lambda not in (0, {step_limit})"), Some(n), lambda);
        }
        if n >= tail_start {
            tail_alpha_pair = tail_alpha_pair.min(alphas[1] * alphas[2]);
            tail_gamma_pair = tail_gamma_pair
                .min(gammas[0] * gammas[1])
                .min(gammas[0] * gammas[2])
                .min(gammas[1] * gammas[2]);
            tail_beta = tail_beta.min(beta * (1.0 - beta));
            tail_alpha1_sum += alphas[0];
        }
    }

    if tail_alpha_pair < options.floor {
        push("alpha2*alpha3 falls below the liminf floor".into(), None, tail_alpha_pair);
    }
    if tail_gamma_pair < options.floor {
        push("gamma_i*gamma_j falls below the liminf floor".into(), None, tail_gamma_pair);
    }
    if tail_beta < options.floor {
        push("beta*(1-beta) falls below the liminf floor".into(), None, tail_beta);
    }
    if horizon >= 2 {
        let early = schedule.alpha1.at(tail_start.min(horizon - 1).max(1));
        let late = schedule.alpha1.at(horizon);
        if !(late < early) {
            push("alpha1 does not decrease toward 0 across the tail".into(), None, late);
        }
    }
    if tail_alpha1_sum < options.floor {
        push("alpha1 tail sum too small for a divergent series".into(), None, tail_alpha1_sum);
    }

    ScheduleReport {
        horizon,
        step_limit,
        lambda_range,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sequence_evaluation() {
        assert_eq!(Sequence::constant(0.5).at(7), 0.5);
        assert_eq!(Sequence::harmonic(0.5, 1.0, 2.0).at(1), 0.5 + 1.0 / 3.0);
        let s = Sequence {
            base: 0.0,
            scale: 1.0,
            shift: 1.0,
            power: 0.5,
        };
        assert_abs_diff_eq!(s.at(3), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn corrected_schedule_passes() {
        let report = validate_schedule(&ParamSchedule::paper_example(), 10_000, 9.0, 9.0, ValidationOptions::default());
        assert!(report.passed(), "{report}");
        assert_eq!(report.lambda_range, (1.0 / 32.0, 1.0 / 32.0));
        let s = ParamSchedule::paper_example();
        assert_eq!(s.alphas(1), [0.25; 4]);
        assert_abs_diff_eq!(s.beta(1), 5.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn literal_schedule_fails_at_first_iteration() {
        let report = validate_schedule(&ParamSchedule::paper_literal(), 10_000, 9.0, 9.0, ValidationOptions::default());
        assert!(!report.passed());
        let alpha2 = report
            .violations
            .iter()
            .find(|v| v.condition.starts_with("alpha2") && v.n == Some(1))
            .expect("alpha2 violation at n=1");
        assert_abs_diff_eq!(alpha2.value, -5.0 / 12.0, epsilon = 1e-15);
        let beta = report
            .violations
            .iter()
            .find(|v| v.condition.starts_with("beta not") && v.n == Some(1))
            .expect("beta violation at n=1");
        assert_eq!(beta.value, 1.5);
        assert!(report.to_string().contains("n=1"));
    }

    #[test]
    fn step_size_must_stay_below_limit() {
        let s = ParamSchedule {
            lambda: Sequence::constant(0.2),
            ..ParamSchedule::paper_example()
        };
        let report = validate_schedule(&s, 10, 9.0, 9.0, ValidationOptions::default());
        assert!(report.violations.iter().any(|v| v.condition.starts_with("lambda")));
    }

    #[test]
    fn asymptotic_conditions_are_checked_on_the_tail() {
        // constant alpha1 never vanishes
        let s = ParamSchedule {
            alpha1: Sequence::constant(0.25),
            ..ParamSchedule::paper_example()
        };
        let report = validate_schedule(&s, 1000, 9.0, 9.0, ValidationOptions::default());
        assert!(report.violations.iter().any(|v| v.condition.contains("decrease")));

        // summable alpha1
        let s = ParamSchedule {
            alpha1: Sequence {
                base: 0.0,
                scale: 0.5,
                shift: 0.0,
                power: 2.0,
            },
            ..ParamSchedule::paper_example()
        };
        let report = validate_schedule(&s, 10_000, 9.0, 9.0, ValidationOptions::default());
        assert!(report.violations.iter().any(|v| v.condition.contains("tail sum")));

        // beta drifting to 1 breaks liminf beta(1-beta) > 0
        let s = ParamSchedule {
            beta: Sequence::harmonic(1.0, -0.5, 0.0),
            ..ParamSchedule::paper_example()
        };
        let report = validate_schedule(&s, 10_000, 9.0, 9.0, ValidationOptions::default());
        assert!(report.violations.iter().any(|v| v.condition.contains("beta*(1-beta)")));
    }

    #[test]
    fn multi_omega_schedule_passes() {
        let report = validate_schedule(&ParamSchedule::multi_omega(), 5_000, 1.0, 1.0, ValidationOptions::default());
        assert!(report.passed(), "{report}");
    }
}
