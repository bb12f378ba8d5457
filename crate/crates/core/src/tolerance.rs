/// Numerical tolerances shared by every check in the crate.
///
/// One record so a run can tighten or loosen all invariant checks at once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    /// Bregman distances in `[-roundoff_floor, 0)` are treated as roundoff and clamped to zero.
    pub roundoff_floor: f64,
    /// Accepted deviation of `Σ weights` from one.
    pub weight_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            atol: 1e-10,
            rtol: 1e-9,
            roundoff_floor: 1e-12,
            weight_sum: 1e-12,
        }
    }
}

impl Tolerances {
    /// `|a - b| <= atol + rtol * max(|a|, |b|)`
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.atol + self.rtol * a.abs().max(b.abs())
    }
}
