//! Brute-force minimizers: exhaustive grid search, golden-section search and
//! a projected-gradient loop with Armijo backtracking.
//!
//! Grid search and golden section certify closed forms in tests. The
//! projected-gradient loop doubles as the fallback solver for projections
//! and prox steps that have no closed form.

use crate::error::{Error, Result};
use crate::sets::ConvexSet;
use crate::vector::Vector;

/// Largest dimension accepted by [`grid_argmin`].
pub const MAX_GRID_DIM: usize = 3;

/// Membership tolerance for grid points.
const GRID_MEMBERSHIP_TOL: f64 = 1e-9;

/// Axis-aligned lattice: `points` equally spaced values per dimension,
/// endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    lower: Vec<f64>,
    upper: Vec<f64>,
    points: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, points: usize) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "grid bounds of length {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.len() > MAX_GRID_DIM {
            return Err(Error::InvalidInput(format!(
                "grid search is limited to {MAX_GRID_DIM} dimensions, got {}",
                lower.len()
            )));
        }
        if points < 3 {
            return Err(Error::InvalidInput(format!("grid needs at least 3 points per dimension, got {points}")));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidInput(format!("grid bounds [{l}, {u}] are invalid")));
            }
        }
        Ok(GridSpec {
            lower,
            upper,
            points,
        })
    }

    /// Grid over the bounding box of a bounded set.
    pub fn covering(set: &ConvexSet, points: usize) -> Result<Self> {
        let (lower, upper) = set.bounding_box().ok_or_else(|| {
            Error::InvalidInput("unbounded set needs explicit grid bounds".into())
        })?;
        GridSpec::new(lower.into_inner(), upper.into_inner(), points)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Largest spacing between neighbouring grid values over all dimensions.
    pub fn pitch(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) / (self.points - 1) as f64)
            .fold(0.0, f64::max)
    }

    fn coordinate(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.points {
            self.upper[axis]
        } else {
            let t = k as f64 / (self.points - 1) as f64;
            self.lower[axis] + (self.upper[axis] - self.lower[axis]) * t
        }
    }
}

/// Feasible grid point of minimal objective.
///
/// Grid points are visited in lexicographic order and only a strictly
/// smaller value replaces the incumbent, so ties resolve to the
/// lexicographically smallest point. Non-finite objective values mark
/// points outside the objective's domain and are skipped.
pub fn grid_argmin(
    objective: impl Fn(&Vector) -> f64,
    set: &ConvexSet,
    grid: &GridSpec,
) -> Result<Vector> {
    if grid.dim() != set.dim() {
        return Err(Error::Dimension {
            expected: set.dim(),
            found: grid.dim(),
        });
    }
    let dim = grid.dim();
    let mut index = vec![0usize; dim];
    let mut coords = vec![0.0; dim];
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        for (axis, &k) in index.iter().enumerate() {
            coords[axis] = grid.coordinate(axis, k);
        }
        let point = Vector::from_finite(coords.clone());
        if set.contains(&point, GRID_MEMBERSHIP_TOL)? {
            let value = objective(&point);
            if value.is_finite() && best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, coords.clone()));
            }
        }
        // odometer increment, last axis fastest
        let mut axis = dim;
        loop {
            if axis == 0 {
                return best
                    .map(|(_, c)| Vector::from_finite(c))
                    .ok_or(Error::EmptyGrid);
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < grid.points {
                break;
            }
            index[axis] = 0;
        }
    }
}

/// Relative width of the stencil used by the final Newton polish.
const POLISH_STENCIL: f64 = 1e-5;

/// Golden-section search for the minimizer of a unimodal function on
/// `[lo, hi]`.
///
/// The bracket is shrunk to `tol` and its midpoint is then polished with one
/// Newton step built from central differences on a stencil of width
/// `1e-5·(hi − lo)`. Near a smooth interior minimizer objective values differ
/// by less than roundoff once the bracket is below about `√ε`, so comparisons
/// alone cannot get further; the difference quotients on the wider stencil
/// can. The polish is skipped when the stencil leaves `[lo, hi]`, when the
/// estimated curvature is not positive, or when the correction is larger than
/// the stencil.
pub fn golden_section(objective: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "golden section needs lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"
        )));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
        // interior points collapse once the bracket reaches roundoff
        if !(a < c && c < d && d < b) {
            break;
        }
    }
    let mid = 0.5 * (a + b);
    let h = POLISH_STENCIL * (hi - lo);
    if mid - h <= lo || mid + h >= hi {
        return Ok(mid);
    }
    let (fm, f0, fp) = (objective(mid - h), objective(mid), objective(mid + h));
    let second = fp - 2.0 * f0 + fm;
    if !(second > 0.0) {
        return Ok(mid);
    }
    let correction = -h * (fp - fm) / (2.0 * second);
    if correction.is_finite() && correction.abs() <= h {
        Ok(mid + correction)
    } else {
        Ok(mid)
    }
}

/// Stopping and step controls for [`projected_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientControl {
    pub step: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GradientControl {
    fn default() -> Self {
        GradientControl {
            step: 1.0,
            tol: 1e-10,
            max_iters: 100_000,
        }
    }
}

const MAX_BACKTRACKS: usize = 80;

/// Projected gradient descent `y ← P(y − t ∇F(y))` with backtracking.
///
/// Each iteration starts from twice the previous accepted step (capped at
/// `control.step`) and halves it until the candidate does not increase `F`
/// and the secant curvature `⟨∇F(y⁺) − ∇F(y), y⁺ − y⟩ / ‖y⁺ − y‖²` is at
/// most `1/t`. The curvature test is what keeps the step stable near the
/// minimizer; once the predicted decrease `⟨∇F(y), y − y⁺⟩` is below the
/// roundoff of `F` it is the only test applied. A candidate
/// with a non-finite objective counts as a failed decrease, which keeps
/// iterates inside the objective's domain. Stops once the gradient mapping
/// `‖y⁺ − y‖∞ · step / t` drops below `tol`.
pub fn projected_gradient(
    objective: impl Fn(&Vector) -> f64,
    gradient: impl Fn(&Vector) -> Result<Vector>,
    project: impl Fn(&Vector) -> Result<Vector>,
    start: &Vector,
    control: GradientControl,
) -> Result<Vector> {
    if !(control.step > 0.0) || !(control.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "projected gradient needs positive step and tolerance, got {control:?}"
        )));
    }
    let mut y = project(start)?;
    let mut fy = objective(&y);
    if !fy.is_finite() {
        return Err(Error::Domain(format!(
            "projected start point {y} is outside the objective's domain"
        )));
    }
    let mut g = gradient(&y)?;
    let mut t = control.step;
    let mut displacement = f64::INFINITY;
    for _ in 0..control.max_iters {
        t = (2.0 * t).min(control.step);
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = project(&y.axpy(-t, &g)?)?;
            let fc = objective(&candidate);
            if fc.is_finite() {
                let delta = candidate.sub(&y)?;
                let moved = delta.norm_inf() * control.step / t;
                if moved == 0.0 {
                    return Ok(y);
                }
                let gc = gradient(&candidate)?;
                let curvature = gc.sub(&g)?.dot(&delta)?;
                let slack = 4.0 * f64::EPSILON * fy.abs().max(fc.abs());
                let predicted = -g.dot(&delta)?;
                let unresolved = predicted <= 64.0 * f64::EPSILON * fy.abs().max(1.0);
                if (fc <= fy + slack || unresolved) && curvature * t <= delta.dot(&delta)? {
                    accepted = Some((candidate, fc, gc, moved));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, fnext, gnext, moved)) = accepted else {
            return Err(Error::Convergence {
                what: "projected gradient line search",
                iterations: MAX_BACKTRACKS,
                displacement,
            });
        };
        displacement = moved;
        y = next;
        fy = fnext;
        g = gnext;
        if displacement < control.tol {
            return Ok(y);
        }
    }
    Err(Error::Convergence {
        what: "projected gradient",
        iterations: control.max_iters,
        displacement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn interval(lo: f64, hi: f64) -> ConvexSet {
        ConvexSet::interval(lo, hi).unwrap()
    }

    #[test]
    fn grid_argmin_finds_clamp() {
        let set = interval(0.0, 2.0);
        let grid = GridSpec::new(vec![0.0], vec![2.0], 2001).unwrap();
        let y = grid_argmin(|y| 0.5 * (y[0] - 5.0).powi(2), &set, &grid).unwrap();
        assert_eq!(y[0], 2.0);
    }

    #[test]
    fn grid_argmin_breaks_ties_lexicographically() {
        let set = ConvexSet::boxed(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap();
        let grid = GridSpec::new(vec![0.0, -1.0], vec![1.0, 1.0], 5).unwrap();
        let y = grid_argmin(|_| 3.0, &set, &grid).unwrap();
        assert_eq!(y.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn grid_argmin_without_feasible_points() {
        let set = interval(5.0, 6.0);
        let grid = GridSpec::new(vec![0.0], vec![1.0], 11).unwrap();
        assert_eq!(grid_argmin(|y| y[0], &set, &grid), Err(Error::EmptyGrid));
        assert_eq!(
            grid_argmin(|_| f64::INFINITY, &interval(0.0, 1.0), &grid),
            Err(Error::EmptyGrid)
        );
    }

    #[test]
    fn grid_spec_validation() {
        assert!(GridSpec::new(vec![0.0], vec![1.0], 2).is_err());
        assert!(GridSpec::new(vec![1.0], vec![0.0], 5).is_err());
        assert!(GridSpec::new(vec![0.0; 4], vec![1.0; 4], 5).is_err());
        assert!(GridSpec::new(vec![0.0], vec![f64::INFINITY], 5).is_err());
        let g = GridSpec::new(vec![0.0, 0.0], vec![1.0, 4.0], 5).unwrap();
        assert_eq!(g.pitch(), 1.0);
    }

    #[test]
    fn golden_section_examples() {
        let tol = 1e-10;
        let y = golden_section(|y| 0.5 * (y - 5.0).powi(2), 0.0, 2.0, tol).unwrap();
        assert_abs_diff_eq!(y, 2.0, epsilon = tol);
        let y = golden_section(|y| (y - 0.3).powi(2), 0.0, 1.0, tol).unwrap();
        assert_abs_diff_eq!(y, 0.3, epsilon = tol);
        assert!(golden_section(|y| y, 1.0, 0.0, tol).is_err());
        assert!(golden_section(|y| y, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn golden_section_is_deterministic() {
        let f = |y: f64| (y - 0.123).powi(2) + y.sin();
        let a = golden_section(f, -1.0, 1.0, 1e-9).unwrap();
        let b = golden_section(f, -1.0, 1.0, 1e-9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn projected_gradient_onto_interval() {
        let set = interval(0.0, 2.0);
        let target = Vector::scalar(5.0).unwrap();
        let y = projected_gradient(
            |y| 0.5 * (y[0] - 5.0).powi(2),
            |y| y.sub(&target),
            |y| set.euclidean_project(y),
            &Vector::scalar(1.0).unwrap(),
            GradientControl::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(y[0], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn projected_gradient_reports_non_convergence() {
        let set = interval(-10.0, 10.0);
        let result = projected_gradient(
            |y| y[0] * y[0],
            |y| y.scale(2.0),
            |y| set.euclidean_project(y),
            &Vector::scalar(3.0).unwrap(),
            GradientControl {
                step: 1e-3,
                tol: 1e-14,
                max_iters: 5,
            },
        );
        assert!(matches!(result, Err(Error::Convergence { .. })));
    }
}
