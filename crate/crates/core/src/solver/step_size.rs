//! Step-size conditions under which the iterations are known to converge.
//!
//! Outer step of the nested iteration: `0 < ρ < (2rs² + s)/(1 + rs)²`.
//! Its two sub-iterations: `0 < ρ_ν, ρ_η < 2r/(2rs + 1)`.
//! Single-pass iterations: both of
//!
//! ```text
//! 2s − ρ_r − ρ_s s² − |ρ_r r − ρ_s s| > 0
//! 2r − ρ_r r² − ρ_s − |ρ_r r − ρ_s s| > 0
//! ```
//!
//! The published defaults for the single-pass iterations sit exactly on the
//! boundary of the second system, so violations are reported, never fatal.

use std::fmt;

/// Values within this distance of a bound count as on it.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BoundStatus {
    Strict,
    Boundary,
    Violated,
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStatus::Strict => "Strict",
            BoundStatus::Boundary => "Boundary",
            BoundStatus::Violated => "Violated",
        })
    }
}

/// One checked condition. For upper bounds on a step, `supplied` is the step
/// and `bound_value` the limit; for the single-pass system, `supplied` is the
/// left-hand side and `bound_value` is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound_value: f64,
    pub supplied: f64,
    pub status: BoundStatus,
}

impl fmt::Display for BoundCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<12} supplied {:>12.6e}  bound {:>12.6e}  {}",
            self.name, self.supplied, self.bound_value, self.status
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepSizeReport {
    pub checks: Vec<BoundCheck>,
}

impl StepSizeReport {
    /// Worst status over all checks.
    pub fn status(&self) -> BoundStatus {
        self.checks.iter().map(|c| c.status).max().unwrap_or(BoundStatus::Strict)
    }

    pub fn violated(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| c.status == BoundStatus::Violated)
    }
}

impl fmt::Display for StepSizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `supplied` must lie in `(0, bound)`.
fn upper_check(name: &'static str, supplied: f64, bound: f64) -> BoundCheck {
    let status = if (supplied - bound).abs() <= BOUNDARY_TOL {
        BoundStatus::Boundary
    } else if supplied > 0.0 && supplied < bound {
        BoundStatus::Strict
    } else {
        BoundStatus::Violated
    };
    BoundCheck { name, bound_value: bound, supplied, status }
}

/// `lhs` must be positive.
fn positive_check(name: &'static str, lhs: f64) -> BoundCheck {
    let status = if lhs.abs() <= BOUNDARY_TOL {
        BoundStatus::Boundary
    } else if lhs > 0.0 {
        BoundStatus::Strict
    } else {
        BoundStatus::Violated
    };
    BoundCheck { name, bound_value: 0.0, supplied: lhs, status }
}

pub fn alg1_outer_bound(r: f64, s: f64) -> f64 {
    (2.0 * r * s * s + s) / ((1.0 + r * s) * (1.0 + r * s))
}

pub fn alg1_inner_bound(r: f64, s: f64) -> f64 {
    2.0 * r / (2.0 * r * s + 1.0)
}

/// Left-hand sides of the single-pass system.
pub fn alg23_lhs(r: f64, s: f64, rho_r: f64, rho_s: f64) -> [f64; 2] {
    let cross = (rho_r * r - rho_s * s).abs();
    [
        2.0 * s - rho_r - rho_s * s * s - cross,
        2.0 * r - rho_r * r * r - rho_s - cross,
    ]
}

pub fn validate_alg1(r: f64, s: f64, rho: f64, rho_nu: f64, rho_eta: f64) -> StepSizeReport {
    let outer = alg1_outer_bound(r, s);
    let inner = alg1_inner_bound(r, s);
    StepSizeReport {
        checks: vec![
            upper_check("rho", rho, outer),
            upper_check("rho_nu", rho_nu, inner),
            upper_check("rho_eta", rho_eta, inner),
        ],
    }
}

pub fn validate_alg23(r: f64, s: f64, rho_r: f64, rho_s: f64) -> StepSizeReport {
    let [l1, l2] = alg23_lhs(r, s, rho_r, rho_s);
    StepSizeReport {
        checks: vec![positive_check("alg23_s", l1), positive_check("alg23_r", l2)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alg1_bounds_at_unit_parameters() {
        assert!((alg1_outer_bound(1.0, 1.0) - 0.75).abs() < 1e-15);
        assert!((alg1_inner_bound(1.0, 1.0) - 2.0 / 3.0).abs() < 1e-15);
        let rep = validate_alg1(1.0, 1.0, 0.5, 0.5, 0.5);
        assert_eq!(rep.status(), BoundStatus::Strict);
        let edge = validate_alg1(1.0, 1.0, 0.75, 0.5, 0.5);
        assert_eq!(edge.checks[0].status, BoundStatus::Boundary);
        let bad = validate_alg1(1.0, 1.0, 0.9, 0.5, 0.0);
        assert_eq!(bad.checks[0].status, BoundStatus::Violated);
        assert_eq!(bad.checks[2].status, BoundStatus::Violated);
    }

    #[test]
    fn published_single_pass_defaults_sit_on_boundary() {
        let rep = validate_alg23(1.0, 1.0, 0.4, 1.0);
        assert!(rep.checks.iter().all(|c| c.status == BoundStatus::Boundary));
    }

    #[test]
    fn single_pass_strict_and_violated() {
        let [a, b] = alg23_lhs(1.0, 1.0, 0.3, 0.9);
        assert!((a - 0.2).abs() < 1e-12 && (b - 0.2).abs() < 1e-12);
        assert_eq!(validate_alg23(1.0, 1.0, 0.3, 0.9).status(), BoundStatus::Strict);
        let [a, b] = alg23_lhs(1.0, 1.0, 2.0, 2.0);
        assert_eq!((a, b), (-2.0, -2.0));
        assert_eq!(validate_alg23(1.0, 1.0, 2.0, 2.0).status(), BoundStatus::Violated);
    }
}
