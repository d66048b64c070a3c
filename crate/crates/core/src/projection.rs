//! Euclidean projection onto the paraboloid `K = {(a, b) : a + |b|²/2 ≤ 0}`.
//!
//! For an outside point the nearest boundary point is `(−|b*|²/2, b/t)`
//! where `t ≥ 1` is the unique root in `[1, ∞)` of
//!
//! ```text
//! t³ − (a + 1)·t² − |b|²/2 = 0
//! ```
//!
//! (stationarity of the Lagrangian with multiplier `2(t − 1)`). The cubic is
//! negative at `t = 1` and positive at `t = 2 + a + |b|²/2`, and convex past
//! its inflection, so bracketed Newton converges quadratically.

use rayon::prelude::*;

use crate::field::PairField;

/// Point of `ℝ × ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPoint {
    pub a: f64,
    pub b: [f64; 2],
}

impl PairPoint {
    pub fn new(a: f64, b: [f64; 2]) -> Self {
        Self { a, b }
    }

    pub fn in_k(&self) -> bool {
        self.a + 0.5 * (self.b[0] * self.b[0] + self.b[1] * self.b[1]) <= 0.0
    }

    pub fn distance(&self, other: &PairPoint) -> f64 {
        let da = self.a - other.a;
        let d0 = self.b[0] - other.b[0];
        let d1 = self.b[1] - other.b[1];
        (da * da + d0 * d0 + d1 * d1).sqrt()
    }
}

/// Root `t ≥ 1` of `t³ − (a+1)t² − c = 0` for `a + c > 0`, `c ≥ 0`.
fn cubic_root(a: f64, c: f64) -> f64 {
    let f = |t: f64| t * t * (t - a - 1.0) - c;
    let df = |t: f64| t * (3.0 * t - 2.0 * (a + 1.0));
    let mut lo = 1.0;
    let mut hi = 2.0 + a + c;
    // Start from the right end: f is increasing and convex there.
    let mut t = hi;
    let scale = 1.0 + c + hi * hi * (hi + a.abs() + 1.0);
    for _ in 0..200 {
        let ft = f(t);
        if ft.abs() <= 1e-15 * scale {
            return t;
        }
        if ft > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let d = df(t);
        let newton = if d > 0.0 { t - ft / d } else { f64::NAN };
        t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    t
}

/// Nearest point of `K`. Points already in `K` (including its boundary) are returned unchanged.
pub fn project_k(p: PairPoint) -> PairPoint {
    let nb2 = p.b[0] * p.b[0] + p.b[1] * p.b[1];
    if p.a + 0.5 * nb2 <= 0.0 {
        return p;
    }
    let t = cubic_root(p.a, 0.5 * nb2);
    let b = [p.b[0] / t, p.b[1] / t];
    let a = -0.5 * (b[0] * b[0] + b[1] * b[1]);
    PairPoint { a, b }
}

/// Pointwise `project_k(b + η/r)`: the q-subproblem minimiser.
pub fn solve_q(b_field: &PairField, eta: &PairField, r: f64) -> PairField {
    debug_assert_eq!(b_field.grid(), eta.grid());
    let mut out = PairField::zeros(*b_field.grid());
    let [ba, bx, by] = b_field.components();
    let [ea, ex, ey] = eta.components();
    let inv_r = 1.0 / r;
    let [oa, ox, oy] = out.components_mut();
    oa.par_iter_mut()
        .zip(ox.par_iter_mut())
        .zip(oy.par_iter_mut())
        .enumerate()
        .for_each(|(i, ((qa, qx), qy))| {
            let p = project_k(PairPoint::new(
                ba[i] + inv_r * ea[i],
                [bx[i] + inv_r * ex[i], by[i] + inv_r * ey[i]],
            ));
            *qa = p.a;
            *qx = p.b[0];
            *qy = p.b[1];
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, SpaceBoundary};

    #[test]
    fn inside_point_is_fixed() {
        let p = PairPoint::new(-1.0, [0.0, 0.0]);
        assert_eq!(project_k(p), p);
        let on_boundary = PairPoint::new(-0.5, [1.0, 0.0]);
        assert_eq!(project_k(on_boundary), on_boundary);
    }

    #[test]
    fn positive_scalar_axis_goes_to_origin() {
        let q = project_k(PairPoint::new(1.0, [0.0, 0.0]));
        assert!(q.a.abs() < 1e-14 && q.b == [0.0, 0.0]);
    }

    #[test]
    fn reference_point() {
        // t³ − 1.5t² − 0.5 = 0 has its root at t ≈ 1.6776.
        let q = project_k(PairPoint::new(0.5, [1.0, 0.0]));
        let t = 1.0 / q.b[0];
        assert!((t * t * t - 1.5 * t * t - 0.5).abs() < 1e-12);
        assert!((t - 1.6776).abs() < 1e-4);
        assert!((q.a + 0.1777).abs() < 1e-4);
        assert!((q.b[0] - 0.5961).abs() < 1e-4);
        assert_eq!(q.b[1], 0.0);
    }

    #[test]
    fn handles_extreme_inputs() {
        for p in [
            PairPoint::new(1e6, [1e-3, 0.0]),
            PairPoint::new(-1e3, [1e3, -1e3]),
            PairPoint::new(1e-300, [0.0, 0.0]),
        ] {
            let q = project_k(p);
            assert!(q.a.is_finite() && q.b.iter().all(|v| v.is_finite()));
            assert!(q.a + 0.5 * (q.b[0].powi(2) + q.b[1].powi(2)) <= 1e-12);
        }
    }

    #[test]
    fn field_projection_with_zero_eta_keeps_feasible_field() {
        let g = GridSpec::unit(3, 4, 4, SpaceBoundary::Periodic).unwrap();
        let b = PairField::uniform(g, -2.0, [1.0, 0.5]);
        let q = solve_q(&b, &PairField::zeros(g), 1.0);
        assert_eq!(q, b);
    }

    #[test]
    fn field_projection_is_pointwise() {
        let g = GridSpec::unit(3, 4, 4, SpaceBoundary::Periodic).unwrap();
        let b = PairField::uniform(g, 0.25, [1.0, -1.0]);
        let eta = PairField::uniform(g, 0.5, [0.0, 2.0]);
        let q = solve_q(&b, &eta, 2.0);
        let single = project_k(PairPoint::new(0.5, [1.0, 0.0]));
        for i in 0..g.len() {
            assert_eq!(q.point(i), (single.a, single.b));
        }
    }
}
