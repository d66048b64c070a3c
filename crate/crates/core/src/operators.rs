//! Time-space gradient, divergence and Laplacian.
//!
//! The gradient uses centered differences at interior samples. On a bounded
//! axis (time, Neumann space) the end samples use the one-sided difference
//! into the domain, so linear functions are differentiated exactly. A
//! periodic axis wraps around.
//!
//! The divergence is not an independent stencil: it is the negative adjoint
//! of the gradient under the weighted grid inner product, so
//! `⟨grad φ, u⟩ = −⟨φ, div u⟩` holds to rounding for every pair of fields.
//! On a bounded axis with trapezoidal weights this works out to centered
//! differences in the interior and `(u₀ + u₁)/h`, `−(uₙ₋₂ + uₙ₋₁)/h` at the
//! ends. The Laplacian is `div ∘ grad`.

use crate::field::{PairField, ScalarField};
use crate::grid::{AxisKind, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum AxisOp {
    Grad,
    Div,
}

/// The (at most two) nonzero taps of row `a` of a one-axis operator.
#[inline]
fn taps(op: AxisOp, kind: AxisKind, n: usize, h: f64, a: usize) -> [(usize, f64); 2] {
    let c = 0.5 / h;
    match kind {
        AxisKind::Periodic => [((a + 1) % n, c), ((a + n - 1) % n, -c)],
        AxisKind::Bounded => match op {
            AxisOp::Grad => {
                if a == 0 {
                    [(1, 1.0 / h), (0, -1.0 / h)]
                } else if a == n - 1 {
                    [(n - 1, 1.0 / h), (n - 2, -1.0 / h)]
                } else {
                    [(a + 1, c), (a - 1, -c)]
                }
            }
            AxisOp::Div => {
                if a == 0 {
                    [(0, 1.0 / h), (1, 1.0 / h)]
                } else if a == n - 1 {
                    [(n - 2, -1.0 / h), (n - 1, -1.0 / h)]
                } else {
                    [(a + 1, c), (a - 1, -c)]
                }
            }
        },
    }
}

/// Dense `n × n` matrix (row-major) of a one-axis operator.
pub(crate) fn axis_matrix(op: AxisOp, kind: AxisKind, n: usize, h: f64) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for a in 0..n {
        for (b, c) in taps(op, kind, n, h, a) {
            m[a * n + b] += c;
        }
    }
    m
}

/// Which axis of the `[t][x][y]` layout an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    T,
    X,
    Y,
}

impl Axis {
    /// `(outer, n, inner, h, kind)` of the axis in the flat layout.
    pub(crate) fn layout(self, g: &GridSpec) -> (usize, usize, usize, f64, AxisKind) {
        match self {
            Axis::T => (1, g.nt, g.nx * g.ny, g.dt, AxisKind::Bounded),
            Axis::X => (g.nt, g.nx, g.ny, g.dx, g.space_axis()),
            Axis::Y => (g.nt * g.nx, g.ny, 1, g.dy, g.space_axis()),
        }
    }
}

/// `dst += op_axis(src)`.
fn accumulate_axis(op: AxisOp, axis: Axis, grid: &GridSpec, src: &[f64], dst: &mut [f64]) {
    let (outer, n, inner, h, kind) = axis.layout(grid);
    for o in 0..outer {
        let base = o * n * inner;
        for a in 0..n {
            let [(b1, c1), (b2, c2)] = taps(op, kind, n, h, a);
            let out = &mut dst[base + a * inner..base + (a + 1) * inner];
            let s1 = &src[base + b1 * inner..base + (b1 + 1) * inner];
            let s2 = &src[base + b2 * inner..base + (b2 + 1) * inner];
            for ((d, x1), x2) in out.iter_mut().zip(s1).zip(s2) {
                *d += c1 * x1 + c2 * x2;
            }
        }
    }
}

/// `B φ = (∂ₜφ, ∂ₓφ, ∂ᵧφ)`.
pub fn grad_ts(phi: &ScalarField) -> PairField {
    let grid = *phi.grid();
    let mut out = PairField::zeros(grid);
    let [dt, dx, dy] = out.components_mut();
    accumulate_axis(AxisOp::Grad, Axis::T, &grid, phi.values(), dt);
    accumulate_axis(AxisOp::Grad, Axis::X, &grid, phi.values(), dx);
    accumulate_axis(AxisOp::Grad, Axis::Y, &grid, phi.values(), dy);
    out
}

/// Negative weighted adjoint of [`grad_ts`].
pub fn div_ts(u: &PairField) -> ScalarField {
    let grid = *u.grid();
    let mut out = ScalarField::zeros(grid);
    let [ut, ux, uy] = u.components();
    accumulate_axis(AxisOp::Div, Axis::T, &grid, ut, out.values_mut());
    accumulate_axis(AxisOp::Div, Axis::X, &grid, ux, out.values_mut());
    accumulate_axis(AxisOp::Div, Axis::Y, &grid, uy, out.values_mut());
    out
}

pub fn laplacian_ts(phi: &ScalarField) -> ScalarField {
    div_ts(&grad_ts(phi))
}
