//! Spectral solver for the φ-subproblem
//!
//! ```text
//! −r Δφ = div(ν − r p) − γ
//! ```
//!
//! where `Δ = div_ts ∘ grad_ts` and `γ` carries the boundary densities:
//! `ρ₀/w₀` on the first time slice and `−ρ₁/w_last` on the last one, with
//! `w` the time quadrature weights. This is the exact stationarity condition
//! of `G(φ) + ⟨ν, Bφ − p⟩ + (r/2)|Bφ − p|²` on the grid, i.e. the discrete
//! counterpart of the Poisson problem with time-Neumann data
//! `r ∂ₜφ(0) = ρ₀ − ν₀(0) + r p₀(0)` and its mirror at `t = 1`.
//!
//! The operator is a Kronecker sum of three one-axis operators, each
//! self-adjoint in the weighted inner product. Each axis is diagonalised once
//! (symmetric eigendecomposition of `W^{1/2} A W^{-1/2}`), so a solve is three
//! forward transforms, a pointwise division and three inverse transforms.
//! The axis operators are assembled from the same stencils as
//! [`grad_ts`](crate::operators::grad_ts) and
//! [`div_ts`](crate::operators::div_ts), so the solve inverts exactly the
//! discrete Laplacian used everywhere else.
//!
//! Null directions (constants; on an even periodic axis also the
//! alternating mode) are gauged to zero. The right-hand side's component
//! along them is the compatibility defect: below [`COMPATIBILITY_TOL`]
//! (relative) it is dropped, above it the solve fails.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{GridError, PoissonError};
use crate::field::{PairField, ScalarField, SpatialField};
use crate::grid::{axis_weights, GridSpec};
use crate::operators::{axis_matrix, div_ts, Axis, AxisOp};

/// Relative null-space defect above which the right-hand side is rejected.
pub const COMPATIBILITY_TOL: f64 = 1e-6;

/// Eigenvalues below this fraction of the largest are treated as null.
const NULL_EIGEN_TOL: f64 = 1e-10;

/// One φ-subproblem instance.
#[derive(Debug, Clone, Copy)]
pub struct PoissonProblem<'a> {
    pub r: f64,
    /// `ν − r·p`; its divergence is the bulk right-hand side.
    pub rhs_source: &'a PairField,
    pub rho0: &'a SpatialField,
    pub rho1: &'a SpatialField,
}

impl PoissonProblem<'_> {
    pub fn grid(&self) -> &GridSpec {
        self.rhs_source.grid()
    }
}

/// Eigenbasis of one axis operator `A = −div∘grad` restricted to that axis.
#[derive(Debug, Clone)]
struct AxisBasis {
    n: usize,
    /// `Qᵀ W^{1/2}`, row-major.
    forward: Vec<f64>,
    /// `W^{-1/2} Q`, row-major.
    inverse: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl AxisBasis {
    fn new(axis: Axis, grid: &GridSpec) -> Self {
        let (_, n, _, h, kind) = axis.layout(grid);
        let grad = axis_matrix(AxisOp::Grad, kind, n, h);
        let div = axis_matrix(AxisOp::Div, kind, n, h);
        let w = axis_weights(n, h, kind);
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();

        // A = −div·grad, then S = W^{1/2} A W^{-1/2}.
        let mut s = DMatrix::<f64>::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc -= div[a * n + c] * grad[c * n + b];
                }
                s[(a, b)] = sw[a] * acc / sw[b];
            }
        }
        let s = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);

        let mut forward = vec![0.0; n * n];
        let mut inverse = vec![0.0; n * n];
        for a in 0..n {
            for c in 0..n {
                let q = eig.eigenvectors[(a, c)];
                forward[c * n + a] = q * sw[a];
                inverse[a * n + c] = q / sw[a];
            }
        }
        let eigenvalues = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        Self { n, forward, inverse, eigenvalues }
    }
}

/// Applies `m` (n×n) along `axis`.
fn apply_along(m: &[f64], axis: Axis, grid: &GridSpec, src: &[f64]) -> Vec<f64> {
    let (outer, n, inner, _, _) = axis.layout(grid);
    let block = n * inner;
    let mut dst = vec![0.0; src.len()];
    let run_block = |s: &[f64], d: &mut [f64]| {
        for a in 0..n {
            let row = &mut d[a * inner..(a + 1) * inner];
            for b in 0..n {
                let c = m[a * n + b];
                if c == 0.0 {
                    continue;
                }
                for (r, x) in row.iter_mut().zip(&s[b * inner..(b + 1) * inner]) {
                    *r += c * x;
                }
            }
        }
    };
    if outer > 1 {
        dst.par_chunks_mut(block)
            .zip(src.par_chunks(block))
            .for_each(|(d, s)| run_block(s, d));
    } else {
        dst.par_chunks_mut(inner).enumerate().for_each(|(a, row)| {
            for b in 0..n {
                let c = m[a * n + b];
                if c == 0.0 {
                    continue;
                }
                for (r, x) in row.iter_mut().zip(&src[b * inner..(b + 1) * inner]) {
                    *r += c * x;
                }
            }
        });
    }
    dst
}

/// Precomputed solver for one grid.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: GridSpec,
    axes: [AxisBasis; 3],
    null_threshold: f64,
}

/// Result of inverting `−r Δ` on a given right-hand side.
#[derive(Debug, Clone)]
pub struct Inversion {
    pub phi: ScalarField,
    /// Relative weighted norm of the right-hand side's null-space component.
    pub defect: f64,
}

impl PoissonSolver {
    pub fn new(grid: GridSpec) -> Self {
        let axes = [
            AxisBasis::new(Axis::T, &grid),
            AxisBasis::new(Axis::X, &grid),
            AxisBasis::new(Axis::Y, &grid),
        ];
        let lmax: f64 = axes
            .iter()
            .map(|a| a.eigenvalues.iter().copied().fold(0.0, f64::max))
            .sum();
        Self { grid, axes, null_threshold: NULL_EIGEN_TOL * lmax.max(1.0) }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Solves `−r Δφ = f` in the zero-mean gauge, dropping any null-space
    /// component of `f` (reported as `defect`).
    pub fn invert(&self, f: &ScalarField, r: f64) -> Result<Inversion, PoissonError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(PoissonError::BadPenalty(r));
        }
        if *f.grid() != self.grid {
            return Err(GridError::Mismatch.into());
        }
        let [bt, bx, by] = &self.axes;
        let mut hat = apply_along(&bt.forward, Axis::T, &self.grid, f.values());
        hat = apply_along(&bx.forward, Axis::X, &self.grid, &hat);
        hat = apply_along(&by.forward, Axis::Y, &self.grid, &hat);

        let (mut total, mut null) = (0.0, 0.0);
        for ct in 0..bt.n {
            for cx in 0..bx.n {
                let base = self.grid.index(ct, cx, 0);
                let lam_tx = bt.eigenvalues[ct] + bx.eigenvalues[cx];
                for (cy, v) in hat[base..base + by.n].iter_mut().enumerate() {
                    let lam = lam_tx + by.eigenvalues[cy];
                    total += *v * *v;
                    if lam <= self.null_threshold {
                        null += *v * *v;
                        *v = 0.0;
                    } else {
                        *v /= r * lam;
                    }
                }
            }
        }
        let defect = if total > 0.0 { (null / total).sqrt() } else { 0.0 };

        hat = apply_along(&by.inverse, Axis::Y, &self.grid, &hat);
        hat = apply_along(&bx.inverse, Axis::X, &self.grid, &hat);
        hat = apply_along(&bt.inverse, Axis::T, &self.grid, &hat);
        Ok(Inversion { phi: ScalarField::from_vec(self.grid, hat)?, defect })
    }

    /// Solves the φ-subproblem; fails if the data are incompatible.
    ///
    /// The defect is measured against the size of the two terms of the
    /// right-hand side rather than against their sum: when the bulk and
    /// boundary terms nearly cancel, the sum is rounding noise and its
    /// null-space share says nothing about compatibility.
    pub fn solve(&self, problem: &PoissonProblem<'_>) -> Result<ScalarField, PoissonError> {
        let (rhs, scale) = folded_rhs_with_scale(problem)?;
        let inv = self.invert(&rhs, problem.r)?;
        let defect = if scale > 0.0 { inv.defect * rhs.norm() / scale } else { 0.0 };
        if defect > COMPATIBILITY_TOL {
            return Err(PoissonError::Incompatible { defect });
        }
        Ok(inv.phi)
    }
}

/// `γ`: boundary densities folded into the first and last time slices.
pub fn boundary_source(grid: &GridSpec, rho0: &SpatialField, rho1: &SpatialField) -> ScalarField {
    let wt = grid.time_weights();
    let mut g = ScalarField::zeros(*grid);
    let last = grid.nt - 1;
    for (d, s) in g.slice_mut(0).iter_mut().zip(rho0.values()) {
        *d = s / wt[0];
    }
    for (d, s) in g.slice_mut(last).iter_mut().zip(rho1.values()) {
        *d = -s / wt[last];
    }
    g
}

/// Full right-hand side `div(source) − γ` of `−r Δφ = ·`.
pub fn folded_rhs(problem: &PoissonProblem<'_>) -> Result<ScalarField, PoissonError> {
    folded_rhs_with_scale(problem).map(|(rhs, _)| rhs)
}

/// The right-hand side together with `|div(source)| + |γ|`.
fn folded_rhs_with_scale(problem: &PoissonProblem<'_>) -> Result<(ScalarField, f64), PoissonError> {
    let grid = *problem.grid();
    if !(problem.r > 0.0 && problem.r.is_finite()) {
        return Err(PoissonError::BadPenalty(problem.r));
    }
    for rho in [problem.rho0, problem.rho1] {
        if !rho.fits(&grid) {
            return Err(GridError::WrongLength { expected: grid.spatial_len(), got: rho.values().len() }.into());
        }
        let min = rho.min();
        if min < 0.0 {
            return Err(PoissonError::NegativeDensity { min });
        }
    }
    let mut rhs = div_ts(problem.rhs_source);
    let gamma = boundary_source(&grid, problem.rho0, problem.rho1);
    let scale = rhs.norm() + gamma.norm();
    rhs.axpy(-1.0, &gamma);
    Ok((rhs, scale))
}

/// One-shot solve; builds the spectral bases for the problem's grid.
pub fn solve_phi(problem: &PoissonProblem<'_>) -> Result<ScalarField, PoissonError> {
    PoissonSolver::new(*problem.grid()).solve(problem)
}
