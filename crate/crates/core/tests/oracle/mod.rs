//! Brute-force references for the integration tests.
//!
//! Nothing here calls into the library except for reading `GridSpec`
//! geometry and field storage: stencils are rebuilt from their difference
//! formulas, quadratures are plain loops, the φ-subproblem is solved by a
//! dense factorisation and the paraboloid projection by searching along
//! the boundary curve.
#![allow(dead_code)]

use cmot::{GridSpec, SpaceBoundary};
use nalgebra::{DMatrix, DVector};

// ---------------------------------------------------------------- geometry

fn axis_weight(n: usize, h: f64, bounded: bool, a: usize) -> f64 {
    if bounded && (a == 0 || a == n - 1) {
        0.5 * h
    } else {
        h
    }
}

/// Quadrature weight of sample `(k, i, j)`.
pub fn weight(g: &GridSpec, k: usize, i: usize, j: usize) -> f64 {
    let sb = g.space_bc == SpaceBoundary::Neumann;
    axis_weight(g.nt, g.dt, true, k) * axis_weight(g.nx, g.dx, sb, i) * axis_weight(g.ny, g.dy, sb, j)
}

pub fn weights(g: &GridSpec) -> Vec<f64> {
    let mut w = Vec::new();
    for k in 0..g.nt {
        for i in 0..g.nx {
            for j in 0..g.ny {
                w.push(weight(g, k, i, j));
            }
        }
    }
    w
}

pub fn spatial_weight(g: &GridSpec, i: usize, j: usize) -> f64 {
    let sb = g.space_bc == SpaceBoundary::Neumann;
    axis_weight(g.nx, g.dx, sb, i) * axis_weight(g.ny, g.dy, sb, j)
}

fn flat(g: &GridSpec, k: usize, i: usize, j: usize) -> usize {
    (k * g.nx + i) * g.ny + j
}

// ---------------------------------------------------------------- stencils

/// Taps of the derivative at position `a` of an axis.
fn derivative_taps(n: usize, h: f64, bounded: bool, a: usize) -> Vec<(usize, f64)> {
    if !bounded {
        let up = (a + 1) % n;
        let down = (a + n - 1) % n;
        return vec![(up, 0.5 / h), (down, -0.5 / h)];
    }
    if a == 0 {
        vec![(1, 1.0 / h), (0, -1.0 / h)]
    } else if a == n - 1 {
        vec![(n - 1, 1.0 / h), (n - 2, -1.0 / h)]
    } else {
        vec![(a + 1, 0.5 / h), (a - 1, -0.5 / h)]
    }
}

/// Dense time-space gradient: rows are the `∂t`, `∂x`, `∂y` blocks.
pub fn dense_grad(g: &GridSpec) -> DMatrix<f64> {
    let n = g.nt * g.nx * g.ny;
    let sb = g.space_bc == SpaceBoundary::Neumann;
    let mut m = DMatrix::zeros(3 * n, n);
    for k in 0..g.nt {
        for i in 0..g.nx {
            for j in 0..g.ny {
                let row = flat(g, k, i, j);
                for (kk, c) in derivative_taps(g.nt, g.dt, true, k) {
                    m[(row, flat(g, kk, i, j))] += c;
                }
                for (ii, c) in derivative_taps(g.nx, g.dx, sb, i) {
                    m[(n + row, flat(g, k, ii, j))] += c;
                }
                for (jj, c) in derivative_taps(g.ny, g.dy, sb, j) {
                    m[(2 * n + row, flat(g, k, i, jj))] += c;
                }
            }
        }
    }
    m
}

/// Dense divergence, defined as `−W⁻¹ Bᵀ W₃`.
pub fn dense_div(g: &GridSpec) -> DMatrix<f64> {
    let b = dense_grad(g);
    let w = weights(g);
    let n = w.len();
    let mut d = -b.transpose();
    for r in 0..n {
        for c in 0..3 * n {
            d[(r, c)] *= w[c % n] / w[r];
        }
    }
    d
}

pub fn stack(parts: [&[f64]; 3]) -> DVector<f64> {
    DVector::from_iterator(parts.iter().map(|p| p.len()).sum(), parts.iter().flat_map(|p| p.iter().copied()))
}

// -------------------------------------------------------------- quadrature

pub fn inner_naive(g: &GridSpec, f: &[f64], h: &[f64]) -> f64 {
    let n = g.nt * g.nx * g.ny;
    let mut acc = 0.0;
    for c in 0..f.len() / n {
        for k in 0..g.nt {
            for i in 0..g.nx {
                for j in 0..g.ny {
                    let idx = c * n + flat(g, k, i, j);
                    acc += f[idx] * h[idx] * weight(g, k, i, j);
                }
            }
        }
    }
    acc
}

pub fn energy_naive(g: &GridSpec, rho: &[f64], mx: &[f64], my: &[f64]) -> f64 {
    let mut acc = 0.0;
    for k in 0..g.nt {
        for i in 0..g.nx {
            for j in 0..g.ny {
                let idx = flat(g, k, i, j);
                let m2 = mx[idx].powi(2) + my[idx].powi(2);
                if m2 != 0.0 {
                    acc += weight(g, k, i, j) * m2 / (2.0 * rho[idx].max(1e-8));
                }
            }
        }
    }
    acc
}

pub fn mass_naive(g: &GridSpec, slice: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            acc += slice[i * g.ny + j] * spatial_weight(g, i, j);
        }
    }
    acc
}

pub fn norm_naive(g: &GridSpec, f: &[f64]) -> f64 {
    inner_naive(g, f, f).sqrt()
}

// ------------------------------------------------------ dense saddle solve

/// Stationarity system of `G(φ) + ⟨ν, Bφ − p⟩ + r/2|Bφ − p|² − s/2|ν − μ|²`
/// after eliminating `ν = μ + (Bφ − p)/s`, bordered with the zero-mean gauge.
pub struct DenseSystem {
    pub grid: GridSpec,
    pub r: f64,
    pub s: f64,
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// `B`, kept to recover `ν`.
    pub grad: DMatrix<f64>,
    pub mu: DVector<f64>,
    pub p: DVector<f64>,
    pub condition: f64,
}

/// `g` is the gradient of `G` with respect to the grid values of `φ`.
pub fn assemble(g: &GridSpec, r: f64, s: f64, mu: DVector<f64>, p: DVector<f64>, gvec: DVector<f64>) -> DenseSystem {
    let n = g.nt * g.nx * g.ny;
    assert!(n <= 500, "dense oracle limited to 500 unknowns");
    let b = dense_grad(g);
    let w = weights(g);
    let w3 = DMatrix::from_diagonal(&DVector::from_iterator(3 * n, (0..3 * n).map(|c| w[c % n])));
    let c = r + 1.0 / s;
    let btw = b.transpose() * &w3;
    let a = &btw * &b * c;
    let rhs_phi = &btw * &p * c - &btw * &mu - gvec;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    for i in 0..n {
        m[(i, n)] = w[i];
        m[(n, i)] = w[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&rhs_phi);
    let sv = m.singular_values();
    let condition = sv.max() / sv.min();
    DenseSystem { grid: *g, r, s, matrix: m, rhs, grad: b, mu, p, condition }
}

/// `∂G/∂φ` for `G(φ) = Σ_x w_x (φ(0,x) ρ₀(x) − φ(1,x) ρ₁(x))`.
pub fn boundary_gradient(g: &GridSpec, rho0: &[f64], rho1: &[f64]) -> DVector<f64> {
    let n = g.nt * g.nx * g.ny;
    let mut v = DVector::zeros(n);
    for i in 0..g.nx {
        for j in 0..g.ny {
            let w = spatial_weight(g, i, j);
            v[flat(g, 0, i, j)] += w * rho0[i * g.ny + j];
            v[flat(g, g.nt - 1, i, j)] -= w * rho1[i * g.ny + j];
        }
    }
    v
}

#[derive(Debug)]
pub struct Singular;

/// Returns `(φ, ν)`; fails when the bordered system is singular, i.e. the
/// gauge does not remove the whole null space.
pub fn dense_saddle_solve(sys: &DenseSystem) -> Result<(DVector<f64>, DVector<f64>), Singular> {
    let n = sys.grid.nt * sys.grid.nx * sys.grid.ny;
    if !sys.condition.is_finite() || sys.condition > 1e13 {
        return Err(Singular);
    }
    let sol = sys.matrix.clone().lu().solve(&sys.rhs).ok_or(Singular)?;
    let phi = sol.rows(0, n).into_owned();
    let residual = (&sys.matrix * &sol - &sys.rhs).norm() / sys.rhs.norm().max(1e-300);
    assert!(residual <= 1e-10, "dense solve residual {residual}");
    let nu = &sys.mu + (&sys.grad * &phi - &sys.p) / sys.s;
    Ok((phi, nu))
}

// ------------------------------------------------------ projection search

/// Nearest point of `K = {a + |b|²/2 ≤ 0}` by searching the boundary curve.
///
/// `K` is invariant under rotations of `b`, so the nearest point keeps the
/// direction of `b`; the search runs over `t = |b_q|` in `[0, |b|]`,
/// coarse-to-fine until consecutive boundary samples are `resolution` apart.
pub fn projection_grid_search(a: f64, b: [f64; 2], resolution: f64) -> (f64, [f64; 2]) {
    assert!(resolution >= 1e-4);
    let nb = (b[0] * b[0] + b[1] * b[1]).sqrt();
    if a + 0.5 * nb * nb <= 0.0 {
        return (a, b);
    }
    let dir = if nb > 0.0 { [b[0] / nb, b[1] / nb] } else { [1.0, 0.0] };
    let d2 = |t: f64| (a + 0.5 * t * t).powi(2) + (nb - t).powi(2);
    let (mut lo, mut hi) = (0.0, nb);
    let samples = 400;
    let mut best = 0.0;
    loop {
        let step = (hi - lo) / samples as f64;
        let mut best_d = f64::INFINITY;
        for s in 0..=samples {
            let t = lo + s as f64 * step;
            let d = d2(t);
            if d < best_d {
                best_d = d;
                best = t;
            }
        }
        // Arc length between neighbouring samples.
        if step * (1.0 + best * best).sqrt() <= resolution || step == 0.0 {
            break;
        }
        lo = (best - 2.0 * step).max(0.0);
        hi = (best + 2.0 * step).min(nb);
    }
    (-0.5 * best * best, [best * dir[0], best * dir[1]])
}

/// `φ` minimising `G(φ) + ⟨ν, Bφ − p⟩ + r/2|Bφ − p|²` at fixed `ν`, in the
/// zero-mean gauge, by a dense bordered solve.
pub fn dense_poisson(g: &GridSpec, r: f64, nu: &DVector<f64>, p: &DVector<f64>, gvec: &DVector<f64>) -> DVector<f64> {
    let n = g.nt * g.nx * g.ny;
    assert!(n <= 500, "dense oracle limited to 500 unknowns");
    let b = dense_grad(g);
    let w = weights(g);
    let w3 = DMatrix::from_diagonal(&DVector::from_iterator(3 * n, (0..3 * n).map(|c| w[c % n])));
    let btw = b.transpose() * &w3;
    let a = &btw * &b * r;
    let rhs_phi = &btw * p * r - &btw * nu - gvec;
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    for i in 0..n {
        m[(i, n)] = w[i];
        m[(n, i)] = w[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&rhs_phi);
    let sol = m.lu().solve(&rhs).expect("bordered Poisson system is singular");
    sol.rows(0, n).into_owned()
}
