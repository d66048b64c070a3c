//! Convergence criteria, transport energy and conservation checks.

use crate::field::{PairField, ScalarField, SpatialField};
use crate::grid::GridSpec;
use crate::operators::{div_ts, grad_ts};
use crate::poisson::boundary_source;
use crate::solver::SolverState;

/// Density floor used when evaluating `|m|²/(2ρ)`.
pub const ENERGY_RHO_FLOOR: f64 = 1e-8;

/// Kinetic action `∫∫ |m|²/(2 max(ρ, ε))`.
pub fn energy(mu: &PairField) -> f64 {
    let w = mu.grid().weights();
    let [rho, mx, my] = mu.components();
    let mut acc = 0.0;
    for i in 0..w.len() {
        let m2 = mx[i] * mx[i] + my[i] * my[i];
        if m2 > 0.0 {
            acc += w[i] * m2 / (2.0 * rho[i].max(ENERGY_RHO_FLOOR));
        }
    }
    acc
}

/// Per-iteration convergence record. Residual norms are grid-weighted L²;
/// `density_change` is the unscaled norm used by the stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub res_bphi_p: f64,
    pub res_b_q: f64,
    pub res_mu_nu: f64,
    pub res_mu_eta: f64,
    pub res_bphi_q: f64,
    /// `|div μ − γ|`: the discrete continuity equation with its boundary data.
    pub continuity_residual: f64,
    pub density_change: f64,
    pub mass_per_slice_max_dev: f64,
}

impl IterationRecord {
    pub const COLUMNS: [&'static str; 10] = [
        "iteration",
        "energy",
        "res_Bphi_p",
        "res_b_q",
        "res_mu_nu",
        "res_mu_eta",
        "res_Bphi_q",
        "continuity_residual",
        "density_change",
        "mass_per_slice_max_dev",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.energy,
            self.res_bphi_p,
            self.res_b_q,
            self.res_mu_nu,
            self.res_mu_eta,
            self.res_bphi_q,
            self.continuity_residual,
            self.density_change,
            self.mass_per_slice_max_dev,
        ]
    }

    pub fn from_values(iteration: usize, v: [f64; 9]) -> Self {
        Self {
            iteration,
            energy: v[0],
            res_bphi_p: v[1],
            res_b_q: v[2],
            res_mu_nu: v[3],
            res_mu_eta: v[4],
            res_bphi_q: v[5],
            continuity_residual: v[6],
            density_change: v[7],
            mass_per_slice_max_dev: v[8],
        }
    }
}

/// `max_t |∫ρ(t,·) − ∫ρ₀|`.
pub fn mass_per_slice_max_dev(density: &ScalarField, rho0: &SpatialField) -> f64 {
    let grid = density.grid();
    let ws = grid.spatial_weights();
    let m0: f64 = ws.iter().zip(rho0.values()).map(|(w, v)| w * v).sum();
    (0..grid.nt)
        .map(|k| {
            let m: f64 = ws.iter().zip(density.slice(k)).map(|(w, v)| w * v).sum();
            (m - m0).abs()
        })
        .fold(0.0, f64::max)
}

/// Plain Euclidean norm of `ρ − previous` over all grid values.
///
/// Unlike the other norms this one is not scaled by the cell volume, so the
/// stopping tolerance reads as an absolute change per grid value.
pub fn density_change(density: &ScalarField, previous: &ScalarField) -> f64 {
    density
        .values()
        .iter()
        .zip(previous.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `|div μ − γ|` with `γ` the folded boundary densities.
pub fn continuity_residual(mu: &PairField, rho0: &SpatialField, rho1: &SpatialField) -> f64 {
    let grid: GridSpec = *mu.grid();
    let mut d = div_ts(mu);
    d.axpy(-1.0, &boundary_source(&grid, rho0, rho1));
    d.norm()
}

/// Fills an [`IterationRecord`] for `state`. `previous_density` is the
/// density of the iterate before `state`; without it the change is 0.
pub fn residuals(
    state: &SolverState,
    rho0: &SpatialField,
    rho1: &SpatialField,
    previous_density: Option<&ScalarField>,
) -> IterationRecord {
    let bphi = grad_ts(&state.phi);
    let density_change = previous_density.map_or(0.0, |prev| density_change(&state.mu.scalar, prev));
    IterationRecord {
        iteration: state.iteration,
        energy: energy(&state.mu),
        res_bphi_p: bphi.distance(&state.p),
        res_b_q: state.b.distance(&state.q),
        res_mu_nu: state.mu.distance(&state.nu),
        res_mu_eta: state.mu.distance(&state.eta),
        res_bphi_q: bphi.distance(&state.q),
        continuity_residual: continuity_residual(&state.mu, rho0, rho1),
        density_change,
        mass_per_slice_max_dev: mass_per_slice_max_dev(&state.mu.scalar, rho0),
    }
}

/// Ordered convergence history of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub records: Vec<IterationRecord>,
}

impl History {
    pub fn push(&mut self, r: IterationRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Every record divided componentwise by the first one (0/0 → 0).
    pub fn relative(&self) -> Vec<IterationRecord> {
        let Some(first) = self.records.first() else { return vec![] };
        let f = first.values();
        self.records
            .iter()
            .map(|r| {
                let mut v = r.values();
                for (x, d) in v.iter_mut().zip(f) {
                    *x = if d != 0.0 { *x / d } else if *x == 0.0 { 0.0 } else { f64::INFINITY };
                }
                IterationRecord::from_values(r.iteration, v)
            })
            .collect()
    }
}
