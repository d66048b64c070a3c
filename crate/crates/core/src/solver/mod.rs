//! Augmented-Lagrangian iterations for constrained dynamic transport.
//!
//! All three engines work on the saddle problem
//!
//! ```text
//! inf_{φ,q,p,b} sup_{μ,ν,η}  F(q) + G(φ) − I(μ) + ⟨μ, p − b⟩ + ⟨ν, Bφ − p⟩ + ⟨η, b − q⟩
//!                           + r/2 |Bφ − p|² + r/2 |b − q|² − s/2 |μ − ν|² − s/2 |μ − η|²
//! ```
//!
//! with `F` the indicator of the paraboloid `K`, `G(φ) = ∫φ(0)ρ₀ − φ(1)ρ₁`
//! and `B` the time-space gradient.
//!
//! * [`Algorithm::Alg1`] solves the `(φ, ν)` and `(q, η)` saddle
//!   subproblems to convergence by inner Uzawa loops, then relaxes `p`, `b`.
//! * [`Algorithm::Alg2`] replaces the inner loops with one minimisation and
//!   one gradient step, using only the previous iterates.
//! * [`Algorithm::Alg3`] is `Alg2` with an extra μ-update between the φ and
//!   q half-steps.
//!
//! The μ-update also pins the first and last density slices to `ρ₀` and
//! `ρ₁`. On a collocated grid the discrete continuity equation leaves a
//! one-parameter family of time-oscillating densities per spatial point
//! undetermined; pinning the endpoints removes it, and makes every time
//! slice carry exactly the mass of `ρ₀` at convergence.

mod step_size;

use std::time::{Duration, Instant};

pub use step_size::{
    alg1_inner_bound, alg1_outer_bound, alg23_lhs, validate_alg1, validate_alg23, BoundCheck, BoundStatus,
    StepSizeReport, BOUNDARY_TOL,
};

use crate::constraint::{compute_target, CompiledConstraint, ConstraintSpec};
use crate::diagnostics::{energy, residuals, History, IterationRecord};
use crate::error::{GridError, SolverError};
use crate::field::{PairField, ScalarField, SpatialField};
use crate::grid::GridSpec;
use crate::operators::grad_ts;
use crate::poisson::{PoissonProblem, PoissonSolver};
use crate::projection::solve_q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Alg1,
    Alg2,
    Alg3,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Alg3 => "alg3",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alg1" | "1" => Ok(Algorithm::Alg1),
            "alg2" | "2" => Ok(Algorithm::Alg2),
            "alg3" | "3" => Ok(Algorithm::Alg3),
            other => Err(format!("unknown algorithm '{other}' (expected alg1, alg2 or alg3)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub r: f64,
    pub s: f64,
    /// Outer relaxation of `p`, `b` in `Alg1`.
    pub rho: f64,
    pub rho_nu: f64,
    pub rho_eta: f64,
    /// Primal (`p`, `b`) step of `Alg2`/`Alg3`.
    pub rho_r: f64,
    /// Dual (`ν`, `η`) step of `Alg2`/`Alg3`.
    pub rho_s: f64,
    pub max_outer: usize,
    /// The stopping rule is not consulted before this many outer iterations:
    /// from the interpolated start the density only begins to move once the
    /// momentum has built up, which takes one to three passes.
    pub min_outer: usize,
    pub max_inner: usize,
    /// Stop when the Euclidean change of the density values drops below this.
    pub tol_density: f64,
    /// Relative ν (η) change that ends an `Alg1` sub-iteration.
    pub inner_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            r: 1.0,
            s: 1.0,
            rho: 0.5,
            rho_nu: 0.5,
            rho_eta: 0.5,
            rho_r: 0.4,
            rho_s: 1.0,
            max_outer: 5000,
            min_outer: 10,
            max_inner: 200,
            tol_density: 1e-3,
            inner_tol: 1e-6,
        }
    }
}

impl SolverParams {
    /// `r`, `s` and tolerances must be positive; steps may be zero (a
    /// degenerate but well-defined iteration) but not negative.
    pub fn validate(&self) -> Result<(), SolverError> {
        let positive = [("r", self.r), ("s", self.s), ("tol_density", self.tol_density), ("inner_tol", self.inner_tol)];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SolverError::BadParameter { name, value, reason: "must be positive and finite" });
            }
        }
        let steps = [
            ("rho", self.rho),
            ("rho_nu", self.rho_nu),
            ("rho_eta", self.rho_eta),
            ("rho_r", self.rho_r),
            ("rho_s", self.rho_s),
        ];
        for (name, value) in steps {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(SolverError::BadParameter { name, value, reason: "must be nonnegative and finite" });
            }
        }
        if self.max_inner == 0 {
            return Err(SolverError::BadParameter { name: "max_inner", value: 0.0, reason: "must be at least 1" });
        }
        Ok(())
    }

    pub fn step_report(&self, algorithm: Algorithm) -> StepSizeReport {
        match algorithm {
            Algorithm::Alg1 => validate_alg1(self.r, self.s, self.rho, self.rho_nu, self.rho_eta),
            Algorithm::Alg2 | Algorithm::Alg3 => validate_alg23(self.r, self.s, self.rho_r, self.rho_s),
        }
    }
}

/// Endpoint densities and constraint on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem {
    pub grid: GridSpec,
    pub rho0: SpatialField,
    pub rho1: SpatialField,
    pub constraint: ConstraintSpec,
}

impl TransportProblem {
    pub fn new(grid: GridSpec, rho0: SpatialField, rho1: SpatialField, constraint: ConstraintSpec) -> Self {
        Self { grid, rho0, rho1, constraint }
    }

    pub fn mass0(&self) -> f64 {
        self.rho0.integral(&self.grid)
    }

    pub fn mass1(&self) -> f64 {
        self.rho1.integral(&self.grid)
    }
}

/// Relative mass mismatch accepted between the endpoint densities.
pub const MASS_TOL: f64 = 1e-6;

/// All primal and dual variables of the augmented Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub phi: ScalarField,
    pub q: PairField,
    pub p: PairField,
    pub b: PairField,
    pub mu: PairField,
    pub nu: PairField,
    pub eta: PairField,
    pub iteration: usize,
}

impl SolverState {
    pub fn zeros(grid: GridSpec) -> Self {
        let z = PairField::zeros(grid);
        Self {
            phi: ScalarField::zeros(grid),
            q: z.clone(),
            p: z.clone(),
            b: z.clone(),
            mu: z.clone(),
            nu: z.clone(),
            eta: z,
            iteration: 0,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.phi.grid()
    }

    /// Name of the first field holding a non-finite value.
    pub fn non_finite_field(&self) -> Option<&'static str> {
        if self.phi.first_non_finite().is_some() {
            return Some("phi");
        }
        let pairs = [
            ("q", &self.q),
            ("p", &self.p),
            ("b", &self.b),
            ("mu", &self.mu),
            ("nu", &self.nu),
            ("eta", &self.eta),
        ];
        pairs.into_iter().find(|(_, f)| f.first_non_finite().is_some()).map(|(n, _)| n)
    }
}

/// Outcome of [`Solver::run`].
#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: GridSpec,
    pub algorithm: Algorithm,
    /// Final `μ = (ρ, m)`.
    pub mu: PairField,
    pub phi: ScalarField,
    pub energy: f64,
    pub history: History,
    pub converged: bool,
    pub iterations: usize,
    pub step_report: StepSizeReport,
    pub warnings: Vec<String>,
    pub elapsed: Duration,
    pub state: SolverState,
}

/// Iteration engine bound to one problem and parameter set.
#[derive(Debug, Clone)]
pub struct Solver {
    problem: TransportProblem,
    params: SolverParams,
    poisson: PoissonSolver,
    constraint: CompiledConstraint,
}

impl Solver {
    pub fn new(problem: TransportProblem, params: SolverParams) -> Result<Self, SolverError> {
        params.validate()?;
        let grid = problem.grid;
        for rho in [&problem.rho0, &problem.rho1] {
            if !rho.fits(&grid) {
                return Err(GridError::WrongLength { expected: grid.spatial_len(), got: rho.values().len() }.into());
            }
            if let Some(index) = rho.first_non_finite() {
                return Err(GridError::NonFinite { index }.into());
            }
            if rho.min() < 0.0 {
                return Err(SolverError::BadParameter {
                    name: "endpoint density",
                    value: rho.min(),
                    reason: "densities must be nonnegative",
                });
            }
        }
        let (m0, m1) = (problem.mass0(), problem.mass1());
        let rel = (m0 - m1).abs() / m0.abs().max(m1.abs()).max(f64::MIN_POSITIVE);
        if rel > MASS_TOL {
            return Err(SolverError::BadParameter {
                name: "endpoint masses",
                value: rel,
                reason: "rho0 and rho1 must carry the same mass",
            });
        }
        let constraint = problem.constraint.compile(&grid)?;
        for (name, rho) in [("rho0", &problem.rho0), ("rho1", &problem.rho1)] {
            let mut slab = PairField::zeros(GridSpec { nt: 2, ..grid });
            slab.scalar.slice_mut(0).copy_from_slice(rho.values());
            slab.scalar.slice_mut(1).copy_from_slice(rho.values());
            let two = problem.constraint.compile(slab.grid())?;
            if two.evaluate(&slab).is_infinite() {
                return Err(SolverError::BadParameter {
                    name,
                    value: f64::INFINITY,
                    reason: "endpoint density violates a hard constraint",
                });
            }
        }
        Ok(Self { poisson: PoissonSolver::new(grid), problem, params, constraint })
    }

    pub fn problem(&self) -> &TransportProblem {
        &self.problem
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.problem.grid
    }

    pub fn constraint(&self) -> &CompiledConstraint {
        &self.constraint
    }

    /// Density interpolating linearly between the endpoints, zero momentum,
    /// and the consensus multipliers `ν = η = μ`; the potentials and fluxes
    /// start at zero. A static problem starts at its saddle point.
    pub fn initial_state(&self) -> SolverState {
        let grid = self.problem.grid;
        let mut st = SolverState::zeros(grid);
        for k in 0..grid.nt {
            let t = grid.time(k);
            let slice = st.mu.scalar.slice_mut(k);
            for ((d, a), b) in slice.iter_mut().zip(self.problem.rho0.values()).zip(self.problem.rho1.values()) {
                *d = (1.0 - t) * a + t * b;
            }
        }
        st.nu = st.mu.clone();
        st.eta = st.mu.clone();
        st
    }

    /// φ minimising `G(φ) + ⟨ν, Bφ − p⟩ + r/2 |Bφ − p|²`.
    pub fn solve_phi(&self, nu: &PairField, p: &PairField) -> Result<ScalarField, SolverError> {
        let source = PairField::combination(&[(1.0, nu), (-self.params.r, p)]);
        Ok(self.poisson.solve(&PoissonProblem {
            r: self.params.r,
            rhs_source: &source,
            rho0: &self.problem.rho0,
            rho1: &self.problem.rho1,
        })?)
    }

    /// Prox of `I` around `target`, with the endpoint density slices pinned.
    pub fn update_mu(&self, target: PairField) -> PairField {
        let mut mu = target;
        self.constraint.prox_in_place(&mut mu, self.params.s);
        let last = self.problem.grid.nt - 1;
        mu.scalar.slice_mut(0).copy_from_slice(self.problem.rho0.values());
        mu.scalar.slice_mut(last).copy_from_slice(self.problem.rho1.values());
        mu
    }

    fn mu_target(&self, nu: &PairField, eta: &PairField, p: &PairField, b: &PairField) -> PairField {
        compute_target(nu, eta, p, b, self.params.s).expect("solver fields share one grid")
    }

    /// Inner loop for the `(φ, ν)` saddle point of `L_{p,μ}`, warm-started
    /// from `state.nu`. Returns `(φ, ν, inner iterations)`.
    pub fn alg1_sub_phi(&self, state: &SolverState) -> Result<(ScalarField, PairField, usize), SolverError> {
        let SolverParams { s, rho_nu, inner_tol, max_inner, .. } = self.params;
        let mut nu = state.nu.clone();
        let mut phi = state.phi.clone();
        for k in 1..=max_inner {
            phi = self.solve_phi(&nu, &state.p)?;
            let bphi = grad_ts(&phi);
            // ν_k = ν_{k−1} + ρ_ν (Bφ_k − p − s(ν_{k−1} − μ))
            let step = PairField::combination(&[(1.0, &bphi), (-1.0, &state.p), (-s, &nu), (s, &state.mu)]);
            let change = rho_nu * step.norm();
            nu.axpy(rho_nu, &step);
            if change <= inner_tol * nu.norm() {
                return Ok((phi, nu, k));
            }
        }
        Ok((phi, nu, max_inner))
    }

    /// Inner loop for the `(q, η)` saddle point of `L_{b,μ}`, warm-started
    /// from `state.eta`. Returns `(q, η, inner iterations)`.
    pub fn alg1_sub_q(&self, state: &SolverState) -> (PairField, PairField, usize) {
        let SolverParams { r, s, rho_eta, inner_tol, max_inner, .. } = self.params;
        let mut eta = state.eta.clone();
        let mut q = state.q.clone();
        for k in 1..=max_inner {
            q = solve_q(&state.b, &eta, r);
            // η_k = η_{k−1} + ρ_η (b − q_k − s(η_{k−1} − μ))
            let step = PairField::combination(&[(1.0, &state.b), (-1.0, &q), (-s, &eta), (s, &state.mu)]);
            let change = rho_eta * step.norm();
            eta.axpy(rho_eta, &step);
            if change <= inner_tol * eta.norm() {
                return (q, eta, k);
            }
        }
        (q, eta, max_inner)
    }

    /// One outer iteration of the nested scheme.
    pub fn alg1_step(&self, state: &SolverState) -> Result<SolverState, SolverError> {
        let SolverParams { r, s, rho, .. } = self.params;
        let relax = rho * (r + 1.0 / s);

        let (phi, nu, _) = self.alg1_sub_phi(state)?;
        let bphi = grad_ts(&phi);
        let p = PairField::combination(&[(1.0 - relax, &state.p), (relax, &bphi)]);

        let (q, eta, _) = self.alg1_sub_q(state);
        let b = PairField::combination(&[(1.0 - relax, &state.b), (relax, &q)]);

        let mu = self.update_mu(self.mu_target(&nu, &eta, &p, &b));
        Ok(SolverState { phi, q, p, b, mu, nu, eta, iteration: state.iteration + 1 })
    }

    /// `(φⁿ, pⁿ, νⁿ)` from the previous iterates, shared by `Alg2` and `Alg3`.
    fn potential_half_step(&self, state: &SolverState) -> Result<(ScalarField, PairField, PairField), SolverError> {
        let SolverParams { r, s, rho_r, rho_s, .. } = self.params;
        let SolverState { p, mu, nu, .. } = state;
        let phi = self.solve_phi(nu, p)?;
        let bphi = grad_ts(&phi);
        // pⁿ = pⁿ⁻¹ − ρ_r (μ − νⁿ⁻¹ + r(pⁿ⁻¹ − Bφⁿ))
        let p_new = PairField::combination(&[
            (1.0 - rho_r * r, p),
            (-rho_r, mu),
            (rho_r, nu),
            (rho_r * r, &bphi),
        ]);
        // νⁿ = νⁿ⁻¹ + ρ_s (Bφⁿ − pⁿ⁻¹ − s(νⁿ⁻¹ − μ))
        let nu_new = PairField::combination(&[
            (1.0 - rho_s * s, nu),
            (rho_s, &bphi),
            (-rho_s, p),
            (rho_s * s, mu),
        ]);
        Ok((phi, p_new, nu_new))
    }

    /// `(qⁿ, bⁿ, ηⁿ)` from the previous iterates and the current `μ`.
    fn flux_half_step(&self, state: &SolverState, mu: &PairField) -> (PairField, PairField, PairField) {
        let SolverParams { r, s, rho_r, rho_s, .. } = self.params;
        let SolverState { b, eta, .. } = state;
        let q = solve_q(b, eta, r);
        // bⁿ = bⁿ⁻¹ − ρ_r (ηⁿ⁻¹ − μ + r(bⁿ⁻¹ − qⁿ))
        let b_new = PairField::combination(&[
            (1.0 - rho_r * r, b),
            (-rho_r, eta),
            (rho_r, mu),
            (rho_r * r, &q),
        ]);
        // ηⁿ = ηⁿ⁻¹ + ρ_s (bⁿ⁻¹ − qⁿ − s(ηⁿ⁻¹ − μ))
        let eta_new = PairField::combination(&[
            (1.0 - rho_s * s, eta),
            (rho_s, b),
            (-rho_s, &q),
            (rho_s * s, mu),
        ]);
        (q, b_new, eta_new)
    }

    /// One pass of the single-update scheme.
    pub fn alg2_step(&self, state: &SolverState) -> Result<SolverState, SolverError> {
        let (phi, p, nu) = self.potential_half_step(state)?;
        let (q, b, eta) = self.flux_half_step(state, &state.mu);
        let mu = self.update_mu(self.mu_target(&nu, &eta, &p, &b));
        Ok(SolverState { phi, q, p, b, mu, nu, eta, iteration: state.iteration + 1 })
    }

    /// One pass of the double-update scheme.
    pub fn alg3_step(&self, state: &SolverState) -> Result<SolverState, SolverError> {
        let (phi, p, nu) = self.potential_half_step(state)?;
        let mu_half = self.update_mu(self.mu_target(&nu, &state.eta, &p, &state.b));
        let (q, b, eta) = self.flux_half_step(state, &mu_half);
        let mu = self.update_mu(self.mu_target(&nu, &eta, &p, &b));
        Ok(SolverState { phi, q, p, b, mu, nu, eta, iteration: state.iteration + 1 })
    }

    pub fn step(&self, state: &SolverState, algorithm: Algorithm) -> Result<SolverState, SolverError> {
        match algorithm {
            Algorithm::Alg1 => self.alg1_step(state),
            Algorithm::Alg2 => self.alg2_step(state),
            Algorithm::Alg3 => self.alg3_step(state),
        }
    }

    pub fn record(&self, state: &SolverState, previous_density: Option<&ScalarField>) -> IterationRecord {
        residuals(state, &self.problem.rho0, &self.problem.rho1, previous_density)
    }

    /// One message per violated step-size condition of `algorithm`.
    pub fn step_warnings(&self, algorithm: Algorithm) -> Vec<String> {
        self.params
            .step_report(algorithm)
            .violated()
            .map(|c| {
                format!(
                    "step-size condition {} violated (value {:.6e}, bound {:.6e}); convergence is not guaranteed",
                    c.name, c.supplied, c.bound_value
                )
            })
            .collect()
    }

    pub fn run(&self, algorithm: Algorithm) -> Result<Solution, SolverError> {
        self.run_from(self.initial_state(), algorithm)
    }

    /// Iterates from `state` until the density change drops below
    /// `tol_density` or `max_outer` iterations have run.
    pub fn run_from(&self, mut state: SolverState, algorithm: Algorithm) -> Result<Solution, SolverError> {
        let start = Instant::now();
        let step_report = self.params.step_report(algorithm);
        let warnings = self.step_warnings(algorithm);

        let mut history = History::default();
        let mut converged = false;
        for _ in 0..self.params.max_outer {
            let next = self.step(&state, algorithm)?;
            if let Some(field) = next.non_finite_field() {
                return Err(SolverError::NonFinite { iteration: next.iteration, field, warnings });
            }
            let rec = self.record(&next, Some(&state.mu.scalar));
            state = next;
            history.push(rec);
            if !rec.density_change.is_finite() || !rec.energy.is_finite() {
                return Err(SolverError::NonFinite { iteration: state.iteration, field: "mu", warnings });
            }
            if history.len() >= self.params.min_outer && rec.density_change < self.params.tol_density {
                converged = true;
                break;
            }
        }

        Ok(Solution {
            grid: self.problem.grid,
            algorithm,
            mu: state.mu.clone(),
            phi: state.phi.clone(),
            energy: energy(&state.mu),
            iterations: history.len(),
            history,
            converged,
            step_report,
            warnings,
            elapsed: start.elapsed(),
            state,
        })
    }
}
