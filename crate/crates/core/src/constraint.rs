//! Convex constraint / penalty functionals `I(μ)` and the μ-update prox
//!
//! ```text
//! μ⁺ = argmin_μ  s·|μ − c|² + I(μ)
//! ```
//!
//! Every supported term is pointwise and acts on one coordinate of
//! `μ = (ρ, m)`, so the prox separates: density bounds clamp `ρ`, fixed
//! regions overwrite `ρ` on their mask, momentum penalties shrink `m`.
//! Bounds combine into a box; a fixed region must sit inside that box and
//! overlapping fixed regions must agree, which makes the composition exact.

use crate::error::{ConstraintError, GridError};
use crate::field::{PairField, SpatialField};
use crate::grid::GridSpec;

/// Violation of a hard term beyond this is reported as `+∞`.
pub const HARD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintTerm {
    Unconstrained,
    /// `ρ(t, x) ≤ ρ̄(x)` for every `t`.
    DensityUpperBound { upper: SpatialField },
    /// `ρ(t, x) ≥ ρ_min(x)` for every `t`; never implied by the other terms.
    DensityLowerBound { lower: SpatialField },
    /// `∫∫ ψ(x)|m(t, x)|² dx dt`.
    MomentumQuadraticPenalty { psi: SpatialField },
    /// `ρ(t, x) = ρ_fixed(x)` wherever `mask` is set, for every `t`.
    FixedDensityRegion { mask: Vec<bool>, density: SpatialField },
}

impl ConstraintTerm {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintTerm::Unconstrained => "unconstrained",
            ConstraintTerm::DensityUpperBound { .. } => "density_upper_bound",
            ConstraintTerm::DensityLowerBound { .. } => "density_lower_bound",
            ConstraintTerm::MomentumQuadraticPenalty { .. } => "momentum_penalty",
            ConstraintTerm::FixedDensityRegion { .. } => "fixed_density",
        }
    }

    pub fn is_hard(&self) -> bool {
        !matches!(
            self,
            ConstraintTerm::Unconstrained | ConstraintTerm::MomentumQuadraticPenalty { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintSpec {
    pub terms: Vec<ConstraintTerm>,
}

impl ConstraintSpec {
    pub fn unconstrained() -> Self {
        Self { terms: vec![] }
    }

    pub fn new(terms: Vec<ConstraintTerm>) -> Self {
        Self { terms }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.terms.iter().all(|t| matches!(t, ConstraintTerm::Unconstrained))
    }

    /// Checks every term against `grid` and resolves the per-point prox data.
    pub fn compile(&self, grid: &GridSpec) -> Result<CompiledConstraint, ConstraintError> {
        let n = grid.spatial_len();
        let mut lower: Option<Vec<f64>> = None;
        let mut upper: Option<Vec<f64>> = None;
        let mut psi: Option<Vec<f64>> = None;
        let mut fixed: Option<Vec<Option<f64>>> = None;

        let check = |term: &'static str, f: &SpatialField, nonneg: bool| -> Result<(), ConstraintError> {
            if !f.fits(grid) {
                return Err(ConstraintError::Shape { term, nx: grid.nx, ny: grid.ny });
            }
            if let Some(index) = f.first_non_finite() {
                return Err(GridError::NonFinite { index }.into());
            }
            if nonneg {
                if let Some((index, &min)) = f.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
                    return Err(ConstraintError::Negative { term, min, index });
                }
            }
            Ok(())
        };

        for term in &self.terms {
            match term {
                ConstraintTerm::Unconstrained => {}
                ConstraintTerm::DensityUpperBound { upper: u } => {
                    check(term.name(), u, true)?;
                    let dst = upper.get_or_insert_with(|| vec![f64::INFINITY; n]);
                    for (d, v) in dst.iter_mut().zip(u.values()) {
                        *d = d.min(*v);
                    }
                }
                ConstraintTerm::DensityLowerBound { lower: l } => {
                    check(term.name(), l, false)?;
                    let dst = lower.get_or_insert_with(|| vec![f64::NEG_INFINITY; n]);
                    for (d, v) in dst.iter_mut().zip(l.values()) {
                        *d = d.max(*v);
                    }
                }
                ConstraintTerm::MomentumQuadraticPenalty { psi: p } => {
                    check(term.name(), p, true)?;
                    let dst = psi.get_or_insert_with(|| vec![0.0; n]);
                    for (d, v) in dst.iter_mut().zip(p.values()) {
                        *d += v;
                    }
                }
                ConstraintTerm::FixedDensityRegion { mask, density } => {
                    check(term.name(), density, true)?;
                    if mask.len() != n {
                        return Err(ConstraintError::Shape { term: term.name(), nx: grid.nx, ny: grid.ny });
                    }
                    let dst = fixed.get_or_insert_with(|| vec![None; n]);
                    for (index, (d, (&on, &v))) in dst.iter_mut().zip(mask.iter().zip(density.values())).enumerate() {
                        if !on {
                            continue;
                        }
                        match d {
                            Some(prev) if (*prev - v).abs() > HARD_TOL => {
                                return Err(ConstraintError::FixedOverlap { index });
                            }
                            _ => *d = Some(v),
                        }
                    }
                }
            }
        }

        if let (Some(lo), Some(hi)) = (&lower, &upper) {
            if let Some(index) = (0..n).find(|&i| lo[i] > hi[i]) {
                return Err(ConstraintError::EmptyBox { index, lower: lo[index], upper: hi[index] });
            }
        }
        if let Some(fx) = &fixed {
            for (index, v) in fx.iter().enumerate() {
                let Some(v) = *v else { continue };
                let lo = lower.as_ref().map_or(f64::NEG_INFINITY, |l| l[index]);
                let hi = upper.as_ref().map_or(f64::INFINITY, |u| u[index]);
                if v < lo - HARD_TOL || v > hi + HARD_TOL {
                    return Err(ConstraintError::FixedOutsideBounds { index, value: v, lower: lo, upper: hi });
                }
            }
        }
        Ok(CompiledConstraint { grid: *grid, lower, upper, psi, fixed })
    }
}

/// Per-point prox data for one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledConstraint {
    grid: GridSpec,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    psi: Option<Vec<f64>>,
    fixed: Option<Vec<Option<f64>>>,
}

impl CompiledConstraint {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn is_trivial(&self) -> bool {
        self.lower.is_none() && self.upper.is_none() && self.psi.is_none() && self.fixed.is_none()
    }

    pub fn upper(&self) -> Option<&[f64]> {
        self.upper.as_deref()
    }

    pub fn psi(&self) -> Option<&[f64]> {
        self.psi.as_deref()
    }

    /// Overwrites `mu` with `argmin s|μ − mu|² + I(μ)`.
    pub fn prox_in_place(&self, mu: &mut PairField, s: f64) {
        let ns = self.grid.spatial_len();
        let [rho, mx, my] = mu.components_mut();
        for (slice, _) in rho.chunks_mut(ns).zip(0..self.grid.nt) {
            if let Some(lo) = &self.lower {
                slice.iter_mut().zip(lo).for_each(|(v, l)| *v = v.max(*l));
            }
            if let Some(hi) = &self.upper {
                slice.iter_mut().zip(hi).for_each(|(v, h)| *v = v.min(*h));
            }
            if let Some(fx) = &self.fixed {
                for (v, f) in slice.iter_mut().zip(fx) {
                    if let Some(f) = f {
                        *v = *f;
                    }
                }
            }
        }
        if let Some(psi) = &self.psi {
            for comp in [mx, my] {
                for slice in comp.chunks_mut(ns) {
                    for (v, p) in slice.iter_mut().zip(psi) {
                        *v *= s / (s + p);
                    }
                }
            }
        }
    }

    pub fn prox(&self, c: &PairField, s: f64) -> PairField {
        let mut out = c.clone();
        self.prox_in_place(&mut out, s);
        out
    }

    /// `I(μ)`: `+∞` if a hard term is violated beyond [`HARD_TOL`].
    pub fn evaluate(&self, mu: &PairField) -> f64 {
        let ns = self.grid.spatial_len();
        let [rho, mx, my] = mu.components();
        for slice in rho.chunks(ns) {
            if let Some(lo) = &self.lower {
                if slice.iter().zip(lo).any(|(v, l)| *v < l - HARD_TOL) {
                    return f64::INFINITY;
                }
            }
            if let Some(hi) = &self.upper {
                if slice.iter().zip(hi).any(|(v, h)| *v > h + HARD_TOL) {
                    return f64::INFINITY;
                }
            }
            if let Some(fx) = &self.fixed {
                if slice.iter().zip(fx).any(|(v, f)| f.is_some_and(|f| (v - f).abs() > HARD_TOL)) {
                    return f64::INFINITY;
                }
            }
        }
        let Some(psi) = &self.psi else { return 0.0 };
        let w = self.grid.weights();
        let mut acc = 0.0;
        for (idx, wi) in w.iter().enumerate() {
            let p = psi[idx % ns];
            acc += wi * p * (mx[idx] * mx[idx] + my[idx] * my[idx]);
        }
        acc
    }
}

/// μ-update: exact pointwise minimiser of `s|μ − c|² + I(μ)`.
pub fn prox_mu(c: &PairField, s: f64, spec: &ConstraintSpec) -> Result<PairField, ConstraintError> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(ConstraintError::BadStep(s));
    }
    Ok(spec.compile(c.grid())?.prox(c, s))
}

/// `(ν + η + (p − b)/s) / 2`, the centre of the μ-update.
pub fn compute_target(
    nu: &PairField,
    eta: &PairField,
    p: &PairField,
    b: &PairField,
    s: f64,
) -> Result<PairField, GridError> {
    let g = nu.grid();
    if eta.grid() != g || p.grid() != g || b.grid() != g {
        return Err(GridError::Mismatch);
    }
    Ok(PairField::combination(&[
        (0.5, nu),
        (0.5, eta),
        (0.5 / s, p),
        (-0.5 / s, b),
    ]))
}

pub fn evaluate_i(mu: &PairField, spec: &ConstraintSpec) -> Result<f64, ConstraintError> {
    Ok(spec.compile(mu.grid())?.evaluate(mu))
}
