//! Problem files.
//!
//! A problem file is TOML. Spatial fields are given either inline
//! (`values`, `nx·ny` numbers with `y` varying fastest) or as a sum of
//! builder terms:
//!
//! ```toml
//! algorithm = "alg2"          # optional, default alg2
//! rescale_mass = false        # scale rho1 to the mass of rho0
//! outputs = ["frames", "history", "images"]
//! snapshots = 5
//!
//! [grid]
//! nt = 17
//! nx = 32
//! ny = 32
//! boundary = "periodic"       # or "neumann"
//!
//! [rho0]
//! terms = [{ gaussian = { center = [0.3, 0.5], sigma = 0.08, mass = 1.0 } }]
//!
//! [rho1]
//! terms = [
//!   { gaussian = { center = [0.7, 0.5], sigma = 0.08, mass = 1.0 } },
//! ]
//!
//! [[constraint]]
//! type = "density_upper_bound"
//! field = { terms = [{ constant = 2.0 }, { disk = { center = [0.5, 0.5], radius = 0.1, value = -1.5 } }] }
//!
//! [params]
//! r = 1.0
//! max_outer = 2000
//! ```
//!
//! Builders: `gaussian` (normalised so its integral over the plane is
//! `mass`; distances wrap on periodic grids), `disk` (`value` where the
//! distance to `center` is below `radius`), `bump` (`height·cos²(πd/2R)`
//! inside `radius` R, exactly zero outside), `constant`. Constraint types:
//! `density_upper_bound` / `density_lower_bound` (`field`),
//! `momentum_penalty` (`field` = ψ), `fixed_density` (`mask`: a field whose
//! positive entries are fixed, `field` = the fixed density).

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use crate::constraint::{ConstraintSpec, ConstraintTerm};
use crate::error::ProblemError;
use crate::field::SpatialField;
use crate::grid::{GridSpec, SpaceBoundary};
use crate::solver::{Algorithm, SolverParams, TransportProblem, MASS_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Frames,
    Images,
    History,
}

/// A loaded, validated problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub grid: GridSpec,
    pub rho0: SpatialField,
    pub rho1: SpatialField,
    pub constraint: ConstraintSpec,
    pub params: SolverParams,
    pub algorithm: Algorithm,
    pub outputs: Vec<OutputKind>,
    pub snapshots: usize,
}

impl ProblemFile {
    pub fn problem(&self) -> TransportProblem {
        TransportProblem::new(self.grid, self.rho0.clone(), self.rho1.clone(), self.constraint.clone())
    }

    /// Auxiliary fields worth drawing next to the density snapshots.
    pub fn aux_fields(&self) -> Vec<(&'static str, &SpatialField)> {
        let mut out = Vec::new();
        for term in &self.constraint.terms {
            match term {
                ConstraintTerm::DensityUpperBound { upper } => out.push(("upper_bound", upper)),
                ConstraintTerm::DensityLowerBound { lower } => out.push(("lower_bound", lower)),
                ConstraintTerm::MomentumQuadraticPenalty { psi } => out.push(("psi", psi)),
                ConstraintTerm::FixedDensityRegion { density, .. } => out.push(("fixed_density", density)),
                ConstraintTerm::Unconstrained => {}
            }
        }
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    grid: RawGrid,
    rho0: FieldDef,
    rho1: FieldDef,
    #[serde(default)]
    constraint: Vec<RawConstraint>,
    #[serde(default)]
    params: RawParams,
    algorithm: Option<String>,
    #[serde(default)]
    rescale_mass: bool,
    outputs: Option<Vec<OutputKind>>,
    snapshots: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nt: usize,
    nx: usize,
    ny: usize,
    boundary: SpaceBoundary,
    dx: Option<f64>,
    dy: Option<f64>,
}

/// Inline values or a sum of builders.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDef {
    values: Option<Vec<f64>>,
    #[serde(default)]
    terms: Vec<Builder>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Builder {
    Gaussian { center: [f64; 2], sigma: f64, mass: f64 },
    Disk { center: [f64; 2], radius: f64, value: f64 },
    /// `height·cos²(π d / 2 radius)` inside `radius`, zero outside.
    Bump { center: [f64; 2], radius: f64, height: f64 },
    Constant(f64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    #[serde(rename = "type")]
    kind: String,
    field: Option<FieldDef>,
    mask: Option<FieldDef>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    r: Option<f64>,
    s: Option<f64>,
    rho: Option<f64>,
    rho_nu: Option<f64>,
    rho_eta: Option<f64>,
    rho_r: Option<f64>,
    rho_s: Option<f64>,
    max_outer: Option<usize>,
    min_outer: Option<usize>,
    max_inner: Option<usize>,
    tol_density: Option<f64>,
    inner_tol: Option<f64>,
}

impl RawParams {
    fn resolve(&self) -> SolverParams {
        let d = SolverParams::default();
        SolverParams {
            r: self.r.unwrap_or(d.r),
            s: self.s.unwrap_or(d.s),
            rho: self.rho.unwrap_or(d.rho),
            rho_nu: self.rho_nu.unwrap_or(d.rho_nu),
            rho_eta: self.rho_eta.unwrap_or(d.rho_eta),
            rho_r: self.rho_r.unwrap_or(d.rho_r),
            rho_s: self.rho_s.unwrap_or(d.rho_s),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            min_outer: self.min_outer.unwrap_or(d.min_outer),
            max_inner: self.max_inner.unwrap_or(d.max_inner),
            tol_density: self.tol_density.unwrap_or(d.tol_density),
            inner_tol: self.inner_tol.unwrap_or(d.inner_tol),
        }
    }
}

/// Signed distance components from `c` to `(x, y)`, wrapped on periodic grids.
fn offset(grid: &GridSpec, c: [f64; 2], x: f64, y: f64) -> (f64, f64) {
    let (mut dx, mut dy) = (x - c[0], y - c[1]);
    if grid.space_bc == SpaceBoundary::Periodic {
        let (lx, ly) = (grid.nx as f64 * grid.dx, grid.ny as f64 * grid.dy);
        dx -= lx * (dx / lx).round();
        dy -= ly * (dy / ly).round();
    }
    (dx, dy)
}

impl FieldDef {
    pub fn evaluate(&self, grid: &GridSpec, what: &str) -> Result<SpatialField, ProblemError> {
        if self.values.is_some() && !self.terms.is_empty() {
            return Err(ProblemError::Invalid(format!("{what}: give either values or terms, not both")));
        }
        if let Some(v) = &self.values {
            return SpatialField::from_vec(grid.nx, grid.ny, v.clone())
                .map_err(|e| ProblemError::Invalid(format!("{what}: {e}")));
        }
        if self.terms.is_empty() {
            return Err(ProblemError::Invalid(format!("{what}: no values and no terms")));
        }
        for t in &self.terms {
            match *t {
                Builder::Gaussian { sigma, mass, .. } if !(sigma > 0.0 && mass.is_finite()) => {
                    return Err(ProblemError::Invalid(format!("{what}: gaussian needs sigma > 0 and finite mass")));
                }
                Builder::Disk { radius, value, .. } if !(radius >= 0.0 && value.is_finite()) => {
                    return Err(ProblemError::Invalid(format!("{what}: disk needs radius >= 0 and finite value")));
                }
                Builder::Bump { radius, height, .. } if !(radius > 0.0 && height.is_finite()) => {
                    return Err(ProblemError::Invalid(format!("{what}: bump needs radius > 0 and finite height")));
                }
                Builder::Constant(v) if !v.is_finite() => {
                    return Err(ProblemError::Invalid(format!("{what}: constant must be finite")));
                }
                _ => {}
            }
        }
        let terms = self.terms.clone();
        Ok(SpatialField::from_fn(grid, |x, y| {
            terms
                .iter()
                .map(|t| match *t {
                    Builder::Gaussian { center, sigma, mass } => {
                        let (dx, dy) = offset(grid, center, x, y);
                        mass / (2.0 * PI * sigma * sigma) * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
                    }
                    Builder::Disk { center, radius, value } => {
                        let (dx, dy) = offset(grid, center, x, y);
                        if (dx * dx + dy * dy).sqrt() < radius {
                            value
                        } else {
                            0.0
                        }
                    }
                    Builder::Bump { center, radius, height } => {
                        let (dx, dy) = offset(grid, center, x, y);
                        let d = (dx * dx + dy * dy).sqrt();
                        if d < radius {
                            height * (0.5 * PI * d / radius).cos().powi(2)
                        } else {
                            0.0
                        }
                    }
                    Builder::Constant(v) => v,
                })
                .sum()
        }))
    }
}

fn nonnegative(field: &SpatialField, what: &str) -> Result<(), ProblemError> {
    let min = field.min();
    if min < 0.0 {
        return Err(ProblemError::Invalid(format!("{what} must be nonnegative (min {min})")));
    }
    Ok(())
}

fn build_constraint(raw: &[RawConstraint], grid: &GridSpec) -> Result<ConstraintSpec, ProblemError> {
    let mut terms = Vec::new();
    for (i, c) in raw.iter().enumerate() {
        let what = format!("constraint[{i}] ({})", c.kind);
        let field = |what: &str| -> Result<SpatialField, ProblemError> {
            c.field
                .as_ref()
                .ok_or_else(|| ProblemError::Invalid(format!("{what}: missing field")))?
                .evaluate(grid, what)
        };
        if c.mask.is_some() && c.kind != "fixed_density" {
            return Err(ProblemError::Invalid(format!("{what}: mask only applies to fixed_density")));
        }
        let term = match c.kind.as_str() {
            "unconstrained" => ConstraintTerm::Unconstrained,
            "density_upper_bound" => ConstraintTerm::DensityUpperBound { upper: field(&what)? },
            "density_lower_bound" => ConstraintTerm::DensityLowerBound { lower: field(&what)? },
            "momentum_penalty" => ConstraintTerm::MomentumQuadraticPenalty { psi: field(&what)? },
            "fixed_density" => {
                let mask = c
                    .mask
                    .as_ref()
                    .ok_or_else(|| ProblemError::Invalid(format!("{what}: missing mask")))?
                    .evaluate(grid, &what)?;
                ConstraintTerm::FixedDensityRegion {
                    mask: mask.values().iter().map(|&v| v > 0.0).collect(),
                    density: field(&what)?,
                }
            }
            other => {
                return Err(ProblemError::Invalid(format!(
                    "constraint[{i}]: unknown type '{other}' (expected density_upper_bound, density_lower_bound, \
                     momentum_penalty, fixed_density or unconstrained)"
                )))
            }
        };
        terms.push(term);
    }
    let spec = ConstraintSpec::new(terms);
    spec.compile(grid)?;
    Ok(spec)
}

/// Parses and validates problem-file text.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| ProblemError::Parse(e.to_string()))?;
    let g = &raw.grid;
    let grid = match (g.dx, g.dy) {
        (None, None) => GridSpec::unit(g.nt, g.nx, g.ny, g.boundary)?,
        (dx, dy) => {
            let unit = GridSpec::unit(g.nt, g.nx, g.ny, g.boundary)?;
            GridSpec::with_spacing(g.nt, g.nx, g.ny, dx.unwrap_or(unit.dx), dy.unwrap_or(unit.dy), g.boundary)?
        }
    };
    let rho0 = raw.rho0.evaluate(&grid, "rho0")?;
    let mut rho1 = raw.rho1.evaluate(&grid, "rho1")?;
    nonnegative(&rho0, "rho0")?;
    nonnegative(&rho1, "rho1")?;
    let (mass0, mass1) = (rho0.integral(&grid), rho1.integral(&grid));
    if !(mass0 > 0.0) {
        return Err(ProblemError::Invalid(format!("rho0 must carry positive mass (got {mass0})")));
    }
    if raw.rescale_mass {
        if !(mass1 > 0.0) {
            return Err(ProblemError::Invalid(format!("rho1 must carry positive mass (got {mass1})")));
        }
        rho1.scale(mass0 / mass1);
    } else {
        let rel = (mass0 - mass1).abs() / mass0.max(mass1);
        if rel > MASS_TOL {
            return Err(ProblemError::MassMismatch { mass0, mass1, rel });
        }
    }
    let constraint = build_constraint(&raw.constraint, &grid)?;
    let params = raw.params.resolve();
    params.validate().map_err(|e| ProblemError::Invalid(e.to_string()))?;
    let algorithm = match &raw.algorithm {
        Some(a) => a.parse().map_err(ProblemError::Invalid)?,
        None => Algorithm::Alg2,
    };
    let snapshots = raw.snapshots.unwrap_or(5);
    if snapshots < 2 {
        return Err(ProblemError::Invalid(format!("snapshots must be at least 2 (got {snapshots})")));
    }
    Ok(ProblemFile {
        grid,
        rho0,
        rho1,
        constraint,
        params,
        algorithm,
        outputs: raw.outputs.unwrap_or_else(|| vec![OutputKind::Frames, OutputKind::History, OutputKind::Images]),
        snapshots,
    })
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile, ProblemError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| ProblemError::Read { path: path.to_path_buf(), source })?;
    parse_problem(&text)
}
