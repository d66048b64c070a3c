//! Time-space grid geometry.
//!
//! Samples are collocated: every field lives on the same `nt × nx × ny`
//! lattice. Time always covers `[0, 1]` with both endpoints sampled. The
//! spatial domain is the unit square by default; a periodic axis samples
//! `x_i = i·dx` with `dx = 1/n`, a Neumann axis samples both walls with
//! `dx = 1/(n-1)`.
//!
//! Quadrature weights follow the same topology: an axis that carries
//! boundary samples (time, Neumann space) uses trapezoidal weights, a
//! periodic axis uses uniform weights. The unit space-time box therefore
//! integrates to exactly one on every grid.

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// Boundary condition on the spatial axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceBoundary {
    Periodic,
    Neumann,
}

impl SpaceBoundary {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpaceBoundary::Periodic => "periodic",
            SpaceBoundary::Neumann => "neumann",
        }
    }
}

/// Layout of a one-dimensional axis, used by the difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    /// Both end samples lie on the boundary (time, Neumann space).
    Bounded,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nt: usize,
    pub nx: usize,
    pub ny: usize,
    pub dt: f64,
    pub dx: f64,
    pub dy: f64,
    pub space_bc: SpaceBoundary,
}

impl GridSpec {
    /// Grid over the unit space-time box with the standard spacing for `space_bc`.
    pub fn unit(nt: usize, nx: usize, ny: usize, space_bc: SpaceBoundary) -> Result<Self, GridError> {
        let spacing = |n: usize| match space_bc {
            SpaceBoundary::Periodic => 1.0 / n as f64,
            SpaceBoundary::Neumann => 1.0 / (n.max(2) - 1) as f64,
        };
        Self::with_spacing(nt, nx, ny, spacing(nx), spacing(ny), space_bc)
    }

    pub fn with_spacing(
        nt: usize,
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        space_bc: SpaceBoundary,
    ) -> Result<Self, GridError> {
        if nt < 2 || nx < 2 || ny < 2 {
            return Err(GridError::TooFewSamples { nt, nx, ny });
        }
        if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
            return Err(GridError::BadSpacing { dx, dy });
        }
        nt.checked_mul(nx)
            .and_then(|v| v.checked_mul(ny))
            .and_then(|v| v.checked_mul(3))
            .ok_or(GridError::TooLarge { nt, nx, ny })?;
        Ok(Self {
            nt,
            nx,
            ny,
            dt: 1.0 / (nt - 1) as f64,
            dx,
            dy,
            space_bc,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nt * self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn spatial_len(&self) -> usize {
        self.nx * self.ny
    }

    /// Flat index of sample `(k, i, j)`; `y` is the fastest axis.
    #[inline]
    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.nx + i) * self.ny + j
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    pub fn space_axis(&self) -> AxisKind {
        match self.space_bc {
            SpaceBoundary::Periodic => AxisKind::Periodic,
            SpaceBoundary::Neumann => AxisKind::Bounded,
        }
    }

    pub fn time_weights(&self) -> Vec<f64> {
        axis_weights(self.nt, self.dt, AxisKind::Bounded)
    }

    pub fn x_weights(&self) -> Vec<f64> {
        axis_weights(self.nx, self.dx, self.space_axis())
    }

    pub fn y_weights(&self) -> Vec<f64> {
        axis_weights(self.ny, self.dy, self.space_axis())
    }

    /// Quadrature weights of one time slice, laid out like a spatial field.
    pub fn spatial_weights(&self) -> Vec<f64> {
        let wx = self.x_weights();
        let wy = self.y_weights();
        let mut w = Vec::with_capacity(self.spatial_len());
        for &a in &wx {
            for &b in &wy {
                w.push(a * b);
            }
        }
        w
    }

    /// Quadrature weight of every sample (`dt·dx·dy` with boundary halving).
    pub fn weights(&self) -> Vec<f64> {
        let wt = self.time_weights();
        let ws = self.spatial_weights();
        let mut w = Vec::with_capacity(self.len());
        for &a in &wt {
            w.extend(ws.iter().map(|&b| a * b));
        }
        w
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Quadrature weights along one axis.
pub fn axis_weights(n: usize, h: f64, kind: AxisKind) -> Vec<f64> {
    let mut w = vec![h; n];
    if kind == AxisKind::Bounded && n >= 2 {
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
    }
    w
}
