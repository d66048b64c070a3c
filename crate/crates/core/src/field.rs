//! Discrete fields on the time-space grid and the grid inner product.

use crate::error::GridError;
use crate::grid::GridSpec;

/// A real field on one time slice, `nx × ny`, `y` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, values: vec![0.0; nx * ny] }
    }

    pub fn constant(nx: usize, ny: usize, value: f64) -> Self {
        Self { nx, ny, values: vec![value; nx * ny] }
    }

    pub fn from_vec(nx: usize, ny: usize, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != nx * ny {
            return Err(GridError::WrongLength { expected: nx * ny, got: values.len() });
        }
        Ok(Self { nx, ny, values })
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.spatial_len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { nx: grid.nx, ny: grid.ny, values }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.nx == grid.nx && self.ny == grid.ny
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ny + j]
    }

    /// `∫ f dx dy` with the grid's spatial quadrature.
    pub fn integral(&self, grid: &GridSpec) -> f64 {
        grid.spatial_weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v)
            .sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }
}

/// A real field over the full time-space grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn from_vec(grid: GridSpec, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::WrongLength { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(t, x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nt {
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    values.push(f(grid.time(k), grid.x(i), grid.y(j)));
                }
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(k, i, j)]
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.grid.spatial_len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.spatial_len();
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn time_slice(&self, k: usize) -> SpatialField {
        SpatialField {
            nx: self.grid.nx,
            ny: self.grid.ny,
            values: self.slice(k).to_vec(),
        }
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, v) in self.values.iter_mut().zip(&x.values) {
            *s += a * v;
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.values.iter_mut().for_each(|v| *v *= a);
    }

    /// Grid-weighted mean.
    pub fn mean(&self) -> f64 {
        let w = self.grid.weights();
        let total: f64 = w.iter().sum();
        w.iter().zip(&self.values).map(|(w, v)| w * v).sum::<f64>() / total
    }

    pub fn norm(&self) -> f64 {
        weighted_sq_sum(&self.grid, &[&self.values]).sqrt()
    }
}

/// A `(scalar, 2-vector)` field: `μ = (ρ, m)`, `q = (a, b)`, and friends.
#[derive(Debug, Clone, PartialEq)]
pub struct PairField {
    pub scalar: ScalarField,
    pub vector: [ScalarField; 2],
}

impl PairField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            scalar: ScalarField::zeros(grid),
            vector: [ScalarField::zeros(grid), ScalarField::zeros(grid)],
        }
    }

    pub fn new(scalar: ScalarField, vx: ScalarField, vy: ScalarField) -> Result<Self, GridError> {
        if scalar.grid != vx.grid || scalar.grid != vy.grid {
            return Err(GridError::Mismatch);
        }
        Ok(Self { scalar, vector: [vx, vy] })
    }

    /// Same value `(a, b)` at every grid point.
    pub fn uniform(grid: GridSpec, a: f64, b: [f64; 2]) -> Self {
        Self {
            scalar: ScalarField::constant(grid, a),
            vector: [ScalarField::constant(grid, b[0]), ScalarField::constant(grid, b[1])],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.scalar.grid
    }

    pub fn components(&self) -> [&[f64]; 3] {
        [&self.scalar.values, &self.vector[0].values, &self.vector[1].values]
    }

    pub fn components_mut(&mut self) -> [&mut [f64]; 3] {
        let [vx, vy] = &mut self.vector;
        [&mut self.scalar.values, &mut vx.values, &mut vy.values]
    }

    pub fn point(&self, idx: usize) -> (f64, [f64; 2]) {
        (
            self.scalar.values[idx],
            [self.vector[0].values[idx], self.vector[1].values[idx]],
        )
    }

    pub fn set_point(&mut self, idx: usize, a: f64, b: [f64; 2]) {
        self.scalar.values[idx] = a;
        self.vector[0].values[idx] = b[0];
        self.vector[1].values[idx] = b[1];
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.components()
            .iter()
            .find_map(|c| c.iter().position(|v| !v.is_finite()))
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &PairField) {
        debug_assert_eq!(self.grid(), x.grid());
        for (dst, src) in self.components_mut().into_iter().zip(x.components()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.components_mut() {
            c.iter_mut().for_each(|v| *v *= a);
        }
    }

    /// `Σ cᵢ·fᵢ` over fields on a common grid.
    pub fn combination(terms: &[(f64, &PairField)]) -> PairField {
        let grid = *terms[0].1.grid();
        let mut out = PairField::zeros(grid);
        for (c, f) in terms {
            debug_assert_eq!(grid, *f.grid());
            out.axpy(*c, f);
        }
        out
    }

    /// Grid-weighted L² norm.
    pub fn norm(&self) -> f64 {
        weighted_sq_sum(self.grid(), &self.components()).sqrt()
    }

    /// `|self − other|` in the grid norm.
    pub fn distance(&self, other: &PairField) -> f64 {
        debug_assert_eq!(self.grid(), other.grid());
        let w = self.grid().weights();
        let mut acc = 0.0;
        for (a, b) in self.components().into_iter().zip(other.components()) {
            for ((wi, x), y) in w.iter().zip(a).zip(b) {
                acc += wi * (x - y) * (x - y);
            }
        }
        acc.sqrt()
    }
}

fn weighted_sq_sum(grid: &GridSpec, comps: &[&[f64]]) -> f64 {
    let w = grid.weights();
    let mut acc = 0.0;
    for c in comps {
        for (wi, v) in w.iter().zip(c.iter()) {
            acc += wi * v * v;
        }
    }
    acc
}

/// Fields that carry the grid inner product `⟨u, v⟩ = ∫₀¹∫_D u·v`.
pub trait GridFunction {
    fn grid(&self) -> &GridSpec;
    fn parts(&self) -> Vec<&[f64]>;

    fn inner(&self, other: &Self) -> Result<f64, GridError>
    where
        Self: Sized,
    {
        inner(self, other)
    }
}

impl GridFunction for ScalarField {
    fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn parts(&self) -> Vec<&[f64]> {
        vec![&self.values]
    }
}

impl GridFunction for PairField {
    fn grid(&self) -> &GridSpec {
        PairField::grid(self)
    }

    fn parts(&self) -> Vec<&[f64]> {
        self.components().to_vec()
    }
}

/// Grid inner product: pointwise dot product integrated with the grid quadrature.
pub fn inner<F: GridFunction>(f: &F, g: &F) -> Result<f64, GridError> {
    if f.grid() != g.grid() {
        return Err(GridError::Mismatch);
    }
    let w = f.grid().weights();
    let mut acc = 0.0;
    for (a, b) in f.parts().into_iter().zip(g.parts()) {
        for ((wi, x), y) in w.iter().zip(a).zip(b) {
            acc += wi * x * y;
        }
    }
    Ok(acc)
}
