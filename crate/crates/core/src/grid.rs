//! Periodic uniform grids, discrete scalar/vector fields, flat-background
//! stencil operators and deterministic quadrature.
//!
//! Everything downstream (metrics, flows, functionals) is built on the types
//! here. Grids are periodic in every direction; the last point wraps to the
//! first, so integrals over the domain have no boundary terms.
//!
//! Two families of derivative operators coexist on purpose:
//!
//! * `grad0` — second-order centered differences, used wherever a pointwise
//!   gradient is reported or contracted with the metric;
//! * `grad_fwd` / `div_bwd` — the staggered (half-index) pair whose
//!   composition is the classical 3-point (1-D) / 5-point (2-D) `laplace0`.
//!   The pair satisfies summation by parts *exactly* on periodic grids:
//!   Σ a·laplace0(b)·h = −Σ grad_fwd(a)·grad_fwd(b)·h to round-off, and
//!   Σ laplace0(φ)·h telescopes to zero. Identity checks that rely on exact
//!   discrete integration by parts must use this pair.

use crate::error::{Error, Result};

const MIN_POINTS: usize = 8;

/// Periodic 1-D grid: `n` points on a circle of circumference `length`,
/// x_i = i·h with h = length/n and x_n ≡ x_0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::Parse(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::Parse(format!("grid length must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing h = L/n.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}

/// Periodic 2-D grid (flat torus chart): nx × ny points, x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::Parse(format!(
                "grid needs at least {MIN_POINTS} points per direction, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::Parse(format!("grid lengths must be positive, got {lx}, {ly}")));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square grid n × n on an L × L torus.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Area of one grid cell.
    pub fn cell(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    /// Flat index of (i, j); x runs fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }
}

/// Deterministic pairwise reduction over a slice. The tree shape depends only
/// on the length, so sums are bitwise reproducible run-to-run.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        let mut acc = 0.0;
        for &x in v {
            acc += x;
        }
        return acc;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Sampled scalar function on a periodic 1-D grid. Value-semantic.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField1D {
    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.n(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.n()] }
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Centered second-order first derivative, periodic wraparound.
    pub fn grad0(&self) -> Self {
        let n = self.grid.n();
        let inv2h = 1.0 / (2.0 * self.grid.spacing());
        let v = &self.values;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            let im = if i == 0 { n - 1 } else { i - 1 };
            out[i] = (v[ip] - v[im]) * inv2h;
        }
        Self { grid: self.grid, values: out }
    }

    /// Forward difference; entry i lives at the half point x_{i+1/2}.
    pub fn grad_fwd(&self) -> Self {
        let n = self.grid.n();
        let invh = 1.0 / self.grid.spacing();
        let v = &self.values;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            out[i] = (v[ip] - v[i]) * invh;
        }
        Self { grid: self.grid, values: out }
    }

    /// Backward difference of half-point data; adjoint of `grad_fwd`, so the
    /// composition `div_bwd(grad_fwd(φ))` is `laplace0`.
    pub fn div_bwd(&self) -> Self {
        let n = self.grid.n();
        let invh = 1.0 / self.grid.spacing();
        let v = &self.values;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let im = if i == 0 { n - 1 } else { i - 1 };
            out[i] = (v[i] - v[im]) * invh;
        }
        Self { grid: self.grid, values: out }
    }

    /// Standard 3-point Laplacian (divergence form): Σ laplace0(φ)·h = 0 exactly.
    pub fn laplace0(&self) -> Self {
        let n = self.grid.n();
        let invh2 = 1.0 / (self.grid.spacing() * self.grid.spacing());
        let v = &self.values;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            let im = if i == 0 { n - 1 } else { i - 1 };
            out[i] = (v[ip] - 2.0 * v[i] + v[im]) * invh2;
        }
        Self { grid: self.grid, values: out }
    }

    /// ∫ field · weight dx with the fixed pairwise reduction.
    pub fn integrate(&self, weight: &Self) -> Result<f64> {
        self.check_same_grid(weight)?;
        let products: Vec<f64> =
            self.values.iter().zip(&weight.values).map(|(&a, &b)| a * b).collect();
        Ok(pairwise_sum(&products) * self.grid.spacing())
    }

    /// ∫ field dx (unit weight).
    pub fn integrate_unweighted(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.spacing()
    }
}

/// Sampled scalar function on a periodic 2-D grid, stored row-major (x fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, values }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Centered gradient, one component per direction.
    pub fn grad0(&self) -> VectorField2D {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let inv2hx = 1.0 / (2.0 * self.grid.hx());
        let inv2hy = 1.0 / (2.0 * self.grid.hy());
        let v = &self.values;
        let mut gx = vec![0.0; v.len()];
        let mut gy = vec![0.0; v.len()];
        for j in 0..ny {
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            let jm = if j == 0 { ny - 1 } else { j - 1 };
            for i in 0..nx {
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let k = j * nx + i;
                gx[k] = (v[j * nx + ip] - v[j * nx + im]) * inv2hx;
                gy[k] = (v[jp * nx + i] - v[jm * nx + i]) * inv2hy;
            }
        }
        VectorField2D {
            x: Self { grid: self.grid, values: gx },
            y: Self { grid: self.grid, values: gy },
        }
    }

    /// Standard 5-point Laplacian; Σ laplace0(φ)·hx·hy = 0 exactly.
    pub fn laplace0(&self) -> Self {
        let mut out = Self::constant(self.grid, 0.0);
        laplace0_into(self.grid, &self.values, &mut out.values);
        out
    }

    /// ∫ field · weight dA with the fixed pairwise reduction.
    pub fn integrate(&self, weight: &Self) -> Result<f64> {
        self.check_same_grid(weight)?;
        let products: Vec<f64> =
            self.values.iter().zip(&weight.values).map(|(&a, &b)| a * b).collect();
        Ok(pairwise_sum(&products) * self.grid.cell())
    }

    pub fn integrate_unweighted(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell()
    }
}

/// 5-point Laplacian into a caller-provided buffer (hot path for time stepping).
pub(crate) fn laplace0_into(grid: Grid2D, v: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let invhx2 = 1.0 / (grid.hx() * grid.hx());
    let invhy2 = 1.0 / (grid.hy() * grid.hy());
    for j in 0..ny {
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        for i in 0..nx {
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let k = j * nx + i;
            out[k] = (v[j * nx + ip] - 2.0 * v[k] + v[j * nx + im]) * invhx2
                + (v[jp * nx + i] - 2.0 * v[k] + v[jm * nx + i]) * invhy2;
        }
    }
}

/// Vector field on a 2-D grid: one scalar component per coordinate direction.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2D {
    pub x: ScalarField2D,
    pub y: ScalarField2D,
}

impl VectorField2D {
    pub fn grid(&self) -> Grid2D {
        self.x.grid()
    }

    /// Pointwise flat dot product with another vector field.
    pub fn dot(&self, other: &VectorField2D) -> Result<ScalarField2D> {
        let xx = self.x.zip_map(&other.x, |a, b| a * b)?;
        let yy = self.y.zip_map(&other.y, |a, b| a * b)?;
        xx.zip_map(&yy, |a, b| a + b)
    }

    /// Pointwise squared flat norm.
    pub fn norm_sq_flat(&self) -> ScalarField2D {
        self.dot(self).expect("components share a grid")
    }
}
