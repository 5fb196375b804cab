//! Uniform 1-D and radially symmetric grids carrying a probability density.
//!
//! Quadrature uses dual-cell weights: on the line these are exactly the
//! trapezoidal weights, on radial grids they are the exact volumes
//! `omega_d (r_{i+1/2}^d - r_{i-1/2}^d) / d` of the cells around each node,
//! which keeps the finite-volume flow solvers exactly mass conservative.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Tolerance on the quadrature mass after renormalization.
pub const MASS_TOL: f64 = 1e-10;

/// Lower clamp applied before taking `log u` or negative powers of `u`.
pub const FLOOR: f64 = 1e-300;

/// Nodes below `SUPPORT_EPS * max(u)` are outside the numerical support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Smallest grid accepted by the derivative-based functionals.
pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Nodes `x_i` on an interval of the real line.
    Line,
    /// Radially symmetric density in `R^d`, nodes `r_i >= 0` starting at 0.
    Radial { d: u32 },
}

impl Geometry {
    pub fn dim(&self) -> u32 {
        match self {
            Geometry::Line => 1,
            Geometry::Radial { d } => *d,
        }
    }
}

/// Surface area of the unit sphere in `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_area(d: u32) -> f64 {
    let half = d as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// A discretized probability density on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    geometry: Geometry,
    origin: f64,
    spacing: f64,
    values: Vec<f64>,
    weights: Vec<f64>,
    normalization: f64,
}

impl GridDensity {
    /// Builds a density from node values, renormalizing to unit mass.
    ///
    /// For radial grids `origin` must be 0.
    pub fn new(geometry: Geometry, origin: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        let mut u = Self::unnormalized(geometry, origin, spacing, values)?;
        let mass = u.mass();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Degenerate(format!("density has mass {mass}")));
        }
        let factor = 1.0 / mass;
        for v in &mut u.values {
            *v *= factor;
        }
        u.normalization = factor;
        Ok(u)
    }

    /// Same validation as [`GridDensity::new`] but keeps the values as given.
    ///
    /// Used by the flow solvers whose conservative updates must not be
    /// rescaled.
    pub fn unnormalized(
        geometry: Geometry,
        origin: f64,
        spacing: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidGrid("need at least two nodes".into()));
        }
        if let Geometry::Radial { d } = geometry {
            if d == 0 {
                return Err(Error::InvalidGrid("radial dimension must be positive".into()));
            }
            if origin != 0.0 {
                return Err(Error::InvalidGrid("radial grids start at r = 0".into()));
            }
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("value {v} at node {i} is not a finite nonnegative number")));
        }
        let weights = quadrature_weights(geometry, spacing, values.len());
        Ok(Self { geometry, origin, spacing, values, weights, normalization: 1.0 })
    }

    /// Samples `f` on `n` nodes of `[-half_width, half_width]`.
    pub fn line(half_width: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("line grid needs n >= 2 and L > 0 (n = {n}, L = {half_width})")));
        }
        let h = 2.0 * half_width / (n - 1) as f64;
        // offsets from the center keep the sampled values exactly even
        let mid = 0.5 * (n - 1) as f64;
        let values = (0..n).map(|i| f((i as f64 - mid) * h)).collect();
        Self::new(Geometry::Line, -half_width, h, values)
    }

    /// Samples a radial profile `f(r)` on `n` nodes of `[0, radius]` in `R^d`.
    pub fn radial(d: u32, radius: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radial grid needs n >= 2 and R > 0 (n = {n}, R = {radius})")));
        }
        let h = radius / (n - 1) as f64;
        let values = (0..n).map(|i| f(i as f64 * h)).collect();
        Self::new(Geometry::Radial { d }, 0.0, h, values)
    }

    /// Samples `f` on the same nodes as `self`.
    pub fn resample_like(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = self.nodes().map(f).collect();
        Self::new(self.geometry, self.origin, self.spacing, values)
    }

    /// Replaces the values keeping the grid, without renormalizing.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), self.len())));
        }
        Self::unnormalized(self.geometry, self.origin, self.spacing, values)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn dim(&self) -> u32 {
        self.geometry.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Factor applied by the constructor to reach unit mass.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn last_node(&self) -> f64 {
        self.node(self.len() - 1)
    }

    /// Half-width of a line grid, or outer radius of a radial grid.
    pub fn extent(&self) -> f64 {
        match self.geometry {
            Geometry::Line => 0.5 * (self.last_node() - self.origin),
            Geometry::Radial { .. } => self.last_node(),
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_i w_i f_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `sum_i w_i g(u_i)`.
    pub fn integrate_map(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, &u)| w * g(u)).sum()
    }

    pub fn mass(&self) -> f64 {
        self.integrate(&self.values)
    }

    /// True when both densities live on the same nodes.
    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.geometry == other.geometry
            && self.len() == other.len()
            && (self.origin - other.origin).abs() <= 1e-12 * self.spacing
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }

    pub fn l1_distance(&self, other: &GridDensity) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("L1 distance needs identical grids".into()));
        }
        Ok(self
            .weights
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * (a - b).abs())
            .sum())
    }

    /// L1 distance to a function sampled at the nodes.
    pub fn l1_distance_to(&self, f: impl Fn(f64) -> f64) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * (self.values[i] - f(self.node(i))).abs()).sum()
    }

    /// Node mask of the numerical support: `u_i > SUPPORT_EPS * max(u)`.
    pub fn support_mask(&self) -> Vec<bool> {
        let thr = SUPPORT_EPS * self.max_value();
        self.values.iter().map(|&u| u > thr).collect()
    }

    /// Support nodes whose whole derivative stencil also lies in the support.
    pub fn stencil_support_mask(&self) -> Vec<bool> {
        let inside = self.support_mask();
        let n = self.len();
        (0..n)
            .map(|i| stencil(self.geometry, n, i).iter().all(|&j| inside[j]))
            .collect()
    }

    /// First derivative: central in the interior, second-order one-sided at
    /// the ends; zero at `r = 0` on radial grids.
    pub fn gradient(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h = self.spacing;
        let mut g = vec![0.0; n];
        for i in 1..n - 1 {
            g[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        }
        g[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        g[0] = match self.geometry {
            Geometry::Line => (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h),
            Geometry::Radial { .. } => 0.0,
        };
        g
    }

    /// Second derivative along the coordinate, with the even reflection at
    /// `r = 0` on radial grids.
    pub fn second_derivative(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let h2 = self.spacing * self.spacing;
        let mut s = vec![0.0; n];
        for i in 1..n - 1 {
            s[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
        }
        s[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
        s[0] = match self.geometry {
            Geometry::Line => (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2,
            Geometry::Radial { .. } => 2.0 * (f[1] - f[0]) / h2,
        };
        s
    }

    /// Squared Hessian norm and Laplacian of a radial (or 1-D) function.
    ///
    /// For radial `f(r)`: `|D^2 f|^2 = f''^2 + (d-1) (f'/r)^2` and
    /// `Delta f = f'' + (d-1) f'/r`, with `f'/r -> f''(0)` at the origin.
    pub fn hessian_and_laplacian(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let fpp = self.second_derivative(f);
        match self.geometry {
            Geometry::Line => {
                let hess = fpp.iter().map(|v| v * v).collect();
                (hess, fpp)
            }
            Geometry::Radial { d } => {
                let fp = self.gradient(f);
                let k = d as f64 - 1.0;
                let mut hess = Vec::with_capacity(f.len());
                let mut lap = Vec::with_capacity(f.len());
                for i in 0..f.len() {
                    let radial = if i == 0 { fpp[0] } else { fp[i] / self.node(i) };
                    hess.push(fpp[i] * fpp[i] + k * radial * radial);
                    lap.push(fpp[i] + k * radial);
                }
                (hess, lap)
            }
        }
    }
}

fn stencil(geometry: Geometry, n: usize, i: usize) -> Vec<usize> {
    if i == 0 {
        match geometry {
            Geometry::Line => vec![0, 1, 2, 3],
            Geometry::Radial { .. } => vec![0, 1],
        }
    } else if i == n - 1 {
        vec![n - 4, n - 3, n - 2, n - 1]
    } else {
        vec![i - 1, i, i + 1]
    }
}

/// Dual-cell quadrature weights for `n` nodes with spacing `h`.
pub fn quadrature_weights(geometry: Geometry, h: f64, n: usize) -> Vec<f64> {
    match geometry {
        Geometry::Line => {
            let mut w = vec![h; n];
            w[0] = 0.5 * h;
            w[n - 1] = 0.5 * h;
            w
        }
        Geometry::Radial { d } => {
            let area = unit_sphere_area(d);
            let df = d as f64;
            let face = |k: f64| (k * h).powi(d as i32);
            (0..n)
                .map(|i| {
                    let lo = if i == 0 { 0.0 } else { face(i as f64 - 0.5) };
                    let hi = if i == n - 1 { face((n - 1) as f64) } else { face(i as f64 + 0.5) };
                    area * (hi - lo) / df
                })
                .collect()
        }
    }
}

/// Face areas `omega_d r_{i+1/2}^{d-1}` between nodes `i` and `i+1`
/// (all 1 on the line).
pub fn face_areas(geometry: Geometry, h: f64, n: usize) -> Vec<f64> {
    match geometry {
        Geometry::Line => vec![1.0; n - 1],
        Geometry::Radial { d } => {
            let area = unit_sphere_area(d);
            (0..n - 1).map(|i| area * ((i as f64 + 0.5) * h).powi(d as i32 - 1)).collect()
        }
    }
}
