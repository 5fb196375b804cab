//! Analytic and reference initial data: Gaussians, Barenblatt profiles,
//! uniforms and Gaussian mixtures.

use std::f64::consts::PI;

use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::grid::{unit_sphere_area, Geometry, GridDensity};

/// Largest Gaussian tail mass allowed outside the grid.
pub const GAUSSIAN_TAIL_TOL: f64 = 1e-10;

/// Isotropic Gaussian with variance `sigma2` per coordinate.
///
/// `d = 1` gives a line grid on `[-L, L]`, `d >= 2` a radial grid on
/// `[0, L]`. Requires `L >= 8 sigma`.
pub fn gaussian(sigma2: f64, d: u32, half_width: f64, n: usize) -> Result<GridDensity> {
    if !(sigma2 > 0.0) || d == 0 {
        return Err(Error::Domain(format!("gaussian needs sigma2 > 0 and d >= 1 (sigma2 = {sigma2}, d = {d})")));
    }
    let sigma = sigma2.sqrt();
    // P(|X|^2 > L^2) for X ~ N(0, sigma2 I_d)
    let tail = gamma_ur(0.5 * d as f64, half_width * half_width / (2.0 * sigma2));
    if half_width < 8.0 * sigma || tail > GAUSSIAN_TAIL_TOL {
        return Err(Error::Domain(format!(
            "domain half-width {half_width} too small for sigma = {sigma}: need L >= 8 sigma (tail mass {tail:e})"
        )));
    }
    let profile = |x: f64| (-0.5 * x * x / sigma2).exp();
    if d == 1 {
        GridDensity::line(half_width, n, profile)
    } else {
        GridDensity::radial(d, half_width, n, profile)
    }
}

/// Closed-form Gaussian density value, for oracles.
pub fn gaussian_pdf(x: f64, sigma2: f64, d: u32) -> f64 {
    (2.0 * PI * sigma2).powf(-0.5 * d as f64) * (-0.5 * x * x / sigma2).exp()
}

/// Indicator of `[-width/2, width/2]` on a line grid of half-width `L`.
///
/// Nodes within half a cell of an edge get half weight so the trapezoid
/// mass equals `width` when the edges fall on nodes.
pub fn uniform(width: f64, half_width: f64, n: usize) -> Result<GridDensity> {
    if !(width > 0.0) || width > 2.0 * half_width {
        return Err(Error::Domain(format!("uniform width {width} must lie in (0, 2L]")));
    }
    let h = 2.0 * half_width / (n.max(2) - 1) as f64;
    let a = 0.5 * width;
    GridDensity::line(half_width, n, |x| {
        let e = x.abs() - a;
        if e < -0.5 * h {
            1.0
        } else if e <= 0.5 * h {
            0.5
        } else {
            0.0
        }
    })
}

/// One Gaussian component: weight, mean, variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Weighted Gaussian mixture on a line grid.
pub fn mixture(components: &[MixtureComponent], half_width: f64, n: usize) -> Result<GridDensity> {
    if components.is_empty() {
        return Err(Error::Domain("mixture needs at least one component".into()));
    }
    for c in components {
        if !(c.weight > 0.0) || !(c.variance > 0.0) {
            return Err(Error::Domain(format!("bad mixture component {c:?}")));
        }
        if c.mean.abs() + 8.0 * c.variance.sqrt() > half_width {
            return Err(Error::Domain(format!("component {c:?} does not fit in [-{half_width}, {half_width}]")));
        }
    }
    GridDensity::line(half_width, n, |x| {
        components.iter().map(|c| c.weight * gaussian_pdf(x - c.mean, c.variance, 1)).sum()
    })
}

/// Source-type self-similar solution of `u_t = Delta u^p`, `p > 1`:
/// `u(x, t) = t^{-alpha} (C - k |x|^2 t^{-2 beta})_+^{1/(p-1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    pub p: f64,
    pub d: u32,
    pub mass: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub c: f64,
}

impl Barenblatt {
    pub fn new(p: f64, d: u32, mass: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::Domain(format!("Barenblatt profile needs p > 1, got {p}")));
        }
        if d == 0 || !(mass > 0.0) {
            return Err(Error::Domain("Barenblatt profile needs d >= 1 and positive mass".into()));
        }
        let df = d as f64;
        let alpha = df / (df * (p - 1.0) + 2.0);
        let beta = alpha / df;
        let k = alpha * (p - 1.0) / (2.0 * p * df);
        let a = 1.0 / (p - 1.0);
        // mass = omega_d (C/k)^{d/2} C^a B(d/2, a+1)/2
        let b = beta_fn(0.5 * df, a + 1.0);
        let c = (2.0 * mass * k.powf(0.5 * df) / (unit_sphere_area(d) * b)).powf(1.0 / (a + 0.5 * df));
        Ok(Self { p, d, mass, alpha, beta, k, c })
    }

    pub fn value(&self, r: f64, t: f64) -> f64 {
        let inner = self.c - self.k * r * r * t.powf(-2.0 * self.beta);
        if inner <= 0.0 {
            0.0
        } else {
            t.powf(-self.alpha) * inner.powf(1.0 / (self.p - 1.0))
        }
    }

    /// Analytic `du/dt`.
    pub fn time_derivative(&self, r: f64, t: f64) -> f64 {
        let s = r * r * t.powf(-2.0 * self.beta);
        let inner = self.c - self.k * s;
        if inner <= 0.0 {
            return 0.0;
        }
        let a = 1.0 / (self.p - 1.0);
        let ta = t.powf(-self.alpha);
        -self.alpha / t * ta * inner.powf(a) + ta * a * inner.powf(a - 1.0) * 2.0 * self.beta * self.k * s / t
    }

    /// Radius of the support at time `t`.
    pub fn radius(&self, t: f64) -> f64 {
        (self.c / self.k).sqrt() * t.powf(self.beta)
    }

    /// The profile at time `t` sampled on a grid of the given extent.
    pub fn on_grid(&self, t: f64, extent: f64, n: usize) -> Result<GridDensity> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("Barenblatt time must be positive, got {t}")));
        }
        if self.d == 1 {
            GridDensity::line(extent, n, |x| self.value(x, t))
        } else {
            GridDensity::radial(self.d, extent, n, |r| self.value(r, t))
        }
    }
}

/// Nodes across the Barenblatt support radius in [`barenblatt`].
pub const BARENBLATT_SUPPORT_NODES: usize = 256;
/// Empty nodes kept beyond the support edge in [`barenblatt`].
pub const BARENBLATT_MARGIN_NODES: usize = 32;

/// Barenblatt profile at time `t` on a grid covering its support with
/// [`BARENBLATT_MARGIN_NODES`] nodes of margin.
pub fn barenblatt(p: f64, d: u32, t: f64, mass: f64) -> Result<GridDensity> {
    let b = Barenblatt::new(p, d, mass)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Barenblatt time must be positive, got {t}")));
    }
    let r = b.radius(t);
    let h = r / BARENBLATT_SUPPORT_NODES as f64;
    let extent = r + BARENBLATT_MARGIN_NODES as f64 * h;
    let per_side = BARENBLATT_SUPPORT_NODES + BARENBLATT_MARGIN_NODES;
    let n = if d == 1 { 2 * per_side + 1 } else { per_side + 1 };
    b.on_grid(t, extent, n)
}

/// Geometry used by the reference generators for dimension `d`.
pub fn geometry_for(d: u32) -> Geometry {
    if d == 1 {
        Geometry::Line
    } else {
        Geometry::Radial { d }
    }
}
