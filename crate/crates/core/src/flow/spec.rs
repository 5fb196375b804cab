use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orders::Orders;

/// Smallest grid a flow may run on.
pub const MIN_FLOW_NODES: usize = 64;
/// Default CFL safety factor.
pub const DEFAULT_CFL: f64 = 0.4;
/// Default number of recorded snapshots per run.
pub const DEFAULT_SNAPSHOTS: usize = 64;
/// Default first geometric snapshot offset, as a fraction of the run length.
pub const DEFAULT_FIRST_FRACTION: f64 = 1e-3;

/// The diffusion equation being integrated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowKind {
    /// `u_t = Delta u`.
    Heat,
    /// `u_t = Delta u^p`.
    PorousMedium { p: f64 },
    /// `u_t = M_p^{(p-q)/(1-p)} Delta u^p`.
    SharmaMittal { p: f64, q: f64 },
    /// `u_t = M_p^{-1} Delta u^p`, the `q = 1` Sharma-Mittal flow.
    Renyi { p: f64 },
}

impl FlowKind {
    /// Equivalent Sharma-Mittal orders in dimension `d`.
    pub fn orders(&self, d: u32) -> Result<Orders> {
        match *self {
            FlowKind::Heat => Orders::new(1.0, 1.0, d),
            FlowKind::PorousMedium { p } => Orders::new(p, p, d),
            FlowKind::SharmaMittal { p, q } => Orders::new(p, q, d),
            FlowKind::Renyi { p } => Orders::new(p, 1.0, d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed { dt: f64 },
    /// `dt = c * h^2 / (2 d p max(u^{p-1}) A)` recomputed every step.
    Cfl { safety: f64 },
}

/// Time discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Forward Euler on the conservative flux form.
    Explicit,
    /// Backward Euler with the diffusivity `u^{p-1}` lagged one step
    /// (one tridiagonal solve per step).
    LinearlyImplicit,
}

impl TimeScheme {
    /// Explicit for `p >= 1`; linearly implicit for `p < 1`, where the
    /// diffusivity `u^{p-1}` is unbounded in thin tails and the explicit
    /// step collapses.
    pub fn for_exponent(p: f64) -> Self {
        if p < 1.0 {
            TimeScheme::LinearlyImplicit
        } else {
            TimeScheme::Explicit
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotSpacing {
    Uniform,
    /// Offsets `(t_end - t_start) * f^{(K-1-k)/(K-2)}`, `k = 1..K-1`, after
    /// the initial time.
    Geometric { first_fraction: f64 },
}

/// Everything needed to run one flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    /// Half-width of a line domain or outer radius of a radial one.
    pub half_width: f64,
    pub nodes: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub dt_policy: DtPolicy,
    pub scheme: TimeScheme,
    pub snapshots: usize,
    pub spacing: SnapshotSpacing,
    /// Implicit steps use `dt = implicit_dt_factor * (explicit CFL dt)`
    /// under the CFL policy, capped by `max_dt` when set.
    pub implicit_dt_factor: f64,
    pub max_dt: Option<f64>,
}

impl FlowSpec {
    pub fn new(kind: FlowKind, half_width: f64, nodes: usize, t_start: f64, t_end: f64) -> Self {
        Self {
            kind,
            half_width,
            nodes,
            t_start,
            t_end,
            dt_policy: DtPolicy::Cfl { safety: DEFAULT_CFL },
            scheme: TimeScheme::Explicit,
            snapshots: DEFAULT_SNAPSHOTS,
            spacing: SnapshotSpacing::Geometric { first_fraction: DEFAULT_FIRST_FRACTION },
            implicit_dt_factor: 50.0,
            max_dt: None,
        }
    }

    pub fn with_kind(mut self, kind: FlowKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_dt(mut self, policy: DtPolicy) -> Self {
        self.dt_policy = policy;
        self
    }

    pub fn with_scheme(mut self, scheme: TimeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshots(mut self, count: usize, spacing: SnapshotSpacing) -> Self {
        self.snapshots = count;
        self.spacing = spacing;
        self
    }

    /// Changes the snapshot count, keeping the spacing.
    pub fn with_snapshot_count(mut self, count: usize) -> Self {
        self.snapshots = count;
        self
    }

    pub fn with_max_dt(mut self, max_dt: f64) -> Self {
        self.max_dt = Some(max_dt);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < MIN_FLOW_NODES {
            return Err(Error::InvalidFlow(format!("need n >= {MIN_FLOW_NODES} nodes, got {}", self.nodes)));
        }
        if !(self.t_start >= 0.0) || !(self.t_end > self.t_start) {
            return Err(Error::InvalidFlow(format!(
                "need t_end > t_start >= 0, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidFlow("domain half-width must be positive".into()));
        }
        match self.dt_policy {
            DtPolicy::Fixed { dt } if !(dt > 0.0) => {
                return Err(Error::InvalidFlow(format!("fixed dt must be positive, got {dt}")))
            }
            DtPolicy::Cfl { safety } if !(safety > 0.0 && safety <= 1.0) => {
                return Err(Error::InvalidFlow(format!("CFL safety factor must lie in (0, 1], got {safety}")))
            }
            _ => {}
        }
        if self.snapshots < 2 {
            return Err(Error::InvalidFlow("need at least 2 snapshots".into()));
        }
        if let SnapshotSpacing::Geometric { first_fraction } = self.spacing {
            if !(first_fraction > 0.0 && first_fraction < 1.0) {
                return Err(Error::InvalidFlow(format!("first snapshot fraction must lie in (0, 1), got {first_fraction}")));
            }
        }
        if !(self.implicit_dt_factor > 0.0) {
            return Err(Error::InvalidFlow("implicit dt factor must be positive".into()));
        }
        if let Some(m) = self.max_dt {
            if !(m > 0.0) {
                return Err(Error::InvalidFlow("max dt must be positive".into()));
            }
        }
        Ok(())
    }

    /// Snapshot times, starting at `t_start` and ending at `t_end`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let k = self.snapshots;
        let span = self.t_end - self.t_start;
        let mut times = Vec::with_capacity(k);
        times.push(self.t_start);
        match self.spacing {
            SnapshotSpacing::Uniform => {
                for i in 1..k {
                    times.push(self.t_start + span * i as f64 / (k - 1) as f64);
                }
            }
            SnapshotSpacing::Geometric { first_fraction } => {
                if k == 2 {
                    times.push(self.t_end);
                } else {
                    for i in 1..k {
                        let e = (k - 1 - i) as f64 / (k - 2) as f64;
                        times.push(self.t_start + span * first_fraction.powf(e));
                    }
                }
            }
        }
        *times.last_mut().unwrap() = self.t_end;
        times
    }
}
