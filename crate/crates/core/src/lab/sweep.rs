//! Concavity and key-inequality verdicts over a grid of orders `(p, q)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{gaussian, solve, FlowKind, FlowSpec, TimeScheme, Trajectory};
use crate::grid::GridDensity;

use super::checks::{check_concavity, check_key_inequality, ConcavityOutcome};
use super::report::{CheckReport, Tolerances};

/// Flow and grid shared by every pair of a sweep; the initial datum is a
/// centered Gaussian of variance `sigma2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub d: u32,
    pub sigma2: f64,
    pub half_width: f64,
    pub nodes: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub snapshots: usize,
    /// Forced time scheme; `None` picks [`TimeScheme::for_exponent`].
    pub scheme: Option<TimeScheme>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ps: linspace(0.6, 3.0, 5),
            qs: linspace(0.5, 3.0, 5),
            d: 1,
            sigma2: 1.0,
            half_width: 10.0,
            nodes: 2048,
            t_start: 0.0,
            t_end: 1.0,
            snapshots: crate::flow::spec::DEFAULT_SNAPSHOTS,
            scheme: None,
        }
    }
}

/// `k` equally spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![a],
        _ => (0..k).map(|i| (a * (k - 1 - i) as f64 + b * i as f64) / (k - 1) as f64).collect(),
    }
}

impl SweepConfig {
    /// All `(p, q)` pairs, `p` outermost.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.ps.iter().flat_map(|&p| self.qs.iter().map(move |&q| (p, q))).collect()
    }

    pub fn flow_spec(&self, p: f64, q: f64) -> FlowSpec {
        let kind = if p == 1.0 && q == 1.0 { FlowKind::Heat } else { FlowKind::SharmaMittal { p, q } };
        let scheme = self.scheme.unwrap_or_else(|| TimeScheme::for_exponent(p));
        FlowSpec::new(kind, self.half_width, self.nodes, self.t_start, self.t_end)
            .with_scheme(scheme)
            .with_snapshot_count(self.snapshots)
    }
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    pub q: f64,
    pub d: u32,
    pub concave: bool,
    /// `min_t (-second difference of N) / max |N|`.
    pub concavity_margin_min: f64,
    pub condition_agrees: bool,
    /// Absent when `J_p` is unavailable at every snapshot.
    pub key_margin_min: Option<f64>,
    pub key_pass: Option<bool>,
    pub scheme: TimeScheme,
    pub steps: usize,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 10] = [
        "p",
        "q",
        "d",
        "concave",
        "concavity_margin_min",
        "condition_agrees",
        "key_margin_min",
        "key_pass",
        "scheme",
        "steps",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        use crate::flow::trajectory::fmt_f64;
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            fmt_f64(self.p),
            fmt_f64(self.q),
            self.d.to_string(),
            self.concave.to_string(),
            fmt_f64(self.concavity_margin_min),
            self.condition_agrees.to_string(),
            opt(self.key_margin_min.map(fmt_f64)),
            opt(self.key_pass.map(|b| b.to_string())),
            match self.scheme {
                TimeScheme::Explicit => "explicit".into(),
                TimeScheme::LinearlyImplicit => "linearly_implicit".into(),
            },
            self.steps.to_string(),
        ]
    }

    /// Both verdicts hold (the key inequality only where it was evaluated).
    pub fn pass(&self) -> bool {
        self.concave && self.condition_agrees && self.key_pass.unwrap_or(true)
    }
}

/// Everything computed for one pair.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub row: SweepRow,
    pub trajectory: Trajectory,
    pub concavity: ConcavityOutcome,
    pub key: Option<CheckReport>,
}

/// Runs the flow of order `(p, q)` from the Gaussian datum and checks it.
pub fn run_pair(cfg: &SweepConfig, p: f64, q: f64, tol: &Tolerances) -> Result<PairOutcome> {
    let u0 = gaussian(cfg.sigma2, cfg.d, cfg.half_width, cfg.nodes)?;
    check_pair(&u0, &cfg.flow_spec(p, q), tol)
}

/// Runs `spec` from `u0` and checks concavity and the key inequality.
pub fn check_pair(u0: &GridDensity, spec: &FlowSpec, tol: &Tolerances) -> Result<PairOutcome> {
    let o = spec.kind.orders(u0.dim())?;
    let trajectory = solve(u0, spec)?;
    let concavity = check_concavity(&trajectory, &o, tol)?;
    let key = match check_key_inequality(&trajectory, &o, tol) {
        Ok(r) => Some(r),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let row = SweepRow {
        p: o.p(),
        q: o.q(),
        d: o.d(),
        concave: concavity.direct.pass,
        concavity_margin_min: concavity.direct.margin_min.unwrap_or(f64::NAN),
        condition_agrees: concavity.verdicts_agree,
        key_margin_min: key.as_ref().and_then(|k| k.margin_min),
        key_pass: key.as_ref().map(|k| k.pass),
        scheme: spec.scheme,
        steps: trajectory.stats.steps,
    };
    Ok(PairOutcome { row, trajectory, concavity, key })
}
