use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::orders::Regime;

/// Which relation a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckId {
    /// `-dE_p/dt = M_p^{(p-q)/(1-p)} I_p` along the Sharma-Mittal flow.
    ProdE,
    /// `-dI_p/dt = M_p^{(p-q)/(1-p)} J_p` along the Sharma-Mittal flow.
    ProdI,
    /// `-dE_p/dt = I_p` along the porous-medium flow.
    #[serde(rename = "ProdE_PME")]
    ProdEPme,
    /// `-dI_p/dt = J_p` along the porous-medium flow.
    #[serde(rename = "ProdI_PME")]
    ProdIPme,
    /// `J_p M_p >= 2 (1/d + p - 1) I_p^2`.
    KeyIneq,
    /// `-R_p'' >= sigma_q (R_p')^2`.
    ConcavityCond,
    /// `N_{p,q}'' <= 0`.
    ConcavityN,
    /// Invariance of `Q_{p,q}` under mass-preserving dilations.
    DilationQ,
    /// `N(t)` affine along the heat flow from Gaussian data.
    LinearHeatN,
    EpiShannon,
    EpiBobkovMarsiglietti,
    EpiSharmaMittal,
    EpiBobkovChistyakov,
}

impl CheckId {
    /// Name used in JSON and file names.
    pub fn name(self) -> &'static str {
        match self {
            CheckId::ProdE => "ProdE",
            CheckId::ProdI => "ProdI",
            CheckId::ProdEPme => "ProdE_PME",
            CheckId::ProdIPme => "ProdI_PME",
            CheckId::KeyIneq => "KeyIneq",
            CheckId::ConcavityCond => "ConcavityCond",
            CheckId::ConcavityN => "ConcavityN",
            CheckId::DilationQ => "DilationQ",
            CheckId::LinearHeatN => "LinearHeatN",
            CheckId::EpiShannon => "EpiShannon",
            CheckId::EpiBobkovMarsiglietti => "EpiBobkovMarsiglietti",
            CheckId::EpiSharmaMittal => "EpiSharmaMittal",
            CheckId::EpiBobkovChistyakov => "EpiBobkovChistyakov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when every relative residual is at most the tolerance.
    Identity,
    /// Passes when every normalized margin is at least `-tolerance`.
    Inequality,
    /// Recorded for information only; never fails.
    Exploratory,
}

/// One evaluated instance of a relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Time of the snapshot, dilation factor, or absent.
    pub at: Option<f64>,
    /// Left-hand side (measured value).
    pub lhs: f64,
    /// Right-hand side (reference value).
    pub rhs: f64,
    /// Relative residual for identities, normalized margin for inequalities.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckParams {
    pub p: f64,
    pub q: f64,
    pub d: u32,
    pub n: usize,
    pub dt: Option<f64>,
    /// Parameter sub-range of the orders.
    pub regime: Option<Regime>,
}

/// Tolerances of the verification engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative residual allowed in the production identities.
    pub identity_rel: f64,
    /// Normalized margin allowed below zero in state-wise inequalities.
    pub inequality: f64,
    /// Second differences of `N_{p,q}` may exceed zero by this times `max |N_{p,q}|`.
    pub concavity_abs: f64,
    /// Additional allowance proportional to `|N_{p,q}(t_i)|`.
    pub concavity_rel: f64,
    /// Relative deviation allowed for dilation invariance.
    pub dilation_rel: f64,
    /// Bound on |second difference| / |first difference| of `N(t)` under the heat flow.
    pub linear_heat: f64,
    /// Relative margin allowed below zero in entropy power inequalities.
    pub epi_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity_rel: 5e-2,
            inequality: 1e-8,
            concavity_abs: 1e-6,
            concavity_rel: 0.0,
            dilation_rel: 1e-6,
            linear_heat: 1e-3,
            epi_rel: 1e-3,
        }
    }
}

/// Residuals and verdict of one check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: CheckId,
    pub kind: CheckKind,
    pub pass: bool,
    pub max_rel_residual: Option<f64>,
    pub margin_min: Option<f64>,
    pub tolerance: f64,
    pub params: CheckParams,
    pub samples: Vec<Sample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn identity(check_id: CheckId, samples: Vec<Sample>, tolerance: f64, params: CheckParams) -> Self {
        let max = samples.iter().map(|s| s.score).fold(f64::NEG_INFINITY, nan_max);
        let max = if samples.is_empty() { None } else { Some(max) };
        let pass = max.is_some_and(|m| m <= tolerance);
        Self { check_id, kind: CheckKind::Identity, pass, max_rel_residual: max, margin_min: None, tolerance, params, samples, note: None }
    }

    pub fn inequality(check_id: CheckId, samples: Vec<Sample>, tolerance: f64, params: CheckParams) -> Self {
        let min = samples.iter().map(|s| s.score).fold(f64::INFINITY, nan_min);
        let min = if samples.is_empty() { None } else { Some(min) };
        let pass = min.is_some_and(|m| m >= -tolerance);
        Self { check_id, kind: CheckKind::Inequality, pass, max_rel_residual: None, margin_min: min, tolerance, params, samples, note: None }
    }

    /// An inequality evaluated without a pass/fail claim.
    pub fn exploratory(check_id: CheckId, samples: Vec<Sample>, params: CheckParams) -> Self {
        let mut r = Self::inequality(check_id, samples, 0.0, params);
        r.kind = CheckKind::Exploratory;
        r.pass = true;
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Io(e.to_string()))
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let verdict = match (self.kind, self.pass) {
            (CheckKind::Exploratory, _) => "INFO",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        let value = match (self.max_rel_residual, self.margin_min) {
            (Some(r), _) => format!("max_rel_residual={r:.3e}"),
            (None, Some(m)) => format!("margin_min={m:.3e}"),
            _ => "no samples".to_string(),
        };
        format!(
            "{verdict} {} p={} q={} d={} {value} tol={:.1e}",
            self.check_id.name(), self.params.p, self.params.q, self.params.d, self.tolerance
        )
    }
}

// NaN propagates so that a broken sample cannot pass silently.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.min(b)
    }
}
