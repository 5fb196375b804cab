//! The order triple `(p, q, d)` shared by every functional and flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance from 1 below which an order is treated as exactly 1 and the
/// Shannon/Renyi closed forms are used.
pub const LIMIT_EPS: f64 = 1e-9;

/// Orders `(p, q)` in ambient dimension `d`.
///
/// Construction enforces `p > 1 - 2/d` and `q > 0`. The exponents
/// `sigma_p = 2/d + p - 1` and `sigma_q = 2/d + q - 1` are always derived on
/// demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrders", into = "RawOrders")]
pub struct Orders {
    p: f64,
    q: f64,
    d: u32,
}

#[derive(Serialize, Deserialize)]
struct RawOrders {
    p: f64,
    q: f64,
    d: u32,
}

impl TryFrom<RawOrders> for Orders {
    type Error = Error;
    fn try_from(r: RawOrders) -> Result<Self> {
        Orders::new(r.p, r.q, r.d)
    }
}

impl From<Orders> for RawOrders {
    fn from(o: Orders) -> Self {
        RawOrders { p: o.p, q: o.q, d: o.d }
    }
}

/// Which parameter sub-range a pair of orders falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `q >= p > 1`: the Sharma-Mittal functional is geodesically convex.
    GeodesicallyConvex,
    /// `p > max(1 - 1/d, d/(d+2))`: the porous-medium part is a well-posed
    /// Wasserstein gradient flow.
    GradientFlow,
    /// Only the concavity-theorem hypothesis `p > 1 - 2/d, q > 0` holds.
    TheoremOnly,
}

impl Orders {
    pub fn new(p: f64, q: f64, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidOrders("dimension d must be a positive integer".into()));
        }
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidOrders("p and q must be finite".into()));
        }
        if q <= 0.0 {
            return Err(Error::InvalidOrders(format!(
                "q must be positive (concavity theorem hypothesis q > 0), got q = {q}"
            )));
        }
        let p_min = 1.0 - 2.0 / d as f64;
        if p <= p_min || p <= 0.0 {
            return Err(Error::InvalidOrders(format!(
                "p must exceed max(1 - 2/d, 0) = {} (concavity theorem hypothesis), got p = {p}",
                p_min.max(0.0)
            )));
        }
        Ok(Self { p, q, d })
    }

    /// Orders of the porous-medium flow `q = p`.
    pub fn diagonal(p: f64, d: u32) -> Result<Self> {
        Self::new(p, p, d)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn sigma_p(&self) -> f64 {
        2.0 / self.dim() + self.p - 1.0
    }

    pub fn sigma_q(&self) -> f64 {
        2.0 / self.dim() + self.q - 1.0
    }

    pub fn p_is_one(&self) -> bool {
        (self.p - 1.0).abs() < LIMIT_EPS
    }

    pub fn q_is_one(&self) -> bool {
        (self.q - 1.0).abs() < LIMIT_EPS
    }

    /// Exponent `(p - q)/(1 - p)` of the nonlocal prefactor `M_p^{(p-q)/(1-p)}`;
    /// `None` on the `p = 1` branch, where the prefactor is not a power of
    /// `M_1 = 1` (see [`Orders::flow_prefactor`]).
    pub fn prefactor_exponent(&self) -> Option<f64> {
        if self.p_is_one() {
            None
        } else {
            Some((self.p - self.q) / (1.0 - self.p))
        }
    }

    /// `true` when the Sharma-Mittal flow of these orders is the plain
    /// porous-medium (or heat) flow.
    pub fn is_local_flow(&self) -> bool {
        (self.p - self.q).abs() < LIMIT_EPS
    }

    /// Nonlocal prefactor `M_p^{(p-q)/(1-p)} = exp((p - q) R_p)` of the
    /// Sharma-Mittal flow; at `p = 1` its limit `exp((1 - q) H)`.
    pub fn flow_prefactor(&self, m_p: f64, r_p: f64) -> f64 {
        if self.is_local_flow() {
            1.0
        } else if let Some(e) = self.prefactor_exponent() {
            m_p.powf(e)
        } else {
            ((1.0 - self.q) * r_p).exp()
        }
    }

    /// The same `p` and `d` with a different `q`.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::new(self.p, q, self.d)
    }

    pub fn regime(&self) -> Regime {
        let d = self.dim();
        if self.q >= self.p && self.p > 1.0 {
            Regime::GeodesicallyConvex
        } else if self.p > (1.0 - 1.0 / d).max(d / (d + 2.0)) {
            Regime::GradientFlow
        } else {
            Regime::TheoremOnly
        }
    }

    /// `p > 1 - 1/d`, the range where `J_p >= 0` and the key inequality holds.
    pub fn key_inequality_range(&self) -> bool {
        self.p > 1.0 - 1.0 / self.dim()
    }
}
