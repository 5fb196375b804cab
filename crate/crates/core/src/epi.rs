//! Entropy power inequalities for sums of independent random variables,
//! checked on grid densities via discrete convolution.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{entropy_power, renyi_entropy, shannon_entropy};
use crate::grid::{Geometry, GridDensity};
use crate::lab::{CheckId, CheckParams, CheckReport, Sample, Tolerances};
use crate::orders::Orders;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvolutionMethod {
    /// `O(n^2)` direct sum.
    Direct,
    /// Zero-padded FFT.
    Fft,
}

fn check_line(u: &GridDensity) -> Result<()> {
    if u.geometry() != Geometry::Line {
        return Err(Error::InvalidGrid("convolution needs line grids".into()));
    }
    Ok(())
}

/// Density of `X + Y` for independent `X ~ a`, `Y ~ b` on matching spacing.
pub fn convolve(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    convolve_with(a, b, ConvolutionMethod::Direct)
}

pub fn convolve_with(a: &GridDensity, b: &GridDensity, method: ConvolutionMethod) -> Result<GridDensity> {
    check_line(a)?;
    check_line(b)?;
    let h = a.spacing();
    if (b.spacing() - h).abs() > 1e-12 * h {
        return Err(Error::GridMismatch(format!("spacings differ: {} vs {}", a.spacing(), b.spacing())));
    }
    let values = match method {
        ConvolutionMethod::Direct => direct(a.values(), b.values()),
        ConvolutionMethod::Fft => via_fft(a.values(), b.values()),
    };
    let values = values.into_iter().map(|v| (v * h).max(0.0)).collect();
    GridDensity::new(Geometry::Line, a.origin() + b.origin(), h, values)
}

fn direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (o, y) in out[i..].iter_mut().zip(b) {
            *o += x * y;
        }
    }
    out
}

fn via_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| {
        let mut c: Vec<Complex<f64>> = v.iter().map(|&x| Complex::new(x, 0.0)).collect();
        c.resize(size, Complex::new(0.0, 0.0));
        c
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa[..len].iter().map(|c| c.re * scale).collect()
}

/// The density of `X + c`.
pub fn shift(u: &GridDensity, c: f64) -> Result<GridDensity> {
    check_line(u)?;
    GridDensity::unnormalized(Geometry::Line, u.origin() + c, u.spacing(), u.values().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpiVariant {
    /// `N(X+Y) >= N(X) + N(Y)`.
    Shannon,
    /// `B_p^alpha(X+Y) >= B_p^alpha(X) + B_p^alpha(Y)`, `alpha >= (p+1)/2`, `p > 1`.
    BobkovMarsiglietti,
    /// `N_{p,q}(X+Y) >= N_{p,q}(X) + N_{p,q}(Y)` with `q = 2(alpha-1)/d + 1`.
    SharmaMittal,
    /// `B_p(X_1 + ... + X_n) >= e^{-1} p^{1/(p-1)} sum_k B_p(X_k)`, `n >= 3`, `p > 1`.
    BobkovChistyakovN,
}

impl EpiVariant {
    fn check_id(self) -> CheckId {
        match self {
            EpiVariant::Shannon => CheckId::EpiShannon,
            EpiVariant::BobkovMarsiglietti => CheckId::EpiBobkovMarsiglietti,
            EpiVariant::SharmaMittal => CheckId::EpiSharmaMittal,
            EpiVariant::BobkovChistyakovN => CheckId::EpiBobkovChistyakov,
        }
    }
}

/// One entropy power inequality instance.
#[derive(Debug, Clone)]
pub struct EpiCase {
    pub summands: Vec<GridDensity>,
    pub orders: Orders,
    pub alpha: f64,
    pub variant: EpiVariant,
    /// Outside the proven parameter range; evaluated without a verdict.
    pub exploratory: bool,
}

impl EpiCase {
    pub fn shannon(summands: Vec<GridDensity>) -> Result<Self> {
        Self::build(summands, Orders::new(1.0, 1.0, 1)?, 1.0, EpiVariant::Shannon, false)
    }

    pub fn bobkov_marsiglietti(summands: Vec<GridDensity>, p: f64, alpha: f64) -> Result<Self> {
        if !(p > 1.0) || alpha < 0.5 * (p + 1.0) {
            return Err(Error::Domain(format!("B-M inequality needs p > 1 and alpha >= (p+1)/2 (p = {p}, alpha = {alpha})")));
        }
        Self::build(summands, Orders::new(p, 1.0, 1)?, alpha, EpiVariant::BobkovMarsiglietti, false)
    }

    /// `N_{p,q}` EPI with `q = 2(alpha - 1) + 1` (d = 1).
    pub fn sharma_mittal(summands: Vec<GridDensity>, p: f64, alpha: f64) -> Result<Self> {
        if !(p > 1.0) || alpha < 0.5 * (p + 1.0) {
            return Err(Error::Domain(format!("S-M inequality needs p > 1 and alpha >= (p+1)/2 (p = {p}, alpha = {alpha})")));
        }
        let q = 2.0 * (alpha - 1.0) + 1.0;
        Self::build(summands, Orders::new(p, q, 1)?, alpha, EpiVariant::SharmaMittal, false)
    }

    /// `N_{p,q}` EPI at an arbitrary admissible `(p, q)`; no verdict is claimed.
    pub fn sharma_mittal_exploratory(summands: Vec<GridDensity>, p: f64, q: f64) -> Result<Self> {
        let alpha = 0.5 * (q - 1.0) + 1.0;
        Self::build(summands, Orders::new(p, q, 1)?, alpha, EpiVariant::SharmaMittal, true)
    }

    pub fn bobkov_chistyakov(summands: Vec<GridDensity>, p: f64) -> Result<Self> {
        if summands.len() < 3 || !(p > 1.0) {
            return Err(Error::Domain(format!(
                "B-C inequality needs at least 3 summands and p > 1 ({} summands, p = {p})",
                summands.len()
            )));
        }
        Self::build(summands, Orders::new(p, 1.0, 1)?, 1.0, EpiVariant::BobkovChistyakovN, false)
    }

    /// The two-summand B-C bound, which is known to fail in general.
    pub fn bobkov_chistyakov_pair(summands: Vec<GridDensity>, p: f64) -> Result<Self> {
        if summands.len() != 2 || !(p > 1.0) {
            return Err(Error::Domain("exploratory B-C mode takes exactly 2 summands and p > 1".into()));
        }
        Self::build(summands, Orders::new(p, 1.0, 1)?, 1.0, EpiVariant::BobkovChistyakovN, true)
    }

    fn build(summands: Vec<GridDensity>, orders: Orders, alpha: f64, variant: EpiVariant, exploratory: bool) -> Result<Self> {
        if summands.len() < 2 {
            return Err(Error::Domain("an EPI needs at least two summands".into()));
        }
        let h = summands[0].spacing();
        for s in &summands {
            check_line(s)?;
            if (s.spacing() - h).abs() > 1e-12 * h {
                return Err(Error::GridMismatch("all summands must share the grid spacing".into()));
            }
        }
        Ok(Self { summands, orders, alpha, variant, exploratory })
    }

    /// The entropy power this case compares.
    pub fn power(&self, u: &GridDensity) -> Result<f64> {
        let o = &self.orders;
        match self.variant {
            EpiVariant::Shannon => Ok((2.0 * shannon_entropy(u)).exp()),
            EpiVariant::BobkovMarsiglietti => Ok((2.0 * self.alpha * renyi_entropy(u, o.p())?).exp()),
            EpiVariant::SharmaMittal => Ok(entropy_power(u, o)?.n_pq),
            EpiVariant::BobkovChistyakovN => Ok(entropy_power(u, o)?.b_p),
        }
    }

    pub fn sum_density(&self) -> Result<GridDensity> {
        let mut acc = self.summands[0].clone();
        for s in &self.summands[1..] {
            acc = convolve(&acc, s)?;
        }
        Ok(acc)
    }

    /// `(LHS, RHS)` of the inequality.
    pub fn sides(&self) -> Result<(f64, f64)> {
        let lhs = self.power(&self.sum_density()?)?;
        let mut rhs = 0.0;
        for s in &self.summands {
            rhs += self.power(s)?;
        }
        if self.variant == EpiVariant::BobkovChistyakovN {
            let p = self.orders.p();
            rhs *= p.powf(1.0 / (p - 1.0)) / std::f64::consts::E;
        }
        Ok((lhs, rhs))
    }
}

/// Evaluates one case; passes iff `LHS - RHS >= -epi_rel * RHS`.
pub fn check_epi(case: &EpiCase, tol: &Tolerances) -> Result<CheckReport> {
    let (lhs, rhs) = case.sides()?;
    let sample = Sample { at: None, lhs, rhs, score: (lhs - rhs) / rhs };
    let o = &case.orders;
    let params = CheckParams { p: o.p(), q: o.q(), d: 1, n: case.summands[0].len(), dt: None, regime: None };
    let id = case.variant.check_id();
    Ok(if case.exploratory {
        CheckReport::exploratory(id, vec![sample], params).with_note("outside the proven parameter range")
    } else {
        CheckReport::inequality(id, vec![sample], tol.epi_rel, params)
    })
}

/// Flat JSON record of one EPI evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiReport {
    pub variant: EpiVariant,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub summands: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub exploratory: bool,
}

impl EpiReport {
    pub fn new(case: &EpiCase, report: &CheckReport) -> Self {
        let s = report.samples[0];
        Self {
            variant: case.variant,
            p: case.orders.p(),
            q: case.orders.q(),
            alpha: case.alpha,
            summands: case.summands.len(),
            lhs: s.lhs,
            rhs: s.rhs,
            margin: s.lhs - s.rhs,
            pass: report.pass,
            exploratory: case.exploratory,
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        out.write_all(s.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }
}
