//! Entropy and information functionals of a [`GridDensity`].
//!
//! All integrals use the grid's quadrature weights. Functionals that need
//! `log u` or negative powers of `u` evaluate on `max(u, FLOOR)`, and the
//! derivative-based functionals `I_p`, `J_p` only integrate over nodes whose
//! whole stencil lies in the numerical support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridDensity, FLOOR, MIN_NODES};
use crate::orders::{Orders, LIMIT_EPS};
use crate::qalgebra::{q_exp, q_log};

/// `J_p` is reported absent when fewer support nodes than this survive.
pub const MIN_J_NODES: usize = 16;

fn is_one(x: f64) -> bool {
    (x - 1.0).abs() < LIMIT_EPS
}

/// Raw moment `M_p = int u^p` together with `E_p = M_p/(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub raw: f64,
    pub energy: f64,
}

/// `M_p = int u^p dx` for `p > 0`.
pub fn power_moment(u: &GridDensity, p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("moment order must be positive, got {p}")));
    }
    let m = if p == 1.0 { u.mass() } else { u.integrate_map(|v| v.powf(p)) };
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Degenerate(format!("M_{p} = {m}")));
    }
    Ok(m)
}

/// `E_p(u) = (1/(p-1)) int u^p` and the raw moment `M_p`.
pub fn e_p_moment(u: &GridDensity, p: f64) -> Result<Moments> {
    if is_one(p) {
        return Err(Error::LimitBranch(
            "E_p is singular at p = 1, use the Shannon entropy instead".into(),
        ));
    }
    let raw = power_moment(u, p)?;
    Ok(Moments { raw, energy: raw / (p - 1.0) })
}

/// Shannon entropy `-int u log u` with `0 log 0 = 0`.
pub fn shannon_entropy(u: &GridDensity) -> f64 {
    -u.integrate_map(|v| if v > 0.0 { v * v.ln() } else { 0.0 })
}

/// The Lyapunov functional of the flow: `E_p` for `p != 1`, `int u log u`
/// at `p = 1`.
pub fn entropy_functional(u: &GridDensity, p: f64) -> Result<f64> {
    if is_one(p) {
        Ok(-shannon_entropy(u))
    } else {
        Ok(e_p_moment(u, p)?.energy)
    }
}

/// Renyi entropy `R_p = log(M_p)/(1-p)`, Shannon entropy at `p = 1`.
pub fn renyi_entropy(u: &GridDensity, p: f64) -> Result<f64> {
    if is_one(p) {
        return Ok(shannon_entropy(u));
    }
    let m = power_moment(u, p)?;
    Ok(m.ln() / (1.0 - p))
}

/// Tsallis entropy `T_p = (M_p - 1)/(1-p)`, Shannon entropy at `p = 1`.
pub fn tsallis_entropy(u: &GridDensity, p: f64) -> Result<f64> {
    if is_one(p) {
        return Ok(shannon_entropy(u));
    }
    let m = power_moment(u, p)?;
    Ok((m - 1.0) / (1.0 - p))
}

/// Sharma-Mittal entropy `S_{p,q} = log_q(M_p^{1/(1-p)}) = log_q(exp(R_p))`.
pub fn sharma_mittal_entropy(u: &GridDensity, o: &Orders) -> Result<f64> {
    let r = renyi_entropy(u, o.p())?;
    sharma_mittal_from_renyi(r, o.q())
}

fn sharma_mittal_from_renyi(r: f64, q: f64) -> Result<f64> {
    if is_one(q) {
        Ok(r)
    } else {
        let k = 1.0 - q;
        Ok((k * r).exp_m1() / k)
    }
}

/// The entropy powers of one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPowers {
    /// `N_{p,q} = exp(sigma_q R_p)`.
    pub n_pq: f64,
    /// `P_p = exp(sigma_p R_p)`.
    pub p_p: f64,
    /// `B_p = exp((2/d) R_p)`.
    pub b_p: f64,
    /// Shannon entropy power `exp((2/d) H)`.
    pub shannon: Option<f64>,
    /// Relative gap between `exp(sigma_q R_p)` and `exp_q(S_{p,q})^{sigma_q}`.
    pub q_exp_route_rel_dev: f64,
}

/// `N_{p,q}` and its named special cases.
pub fn entropy_power(u: &GridDensity, o: &Orders) -> Result<EntropyPowers> {
    let r = renyi_entropy(u, o.p())?;
    let two_over_d = 2.0 / o.dim();
    let n_pq = (o.sigma_q() * r).exp();
    let s = sharma_mittal_from_renyi(r, o.q())?;
    let via_q_exp = q_exp(s, o.q()).powf(o.sigma_q());
    let h = shannon_entropy(u);
    let shannon = Some((two_over_d * h).exp()).filter(|v| v.is_finite());
    Ok(EntropyPowers {
        n_pq,
        p_p: (o.sigma_p() * r).exp(),
        b_p: (two_over_d * r).exp(),
        shannon,
        q_exp_route_rel_dev: ((via_q_exp - n_pq) / n_pq).abs(),
    })
}

/// `e_p'(z) = p/(p-1) z^{p-1}`, `log z` at `p = 1`; `z` is floored.
pub fn e_p_prime(z: f64, p: f64) -> f64 {
    let z = z.max(FLOOR);
    if is_one(p) {
        z.ln()
    } else {
        p / (p - 1.0) * z.powf(p - 1.0)
    }
}

/// Generalized Fisher information and its chain-rule cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInformation {
    /// `int |grad u^p|^2 / u`.
    pub value: f64,
    /// `int u |grad e_p'(u)|^2`.
    pub chain_form: f64,
    /// `|value - chain_form| / value`.
    pub rel_diff: f64,
}

/// `I_p(u) = int |grad u^p|^2 / u dx`.
///
/// The squared gradient is used; it is the only reading under which the two
/// customary expressions `int |grad u^p|^2/u` and `int u |grad e_p'(u)|^2`
/// agree.
pub fn fisher_information(u: &GridDensity, p: f64) -> Result<FisherInformation> {
    if !(p > 0.5) {
        return Err(Error::Domain(format!("I_p needs p > 1/2, got {p}")));
    }
    if u.len() < MIN_NODES {
        return Err(Error::GridTooCoarse { nodes: u.len(), min: MIN_NODES });
    }
    let vals = u.values();
    let mask = u.stencil_support_mask();
    let g: Vec<f64> = vals.iter().map(|&v| if p == 1.0 { v } else { v.powf(p) }).collect();
    let dg = u.gradient(&g);
    let f: Vec<f64> = vals.iter().map(|&v| e_p_prime(v, p)).collect();
    let df = u.gradient(&f);
    let w = u.weights();
    let mut value = 0.0;
    let mut chain_form = 0.0;
    for i in 0..u.len() {
        if mask[i] {
            value += w[i] * dg[i] * dg[i] / vals[i].max(FLOOR);
            chain_form += w[i] * vals[i] * df[i] * df[i];
        }
    }
    let rel_diff = if value > 0.0 { (value - chain_form).abs() / value } else { (value - chain_form).abs() };
    Ok(FisherInformation { value, chain_form, rel_diff })
}

/// `J_p(u) = 2 int u^p (|D^2 e_p'(u)|^2 + (p-1) (Delta e_p'(u))^2) dx`.
///
/// Returns `Ok(None)` when fewer than [`MIN_J_NODES`] nodes survive the
/// support filter.
pub fn second_order_functional(u: &GridDensity, p: f64) -> Result<Option<f64>> {
    if !(p > 0.5) {
        return Err(Error::Domain(format!("J_p needs p > 1/2, got {p}")));
    }
    if u.len() < MIN_NODES {
        return Err(Error::GridTooCoarse { nodes: u.len(), min: MIN_NODES });
    }
    let vals = u.values();
    let mask = u.stencil_support_mask();
    if mask.iter().filter(|m| **m).count() < MIN_J_NODES {
        return Ok(None);
    }
    let f: Vec<f64> = vals.iter().map(|&v| e_p_prime(v, p)).collect();
    let (hess, lap) = u.hessian_and_laplacian(&f);
    let w = u.weights();
    let mut acc = 0.0;
    for i in 0..u.len() {
        if mask[i] {
            let up = if p == 1.0 { vals[i] } else { vals[i].powf(p) };
            acc += w[i] * up * (hess[i] + (p - 1.0) * lap[i] * lap[i]);
        }
    }
    Ok(Some(2.0 * acc))
}

/// `exp(sigma R_p) * dR_p/dt`, with the flow derivative of the Sharma-Mittal
/// flow substituted: `dR_p/dt = M_p^{(2p-q-1)/(1-p)} I_p`.
///
/// With `sigma = sigma_q` this is the dilation-invariant functional
/// [`q_functional`]; other exponents are exposed for negative controls.
pub fn dilation_functional(u: &GridDensity, o: &Orders, sigma: f64) -> Result<f64> {
    let p = o.p();
    let r = renyi_entropy(u, p)?;
    let i_p = fisher_information(u, p)?.value;
    let rate = if o.p_is_one() {
        // M_p^{(2p-q-1)/(1-p)} -> exp((1-q) H) as p -> 1
        ((1.0 - o.q()) * r).exp()
    } else {
        let m = power_moment(u, p)?;
        m.powf((2.0 * p - o.q() - 1.0) / (1.0 - p))
    };
    Ok((sigma * r).exp() * rate * i_p)
}

/// `Q_{p,q}(u) = N_{p,q}(u) ((p-1) E_p(u))^{(2p-q-1)/(1-p)} I_p(u)`.
pub fn q_functional(u: &GridDensity, o: &Orders) -> Result<f64> {
    dilation_functional(u, o, o.sigma_q())
}

/// Mass-preserving dilation `x -> lambda^d u(lambda x)`.
///
/// The grid itself is rescaled (nodes `x_i / lambda`, spacing `h / lambda`),
/// so no interpolation error is introduced.
pub fn dilate(u: &GridDensity, lambda: f64) -> Result<GridDensity> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("dilation factor must be positive, got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(u.clone());
    }
    let scale = lambda.powi(u.dim() as i32);
    let values = u.values().iter().map(|v| v * scale).collect();
    GridDensity::new(u.geometry(), u.origin() / lambda, u.spacing() / lambda, values)
}

/// Every scalar functional of one density at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSnapshot {
    pub t: f64,
    pub mass: f64,
    /// `M_p = int u^p`.
    pub m_p: f64,
    /// `E_p`, or `int u log u` at `p = 1`.
    pub e_p: f64,
    pub r_p: f64,
    pub t_p: f64,
    pub s_pq: f64,
    pub n_shannon: Option<f64>,
    pub p_p: f64,
    pub b_p: f64,
    pub n_pq: f64,
    pub i_p: f64,
    pub j_p: Option<f64>,
    pub q_pq: f64,
}

impl FunctionalSnapshot {
    pub fn compute(u: &GridDensity, o: &Orders, t: f64) -> Result<Self> {
        let p = o.p();
        let m_p = power_moment(u, p)?;
        let r_p = renyi_entropy(u, p)?;
        let powers = entropy_power(u, o)?;
        let i_p = fisher_information(u, p)?.value;
        Ok(Self {
            t,
            mass: u.mass(),
            m_p,
            e_p: entropy_functional(u, p)?,
            r_p,
            t_p: tsallis_entropy(u, p)?,
            s_pq: sharma_mittal_from_renyi(r_p, o.q())?,
            n_shannon: powers.shannon,
            p_p: powers.p_p,
            b_p: powers.b_p,
            n_pq: powers.n_pq,
            i_p,
            j_p: second_order_functional(u, p)?,
            q_pq: q_functional(u, o)?,
        })
    }

    /// Nonlocal prefactor `M_p^{(p-q)/(1-p)}` of the Sharma-Mittal flow.
    pub fn prefactor(&self, o: &Orders) -> f64 {
        o.flow_prefactor(self.m_p, self.r_p)
    }
}

/// `log_q` route to `S_{p,q}`: `q_log(M_p^{1/(1-p)}, q)`.
pub fn sharma_mittal_via_q_log(u: &GridDensity, o: &Orders) -> Result<f64> {
    if o.p_is_one() {
        return q_log(shannon_entropy(u).exp(), o.q());
    }
    let m = power_moment(u, o.p())?;
    q_log(m.powf(1.0 / (1.0 - o.p())), o.q())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn uniform(len: f64, n: usize) -> GridDensity {
        GridDensity::line(0.5 * len, n, |_| 1.0).unwrap()
    }

    fn std_gaussian(n: usize) -> GridDensity {
        GridDensity::line(12.0, n, |x| (-0.5 * x * x).exp()).unwrap()
    }

    #[test]
    fn uniform_moments() {
        let u = uniform(1.0, 101);
        for p in [0.5, 2.0, 3.0] {
            let m = e_p_moment(&u, p).unwrap();
            assert!((m.raw - 1.0).abs() < 1e-12);
            assert!((m.energy - 1.0 / (p - 1.0)).abs() < 1e-10);
        }
        let u = uniform(2.0, 101);
        let m = e_p_moment(&u, 2.0).unwrap();
        assert!((m.raw - 0.5).abs() < 1e-12);
        assert!((m.energy - 0.5).abs() < 1e-12);
        assert!(matches!(e_p_moment(&u, 1.0), Err(Error::LimitBranch(_))));
    }

    #[test]
    fn uniform_entropies() {
        for len in [1.0, 2.5] {
            let u = uniform(len, 201);
            for p in [0.5, 1.0, 2.0, 3.0] {
                let r = renyi_entropy(&u, p).unwrap();
                assert!((r - f64::ln(len)).abs() < 1e-12, "L = {len}, p = {p}");
            }
        }
        let u = uniform(1.0, 11);
        let o = Orders::new(2.0, 3.0, 1).unwrap();
        assert!(sharma_mittal_entropy(&u, &o).unwrap().abs() < 1e-14);
        let pw = entropy_power(&u, &o).unwrap();
        assert!((pw.n_pq - 1.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_closed_forms() {
        let u = std_gaussian(4001);
        assert!((power_moment(&u, 2.0).unwrap() - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-12);
        assert!((renyi_entropy(&u, 2.0).unwrap() - (2.0 * PI.sqrt()).ln()).abs() < 1e-10);
        let o = Orders::new(2.0, 1.0, 1).unwrap();
        assert!((entropy_power(&u, &o).unwrap().b_p - 4.0 * PI).abs() < 1e-9);
        let o = Orders::new(1.0, 1.0, 1).unwrap();
        let pw = entropy_power(&u, &o).unwrap();
        assert!((pw.n_pq - 2.0 * PI * E).abs() < 1e-9);
        assert!((pw.shannon.unwrap() - 2.0 * PI * E).abs() < 1e-9);
    }

    #[test]
    fn tsallis_is_the_diagonal() {
        let u = std_gaussian(801);
        for p in [0.7, 2.0, 3.5] {
            let o = Orders::new(p, p, 1).unwrap();
            let s = sharma_mittal_entropy(&u, &o).unwrap();
            let m = power_moment(&u, p).unwrap();
            assert!((s - (m - 1.0) / (1.0 - p)).abs() < 1e-12);
            assert!((s - tsallis_entropy(&u, p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn sharma_mittal_two_routes() {
        let u = std_gaussian(2001);
        let o = Orders::new(2.0, 3.0, 1).unwrap();
        let m = power_moment(&u, 2.0).unwrap();
        let direct = (m.powf((1.0 - 3.0) / (1.0 - 2.0)) - 1.0) / (1.0 - 3.0);
        let a = sharma_mittal_entropy(&u, &o).unwrap();
        let b = sharma_mittal_via_q_log(&u, &o).unwrap();
        assert!((a - direct).abs() < 1e-12);
        assert!((b - direct).abs() < 1e-12);
    }

    #[test]
    fn fisher_gaussian_scaling() {
        for (s, expect) in [(1.0, 1.0), (2.0, 0.25)] {
            let u = GridDensity::line(12.0 * s, 4001, |x| (-0.5 * x * x / (s * s)).exp()).unwrap();
            let fi = fisher_information(&u, 1.0).unwrap();
            assert!((fi.value - expect).abs() < 1e-4 * expect, "sigma {s}: {}", fi.value);
            assert!(fi.rel_diff < 1e-4);
        }
    }

    #[test]
    fn fisher_rejects_small_p_and_coarse_grid() {
        let u = std_gaussian(401);
        assert!(fisher_information(&u, 0.5).is_err());
        let c = GridDensity::line(1.0, 5, |_| 1.0).unwrap();
        assert!(matches!(fisher_information(&c, 2.0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn j_absent_on_tiny_support() {
        let u = GridDensity::line(1.0, 201, |x| if x.abs() < 0.05 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(second_order_functional(&u, 2.0).unwrap(), None);
    }

    #[test]
    fn dilate_identity_and_renyi_shift() {
        let u = std_gaussian(801);
        assert_eq!(dilate(&u, 1.0).unwrap(), u);
        for lambda in [0.5, 3.0] {
            let v = dilate(&u, lambda).unwrap();
            assert!((v.mass() - 1.0).abs() < 1e-12);
            for p in [1.0, 2.0] {
                let dr = renyi_entropy(&v, p).unwrap() - renyi_entropy(&u, p).unwrap();
                assert!((dr + lambda.ln()).abs() < 1e-12);
            }
        }
        assert!(dilate(&u, 0.0).is_err());
    }

    #[test]
    fn snapshot_consistency() {
        let u = std_gaussian(1001);
        let o = Orders::new(2.0, 3.0, 1).unwrap();
        let s = FunctionalSnapshot::compute(&u, &o, 0.0).unwrap();
        assert_eq!(s.n_pq, (o.sigma_q() * s.r_p).exp());
        assert!((s.b_p - (2.0 * s.r_p).exp()).abs() < 1e-12 * s.b_p);
        let diag = Orders::new(2.0, 2.0, 1).unwrap();
        assert!((sharma_mittal_entropy(&u, &diag).unwrap() - s.t_p).abs() < 1e-14);
        assert!(s.j_p.is_some());
        assert_eq!(s.prefactor(&o), s.m_p);
    }
}
