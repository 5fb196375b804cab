//! Deformed logarithm and exponential of Tsallis statistics.

use crate::error::{Error, Result};
use crate::orders::{Orders, LIMIT_EPS};

/// `log_q(s) = (s^{1-q} - 1)/(1 - q)`, the natural log when `q = 1`.
///
/// Evaluated as `expm1((1-q) ln s)/(1-q)` so it stays accurate as `q -> 1`.
pub fn q_log(s: f64, q: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("q-logarithm needs s > 0, got {s}")));
    }
    let ln = s.ln();
    if (q - 1.0).abs() < LIMIT_EPS {
        Ok(ln)
    } else {
        let k = 1.0 - q;
        Ok((k * ln).exp_m1() / k)
    }
}

/// `exp_q(s) = max(1 + (1-q) s, 0)^{1/(1-q)}`, `exp(s)` when `q = 1`.
///
/// In the truncated region the result is 0 for `q < 1` and `+inf` for
/// `q > 1` (the negative exponent of a vanishing base).
pub fn q_exp(s: f64, q: f64) -> f64 {
    if (q - 1.0).abs() < LIMIT_EPS {
        return s.exp();
    }
    let k = 1.0 - q;
    let base = k * s;
    if base <= -1.0 {
        return if k > 0.0 { 0.0 } else { f64::INFINITY };
    }
    (base.ln_1p() / k).exp()
}

/// `s_{p,q}(z) = -log_q(((p-1) z)^{1/(1-p)})`.
///
/// Non-decreasing in `z` for `p > 1`, convex for `q >= p > 1`.
pub fn s_pq_scalar(z: f64, o: &Orders) -> Result<f64> {
    let p = o.p();
    if o.p_is_one() {
        return Err(Error::LimitBranch("s_{p,q} is undefined at p = 1".into()));
    }
    let base = (p - 1.0) * z;
    if !(base > 0.0) {
        return Err(Error::Domain(format!("s_(p,q) needs (p - 1) z > 0, got {base}")));
    }
    // ((p-1)z)^{1/(1-p)} enters log_q only through its logarithm.
    let ln_arg = base.ln() / (1.0 - p);
    let q = o.q();
    if o.q_is_one() {
        Ok(-ln_arg)
    } else {
        let k = 1.0 - q;
        Ok(-(k * ln_arg).exp_m1() / k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn q_log_values() {
        for q in [0.3, 1.0, 2.5] {
            assert_eq!(q_log(1.0, q).unwrap(), 0.0);
        }
        assert!((q_log(4.0, 0.5).unwrap() - 2.0).abs() < 1e-14);
        assert!((q_log(E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(q_log(0.0, 2.0).is_err());
        assert!(q_log(-1.0, 2.0).is_err());
    }

    #[test]
    fn q_log_continuous_at_one() {
        let s = 3.7;
        let a = q_log(s, 1.0 + 1e-8).unwrap();
        assert!((a - s.ln()).abs() < 1e-7);
    }

    #[test]
    fn q_exp_values() {
        for q in [0.3, 1.0, 2.5] {
            assert_eq!(q_exp(0.0, q), 1.0);
        }
        assert_eq!(q_exp(-3.0, 0.5), 0.0);
        assert_eq!(q_exp(1.0, 3.0), f64::INFINITY);
        assert!((q_exp(1.0, 1.0) - E).abs() < 1e-15);
        // (1 + 0.5 * 2)^2
        assert!((q_exp(2.0, 0.5) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn s_pq_unit_argument() {
        let o = Orders::new(2.0, 2.0, 1).unwrap();
        assert_eq!(s_pq_scalar(1.0, &o).unwrap(), 0.0);
        assert!(s_pq_scalar(-1.0, &o).is_err());
        let o = Orders::new(0.5, 2.0, 1).unwrap();
        assert!(s_pq_scalar(1.0, &o).is_err());
        assert!(s_pq_scalar(-1.0, &o).is_ok());
    }
}
