use std::f64::consts::{E, PI};

use entropy_lab::flow::{gaussian, mixture, uniform, MixtureComponent};
use entropy_lab::functionals::*;
use entropy_lab::qalgebra::{q_exp, q_log, s_pq_scalar};
use entropy_lab::{Error, GridDensity, Orders};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn std_gaussian(n: usize) -> GridDensity {
    gaussian(1.0, 1, 12.0, n).unwrap()
}

/// Uniform on `[0, len]`, nodes exactly on the support.
fn unit_interval(len: f64, n: usize) -> GridDensity {
    GridDensity::line(0.5 * len, n, |_| 1.0).unwrap()
}

fn bimodal(n: usize) -> GridDensity {
    let c = [
        MixtureComponent { weight: 0.5, mean: -2.0, variance: 0.6 },
        MixtureComponent { weight: 0.5, mean: 2.0, variance: 0.6 },
    ];
    mixture(&c, 12.0, n).unwrap()
}

#[test]
fn q_exp_examples() {
    for q in [0.3, 1.0, 2.0, 5.0] {
        assert_eq!(q_exp(0.0, q), 1.0);
    }
    assert_eq!(q_exp(-3.0, 0.5), 0.0);
    for q in [0.5, 0.999, 1.0, 1.5, 3.0] {
        for s in [0.2, 1.0, 4.0] {
            let back = q_exp(q_log(s, q).unwrap(), q);
            assert!(rel(back, s) < 1e-12, "q = {q}, s = {s}: {back}");
        }
    }
    // (s^{1-q} - 1)/(1-q) at q = 3, s = 2
    assert!((q_log(2.0, 3.0).unwrap() - (0.25 - 1.0) / -2.0).abs() < 1e-15);
    assert!(matches!(q_log(0.0, 2.0), Err(Error::Domain(_))));
}

#[test]
fn moments_of_uniforms() {
    let u = unit_interval(1.0, 257);
    for p in [0.5, 2.0, 3.5] {
        let m = e_p_moment(&u, p).unwrap();
        assert!((m.raw - 1.0).abs() < 1e-12);
        assert!((m.energy - 1.0 / (p - 1.0)).abs() < 1e-10);
    }
    let u = unit_interval(2.0, 257);
    let m = e_p_moment(&u, 2.0).unwrap();
    assert!((m.raw - 0.5).abs() < 1e-12 && (m.energy - 0.5).abs() < 1e-12);
    assert!(matches!(e_p_moment(&u, 1.0), Err(Error::LimitBranch(_))));
}

#[test]
fn gaussian_second_moment() {
    let m = power_moment(&std_gaussian(4097), 2.0).unwrap();
    assert!(rel(m, 1.0 / (2.0 * PI.sqrt())) < 1e-10, "{m}");
}

#[test]
fn renyi_of_uniforms_is_log_length() {
    for len in [1.0, 2.5, 7.0] {
        let u = unit_interval(len, 513);
        for p in [0.5, 1.0, 1.0 + 1e-12, 2.0, 3.0] {
            let r = renyi_entropy(&u, p).unwrap();
            assert!((r - len.ln()).abs() < 1e-10, "len {len} p {p}: {r}");
        }
    }
}

#[test]
fn renyi_of_gaussians() {
    // R_p = ln(2 pi sigma^2)/2 - ln p / (2 (1 - p)) in d = 1
    for sigma2 in [0.5, 1.0, 3.0] {
        let u = gaussian(sigma2, 1, 12.0 * sigma2.sqrt(), 4097).unwrap();
        for p in [0.7f64, 2.0, 3.0] {
            let exact = 0.5 * (2.0 * PI * sigma2).ln() - p.ln() / (2.0 * (1.0 - p));
            assert!((renyi_entropy(&u, p).unwrap() - exact).abs() < 1e-8);
        }
        let h = 0.5 * (2.0 * PI * E * sigma2).ln();
        assert!((renyi_entropy(&u, 1.0).unwrap() - h).abs() < 1e-8);
    }
    let r2 = renyi_entropy(&std_gaussian(4097), 2.0).unwrap();
    assert!((r2 - (2.0 * PI.sqrt()).ln()).abs() < 1e-8);
}

#[test]
fn shannon_entropy_of_radial_gaussians() {
    for d in [2, 3, 5] {
        let u = gaussian(1.0, d, 12.0, 4001).unwrap();
        let h = 0.5 * d as f64 * (2.0 * PI * E).ln();
        assert!((renyi_entropy(&u, 1.0).unwrap() - h).abs() < 1e-6, "d = {d}");
    }
}

#[test]
fn tsallis_and_sharma_mittal_coincide_on_the_diagonal() {
    for u in [std_gaussian(2049), bimodal(2049), uniform(3.0, 4.0, 801).unwrap()] {
        for p in [0.6, 1.5, 2.0, 3.0] {
            let o = Orders::diagonal(p, 1).unwrap();
            let s = sharma_mittal_entropy(&u, &o).unwrap();
            let m = power_moment(&u, p).unwrap();
            assert!((s - (m - 1.0) / (1.0 - p)).abs() < 1e-12 * s.abs().max(1.0));
            assert_eq!(s, tsallis_entropy(&u, p).unwrap());
        }
    }
}

#[test]
fn sharma_mittal_vanishes_on_the_unit_interval() {
    let u = unit_interval(1.0, 129);
    for (p, q) in [(0.5, 0.5), (2.0, 3.0), (3.0, 1.0), (1.0, 2.0)] {
        let o = Orders::new(p, q, 1).unwrap();
        assert!(sharma_mittal_entropy(&u, &o).unwrap().abs() < 1e-12);
        assert!((entropy_power(&u, &o).unwrap().n_pq - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sharma_mittal_two_routes_agree() {
    let u = std_gaussian(4097);
    let o = Orders::new(2.0, 3.0, 1).unwrap();
    let a = sharma_mittal_entropy(&u, &o).unwrap();
    let b = sharma_mittal_via_q_log(&u, &o).unwrap();
    assert!(rel(a, b) < 1e-12, "{a} {b}");
    // log_3(2 sqrt(pi)) in closed form
    let z = 2.0 * PI.sqrt();
    assert!(rel(a, (z.powf(-2.0) - 1.0) / -2.0) < 1e-8);
}

#[test]
fn named_entropy_powers_of_the_standard_gaussian() {
    let u = std_gaussian(4097);
    let b2 = entropy_power(&u, &Orders::new(2.0, 1.0, 1).unwrap()).unwrap();
    assert!(rel(b2.b_p, 4.0 * PI) < 1e-6);
    assert!(rel(b2.n_pq, 4.0 * PI) < 1e-6);
    let n = entropy_power(&u, &Orders::new(1.0, 1.0, 1).unwrap()).unwrap();
    assert!(rel(n.n_pq, 2.0 * PI * E) < 1e-6);
    assert!(rel(n.shannon.unwrap(), 2.0 * PI * E) < 1e-6);
}

#[test]
fn q_exponential_route_to_the_entropy_power() {
    for u in [std_gaussian(2049), bimodal(2049), uniform(2.0, 4.0, 801).unwrap()] {
        for (p, q) in [(2.0, 3.0), (0.7, 0.5), (1.5, 1.0), (3.0, 3.0), (1.2, 2.5)] {
            let pw = entropy_power(&u, &Orders::new(p, q, 1).unwrap()).unwrap();
            assert!(pw.q_exp_route_rel_dev < 1e-12, "({p}, {q}): {}", pw.q_exp_route_rel_dev);
        }
    }
}

#[test]
fn fisher_information_of_gaussians() {
    let i = fisher_information(&std_gaussian(4097), 1.0).unwrap();
    assert!(rel(i.value, 1.0) < 1e-4, "{}", i.value);
    let wide = gaussian(4.0, 1, 24.0, 4097).unwrap();
    assert!(rel(fisher_information(&wide, 1.0).unwrap().value, 0.25) < 1e-4);
    // 4 int x^2 phi^3 = 2 / (3 sqrt(3) pi)
    let i2 = fisher_information(&std_gaussian(4097), 2.0).unwrap();
    let exact = 2.0 / (3.0 * 3f64.sqrt() * PI);
    assert!(rel(i2.value, exact) < 1e-4, "{} vs {exact}", i2.value);
    assert!((exact - 0.1225).abs() < 1e-4);
    assert!(i2.rel_diff < 1e-4);
}

#[test]
fn fisher_information_guards() {
    let u = std_gaussian(4097);
    assert!(matches!(fisher_information(&u, 0.5), Err(Error::Domain(_))));
    let coarse = GridDensity::line(1.0, 5, |x| 1.0 - 0.5 * x * x).unwrap();
    assert!(matches!(fisher_information(&coarse, 2.0), Err(Error::GridTooCoarse { .. })));
}

#[test]
fn second_order_functional_of_gaussians() {
    let j = second_order_functional(&std_gaussian(4097), 1.0).unwrap().unwrap();
    assert!(rel(j, 2.0) < 1e-4, "{j}");
    for sigma2 in [0.5, 2.0] {
        let u = gaussian(sigma2, 1, 12.0 * sigma2.sqrt(), 4097).unwrap();
        let j = second_order_functional(&u, 1.0).unwrap().unwrap();
        assert!(rel(j, 2.0 / (sigma2 * sigma2)) < 1e-4);
    }
}

#[test]
fn second_order_functional_absent_on_thin_support() {
    let u = GridDensity::line(10.0, 201, |x| if x.abs() < 0.5 { 1.0 - 4.0 * x * x } else { 0.0 }).unwrap();
    assert_eq!(second_order_functional(&u, 2.0).unwrap(), None);
}

#[test]
fn key_inequality_statewise() {
    let c = |p: f64| 2.0 * (1.0 + p - 1.0);
    for u in [std_gaussian(4097), bimodal(4097), gaussian(0.3, 1, 6.0, 2049).unwrap()] {
        for p in [0.6, 1.0, 1.5, 2.0, 3.0] {
            let m = power_moment(&u, p).unwrap();
            let i = fisher_information(&u, p).unwrap().value;
            let j = second_order_functional(&u, p).unwrap().unwrap();
            let margin = j * m - c(p) * i * i;
            assert!(margin >= -1e-8 * (j * m).max(1.0), "p = {p}: margin {margin}");
            assert!(i >= 0.0 && j >= 0.0 && m > 0.0);
        }
    }
    // equality for Gaussians at p = 1
    let u = std_gaussian(4097);
    let i = fisher_information(&u, 1.0).unwrap().value;
    let j = second_order_functional(&u, 1.0).unwrap().unwrap();
    assert!(((j - 2.0 * i * i) / j).abs() < 1e-4);
}

#[test]
fn q_functional_matches_closed_form() {
    // exp(3 R_2) M_2^{-1} I_2 with R_2 = ln(2 sqrt(pi)), M_2 = 1/(2 sqrt(pi))
    let z = 2.0 * PI.sqrt();
    let i2 = 2.0 / (3.0 * 3f64.sqrt() * PI);
    let exact = z.powi(4) * i2;
    let o = Orders::diagonal(2.0, 1).unwrap();
    let u = std_gaussian(4097);
    let q = q_functional(&u, &o).unwrap();
    assert!(q > 0.0 && q.is_finite());
    assert!(rel(q, exact) < 1e-4, "{q} vs {exact}");
    // term by term on the same grid
    let terms = entropy_power(&u, &o).unwrap().n_pq
        * power_moment(&u, 2.0).unwrap().powf(-1.0)
        * fisher_information(&u, 2.0).unwrap().value;
    assert!(rel(q, terms) < 1e-12);
}

#[test]
fn dilation_preserves_mass_and_shifts_renyi() {
    for u in [std_gaussian(2049), uniform(2.0, 4.0, 801).unwrap(), gaussian(1.0, 3, 12.0, 1001).unwrap()] {
        let d = u.dim() as f64;
        assert_eq!(dilate(&u, 1.0).unwrap(), u);
        for lambda in [0.5, 2.0, 5.0] {
            let v = dilate(&u, lambda).unwrap();
            assert!((v.mass() - 1.0).abs() < 1e-10);
            for p in [0.7, 1.0, 2.0] {
                let shift = renyi_entropy(&v, p).unwrap() - renyi_entropy(&u, p).unwrap();
                assert!((shift + d * lambda.ln()).abs() < 1e-10, "lambda {lambda} p {p}");
            }
            let o = Orders::new(2.0, 1.0, u.dim()).unwrap();
            let (bu, bv) = (entropy_power(&u, &o).unwrap().b_p, entropy_power(&v, &o).unwrap().b_p);
            assert!(rel(bv, bu / (lambda * lambda)) < 1e-10);
        }
    }
    assert!(dilate(&std_gaussian(129), 0.0).is_err());
}

#[test]
fn dilation_invariance_of_q() {
    let u = gaussian(1.0, 1, 12.0, 4096).unwrap();
    for (p, q) in [(2.0, 3.0), (1.5, 0.5), (3.0, 1.0), (1.0, 2.0)] {
        let o = Orders::new(p, q, 1).unwrap();
        let base = q_functional(&u, &o).unwrap();
        for lambda in [0.5, 2.0, 5.0] {
            let v = q_functional(&dilate(&u, lambda).unwrap(), &o).unwrap();
            assert!(rel(v, base) < 1e-6, "({p}, {q}) lambda {lambda}");
        }
    }
}

#[test]
fn s_pq_unit_argument() {
    let o = Orders::diagonal(2.0, 1).unwrap();
    assert_eq!(s_pq_scalar(1.0, &o).unwrap(), 0.0);
    assert!(s_pq_scalar(-1.0, &o).is_err());
}

#[test]
fn functionals_converge_at_second_order() {
    // errors against closed forms drop by about 4 when h halves
    let exact_i2 = 2.0 / (3.0 * 3f64.sqrt() * PI);
    let err = |n: usize| {
        let u = gaussian(1.0, 1, 12.0, n).unwrap();
        (fisher_information(&u, 2.0).unwrap().value - exact_i2).abs()
    };
    let ratio = err(257) / err(513);
    assert!(ratio > 3.0 && ratio < 5.5, "I_2 ratio {ratio}");
    // J_2 = 16 int (x^2 - 1)^2 phi^4 = 11 sqrt(pi/2) / (4 pi^2); J_1 is exact on Gaussians
    let exact_j2 = 11.0 * (0.5 * PI).sqrt() / (4.0 * PI * PI);
    let err_j = |n: usize| {
        let u = gaussian(1.0, 1, 12.0, n).unwrap();
        (second_order_functional(&u, 2.0).unwrap().unwrap() - exact_j2).abs()
    };
    let ratio = err_j(257) / err_j(513);
    assert!(ratio > 3.0 && ratio < 5.5, "J_2 ratio {ratio}");
}
