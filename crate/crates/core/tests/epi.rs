use entropy_lab::epi::*;
use entropy_lab::flow::{gaussian, gaussian_pdf, uniform};
use entropy_lab::lab::{CheckKind, Tolerances};
use entropy_lab::{CheckId, Error, Geometry, GridDensity};

fn tol() -> Tolerances {
    Tolerances::default()
}

/// A unit-mass hat of half-width `width_nodes + 1` cells centered at 0.
fn hat(like: &GridDensity, width_nodes: usize) -> GridDensity {
    let h = like.spacing();
    let k = width_nodes as f64;
    let values: Vec<f64> = (0..=2 * width_nodes).map(|i| 1.0 - (i as f64 - k).abs() / (k + 1.0)).collect();
    GridDensity::new(Geometry::Line, -k * h, h, values).unwrap()
}

#[test]
fn gaussian_convolution() {
    let a = gaussian(1.0, 1, 12.0, 4096).unwrap();
    let b = gaussian(2.0, 1, 12.0, 4096).unwrap();
    let c = convolve(&a, &b).unwrap();
    assert_eq!(c.len(), 2 * 4096 - 1);
    assert!((c.normalization() - 1.0).abs() < 1e-8);
    assert!((c.mass() - 1.0).abs() < 1e-12);
    let err = c.l1_distance_to(|x| gaussian_pdf(x, 3.0, 1));
    assert!(err < 1e-4, "L1 error {err}");
}

#[test]
fn uniform_convolution_is_triangular() {
    let u = shift(&uniform(1.0, 2.0, 4001).unwrap(), 0.5).unwrap();
    let c = convolve(&u, &u).unwrap();
    let (i, peak) = c.values().iter().enumerate().fold((0, 0.0), |m, (i, &v)| if v > m.1 { (i, v) } else { m });
    assert!((c.node(i) - 1.0).abs() < 1e-12);
    assert!((peak - 1.0).abs() < 1e-3, "peak {peak}");
    let err = c.l1_distance_to(|x| (1.0 - (x - 1.0).abs()).max(0.0));
    assert!(err < 1e-3, "L1 error {err}");
}

#[test]
fn near_delta_is_an_identity() {
    let errs: Vec<f64> = [512, 1024]
        .iter()
        .map(|&n| {
            let u = gaussian(1.0, 1, 10.0, n).unwrap();
            let c = convolve(&u, &hat(&u, 1)).unwrap();
            c.l1_distance_to(|x| gaussian_pdf(x, 1.0, 1))
        })
        .collect();
    let ratio = errs[0] / errs[1];
    assert!(ratio > 3.5 && ratio < 4.5, "errors {errs:?}");
    // a single-node mass reproduces the values exactly
    let u = gaussian(1.0, 1, 10.0, 257).unwrap();
    let delta = GridDensity::new(Geometry::Line, 0.0, u.spacing(), vec![1.0, 0.0]).unwrap();
    let c = convolve(&u, &delta).unwrap();
    assert_eq!(c.origin(), u.origin());
    for (a, b) in c.values().iter().zip(u.values()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn direct_and_fft_agree() {
    let cases = [
        (gaussian(1.0, 1, 10.0, 1500).unwrap(), uniform(3.0, 10.0, 1500).unwrap()),
        (uniform(1.0, 10.0, 1025).unwrap(), uniform(7.0, 10.0, 1025).unwrap()),
    ];
    for (a, b) in cases {
        let x = convolve_with(&a, &b, ConvolutionMethod::Direct).unwrap();
        let y = convolve_with(&a, &b, ConvolutionMethod::Fft).unwrap();
        let scale = x.max_value();
        for (p, q) in x.values().iter().zip(y.values()) {
            assert!((p - q).abs() <= 1e-10 * scale);
        }
    }
}

#[test]
fn convolution_needs_matching_line_grids() {
    let a = gaussian(1.0, 1, 10.0, 256).unwrap();
    let b = gaussian(1.0, 1, 10.0, 257).unwrap();
    assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(_))));
    let r = gaussian(1.0, 3, 10.0, 256).unwrap();
    assert!(convolve(&r, &r).is_err());
}

#[test]
fn shannon_equality_for_gaussians() {
    for (s1, s2) in [(1.0, 1.0), (1.0, 2.5)] {
        let a = gaussian(s1, 1, 13.0, 2048).unwrap();
        let b = gaussian(s2, 1, 13.0, 2048).unwrap();
        let case = EpiCase::shannon(vec![a, b]).unwrap();
        let r = check_epi(&case, &tol()).unwrap();
        assert_eq!(r.check_id, CheckId::EpiShannon);
        assert!(r.pass);
        assert!(r.samples[0].score.abs() < 1e-3, "{}", r.summary());
    }
}

#[test]
fn shannon_strict_for_uniforms() {
    let u = uniform(2.0, 10.0, 2001).unwrap();
    let r = check_epi(&EpiCase::shannon(vec![u.clone(), u]).unwrap(), &tol()).unwrap();
    assert!(r.pass && r.samples[0].score > 0.1);
}

#[test]
fn sharma_mittal_at_the_threshold() {
    let g = gaussian(1.0, 1, 10.0, 2048).unwrap();
    let u = uniform(2.0, 10.0, 2048).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let alpha = 0.5 * (p + 1.0);
        for pair in [vec![g.clone(), u.clone()], vec![g.clone(), g.clone()], vec![u.clone(), u.clone()]] {
            let case = EpiCase::sharma_mittal(pair, p, alpha).unwrap();
            assert_eq!(case.orders.q(), p);
            let r = check_epi(&case, &tol()).unwrap();
            assert!(r.samples[0].score >= 0.0, "{}", r.summary());
            assert!(r.pass);
        }
    }
}

#[test]
fn bobkov_chistyakov_three_uniforms() {
    let u = uniform(1.0, 4.0, 4001).unwrap();
    let case = EpiCase::bobkov_chistyakov(vec![u.clone(), u.clone(), u.clone()], 2.0).unwrap();
    let (lhs, rhs) = case.sides().unwrap();
    // B_2 of a unit uniform is 1, so the bound is 3 * 2 / e
    assert!((rhs - 6.0 / std::f64::consts::E).abs() < 1e-2, "rhs {rhs}");
    let r = check_epi(&case, &tol()).unwrap();
    assert!(r.pass && lhs > rhs, "{}", r.summary());
    assert!(EpiCase::bobkov_chistyakov(vec![u.clone(), u.clone()], 2.0).is_err());
    assert!(EpiCase::bobkov_chistyakov(vec![u.clone(), u.clone(), u], 1.0).is_err());
}

#[test]
fn sharma_mittal_matches_the_alpha_power() {
    let g = gaussian(1.0, 1, 10.0, 1024).unwrap();
    let u = uniform(2.0, 10.0, 1024).unwrap();
    for p in [1.5, 2.0, 3.0] {
        for alpha in [0.5 * (p + 1.0), 0.5 * (p + 1.0) + 0.7] {
            let sm = EpiCase::sharma_mittal(vec![g.clone(), u.clone()], p, alpha).unwrap();
            let bm = EpiCase::bobkov_marsiglietti(vec![g.clone(), u.clone()], p, alpha).unwrap();
            let (a, b) = (sm.sides().unwrap(), bm.sides().unwrap());
            assert!(((a.0 - b.0) / b.0).abs() < 1e-12);
            assert!(((a.1 - b.1) / b.1).abs() < 1e-12);
        }
    }
}

#[test]
fn bobkov_marsiglietti_margin_is_continuous_in_alpha() {
    let g = gaussian(1.0, 1, 10.0, 1024).unwrap();
    let u = uniform(2.0, 10.0, 1024).unwrap();
    let p = 2.0;
    let a0 = 0.5 * (p + 1.0);
    let margins = |k: usize| -> Vec<f64> {
        (0..=k)
            .map(|i| {
                let alpha = a0 + 2.0 * i as f64 / k as f64;
                let (l, r) = EpiCase::bobkov_marsiglietti(vec![g.clone(), u.clone()], p, alpha).unwrap().sides().unwrap();
                l - r
            })
            .collect()
    };
    let jump = |m: &[f64]| m.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let (coarse, fine) = (margins(20), margins(40));
    assert!(coarse.iter().chain(&fine).all(|m| *m >= 0.0));
    let ratio = jump(&coarse) / jump(&fine);
    assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
    assert!(EpiCase::bobkov_marsiglietti(vec![g.clone(), u.clone()], p, a0 - 0.1).is_err());
}

#[test]
fn translation_invariance() {
    let g = gaussian(1.0, 1, 10.0, 1024).unwrap();
    let u = uniform(2.0, 10.0, 1024).unwrap();
    let moved = shift(&u, 3.7).unwrap();
    let cases: [fn(Vec<GridDensity>) -> EpiCase; 3] = [
        |s| EpiCase::shannon(s).unwrap(),
        |s| EpiCase::sharma_mittal(s, 2.0, 1.5).unwrap(),
        |s| EpiCase::bobkov_marsiglietti(s, 3.0, 2.5).unwrap(),
    ];
    for make in cases {
        let a = make(vec![g.clone(), u.clone()]);
        let b = make(vec![g.clone(), moved.clone()]);
        assert!(((a.power(&u).unwrap() - b.power(&moved).unwrap()) / a.power(&u).unwrap()).abs() < 1e-12);
        let (ra, rb) = (check_epi(&a, &tol()).unwrap(), check_epi(&b, &tol()).unwrap());
        let (ma, mb) = (ra.samples[0], rb.samples[0]);
        assert!(((ma.lhs - ma.rhs) - (mb.lhs - mb.rhs)).abs() < 1e-12 * ma.rhs);
    }
}

#[test]
fn exploratory_modes_make_no_claim() {
    let u = uniform(1.0, 4.0, 801).unwrap();
    let pair = EpiCase::bobkov_chistyakov_pair(vec![u.clone(), u.clone()], 2.0).unwrap();
    let r = check_epi(&pair, &tol()).unwrap();
    assert_eq!(r.kind, CheckKind::Exploratory);
    assert!(r.pass && r.note.is_some());
    assert!(r.summary().starts_with("INFO"));
    let sm = EpiCase::sharma_mittal_exploratory(vec![u.clone(), u], 2.0, 1.0).unwrap();
    assert!(sm.exploratory);
    let r = check_epi(&sm, &tol()).unwrap();
    assert_eq!(r.kind, CheckKind::Exploratory);
}

#[test]
fn epi_report_json() {
    let g = gaussian(1.0, 1, 10.0, 512).unwrap();
    let case = EpiCase::sharma_mittal(vec![g.clone(), g], 2.0, 1.5).unwrap();
    let r = check_epi(&case, &tol()).unwrap();
    let rep = EpiReport::new(&case, &r);
    let mut buf = Vec::new();
    rep.write_json(&mut buf).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    assert_eq!(v["variant"], "sharma_mittal");
    for key in ["p", "q", "alpha", "lhs", "rhs", "margin", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["margin"].as_f64().unwrap(), rep.lhs - rep.rhs);
}
