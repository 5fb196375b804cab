//! Derivatives of sampled time series on nonuniform (e.g. geometric) grids,
//! from local polynomial fits through consecutive samples.

/// First and second derivative at an interior sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalDerivatives {
    pub index: usize,
    pub first: f64,
    pub second: f64,
    /// `t_i - t_{i-1}`.
    pub h_minus: f64,
    /// `t_{i+1} - t_i`.
    pub h_plus: f64,
}

impl LocalDerivatives {
    /// Second derivative scaled to a second difference, `f'' h_- h_+`; equals
    /// `f_{i+1} - 2 f_i + f_{i-1}` on uniform grids.
    pub fn second_difference(&self) -> f64 {
        self.second * self.h_minus * self.h_plus
    }

    /// First derivative scaled to a centered difference, `f' (h_- + h_+)`.
    pub fn first_difference(&self) -> f64 {
        self.first * (self.h_minus + self.h_plus)
    }
}

/// Quadratic-fit derivatives at every interior sample.
pub fn local_derivatives(times: &[f64], values: &[f64]) -> Vec<LocalDerivatives> {
    assert_eq!(times.len(), values.len());
    (1..times.len().saturating_sub(1))
        .map(|i| {
            let (h1, h2) = (times[i] - times[i - 1], times[i + 1] - times[i]);
            let (f0, f1, f2) = (values[i - 1], values[i], values[i + 1]);
            let first = -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
            let second = 2.0 * (f0 / (h1 * (h1 + h2)) - f1 / (h1 * h2) + f2 / (h2 * (h1 + h2)));
            LocalDerivatives { index: i, first, second, h_minus: h1, h_plus: h2 }
        })
        .collect()
}

/// Weights of the derivatives of orders `0..=m` at `z` for the interpolant
/// through `nodes` (Fornberg's recursion). `w[k][j]` multiplies `f(nodes[j])`.
pub fn fd_weights(z: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut w = vec![vec![0.0; n]; m + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mi = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mi).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mi).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// Derivatives in `t` at every interior sample with `t > origin`, from
/// polynomial fits in `s = ln(t - origin)` over windows of `width` samples
/// (chain rule back to `t`). Geometric sample times are uniform in `s`.
pub fn log_time_derivatives(times: &[f64], values: &[f64], origin: f64, width: usize) -> Vec<LocalDerivatives> {
    assert_eq!(times.len(), values.len());
    let first = times.iter().position(|&t| t > origin).unwrap_or(times.len());
    let s: Vec<f64> = times[first..].iter().map(|&t| (t - origin).ln()).collect();
    let v = &values[first..];
    let m = s.len();
    if m < width || width < 3 {
        return Vec::new();
    }
    (first.max(1)..times.len() - 1)
        .map(|i| {
            let j = i - first;
            let lo = j.saturating_sub(width / 2).min(m - width);
            let w = fd_weights(s[j], &s[lo..lo + width], 2);
            let dot = |k: usize| w[k].iter().zip(&v[lo..lo + width]).map(|(a, b)| a * b).sum::<f64>();
            let (ds, dss) = (dot(1), dot(2));
            let x = times[i] - origin;
            LocalDerivatives {
                index: i,
                first: ds / x,
                second: (dss - ds) / (x * x),
                h_minus: times[i] - times[i - 1],
                h_plus: times[i + 1] - times[i],
            }
        })
        .collect()
}
