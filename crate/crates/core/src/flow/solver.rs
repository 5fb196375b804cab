//! Conservative finite-volume integration of `u_t = A(t) Delta u^p`.
//!
//! The update of node `i` is `(S_{i+1/2} F_{i+1/2} - S_{i-1/2} F_{i-1/2}) / V_i`
//! with `F_{i+1/2} = (g_{i+1} - g_i)/h`, `g = u^p`, face areas `S` and cell
//! volumes `V` equal to the grid's quadrature weights. Boundary faces carry
//! zero flux, so `sum_i V_i u_i` is conserved exactly by every step.

use crate::error::{Error, Result};
use crate::functionals::FunctionalSnapshot;
use crate::grid::{face_areas, GridDensity, FLOOR};
use crate::orders::Orders;

use super::spec::{DtPolicy, FlowKind, FlowSpec, TimeScheme};
use super::trajectory::{StepStats, Trajectory};

/// Values below `-NEGATIVE_TOL` after a step signal an unstable scheme.
pub const NEGATIVE_TOL: f64 = 1e-12;
/// Runs abort when the mass drifts further than this.
pub const MASS_LEAK_LIMIT: f64 = 1e-6;

/// Discrete conservative Laplacian of one grid.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    /// `S_{i+1/2} / h` for the `n - 1` interior faces.
    face: Vec<f64>,
    inv_volume: Vec<f64>,
    weights: Vec<f64>,
    dim: u32,
    h: f64,
}

impl DiffusionOperator {
    pub fn for_grid(u: &GridDensity) -> Self {
        let h = u.spacing();
        let face = face_areas(u.geometry(), h, u.len()).into_iter().map(|s| s / h).collect();
        let inv_volume = u.weights().iter().map(|w| 1.0 / w).collect();
        Self { face, inv_volume, weights: u.weights().to_vec(), dim: u.dim(), h }
    }

    pub fn len(&self) -> usize {
        self.inv_volume.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_volume.is_empty()
    }

    /// `out = Delta_h g`.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        let n = g.len();
        let mut left = 0.0;
        for i in 0..n {
            let right = if i + 1 < n { self.face[i] * (g[i + 1] - g[i]) } else { 0.0 };
            out[i] = (right - left) * self.inv_volume[i];
            left = right;
        }
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        self.weights.iter().zip(u).map(|(w, v)| w * v).sum()
    }

    /// `-sum w_i u_i log u_i`.
    pub fn shannon(&self, u: &[f64]) -> f64 {
        -self.weights.iter().zip(u).map(|(w, &v)| if v > 0.0 { w * v * v.ln() } else { 0.0 }).sum::<f64>()
    }

    /// Largest stable explicit step `h^2 / (2 d p max(u^{p-1}) A)`.
    pub fn stable_dt(&self, u: &[f64], p: f64, prefactor: f64) -> f64 {
        let diff = max_diffusivity(u, p);
        self.h * self.h / (2.0 * self.dim as f64 * p * diff * prefactor)
    }
}

/// `max_i u_i^{p-1}`; for `p < 1` this is attained at the smallest value.
fn max_diffusivity(u: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else if p > 1.0 {
        u.iter().copied().fold(0.0, f64::max).powf(p - 1.0)
    } else {
        u.iter().copied().fold(f64::INFINITY, f64::min).max(FLOOR).powf(p - 1.0)
    }
}

fn power(u: &[f64], p: f64, out: &mut [f64]) {
    if p == 1.0 {
        out.copy_from_slice(u);
    } else {
        for (o, v) in out.iter_mut().zip(u) {
            *o = v.powf(p);
        }
    }
}

/// Scratch buffers reused across steps.
#[derive(Debug, Clone)]
pub struct Workspace {
    g: Vec<f64>,
    rhs: Vec<f64>,
    c_prime: Vec<f64>,
}

impl Workspace {
    pub fn new(n: usize) -> Self {
        Self { g: vec![0.0; n], rhs: vec![0.0; n], c_prime: vec![0.0; n] }
    }
}

/// One forward Euler step of `u_t = A Delta u^p`.
///
/// Negative values down to `-NEGATIVE_TOL` are clipped to zero; anything
/// below is reported as an instability.
pub fn explicit_step(op: &DiffusionOperator, u: &mut [f64], p: f64, prefactor: f64, dt: f64, ws: &mut Workspace) -> Result<()> {
    power(u, p, &mut ws.g);
    explicit_update(op, u, prefactor, dt, ws)
}

// Forward Euler update with `ws.g = u^p` already filled in.
fn explicit_update(op: &DiffusionOperator, u: &mut [f64], prefactor: f64, dt: f64, ws: &mut Workspace) -> Result<()> {
    op.apply(&ws.g, &mut ws.rhs);
    let k = dt * prefactor;
    for (i, (v, r)) in u.iter_mut().zip(&ws.rhs).enumerate() {
        *v += k * r;
        if *v < 0.0 {
            if *v < -NEGATIVE_TOL {
                return Err(Error::Instability { t: f64::NAN, node: i, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// One linearly implicit step: `(I - dt A Delta_h D) u^{n+1} = u^n` with
/// `D = diag((u^n)^{p-1})`.
///
/// The matrix is an M-matrix whose columns are balanced by the quadrature
/// weights, so the step preserves positivity and mass.
pub fn implicit_step(op: &DiffusionOperator, u: &mut [f64], p: f64, prefactor: f64, dt: f64, ws: &mut Workspace) -> Result<()> {
    let n = u.len();
    let k = dt * prefactor;
    // diffusivity D_i stored in g
    for (d, v) in ws.g.iter_mut().zip(u.iter()) {
        *d = if p == 1.0 { 1.0 } else { v.max(FLOOR).powf(p - 1.0) };
    }
    // Thomas algorithm: sub a_i, diag b_i, super c_i.
    let d = &ws.g;
    let coef = |i: usize| -> (f64, f64, f64) {
        let fl = if i > 0 { op.face[i - 1] } else { 0.0 };
        let fr = if i + 1 < n { op.face[i] } else { 0.0 };
        let s = k * op.inv_volume[i];
        let a = if i > 0 { -s * fl * d[i - 1] } else { 0.0 };
        let c = if i + 1 < n { -s * fr * d[i + 1] } else { 0.0 };
        let b = 1.0 + s * (fl + fr) * d[i];
        (a, b, c)
    };
    let (_, b0, c0) = coef(0);
    ws.c_prime[0] = c0 / b0;
    ws.rhs[0] = u[0] / b0;
    for i in 1..n {
        let (a, b, c) = coef(i);
        let m = b - a * ws.c_prime[i - 1];
        if !(m.abs() > 0.0) || !m.is_finite() {
            return Err(Error::Solve(format!("zero pivot at node {i}")));
        }
        ws.c_prime[i] = c / m;
        ws.rhs[i] = (u[i] - a * ws.rhs[i - 1]) / m;
    }
    u[n - 1] = ws.rhs[n - 1];
    for i in (0..n - 1).rev() {
        u[i] = ws.rhs[i] - ws.c_prime[i] * u[i + 1];
    }
    for (i, v) in u.iter_mut().enumerate() {
        if *v < 0.0 || !v.is_finite() {
            if *v < -NEGATIVE_TOL || !v.is_finite() {
                return Err(Error::Instability { t: f64::NAN, node: i, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

/// Integrates the flow named by `spec.kind` from `u0`.
pub fn solve(u0: &GridDensity, spec: &FlowSpec) -> Result<Trajectory> {
    spec.validate()?;
    let orders = spec.kind.orders(u0.dim())?;
    check_grid(u0, spec)?;
    let p = orders.p();
    if p < 1.0 && u0.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidFlow("fast diffusion (p < 1) needs strictly positive initial data".into()));
    }

    let op = DiffusionOperator::for_grid(u0);
    let mut ws = Workspace::new(u0.len());
    let mut u = u0.values().to_vec();
    let mass0 = op.mass(&u);
    let times = spec.snapshot_times();

    let mut states = Vec::with_capacity(times.len());
    let mut snapshots = Vec::with_capacity(times.len());
    let mut tau_rec = Vec::with_capacity(times.len());
    let mut stats = StepStats::default();

    let mut t = spec.t_start;
    let mut tau = 0.0;
    record(u0.with_values(u.clone())?, &orders, t, &mut states, &mut snapshots)?;
    tau_rec.push(tau);

    for &target in &times[1..] {
        while target - t > 1e-13 * target.abs().max(1.0) {
            // ws.g = u^p serves both the prefactor and the explicit update
            power(&u, p, &mut ws.g);
            let prefactor = if orders.is_local_flow() {
                1.0
            } else if orders.p_is_one() {
                orders.flow_prefactor(1.0, op.shannon(&u))
            } else {
                orders.flow_prefactor(op.mass(&ws.g), f64::NAN)
            };
            let stable = op.stable_dt(&u, p, prefactor);
            let mut dt = match (spec.dt_policy, spec.scheme) {
                (DtPolicy::Fixed { dt }, TimeScheme::Explicit) => {
                    if dt > stable {
                        return Err(Error::Cfl { dt, max_dt: stable });
                    }
                    dt
                }
                (DtPolicy::Fixed { dt }, TimeScheme::LinearlyImplicit) => dt,
                (DtPolicy::Cfl { safety }, TimeScheme::Explicit) => safety * stable,
                (DtPolicy::Cfl { safety }, TimeScheme::LinearlyImplicit) => safety * stable * spec.implicit_dt_factor,
            };
            if let Some(cap) = spec.max_dt {
                dt = dt.min(cap);
            }
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::Cfl { dt, max_dt: stable });
            }
            let remaining = target - t;
            if dt >= remaining {
                dt = remaining;
            } else if remaining - dt < 1e-3 * dt {
                // avoid a sliver step before the snapshot
                dt = 0.5 * remaining;
            }
            let res = match spec.scheme {
                TimeScheme::Explicit => explicit_update(&op, &mut u, prefactor, dt, &mut ws),
                TimeScheme::LinearlyImplicit => implicit_step(&op, &mut u, p, prefactor, dt, &mut ws),
            };
            res.map_err(|e| match e {
                Error::Instability { node, value, .. } => Error::Instability { t, node, value },
                other => other,
            })?;
            stats.observe(dt);
            t = if dt == remaining { target } else { t + dt };
            tau += prefactor * dt;
        }
        let drift = (op.mass(&u) - mass0).abs();
        stats.max_mass_drift = stats.max_mass_drift.max(drift);
        if drift > MASS_LEAK_LIMIT {
            return Err(Error::MassLeak { t, leak: drift, limit: MASS_LEAK_LIMIT });
        }
        record(u0.with_values(u.clone())?, &orders, t, &mut states, &mut snapshots)?;
        tau_rec.push(tau);
    }

    Ok(Trajectory {
        spec: *spec,
        orders,
        times,
        states,
        snapshots,
        reparam_tau: tau_rec,
        stats,
    })
}

fn record(
    state: GridDensity,
    orders: &Orders,
    t: f64,
    states: &mut Vec<GridDensity>,
    snapshots: &mut Vec<FunctionalSnapshot>,
) -> Result<()> {
    snapshots.push(FunctionalSnapshot::compute(&state, orders, t)?);
    states.push(state);
    Ok(())
}

fn check_grid(u0: &GridDensity, spec: &FlowSpec) -> Result<()> {
    if u0.len() != spec.nodes {
        return Err(Error::GridMismatch(format!("initial data has {} nodes, spec asks for {}", u0.len(), spec.nodes)));
    }
    if (u0.extent() - spec.half_width).abs() > 1e-9 * spec.half_width {
        return Err(Error::GridMismatch(format!(
            "initial data extends to {}, spec asks for {}",
            u0.extent(),
            spec.half_width
        )));
    }
    Ok(())
}

/// Porous-medium flow `u_t = Delta u^p` (the heat equation at `p = 1`).
pub fn solve_pme(u0: &GridDensity, p: f64, spec: &FlowSpec) -> Result<Trajectory> {
    let kind = if p == 1.0 { FlowKind::Heat } else { FlowKind::PorousMedium { p } };
    solve(u0, &spec.with_kind(kind))
}

/// Sharma-Mittal flow `u_t = M_p^{(p-q)/(1-p)} Delta u^p`, prefactor frozen
/// at the start of each step. At `p = 1` the prefactor is its limit
/// `exp((1 - q) H)`, a time change of the heat flow.
pub fn solve_sm_flow(u0: &GridDensity, o: &Orders, spec: &FlowSpec) -> Result<Trajectory> {
    if o.d() != u0.dim() {
        return Err(Error::GridMismatch(format!("orders in d = {}, initial data in d = {}", o.d(), u0.dim())));
    }
    solve(u0, &spec.with_kind(FlowKind::SharmaMittal { p: o.p(), q: o.q() }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::reference::gaussian;
    use crate::flow::spec::SnapshotSpacing;

    #[test]
    fn operator_conserves_and_kills_constants() {
        for u in [gaussian(1.0, 1, 10.0, 101).unwrap(), gaussian(1.0, 3, 10.0, 101).unwrap()] {
            let op = DiffusionOperator::for_grid(&u);
            let mut out = vec![0.0; u.len()];
            op.apply(&vec![2.5; u.len()], &mut out);
            assert!(out.iter().all(|v| v.abs() < 1e-12));
            op.apply(u.values(), &mut out);
            assert!(op.mass(&out).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_is_second_order_laplacian() {
        // Delta r^2 = 2d away from the boundary
        for d in 1..=3u32 {
            let u = crate::grid::GridDensity::radial(d, 1.0, 101, |_| 1.0).unwrap();
            let op = DiffusionOperator::for_grid(&u);
            let g: Vec<f64> = u.nodes().map(|r| r * r).collect();
            let mut out = vec![0.0; u.len()];
            op.apply(&g, &mut out);
            for v in &out[..90] {
                assert!((v - 2.0 * d as f64).abs() < 1e-8, "d = {d}: {v}");
            }
        }
    }

    #[test]
    fn fixed_dt_above_cfl_is_rejected() {
        let u = gaussian(1.0, 1, 10.0, 257).unwrap();
        let spec = FlowSpec::new(FlowKind::Heat, 10.0, 257, 0.0, 0.1).with_dt(DtPolicy::Fixed { dt: 0.01 });
        match solve(&u, &spec) {
            Err(Error::Cfl { max_dt, .. }) => {
                let h = 20.0 / 256.0;
                assert!((max_dt - h * h / 2.0).abs() < 1e-15);
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let u = gaussian(1.0, 1, 10.0, 257).unwrap();
        assert!(solve(&u, &FlowSpec::new(FlowKind::Heat, 10.0, 256, 0.0, 0.1)).is_err());
        assert!(solve(&u, &FlowSpec::new(FlowKind::Heat, 12.0, 257, 0.0, 0.1)).is_err());
    }

    #[test]
    fn implicit_step_conserves_mass_and_positivity() {
        let u0 = gaussian(1.0, 1, 10.0, 257).unwrap();
        let op = DiffusionOperator::for_grid(&u0);
        let mut ws = Workspace::new(u0.len());
        let mut u = u0.values().to_vec();
        for _ in 0..20 {
            implicit_step(&op, &mut u, 0.6, 1.0, 0.05, &mut ws).unwrap();
        }
        assert!((op.mass(&u) - 1.0).abs() < 1e-12);
        assert!(u.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn fast_diffusion_needs_positive_data() {
        let u0 = crate::flow::reference::uniform(2.0, 10.0, 257).unwrap();
        let spec = FlowSpec::new(FlowKind::PorousMedium { p: 0.6 }, 10.0, 257, 0.0, 0.1)
            .with_snapshots(4, SnapshotSpacing::Uniform);
        assert!(matches!(solve(&u0, &spec), Err(Error::InvalidFlow(_))));
    }
}
