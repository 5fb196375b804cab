use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::functionals::{dilate, dilation_functional, q_functional, FunctionalSnapshot};
use crate::grid::GridDensity;
use crate::orders::Orders;
use crate::timediff::{local_derivatives, log_time_derivatives, LocalDerivatives};

use super::report::{CheckId, CheckParams, CheckReport, Sample, Tolerances};

/// Fewest snapshots the trajectory checks accept.
pub const MIN_SNAPSHOTS: usize = 8;
const CONDITION_WINDOW: usize = 7;
const RATE_WINDOW: usize = 5;

fn params(traj: &Trajectory, o: &Orders) -> CheckParams {
    CheckParams {
        p: o.p(),
        q: o.q(),
        d: o.d(),
        n: traj.states.first().map_or(0, GridDensity::len),
        dt: Some(traj.stats.dt_first),
        regime: Some(o.regime()),
    }
}

fn require_snapshots(traj: &Trajectory) -> Result<()> {
    if traj.snapshots.len() < MIN_SNAPSHOTS {
        return Err(Error::TooFewSnapshots { have: traj.snapshots.len(), need: MIN_SNAPSHOTS });
    }
    Ok(())
}

/// Interior derivatives of a series, skipping samples within two initial
/// time steps of the start.
fn interior(traj: &Trajectory, values: &[f64]) -> Vec<LocalDerivatives> {
    skip_transient(traj, local_derivatives(&traj.times, values))
}

/// First derivatives from fits in log time, which follow the geometric
/// snapshot grid.
fn interior_rates(traj: &Trajectory, values: &[f64]) -> Vec<LocalDerivatives> {
    skip_transient(traj, log_time_derivatives(&traj.times, values, traj.times[0], RATE_WINDOW))
}

fn skip_transient(traj: &Trajectory, ds: Vec<LocalDerivatives>) -> Vec<LocalDerivatives> {
    let t0 = traj.times[0];
    let guard = 2.0 * traj.stats.dt_first;
    ds.into_iter()
        .filter(|d| traj.times[d.index] - t0 > guard)
        .collect()
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / rhs.abs()
}

/// `-dE_p/dt = A I_p` and `-dI_p/dt = A J_p` with `A = M_p^{(p-q)/(1-p)}`,
/// time derivatives from the snapshot series.
///
/// Reported as `ProdE_PME`/`ProdI_PME` when `q = p` (including the heat flow).
pub fn check_production_identities(traj: &Trajectory, o: &Orders, tol: &Tolerances) -> Result<(CheckReport, CheckReport)> {
    production(traj, o, |s| s.prefactor(o), tol)
}

/// Same as [`check_production_identities`] with the prefactor replaced by
/// `M_p^exponent`; a wrong exponent is a negative control.
pub fn check_production_identities_with_exponent(
    traj: &Trajectory,
    o: &Orders,
    exponent: f64,
    tol: &Tolerances,
) -> Result<(CheckReport, CheckReport)> {
    production(traj, o, |s| s.m_p.powf(exponent), tol)
}

fn production(
    traj: &Trajectory,
    o: &Orders,
    prefactor: impl Fn(&FunctionalSnapshot) -> f64,
    tol: &Tolerances,
) -> Result<(CheckReport, CheckReport)> {
    require_snapshots(traj)?;
    let pme = o.is_local_flow();
    let (id_e, id_i) = if pme { (CheckId::ProdEPme, CheckId::ProdIPme) } else { (CheckId::ProdE, CheckId::ProdI) };
    let snaps = &traj.snapshots;
    let e = traj.series(|s| s.e_p);
    let i = traj.series(|s| s.i_p);

    let mut e_samples = Vec::new();
    let mut i_samples = Vec::new();
    for de in interior_rates(traj, &e) {
        let s = &snaps[de.index];
        let a = prefactor(s);
        let lhs = -de.first;
        let rhs = a * s.i_p;
        e_samples.push(Sample { at: Some(s.t), lhs, rhs, score: rel(lhs, rhs) });
    }
    for di in interior_rates(traj, &i) {
        let s = &snaps[di.index];
        let Some(j) = s.j_p else { continue };
        let a = prefactor(s);
        let lhs = -di.first;
        let rhs = a * j;
        i_samples.push(Sample { at: Some(s.t), lhs, rhs, score: rel(lhs, rhs) });
    }
    if i_samples.is_empty() {
        return Err(Error::NotApplicable("J_p absent at every interior snapshot".into()));
    }
    let p = params(traj, o);
    Ok((
        CheckReport::identity(id_e, e_samples, tol.identity_rel, p),
        CheckReport::identity(id_i, i_samples, tol.identity_rel, p),
    ))
}

/// Direct and condition-based concavity verdicts of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityOutcome {
    /// Second differences of `N_{p,q}(t)`.
    pub direct: CheckReport,
    /// `-R_p'' - sigma_q (R_p')^2 >= 0` rescaled to the units of `direct`.
    pub condition: CheckReport,
    pub verdicts_agree: bool,
}

/// Concavity of `t -> N_{p,q}(u_t)` on the snapshot grid.
///
/// Scores are `-N'' h_- h_+ / max|N|` (direct) and
/// `sigma_q N (-R'' - sigma_q R'^2) h_- h_+ / max|N|` (condition); both must
/// stay above `-(concavity_abs + concavity_rel |N_i|/max|N|)`.
pub fn check_concavity(traj: &Trajectory, o: &Orders, tol: &Tolerances) -> Result<ConcavityOutcome> {
    require_snapshots(traj)?;
    let n = traj.series(|s| s.n_pq);
    let r = traj.series(|s| s.r_p);
    let scale = n.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sigma = o.sigma_q();
    let allowance = |i: usize| tol.concavity_abs + tol.concavity_rel * n[i].abs() / scale;

    // Each score is shifted so that the per-sample allowance becomes the
    // common tolerance `concavity_abs`.
    let mut direct = Vec::new();
    for d in interior(traj, &n) {
        let i = d.index;
        let score = -d.second_difference() / scale + (allowance(i) - tol.concavity_abs);
        direct.push(Sample { at: Some(traj.times[i]), lhs: d.second, rhs: 0.0, score });
    }
    let mut condition = Vec::new();
    // Near-affine N makes -R'' and sigma R'^2 nearly cancel; wide fits in
    // log time keep their truncation error below the concavity tolerance.
    for d in skip_transient(traj, log_time_derivatives(&traj.times, &r, traj.times[0], CONDITION_WINDOW)) {
        let i = d.index;
        let lhs = -d.second;
        let rhs = sigma * d.first * d.first;
        let score = sigma * n[i] * (lhs - rhs) * d.h_minus * d.h_plus / scale + (allowance(i) - tol.concavity_abs);
        condition.push(Sample { at: Some(traj.times[i]), lhs, rhs, score });
    }
    let p = params(traj, o);
    let direct = CheckReport::inequality(CheckId::ConcavityN, direct, tol.concavity_abs, p);
    let mut condition = CheckReport::inequality(CheckId::ConcavityCond, condition, tol.concavity_abs, p);
    if sigma <= 0.0 {
        condition = condition.with_note("sigma_q <= 0: the condition implies convexity of N_pq, not concavity");
    }
    let verdicts_agree = direct.pass == condition.pass;
    Ok(ConcavityOutcome { direct, condition, verdicts_agree })
}

/// `N(t)` affine along the heat flow: `|second difference| / |first difference|`
/// at every interior snapshot.
pub fn check_linear_heat(traj: &Trajectory, tol: &Tolerances) -> Result<CheckReport> {
    require_snapshots(traj)?;
    let o = traj.orders;
    if !o.p_is_one() || !o.q_is_one() {
        return Err(Error::NotApplicable("the affine entropy power holds for the heat flow only".into()));
    }
    let n = traj.series(|s| s.n_pq);
    let samples = interior(traj, &n)
        .into_iter()
        .map(|d| {
            let lhs = d.second_difference();
            let rhs = d.first_difference();
            Sample { at: Some(traj.times[d.index]), lhs, rhs, score: (lhs / rhs).abs() }
        })
        .collect();
    Ok(CheckReport::identity(CheckId::LinearHeatN, samples, tol.linear_heat, params(traj, &o)))
}

/// `J_p M_p - 2 (1/d + p - 1) I_p^2 >= 0` at each snapshot carrying `J_p`;
/// scores are margins relative to `J_p M_p`.
pub fn check_key_inequality(traj: &Trajectory, o: &Orders, tol: &Tolerances) -> Result<CheckReport> {
    let c = 2.0 * (1.0 / o.dim() + o.p() - 1.0);
    let samples: Vec<Sample> = traj
        .snapshots
        .iter()
        .filter_map(|s| {
            let j = s.j_p?;
            let lhs = j * s.m_p;
            let rhs = c * s.i_p * s.i_p;
            Some(Sample { at: Some(s.t), lhs, rhs, score: (lhs - rhs) / lhs.abs().max(f64::MIN_POSITIVE) })
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::NotApplicable("J_p absent at every snapshot".into()));
    }
    let mut report = CheckReport::inequality(CheckId::KeyIneq, samples, tol.inequality, params(traj, o));
    if !o.key_inequality_range() {
        report = report.with_note("p <= 1 - 1/d: outside the range where the inequality is claimed");
    }
    Ok(report)
}

/// Relative deviation of `Q_{p,q}(dilate(u, lambda))` from `Q_{p,q}(u)`.
pub fn check_dilation_invariance(u: &GridDensity, o: &Orders, lambdas: &[f64], tol: &Tolerances) -> Result<CheckReport> {
    check_dilation_invariance_with_sigma(u, o, lambdas, o.sigma_q(), tol)
}

/// Dilation check of `exp(sigma R_p) dR_p/dt`; only `sigma = sigma_q` is
/// invariant.
pub fn check_dilation_invariance_with_sigma(
    u: &GridDensity,
    o: &Orders,
    lambdas: &[f64],
    sigma: f64,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let base = if sigma == o.sigma_q() { q_functional(u, o)? } else { dilation_functional(u, o, sigma)? };
    let mut samples = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let v = dilate(u, lambda)?;
        let q = dilation_functional(&v, o, sigma)?;
        samples.push(Sample { at: Some(lambda), lhs: q, rhs: base, score: rel(q, base) });
    }
    let params = CheckParams { p: o.p(), q: o.q(), d: o.d(), n: u.len(), dt: None, regime: Some(o.regime()) };
    Ok(CheckReport::identity(CheckId::DilationQ, samples, tol.dilation_rel, params))
}
