use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::FunctionalSnapshot;
use crate::grid::GridDensity;
use crate::orders::Orders;

use super::spec::FlowSpec;

/// Time-step bookkeeping of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: usize,
    pub dt_first: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_mass_drift: f64,
}

impl Default for StepStats {
    fn default() -> Self {
        Self { steps: 0, dt_first: 0.0, dt_min: f64::INFINITY, dt_max: 0.0, max_mass_drift: 0.0 }
    }
}

impl StepStats {
    pub(crate) fn observe(&mut self, dt: f64) {
        if self.steps == 0 {
            self.dt_first = dt;
        }
        self.steps += 1;
        self.dt_min = self.dt_min.min(dt);
        self.dt_max = self.dt_max.max(dt);
    }
}

/// States and functionals of one flow at its snapshot times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: FlowSpec,
    pub orders: Orders,
    pub times: Vec<f64>,
    pub states: Vec<GridDensity>,
    pub snapshots: Vec<FunctionalSnapshot>,
    /// Internal time of the equivalent porous-medium flow, `dtau = A dt`.
    pub reparam_tau: Vec<f64>,
    pub stats: StepStats,
}

/// Header of the trajectory CSV.
pub const CSV_COLUMNS: [&str; 12] = ["t", "mass", "E_p", "R_p", "S_pq", "N_pq", "P_p", "B_p", "I_p", "J_p", "Q_pq", "tau"];

/// Shortest round-trip decimal representation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, f: impl Fn(&FunctionalSnapshot) -> f64) -> Vec<f64> {
        self.snapshots.iter().map(f).collect()
    }

    /// Writes one row per snapshot with the [`CSV_COLUMNS`] header; an
    /// absent `J_p` is an empty field.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for (s, tau) in self.snapshots.iter().zip(&self.reparam_tau) {
            let j = s.j_p.map(fmt_f64).unwrap_or_default();
            w.write_record([
                fmt_f64(s.t),
                fmt_f64(s.mass),
                fmt_f64(s.e_p),
                fmt_f64(s.r_p),
                fmt_f64(s.s_pq),
                fmt_f64(s.n_pq),
                fmt_f64(s.p_p),
                fmt_f64(s.b_p),
                fmt_f64(s.i_p),
                j,
                fmt_f64(s.q_pq),
                fmt_f64(*tau),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `(x, u)` rows of state `index`.
    pub fn write_state_csv<W: Write>(&self, index: usize, out: W) -> Result<()> {
        let state = self
            .states
            .get(index)
            .ok_or_else(|| Error::Io(format!("state index {index} out of range ({} states)", self.states.len())))?;
        write_density_csv(state, out)
    }

    /// Cubic Lagrange interpolation of the stored states at time `t`.
    ///
    /// Uses the four snapshots surrounding `t` (fewer near the ends).
    pub fn state_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.times.len();
        if n == 0 || t < self.times[0] - 1e-12 || t > self.times[n - 1] + 1e-12 {
            return Err(Error::Domain(format!("t = {t} outside the trajectory")));
        }
        let upper = self.times.partition_point(|&s| s < t).clamp(1, n - 1);
        let lo = upper.saturating_sub(2).min(n.saturating_sub(4));
        let hi = (lo + 4).min(n);
        let idx: Vec<usize> = (lo..hi).collect();
        let mut out = vec![0.0; self.states[0].len()];
        for &j in &idx {
            let mut l = 1.0;
            for &m in &idx {
                if m != j {
                    l *= (t - self.times[m]) / (self.times[j] - self.times[m]);
                }
            }
            for (o, v) in out.iter_mut().zip(self.states[j].values()) {
                *o += l * v;
            }
        }
        Ok(out)
    }
}

pub fn write_density_csv<W: Write>(u: &GridDensity, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "u"])?;
    for (x, v) in u.nodes().zip(u.values()) {
        w.write_record([fmt_f64(x), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}
