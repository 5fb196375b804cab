//! The five commands and their artifacts.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use entropy_lab::epi::{check_epi, EpiCase, EpiReport};
use entropy_lab::flow::{
    gaussian, mixture, solve, uniform, Barenblatt, DtPolicy, FlowKind, FlowSpec, MixtureComponent, TimeScheme, Trajectory,
};
use entropy_lab::functionals::{
    entropy_power, fisher_information, renyi_entropy, shannon_entropy, sharma_mittal_entropy, tsallis_entropy,
    FunctionalSnapshot,
};
use entropy_lab::lab::{
    check_dilation_invariance, check_linear_heat, check_pair, check_production_identities, CheckKind, CheckReport, SweepRow,
};
use entropy_lab::{Error, GridDensity, Orders};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, EpiVariantChoice, ExperimentConfig, InitialData, Summand};

/// Environment variable bounding the sweep's worker threads.
pub const THREADS_ENV: &str = "ENTROPY_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Flow,
    Concavity,
    Epi,
    Sweep,
    Functionals,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Concavity => "concavity",
            Command::Epi => "epi",
            Command::Sweep => "sweep",
            Command::Functionals => "functionals",
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(Error),
    Other(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Numerical(e) => write!(f, "numerical abort: {e}"),
            RunError::Other(e) => f.write_str(e),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            e if e.is_numerical_abort() => RunError::Numerical(e),
            Error::Io(msg) => RunError::Other(msg),
            // everything else traces back to an inadmissible setting
            e => RunError::Config(ConfigError(e.to_string())),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Other(e.to_string())
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 4,
            RunError::Other(_) => 1,
        }
    }
}

/// One executed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestCheck {
    pub check_id: String,
    pub p: f64,
    pub q: f64,
    pub pass: bool,
    /// Evaluated without a pass/fail claim; never fails the run.
    pub exploratory: bool,
    pub file: Option<String>,
}

/// A sweep row that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub p: f64,
    pub q: f64,
    pub error: String,
    pub numerical_abort: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub files: Vec<String>,
    pub checks: Vec<ManifestCheck>,
    pub errors: Vec<RowError>,
    pub pass: bool,
}

impl Manifest {
    fn new(command: Command, cfg: &ExperimentConfig) -> Self {
        // the output location is not part of the experiment
        let mut config = cfg.entries.clone();
        config.remove("out");
        Self {
            command: command.name().into(),
            seed: cfg.seed,
            config,
            files: Vec::new(),
            checks: Vec::new(),
            errors: Vec::new(),
            pass: true,
        }
    }

    fn record(&mut self, report: &CheckReport, exploratory: bool, file: Option<String>) {
        let exploratory = exploratory || report.kind == CheckKind::Exploratory;
        self.pass &= exploratory || report.pass;
        self.checks.push(ManifestCheck {
            check_id: report.check_id.name().into(),
            p: report.params.p,
            q: report.params.q,
            pass: report.pass,
            exploratory,
            file,
        });
    }

    /// Exit status: 0 when every claimed check passed, 4 when a sweep row
    /// aborted numerically, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| e.numerical_abort) {
            4
        } else if self.pass && self.errors.is_empty() {
            0
        } else {
            3
        }
    }
}

struct Output {
    dir: PathBuf,
    manifest: Manifest,
}

impl Output {
    fn create(dir: &Path, manifest: Manifest) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|e| RunError::Other(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), manifest })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), RunError>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(|e| RunError::Other(format!("{}: {e}", path.display())))?);
        f(&mut w)?;
        w.flush()?;
        self.manifest.files.push(name.into());
        Ok(())
    }

    fn report(&mut self, report: &CheckReport, exploratory: bool) -> Result<(), RunError> {
        let name = format!("checks/{}.json", report.check_id.name());
        self.write(&name, |w| Ok(report.write_json(w)?))?;
        println!("{}", report.summary());
        self.manifest.record(report, exploratory, Some(name));
        Ok(())
    }

    fn trajectory(&mut self, tr: &Trajectory) -> Result<(), RunError> {
        self.write("trajectory.csv", |w| Ok(tr.write_csv(w)?))
    }

    fn finish(mut self) -> Result<Manifest, RunError> {
        let manifest = self.manifest.clone();
        self.write("manifest.json", |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(|e| RunError::Other(e.to_string()))?;
            Ok(writeln!(w)?)
        })?;
        println!("manifest: {}", self.dir.join("manifest.json").display());
        Ok(self.manifest)
    }
}

pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Manifest, RunError> {
    let out = Output::create(&cfg.out, Manifest::new(command, cfg))?;
    match command {
        Command::Flow => flow(cfg, out),
        Command::Concavity => concavity(cfg, out),
        Command::Epi => epi(cfg, out),
        Command::Sweep => sweep(cfg, out),
        Command::Functionals => functionals(cfg, out),
    }
}

fn require_line(cfg: &ExperimentConfig, what: &str) -> Result<(), RunError> {
    if cfg.d != 1 {
        return Err(ConfigError(format!("{what} needs d = 1, got d = {}", cfg.d)).into());
    }
    Ok(())
}

fn random_components(seed: u64, count: usize, half_width: f64) -> Vec<MixtureComponent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let variance: f64 = rng.gen_range(0.25..1.0);
            let reach = (0.5 * (half_width - 8.0 * variance.sqrt())).max(0.0);
            let mean = if reach > 0.0 { rng.gen_range(-reach..reach) } else { 0.0 };
            MixtureComponent { weight: rng.gen_range(0.2..1.0), mean, variance }
        })
        .collect()
}

pub fn initial_density(cfg: &ExperimentConfig, o: &Orders) -> Result<GridDensity, RunError> {
    let (l, n) = (cfg.half_width, cfg.nodes);
    Ok(match &cfg.init {
        InitialData::Gaussian { sigma2 } => gaussian(*sigma2, cfg.d, l, n)?,
        InitialData::Barenblatt { t0 } => Barenblatt::new(o.p(), cfg.d, 1.0)?.on_grid(*t0, l, n)?,
        InitialData::Uniform { width } => {
            require_line(cfg, "uniform initial data")?;
            uniform(*width, l, n)?
        }
        InitialData::Mixture(c) => {
            require_line(cfg, "mixture initial data")?;
            mixture(c, l, n)?
        }
        InitialData::RandomMixture { components } => {
            require_line(cfg, "mixture initial data")?;
            mixture(&random_components(cfg.seed, *components, l), l, n)?
        }
    })
}

pub fn flow_spec(cfg: &ExperimentConfig, o: &Orders) -> FlowSpec {
    let (p, q) = (o.p(), o.q());
    let kind = if p == 1.0 && q == 1.0 { FlowKind::Heat } else { FlowKind::SharmaMittal { p, q } };
    let spec = FlowSpec::new(kind, cfg.half_width, cfg.nodes, cfg.t_start, cfg.t_end)
        .with_scheme(cfg.scheme.unwrap_or_else(|| TimeScheme::for_exponent(p)))
        .with_snapshots(cfg.snapshots, cfg.spacing);
    match cfg.dt {
        Some(dt) => spec.with_dt(DtPolicy::Fixed { dt }),
        None => spec,
    }
}

fn flow(cfg: &ExperimentConfig, mut out: Output) -> Result<Manifest, RunError> {
    let o = cfg.orders()?;
    let u0 = initial_density(cfg, &o)?;
    let tr = solve(&u0, &flow_spec(cfg, &o))?;
    out.trajectory(&tr)?;
    out.write("initial.csv", |w| Ok(tr.write_state_csv(0, w)?))?;
    out.write("final.csv", |w| Ok(tr.write_state_csv(tr.len() - 1, w)?))?;
    println!("{} snapshots, {} steps, max mass drift {:e}", tr.len(), tr.stats.steps, tr.stats.max_mass_drift);
    out.finish()
}

fn concavity(cfg: &ExperimentConfig, mut out: Output) -> Result<Manifest, RunError> {
    let o = cfg.orders()?;
    let u0 = initial_density(cfg, &o)?;
    let tol = &cfg.tolerances;
    let pair = check_pair(&u0, &flow_spec(cfg, &o), tol)?;
    out.trajectory(&pair.trajectory)?;
    out.report(&pair.concavity.direct, false)?;
    out.report(&pair.concavity.condition, false)?;
    if let Some(k) = &pair.key {
        out.report(k, !o.key_inequality_range())?;
    }
    match check_production_identities(&pair.trajectory, &o, tol) {
        Ok((e, i)) => {
            out.report(&e, false)?;
            out.report(&i, false)?;
        }
        Err(Error::NotApplicable(_)) => {}
        Err(e) => return Err(e.into()),
    }
    if o.p_is_one() && o.q_is_one() {
        out.report(&check_linear_heat(&pair.trajectory, tol)?, false)?;
    }
    out.report(&check_dilation_invariance(&u0, &o, &cfg.lambdas, tol)?, false)?;
    out.finish()
}

fn summand(cfg: &ExperimentConfig, s: &Summand) -> Result<GridDensity, RunError> {
    Ok(match *s {
        Summand::Gaussian { sigma2 } => gaussian(sigma2, 1, cfg.half_width, cfg.nodes)?,
        Summand::Uniform { width } => uniform(width, cfg.half_width, cfg.nodes)?,
    })
}

fn epi(cfg: &ExperimentConfig, mut out: Output) -> Result<Manifest, RunError> {
    require_line(cfg, "the EPI checks")?;
    let summands = cfg.summands.iter().map(|s| summand(cfg, s)).collect::<Result<Vec<_>, _>>()?;
    let p = || cfg.p.ok_or_else(|| ConfigError("missing required key `p`".into()));
    let alpha = |p: f64| cfg.alpha.unwrap_or(0.5 * (p + 1.0));
    let case = match cfg.variant {
        EpiVariantChoice::Shannon => EpiCase::shannon(summands)?,
        EpiVariantChoice::BobkovMarsiglietti => EpiCase::bobkov_marsiglietti(summands, p()?, alpha(p()?))?,
        EpiVariantChoice::SharmaMittal => EpiCase::sharma_mittal(summands, p()?, alpha(p()?))?,
        EpiVariantChoice::SharmaMittalExploratory => {
            let q = cfg.q.ok_or_else(|| ConfigError("missing required key `q`".into()))?;
            EpiCase::sharma_mittal_exploratory(summands, p()?, q)?
        }
        EpiVariantChoice::BobkovChistyakov => EpiCase::bobkov_chistyakov(summands, p()?)?,
        EpiVariantChoice::BobkovChistyakovPair => EpiCase::bobkov_chistyakov_pair(summands, p()?)?,
    };
    let report = check_epi(&case, &cfg.tolerances)?;
    let record = EpiReport::new(&case, &report);
    out.write("epi.json", |w| Ok(record.write_json(w)?))?;
    out.report(&report, case.exploratory)?;
    out.finish()
}

fn thread_count() -> Result<Option<usize>, RunError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError(format!("{THREADS_ENV} must be a positive integer, got `{v}`")).into()),
        },
    }
}

fn sweep_row(cfg: &ExperimentConfig, p: f64, q: f64) -> Result<(SweepRow, Vec<CheckReport>), RunError> {
    let o = Orders::new(p, q, cfg.d)?;
    let u0 = initial_density(cfg, &o)?;
    let pair = check_pair(&u0, &flow_spec(cfg, &o), &cfg.tolerances)?;
    let mut reports = vec![pair.concavity.direct, pair.concavity.condition];
    reports.extend(pair.key);
    Ok((pair.row, reports))
}

fn sweep(cfg: &ExperimentConfig, mut out: Output) -> Result<Manifest, RunError> {
    let pairs: Vec<(f64, f64)> = cfg.ps.iter().flat_map(|&p| cfg.qs.iter().map(move |&q| (p, q))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| RunError::Other(e.to_string()))?;
    let rows: Vec<_> = pool.install(|| pairs.par_iter().map(|&(p, q)| sweep_row(cfg, p, q)).collect());

    let mut header: Vec<&str> = SweepRow::CSV_HEADER.to_vec();
    header.push("error");
    let mut records = Vec::with_capacity(rows.len());
    for (&(p, q), row) in pairs.iter().zip(rows) {
        match row {
            Ok((row, reports)) => {
                let mut rec = row.csv_record();
                rec.push(String::new());
                records.push(rec);
                for r in &reports {
                    let exploratory = r.check_id == entropy_lab::CheckId::KeyIneq && r.note.is_some();
                    println!("{}", r.summary());
                    out.manifest.record(r, exploratory, None);
                }
            }
            Err(e) => {
                println!("ERROR p={p} q={q} {e}");
                let mut rec = vec![String::new(); header.len()];
                rec[0] = entropy_lab::flow::fmt_f64(p);
                rec[1] = entropy_lab::flow::fmt_f64(q);
                rec[2] = cfg.d.to_string();
                rec[header.len() - 1] = e.to_string();
                records.push(rec);
                out.manifest.errors.push(RowError {
                    p,
                    q,
                    error: e.to_string(),
                    numerical_abort: matches!(e, RunError::Numerical(_)),
                });
            }
        }
    }
    out.write("sweep.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&header).map_err(|e| RunError::Other(e.to_string()))?;
        for r in &records {
            csv.write_record(r).map_err(|e| RunError::Other(e.to_string()))?;
        }
        Ok(csv.flush()?)
    })?;
    out.finish()
}

#[derive(Serialize)]
struct Functionals {
    p: f64,
    q: f64,
    d: u32,
    n: usize,
    sigma_q: f64,
    shannon_entropy: f64,
    renyi_entropy: f64,
    tsallis_entropy: f64,
    sharma_mittal_entropy: f64,
    n_pq: f64,
    p_p: f64,
    b_p: f64,
    shannon_entropy_power: Option<f64>,
    fisher_chain_form: f64,
    fisher_rel_diff: f64,
    snapshot: FunctionalSnapshot,
}

fn functionals(cfg: &ExperimentConfig, mut out: Output) -> Result<Manifest, RunError> {
    let o = cfg.orders()?;
    let u = initial_density(cfg, &o)?;
    let p = o.p();
    let powers = entropy_power(&u, &o)?;
    let fisher = fisher_information(&u, p)?;
    let record = Functionals {
        p,
        q: o.q(),
        d: o.d(),
        n: u.len(),
        sigma_q: o.sigma_q(),
        shannon_entropy: shannon_entropy(&u),
        renyi_entropy: renyi_entropy(&u, p)?,
        tsallis_entropy: tsallis_entropy(&u, p)?,
        sharma_mittal_entropy: sharma_mittal_entropy(&u, &o)?,
        n_pq: powers.n_pq,
        p_p: powers.p_p,
        b_p: powers.b_p,
        shannon_entropy_power: powers.shannon,
        fisher_chain_form: fisher.chain_form,
        fisher_rel_diff: fisher.rel_diff,
        snapshot: FunctionalSnapshot::compute(&u, &o, cfg.t_start)?,
    };
    out.write("functionals.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &record).map_err(|e| RunError::Other(e.to_string()))?;
        Ok(writeln!(w)?)
    })?;
    out.write("initial.csv", |w| Ok(entropy_lab::flow::write_density_csv(&u, w)?))?;
    println!(
        "R_p={} S_pq={} N_pq={} I_p={} J_p={}",
        record.renyi_entropy,
        record.sharma_mittal_entropy,
        record.n_pq,
        record.snapshot.i_p,
        record.snapshot.j_p.map_or("absent".to_string(), |j| j.to_string())
    );
    out.finish()
}
