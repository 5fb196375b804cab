//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use entropy_lab::flow::{MixtureComponent, SnapshotSpacing, TimeScheme};
use entropy_lab::lab::{linspace, Tolerances};
use entropy_lab::Orders;

/// Every key the configuration accepts.
pub const KEYS: &[&str] = &[
    "p",
    "q",
    "d",
    "n",
    "half_width",
    "t_start",
    "t_end",
    "snapshots",
    "spacing",
    "first_fraction",
    "scheme",
    "dt",
    "init",
    "sigma2",
    "t0",
    "width",
    "mixture",
    "components",
    "out",
    "seed",
    "variant",
    "alpha",
    "summands",
    "ps",
    "qs",
    "lambdas",
    "tol.identity_rel",
    "tol.inequality",
    "tol.concavity_abs",
    "tol.concavity_rel",
    "tol.dilation_rel",
    "tol.linear_heat",
    "tol.epi_rel",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    File { path: PathBuf, line: usize },
    Set,
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{}:{line}", path.display()),
            Origin::Set => f.write_str("--set"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

/// Raw values keyed by name; later assignments replace earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, (String, Origin)>,
}

impl RawConfig {
    pub fn parse_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut raw = Self::default();
        raw.merge_text(&text, path)?;
        Ok(raw)
    }

    pub fn merge_text(&mut self, text: &str, path: &Path) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let origin = Origin::File { path: path.to_path_buf(), line: i + 1 };
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError(format!("{origin}: expected `key = value`, got `{line}`")));
            };
            self.set(k.trim(), v.trim(), origin)?;
        }
        Ok(())
    }

    /// Applies one `KEY=VALUE` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError(format!("--set {assignment}: expected KEY=VALUE")));
        };
        self.set(k.trim(), v.trim(), Origin::Set)
    }

    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError(format!("{origin}: unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    /// Resolved `key = value` pairs in key order.
    pub fn entries(&self) -> BTreeMap<String, String> {
        self.values.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect()
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, origin)) => v
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("{origin}: key `{key}`: cannot parse `{v}`"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map_or(default, |(v, _)| v.as_str())
    }

    /// Error attributed to `key`.
    pub fn field_error(&self, key: &str, msg: impl fmt::Display) -> ConfigError {
        match self.values.get(key) {
            Some((_, origin)) => ConfigError(format!("{origin}: key `{key}`: {msg}")),
            None => ConfigError(format!("key `{key}`: {msg}")),
        }
    }

    fn list(&self, key: &str, default: &str) -> Result<Vec<f64>, ConfigError> {
        let text = self.str_or(key, default);
        parse_list(text).map_err(|e| self.field_error(key, e))
    }
}

/// `a, b, c` or `start:end:count`.
fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("cannot parse `{}`", s.trim()));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, k] = parts[..] else {
            return Err(format!("expected start:end:count, got `{text}`"));
        };
        let k: usize = k.trim().parse().map_err(|_| format!("cannot parse count `{}`", k.trim()))?;
        if k == 0 {
            return Err("count must be positive".into());
        }
        Ok(linspace(num(a)?, num(b)?, k))
    } else {
        let v = text.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Gaussian { sigma2: f64 },
    /// Barenblatt profile at its own time `t0`.
    Barenblatt { t0: f64 },
    Uniform { width: f64 },
    Mixture(Vec<MixtureComponent>),
    /// Components drawn from the seed.
    RandomMixture { components: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiVariantChoice {
    Shannon,
    BobkovMarsiglietti,
    SharmaMittal,
    SharmaMittalExploratory,
    BobkovChistyakov,
    BobkovChistyakovPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Summand {
    Gaussian { sigma2: f64 },
    Uniform { width: f64 },
}

/// Fully typed configuration of one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub d: u32,
    pub nodes: usize,
    pub half_width: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub spacing: SnapshotSpacing,
    /// `None` picks the scheme from `p`.
    pub scheme: Option<TimeScheme>,
    pub dt: Option<f64>,
    pub init: InitialData,
    pub out: PathBuf,
    pub seed: u64,
    pub variant: EpiVariantChoice,
    pub alpha: Option<f64>,
    pub summands: Vec<Summand>,
    pub ps: Vec<f64>,
    pub qs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub tolerances: Tolerances,
    /// Resolved raw values, echoed into the manifest.
    pub entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, ConfigError> {
        let d: u32 = raw.get_or("d", 1)?;
        let first_fraction = raw.get_or("first_fraction", 1e-3)?;
        let spacing = match raw.str_or("spacing", "geometric") {
            "geometric" => SnapshotSpacing::Geometric { first_fraction },
            "uniform" => SnapshotSpacing::Uniform,
            other => return Err(raw.field_error("spacing", format!("expected geometric or uniform, got `{other}`"))),
        };
        let scheme = match raw.str_or("scheme", "auto") {
            "auto" => None,
            "explicit" => Some(TimeScheme::Explicit),
            "implicit" => Some(TimeScheme::LinearlyImplicit),
            other => return Err(raw.field_error("scheme", format!("expected auto, explicit or implicit, got `{other}`"))),
        };
        let init = match raw.str_or("init", "gaussian") {
            "gaussian" => InitialData::Gaussian { sigma2: raw.get_or("sigma2", 1.0)? },
            "barenblatt" => InitialData::Barenblatt { t0: raw.get_or("t0", 1.0)? },
            "uniform" => InitialData::Uniform { width: raw.get_or("width", 2.0)? },
            "mixture" => match raw.values.get("mixture") {
                Some((text, _)) => InitialData::Mixture(parse_mixture(text).map_err(|e| raw.field_error("mixture", e))?),
                None => InitialData::RandomMixture { components: raw.get_or("components", 2)? },
            },
            other => {
                return Err(raw.field_error("init", format!("expected gaussian, barenblatt, uniform or mixture, got `{other}`")))
            }
        };
        let variant = match raw.str_or("variant", "sharma_mittal") {
            "shannon" => EpiVariantChoice::Shannon,
            "bobkov_marsiglietti" => EpiVariantChoice::BobkovMarsiglietti,
            "sharma_mittal" => EpiVariantChoice::SharmaMittal,
            "sharma_mittal_exploratory" => EpiVariantChoice::SharmaMittalExploratory,
            "bobkov_chistyakov" => EpiVariantChoice::BobkovChistyakov,
            "bobkov_chistyakov_pair" => EpiVariantChoice::BobkovChistyakovPair,
            other => return Err(raw.field_error("variant", format!("unknown EPI variant `{other}`"))),
        };
        let summands = parse_summands(raw.str_or("summands", "gaussian:1,uniform:2")).map_err(|e| raw.field_error("summands", e))?;
        let defaults = Tolerances::default();
        let tolerances = Tolerances {
            identity_rel: raw.get_or("tol.identity_rel", defaults.identity_rel)?,
            inequality: raw.get_or("tol.inequality", defaults.inequality)?,
            concavity_abs: raw.get_or("tol.concavity_abs", defaults.concavity_abs)?,
            concavity_rel: raw.get_or("tol.concavity_rel", defaults.concavity_rel)?,
            dilation_rel: raw.get_or("tol.dilation_rel", defaults.dilation_rel)?,
            linear_heat: raw.get_or("tol.linear_heat", defaults.linear_heat)?,
            epi_rel: raw.get_or("tol.epi_rel", defaults.epi_rel)?,
        };
        let cfg = Self {
            p: raw.get("p")?,
            q: raw.get("q")?,
            d,
            nodes: raw.get_or("n", 2048)?,
            half_width: raw.get_or("half_width", 10.0)?,
            t_start: raw.get_or("t_start", 0.0)?,
            t_end: raw.get_or("t_end", 1.0)?,
            snapshots: raw.get_or("snapshots", 64)?,
            spacing,
            scheme,
            dt: raw.get("dt")?,
            init,
            out: PathBuf::from(raw.str_or("out", "out")),
            seed: raw.get_or("seed", 0)?,
            variant,
            alpha: raw.get("alpha")?,
            summands,
            ps: raw.list("ps", "0.6:3:5")?,
            qs: raw.list("qs", "0.5:3:5")?,
            lambdas: raw.list("lambdas", "0.5,2,5")?,
            tolerances,
            entries: raw.entries(),
        };
        cfg.validate(raw)?;
        Ok(cfg)
    }

    fn validate(&self, raw: &RawConfig) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(raw.field_error(key, format!("must be positive, got {v}")))
            }
        };
        positive("half_width", self.half_width)?;
        if !(self.t_end > self.t_start) {
            return Err(raw.field_error("t_end", format!("must exceed t_start = {}", self.t_start)));
        }
        if let Some(dt) = self.dt {
            positive("dt", dt)?;
        }
        for &l in &self.lambdas {
            positive("lambdas", l)?;
        }
        if let Some(p) = self.p {
            // surfaces the order hypotheses with the offending key
            let q = self.q.unwrap_or(1.0);
            Orders::new(p, q, self.d).map_err(|e| {
                let key = if q <= 0.0 { "q" } else { "p" };
                raw.field_error(key, e)
            })?;
        } else if let Some(q) = self.q {
            Orders::new(2.0, q, self.d).map_err(|e| raw.field_error("q", e))?;
        }
        Ok(())
    }

    /// Orders from `p` and `q`, both required.
    pub fn orders(&self) -> Result<Orders, ConfigError> {
        let p = self.p.ok_or_else(|| ConfigError("missing required key `p`".into()))?;
        let q = self.q.ok_or_else(|| ConfigError("missing required key `q`".into()))?;
        Orders::new(p, q, self.d).map_err(|e| ConfigError(e.to_string()))
    }
}

/// `weight:mean:variance, ...`
fn parse_mixture(text: &str) -> Result<Vec<MixtureComponent>, String> {
    text.split(',')
        .map(|c| {
            let v: Vec<f64> = c
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|_| format!("cannot parse `{}`", x.trim())))
                .collect::<Result<_, _>>()?;
            let [weight, mean, variance] = v[..] else {
                return Err(format!("expected weight:mean:variance, got `{}`", c.trim()));
            };
            Ok(MixtureComponent { weight, mean, variance })
        })
        .collect()
}

/// `gaussian:VARIANCE` or `uniform:WIDTH`, comma separated.
fn parse_summands(text: &str) -> Result<Vec<Summand>, String> {
    text.split(',')
        .map(|s| {
            let (kind, arg) = s.trim().split_once(':').ok_or_else(|| format!("expected kind:parameter, got `{}`", s.trim()))?;
            let v: f64 = arg.trim().parse().map_err(|_| format!("cannot parse `{}`", arg.trim()))?;
            match kind.trim() {
                "gaussian" => Ok(Summand::Gaussian { sigma2: v }),
                "uniform" => Ok(Summand::Uniform { width: v }),
                other => Err(format!("unknown summand `{other}`")),
            }
        })
        .collect()
}
