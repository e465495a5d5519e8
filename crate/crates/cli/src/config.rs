//! Layered run settings: preset, then config file, then command-line flags.

use std::path::{Path, PathBuf};

use kmshadow_core::{ChannelParams, ConstellationSpec, TruncationPolicy};
use serde::Deserialize;

use crate::preset::{self, Preset};
use crate::{CliError, Command};

pub const DEFAULT_TRIALS: usize = 1_000_000;
pub const PAPER_FIDELITY_TRIALS: usize = 10_000_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BINS: usize = 60;

/// SNR grid as written in a config file: a list, a range table, or the
/// same text syntax the `--snr-db` flag takes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridInput {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
    Text(String),
}

impl GridInput {
    /// Accepts `a:b:step` (inclusive), a comma list, or a single value.
    pub fn parse_text(text: &str) -> Result<Vec<f64>, CliError> {
        let bad = || CliError::Validation(format!("cannot parse SNR grid '{text}'"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            range_values(num(parts[0])?, num(parts[1])?, num(parts[2])?)
        } else {
            text.split(',').map(num).collect()
        }
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridInput::Values(v) => Ok(v.clone()),
            GridInput::Range { start, stop, step } => range_values(*start, *stop, *step),
            GridInput::Text(t) => Self::parse_text(t),
        }
    }
}

fn range_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Validation(format!(
            "SNR range {start}:{stop}:{step} needs step > 0 and stop >= start"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(CliError::Validation("SNR grid has more than 100000 points".into()));
    }
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Every knob a run accepts. All fields are optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub preset: Option<String>,
    pub kappa: Option<f64>,
    pub mu: Option<f64>,
    pub m: Option<f64>,
    pub rho: Option<f64>,
    pub branches: Option<usize>,
    pub snr_db: Option<GridInput>,
    pub constellation: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_terms: Option<usize>,
    pub bins: Option<usize>,
    pub iid: Option<bool>,
    pub paper_fidelity: Option<bool>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Fields set in `top` win.
    pub fn overlay(self, top: Settings) -> Settings {
        let base = self;
        overlay!(base, top; preset, kappa, mu, m, rho, branches, snr_db, constellation, trials,
            seed, tol, max_terms, bins, iid, paper_fidelity, threads, out)
    }

    pub fn from_toml_str(text: &str) -> Result<Settings, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source: Box::new(source),
        })
    }

    fn from_preset(p: &Preset) -> Settings {
        let g = p.snr_db;
        Settings {
            preset: Some(p.name.to_string()),
            kappa: Some(p.kappa),
            mu: Some(p.mu),
            m: Some(p.m),
            rho: Some(p.rho),
            branches: Some(p.branches),
            snr_db: Some(GridInput::Range { start: g.start, stop: g.stop, step: g.step }),
            constellation: p.constellation.map(str::to_string),
            ..Settings::default()
        }
    }

    /// Preset values underneath everything else, if any layer names one.
    pub fn with_preset_defaults(self) -> Result<(Settings, Option<&'static Preset>), CliError> {
        let Some(name) = self.preset.clone() else {
            return Ok((self, None));
        };
        let p = preset::find(&name).ok_or_else(|| {
            CliError::Validation(format!("unknown preset '{name}' (known: {})", preset::names().join(", ")))
        })?;
        Ok((Settings::from_preset(p).overlay(self), Some(p)))
    }
}

/// `bpsk`, `qpsk`, `<M>psk` or `<M>qam`, case-insensitive.
pub fn parse_constellation(name: &str) -> Result<ConstellationSpec, CliError> {
    let lower = name.trim().to_ascii_lowercase();
    let spec = match lower.as_str() {
        "bpsk" => ConstellationSpec::mpsk(2),
        "qpsk" => ConstellationSpec::mpsk(4),
        s => {
            let (digits, family) = if let Some(d) = s.strip_suffix("psk") {
                (d, "psk")
            } else if let Some(d) = s.strip_suffix("qam") {
                (d, "qam")
            } else {
                return Err(CliError::Validation(format!("unknown constellation '{name}'")));
            };
            let order: u32 = digits
                .trim_end_matches('-')
                .parse()
                .map_err(|_| CliError::Validation(format!("unknown constellation '{name}'")))?;
            if family == "psk" {
                ConstellationSpec::mpsk(order)
            } else {
                ConstellationSpec::mqam(order)
            }
        }
    };
    spec.map_err(|e| CliError::Validation(e.to_string()))
}

pub fn constellation_label(c: &ConstellationSpec) -> String {
    match c.family {
        kmshadow_core::ConstellationFamily::Mpsk => format!("{}-PSK", c.order),
        kmshadow_core::ConstellationFamily::Mqam => format!("{}-QAM", c.order),
    }
}

/// A validated run. `params` carries the average SNR of the first grid point.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: ChannelParams,
    pub rho: f64,
    pub constellation: Option<ConstellationSpec>,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub policy: TruncationPolicy,
    pub output_path: Option<PathBuf>,
    pub bins: usize,
    pub iid: bool,
    pub threads: Option<usize>,
    pub preset: Option<&'static Preset>,
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Validation(format!("missing --{name} (set it, or pick a --preset)")))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl RunConfig {
    pub fn resolve(command: Command, settings: Settings) -> Result<RunConfig, CliError> {
        let (s, preset) = settings.with_preset_defaults()?;
        let kappa = required(s.kappa, "kappa")?;
        let mu = required(s.mu, "mu")?;
        let m = required(s.m, "m")?;
        let branches = required(s.branches, "L")?;
        let iid = s.iid.unwrap_or(false);
        let rho = if iid { 0.0 } else { s.rho.unwrap_or(0.0) };

        let snr_grid_db = match &s.snr_db {
            Some(g) => g.values()?,
            None => vec![0.0],
        };
        if snr_grid_db.is_empty() {
            return Err(CliError::Validation("SNR grid is empty".into()));
        }
        if snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Validation("SNR grid values must be finite".into()));
        }
        if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation("SNR grid must be strictly increasing".into()));
        }
        if command == Command::Pdf && snr_grid_db.len() != 1 {
            return Err(CliError::Validation("pdf takes a single average SNR in --snr-db".into()));
        }

        let params = ChannelParams::exponential(branches, kappa, mu, m, db_to_linear(snr_grid_db[0]), rho)
            .map_err(|e| CliError::Validation(e.to_string()))?;

        let constellation = match command {
            Command::Ser | Command::Ber => {
                let name = s.constellation.as_deref().unwrap_or("qpsk");
                let c = parse_constellation(name)?;
                if command == Command::Ser && c.family != kmshadow_core::ConstellationFamily::Mpsk {
                    return Err(CliError::Validation(format!(
                        "ser needs an M-PSK constellation, got {}",
                        constellation_label(&c)
                    )));
                }
                Some(c)
            }
            _ => None,
        };

        let default_trials = if s.paper_fidelity.unwrap_or(false) {
            PAPER_FIDELITY_TRIALS
        } else {
            DEFAULT_TRIALS
        };
        let trials = s.trials.unwrap_or(default_trials);
        if trials == 0 {
            return Err(CliError::Validation("trials must be >= 1".into()));
        }

        let mut policy = TruncationPolicy::default();
        if let Some(tol) = s.tol {
            policy.rel_tol = tol;
        }
        if let Some(cap) = s.max_terms {
            policy.max_k = cap;
            policy.max_j = cap;
        }
        policy.validate().map_err(|e| CliError::Validation(e.to_string()))?;

        let bins = s.bins.unwrap_or(DEFAULT_BINS);
        if bins < 10 {
            return Err(CliError::Validation("bins must be >= 10".into()));
        }
        if s.threads == Some(0) {
            return Err(CliError::Validation("threads must be >= 1".into()));
        }

        Ok(RunConfig {
            command,
            params,
            rho,
            constellation,
            snr_grid_db,
            trials,
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            policy,
            output_path: s.out,
            bins,
            iid,
            threads: s.threads,
            preset,
        })
    }
}
