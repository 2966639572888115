//! Run configuration and its flat `key = value` text form.
//!
//! The canonical text lists set keys in sorted order, one per line, with
//! floats in shortest round-trip form. Parsing that text yields the same
//! config back.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::CliError;

pub const SUBCOMMANDS: [&str; 7] = ["orbit", "bifurcate", "lyapunov", "entropy", "entropy-grid", "corrdim", "reproduce"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    pub figure: Option<String>,
    pub k: Option<f64>,
    pub q: Option<f64>,
    pub q_min: Option<f64>,
    pub q_max: Option<f64>,
    pub q_steps: Option<usize>,
    pub k_min: Option<f64>,
    pub k_max: Option<f64>,
    pub k_steps: Option<usize>,
    pub phi0: Option<f64>,
    pub v0: Option<f64>,
    pub transient: Option<usize>,
    pub steps: Option<usize>,
    pub samples: Option<usize>,
    pub points: Option<usize>,
    pub pool_size: Option<usize>,
    pub n_max: Option<usize>,
    pub epsilons: Option<Vec<f64>>,
    pub stride: Option<usize>,
    pub stride_jitter: Option<usize>,
    pub seed: Option<u64>,
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub r_points: Option<usize>,
    pub fit_low: Option<f64>,
    pub fit_high: Option<f64>,
    pub metric: Option<String>,
    pub continuation: Option<bool>,
    pub wrap: Option<bool>,
    pub out: Option<String>,
    pub format: Option<String>,
    pub plot: Option<bool>,
}

fn float_list(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn parse<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`")))
}

pub fn parse_float_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',').map(|t| parse(key, t)).collect()
}

// one table drives both directions of the codec
macro_rules! keyed_fields {
    ($m:ident, $cfg:ident) => {
        $m!($cfg, "figure", figure, s);
        $m!($cfg, "k", k, v);
        $m!($cfg, "q", q, v);
        $m!($cfg, "q_min", q_min, v);
        $m!($cfg, "q_max", q_max, v);
        $m!($cfg, "q_steps", q_steps, v);
        $m!($cfg, "k_min", k_min, v);
        $m!($cfg, "k_max", k_max, v);
        $m!($cfg, "k_steps", k_steps, v);
        $m!($cfg, "phi0", phi0, v);
        $m!($cfg, "v0", v0, v);
        $m!($cfg, "transient", transient, v);
        $m!($cfg, "steps", steps, v);
        $m!($cfg, "samples", samples, v);
        $m!($cfg, "points", points, v);
        $m!($cfg, "pool_size", pool_size, v);
        $m!($cfg, "n_max", n_max, v);
        $m!($cfg, "epsilons", epsilons, list);
        $m!($cfg, "stride", stride, v);
        $m!($cfg, "stride_jitter", stride_jitter, v);
        $m!($cfg, "seed", seed, v);
        $m!($cfg, "r_min", r_min, v);
        $m!($cfg, "r_max", r_max, v);
        $m!($cfg, "r_points", r_points, v);
        $m!($cfg, "fit_low", fit_low, v);
        $m!($cfg, "fit_high", fit_high, v);
        $m!($cfg, "metric", metric, s);
        $m!($cfg, "continuation", continuation, v);
        $m!($cfg, "wrap", wrap, v);
        $m!($cfg, "out", out, s);
        $m!($cfg, "format", format, s);
        $m!($cfg, "plot", plot, v);
    };
}

impl RunConfig {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            ..Self::default()
        }
    }

    /// Set keys and their text values (without `subcommand`).
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        macro_rules! put {
            ($c:ident, $key:literal, $f:ident, s) => {
                if let Some(x) = &$c.$f {
                    m.insert($key.to_string(), x.clone());
                }
            };
            ($c:ident, $key:literal, $f:ident, list) => {
                if let Some(x) = &$c.$f {
                    m.insert($key.to_string(), float_list(x));
                }
            };
            ($c:ident, $key:literal, $f:ident, v) => {
                if let Some(x) = &$c.$f {
                    m.insert($key.to_string(), x.to_string());
                }
            };
        }
        keyed_fields!(put, self);
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("subcommand = {}\n", self.subcommand);
        for (k, v) in self.to_map() {
            writeln!(s, "{k} = {v}").unwrap();
        }
        s
    }

    /// Parses config text. Blank lines and lines starting with `#` or `;`
    /// are ignored; `[section]` headers are not supported.
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        if key == "subcommand" {
            self.subcommand = raw.to_string();
            return Ok(());
        }
        macro_rules! get {
            ($c:ident, $key:literal, $f:ident, s) => {
                if key == $key {
                    $c.$f = Some(raw.to_string());
                    return Ok(());
                }
            };
            ($c:ident, $key:literal, $f:ident, list) => {
                if key == $key {
                    $c.$f = Some(parse_float_list(key, raw)?);
                    return Ok(());
                }
            };
            ($c:ident, $key:literal, $f:ident, v) => {
                if key == $key {
                    $c.$f = Some(parse(key, raw)?);
                    return Ok(());
                }
            };
        }
        keyed_fields!(get, self);
        Err(CliError::Usage(format!("unknown config key `{key}`")))
    }

    /// Fills every unset key of `self` from `base`.
    pub fn layered_over(mut self, base: &RunConfig) -> Result<Self, CliError> {
        if !base.subcommand.is_empty() && base.subcommand != self.subcommand {
            return Err(CliError::Usage(format!(
                "config file is for `{}`, not `{}`",
                base.subcommand, self.subcommand
            )));
        }
        for (k, v) in base.to_map() {
            if !self.to_map().contains_key(&k) {
                self.set(&k, &v)?;
            }
        }
        Ok(self)
    }
}
