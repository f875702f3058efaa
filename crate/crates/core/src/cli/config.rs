//! Flat `key = value` experiment files.
//!
//! Blank lines and lines starting with `#` are skipped; `[name]` lines only
//! group keys visually. Every key may appear once.

use std::collections::HashMap;

use crate::channel::FadingProfile;
use crate::error::{Error, Result};
use crate::montecarlo::{ebn0_grid, Overlays, StoppingRule};
use crate::system::{Protocol, SystemConfig, Topology};

pub const REQUIRED_KEYS: &[&str] = &["topology", "ebn0_start", "ebn0_stop"];

pub const KNOWN_KEYS: &[&str] = &[
    "topology",
    "protocol",
    "users",
    "m_r",
    "m_d",
    "d_sd",
    "d_sr",
    "d_rd",
    "m",
    "paths",
    "omegas",
    "delays",
    "two_beta",
    "ebn0_start",
    "ebn0_stop",
    "ebn0_step",
    "min_errors",
    "max_bits",
    "seed",
    "overlays",
];

/// Defaults applied to optional keys, as shown by `--help`.
pub const DEFAULTS_HELP: &str = "\
protocol=ef users=2 m_r=1 m_d=1 d_sd=1 d_sr=1 d_rd=1 m=1 paths=2 \
omegas=<equal, 1/paths> delays=0,1,..,paths-1 two_beta=128 ebn0_step=2 \
min_errors=100 max_bits=100000000 seed=1 overlays=exact";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub grid: Vec<f64>,
    pub rule: StoppingRule,
    pub seed: u64,
    pub overlays: Overlays,
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

struct Doc<'a> {
    entries: HashMap<&'a str, Entry<'a>>,
}

impl<'a> Doc<'a> {
    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line: e.line, msg: format!("{key}: expected {what}, got {:?}", e.value) }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|v| {
                    v.trim().parse().map_err(|_| Error::Parse {
                        line: e.line,
                        msg: format!("{key}: expected a comma-separated list of {what}, got {:?}", e.value),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn word(&self, key: &str) -> Option<(usize, String)> {
        self.entries.get(key).map(|e| (e.line, e.value.to_ascii_lowercase()))
    }

    /// Line to blame for a semantic error involving `keys`.
    fn line_of(&self, keys: &[&str]) -> usize {
        keys.iter().filter_map(|k| self.entries.get(k).map(|e| e.line)).max().unwrap_or(0)
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let mut entries = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') || (s.starts_with('[') && s.ends_with(']')) {
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return Err(Error::Parse { line, msg: format!("expected key = value, got {s:?}") });
        };
        let (k, v) = (k.trim(), v.trim());
        let Some(&key) = KNOWN_KEYS.iter().find(|&&known| known == k) else {
            return Err(Error::Parse { line, msg: format!("unknown key {k:?}") });
        };
        if entries.insert(key, Entry { line, value: v }).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key {key:?}") });
        }
    }
    let doc = Doc { entries };

    let missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !doc.entries.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(Error::Parse { line: 0, msg: format!("missing required keys: {}", missing.join(", ")) });
    }

    let (line, t) = doc.word("topology").expect("checked above");
    let topology = match t.as_str() {
        "nc" => Topology::Nc,
        "cc" => Topology::Cc,
        "cd" => Topology::Cd,
        _ => return Err(Error::Parse { line, msg: format!("topology must be nc, cc or cd, got {t:?}") }),
    };
    let protocol = match doc.word("protocol") {
        None => Protocol::Ef,
        Some((_, p)) if p == "ef" => Protocol::Ef,
        Some((_, p)) if p == "df" => Protocol::Df,
        Some((line, p)) => return Err(Error::Parse { line, msg: format!("protocol must be ef or df, got {p:?}") }),
    };

    let m: f64 = doc.parse("m", "a number")?.unwrap_or(1.0);
    let paths: usize = doc.parse("paths", "an integer")?.unwrap_or(2);
    let omegas = doc.list("omegas", "numbers")?.unwrap_or_else(|| vec![1.0 / paths.max(1) as f64; paths]);
    let delays = doc.list("delays", "integers")?.unwrap_or_else(|| (0..paths).collect());
    if omegas.len() != paths || delays.len() != paths {
        return Err(Error::Parse {
            line: doc.line_of(&["paths", "omegas", "delays"]),
            msg: format!("omegas and delays need {paths} entries each"),
        });
    }
    let fading = FadingProfile::new(m, omegas, delays)
        .map_err(|e| Error::Parse { line: doc.line_of(&["m", "paths", "omegas", "delays"]), msg: e.to_string() })?;

    let config = SystemConfig {
        topology,
        protocol,
        users: doc.parse("users", "an integer")?.unwrap_or(2),
        m_r: doc.parse("m_r", "an integer")?.unwrap_or(1),
        m_d: doc.parse("m_d", "an integer")?.unwrap_or(1),
        d_sd: doc.parse("d_sd", "a number")?.unwrap_or(1.0),
        d_sr: doc.parse("d_sr", "a number")?.unwrap_or(1.0),
        d_rd: doc.parse("d_rd", "a number")?.unwrap_or(1.0),
        fading,
        two_beta: doc.parse("two_beta", "an integer")?.unwrap_or(128),
        ..Default::default()
    };
    config.validate().map_err(|e| Error::Parse {
        line: doc.line_of(&["topology", "users", "m_r", "m_d", "d_sd", "d_sr", "d_rd", "two_beta", "delays"]),
        msg: e.to_string(),
    })?;

    let start: f64 = doc.parse("ebn0_start", "a number")?.expect("checked above");
    let stop: f64 = doc.parse("ebn0_stop", "a number")?.expect("checked above");
    let step: f64 = doc.parse("ebn0_step", "a number")?.unwrap_or(2.0);
    let grid = ebn0_grid(start, stop, step).map_err(|e| Error::Parse {
        line: doc.line_of(&["ebn0_start", "ebn0_stop", "ebn0_step"]),
        msg: e.to_string(),
    })?;

    let defaults = StoppingRule::default();
    let rule = StoppingRule {
        min_errors: doc.parse("min_errors", "an integer")?.unwrap_or(defaults.min_errors),
        max_bits: doc.parse::<f64>("max_bits", "a number")?.map_or(Ok(defaults.max_bits), |v| {
            if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                Ok(v as u64)
            } else {
                Err(Error::Parse {
                    line: doc.line_of(&["max_bits"]),
                    msg: format!("max_bits must be a whole number, got {v}"),
                })
            }
        })?,
        ..defaults
    };
    rule.validate(config.two_beta)
        .map_err(|e| Error::Parse { line: doc.line_of(&["min_errors", "max_bits"]), msg: e.to_string() })?;

    let overlays = match doc.word("overlays") {
        None => Overlays { exact: true, approx: false },
        Some((line, v)) => parse_overlays(&v).map_err(|msg| Error::Parse { line, msg })?,
    };

    Ok(ExperimentSpec { config, grid, rule, seed: doc.parse("seed", "an integer")?.unwrap_or(1), overlays })
}

fn parse_overlays(v: &str) -> std::result::Result<Overlays, String> {
    let mut o = Overlays::default();
    if v == "none" {
        return Ok(o);
    }
    for item in v.split(',').map(str::trim) {
        match item {
            "exact" => o.exact = true,
            "approx" => o.approx = true,
            _ => return Err(format!("overlays: expected none or a list of exact, approx; got {item:?}")),
        }
    }
    Ok(o)
}
