//! Frozen parameter sets for the published figures.
//!
//! Common settings: two users, m = 1, L = 2 with delays (0, 1), 2beta = 128,
//! distances 1:1:1 and (M_R, M_D) = (1, 1) unless a figure varies them.
//! Changing any value here means adding a new preset name instead.

use crate::channel::FadingProfile;
use crate::error::{Error, Result};
use crate::montecarlo::{ebn0_grid, Overlays};
use crate::system::{Protocol, SystemConfig, Topology};

/// One curve of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub config: SystemConfig,
    /// `false` for theory-only curves.
    pub simulate: bool,
    pub overlays: Overlays,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub grid: Vec<f64>,
    pub curves: Vec<Curve>,
}

const PRESETS: &[(&str, &str)] = &[
    ("fig6a", "NC, CC and CD with EF relaying"),
    ("fig6b", "NC, CC and CD with DF relaying"),
    ("fig7", "CD with EF and DF for m = 0.5, 0.8, 1, 2"),
    ("fig8", "CD/DF for several (M_R, M_D) pairs"),
    ("fig9", "CD/DF (2,2) with distances 1:1:1 and 1:0.8:0.4"),
    ("fig10", "CD/DF (2,2) with 2beta = 64, 128, 256"),
    ("fig11", "CD/DF exact curves for M_R = 1..6, M_D = 2"),
    ("fig12a", "NC exact and approximate BER for L = 2, 4, 8"),
    ("fig12b", "CD/EF (1,1) exact and approximate BER for L = 2, 4, 8"),
];

pub fn preset_names() -> impl Iterator<Item = (&'static str, &'static str)> {
    PRESETS.iter().copied()
}

fn base() -> SystemConfig {
    SystemConfig { users: 2, two_beta: 128, ..Default::default() }
}

fn cd(protocol: Protocol) -> SystemConfig {
    SystemConfig { topology: Topology::Cd, protocol, ..base() }
}

fn sim(label: impl Into<String>, config: SystemConfig) -> Curve {
    Curve { label: label.into(), config, simulate: true, overlays: Overlays { exact: true, approx: false } }
}

fn theory(label: impl Into<String>, config: SystemConfig, approx: bool) -> Curve {
    Curve { label: label.into(), config, simulate: false, overlays: Overlays { exact: true, approx } }
}

fn paths(l: usize) -> FadingProfile {
    FadingProfile::uniform(1.0, l).expect("valid path count")
}

pub fn preset(name: &str) -> Result<Preset> {
    let description = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}; see list-presets")))?;
    let grid = |start, stop| ebn0_grid(start, stop, 2.0).expect("static grid");
    let (grid, curves) = match name {
        "fig6a" | "fig6b" => {
            let p = if name == "fig6a" { Protocol::Ef } else { Protocol::Df };
            let curves = vec![
                sim("nc", SystemConfig { topology: Topology::Nc, ..base() }),
                sim("cc", SystemConfig { topology: Topology::Cc, protocol: p, ..base() }),
                sim("cd", cd(p)),
            ];
            (grid(0.0, 20.0), curves)
        }
        "fig7" => {
            let mut curves = Vec::new();
            for m in [0.5, 0.8, 1.0, 2.0] {
                for (tag, p) in [("ef", Protocol::Ef), ("df", Protocol::Df)] {
                    let fading = FadingProfile::uniform(m, 2).expect("valid m");
                    curves.push(sim(format!("{tag}_m{m}"), SystemConfig { fading, ..cd(p) }));
                }
            }
            (grid(0.0, 20.0), curves)
        }
        "fig8" => {
            let curves = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2)]
                .into_iter()
                .map(|(m_r, m_d)| sim(format!("mr{m_r}_md{m_d}"), SystemConfig { m_r, m_d, ..cd(Protocol::Df) }))
                .collect();
            (grid(0.0, 24.0), curves)
        }
        "fig9" => {
            let c = SystemConfig { m_r: 2, m_d: 2, ..cd(Protocol::Df) };
            let curves =
                vec![sim("d_1_1_1", c.clone()), sim("d_1_0.8_0.4", SystemConfig { d_sr: 0.8, d_rd: 0.4, ..c })];
            (grid(0.0, 20.0), curves)
        }
        "fig10" => {
            let curves = [64, 128, 256]
                .into_iter()
                .map(|two_beta| {
                    sim(format!("2b{two_beta}"), SystemConfig { two_beta, m_r: 2, m_d: 2, ..cd(Protocol::Df) })
                })
                .collect();
            (grid(0.0, 20.0), curves)
        }
        "fig11" => {
            let curves = (1..=6)
                .map(|m_r| theory(format!("mr{m_r}"), SystemConfig { m_r, m_d: 2, ..cd(Protocol::Df) }, false))
                .collect();
            (grid(0.0, 24.0), curves)
        }
        "fig12a" | "fig12b" => {
            let c = if name == "fig12a" { SystemConfig { topology: Topology::Nc, ..base() } } else { cd(Protocol::Ef) };
            let curves = [2, 4, 8]
                .into_iter()
                .map(|l| theory(format!("l{l}"), SystemConfig { fading: paths(l), ..c.clone() }, true))
                .collect();
            (grid(0.0, 30.0), curves)
        }
        _ => unreachable!("name checked against PRESETS"),
    };
    Ok(Preset { name: PRESETS.iter().find(|(n, _)| *n == name).expect("checked").0, description, grid, curves })
}
