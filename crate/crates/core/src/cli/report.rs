//! Curve evaluation and CSV emission.

use std::io::Write;

use crate::error::Error;
use crate::montecarlo::{sweep, BerCurve, Overlays, StoppingRule};
use crate::system::SystemConfig;

pub const CSV_HEADER: &str = "ebn0_db,ber_sim,ci_low,ci_high,bits,errors,ber_exact,ber_approx";

/// A finished curve plus the diagnostics collected while computing it.
#[derive(Debug)]
pub struct CurveReport {
    pub curve: BerCurve,
    pub warnings: Vec<String>,
    /// Point-level failures; any entry makes the run fail.
    pub failures: Vec<String>,
}

pub fn run_curve(
    config: &SystemConfig,
    grid: &[f64],
    rule: Option<&StoppingRule>,
    seed: u64,
    overlays: Overlays,
) -> crate::Result<CurveReport> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let curve = sweep(config, &grid, rule, seed, overlays)?;
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    for p in &curve.points {
        if let Some(Err(e)) = &p.sim {
            failures.push(format!("Eb/N0 = {} dB: simulation failed: {e}", p.ebn0_db));
        }
        if let Some(Err(e)) = &p.exact {
            failures.push(format!("Eb/N0 = {} dB: exact BER failed: {e}", p.ebn0_db));
        }
        match &p.approx {
            Some(Err(Error::Unsupported(msg))) => {
                warnings.push(format!("Eb/N0 = {} dB: approximation unavailable: {msg}", p.ebn0_db))
            }
            Some(Err(e)) => failures.push(format!("Eb/N0 = {} dB: approximate BER failed: {e}", p.ebn0_db)),
            _ => {}
        }
    }
    Ok(CurveReport { curve, warnings, failures })
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the header and one row per point; absent values leave empty cells.
pub fn write_csv<W: Write>(out: &mut W, curve: &BerCurve) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in &curve.points {
        let sim = p.sim.as_ref().and_then(|r| r.as_ref().ok());
        let exact = p.exact.as_ref().and_then(|r| r.as_ref().ok());
        let approx = p.approx.as_ref().and_then(|r| r.as_ref().ok());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            p.ebn0_db,
            cell(sim.map(|s| s.ber)),
            cell(sim.map(|s| s.ci_low)),
            cell(sim.map(|s| s.ci_high)),
            cell(sim.map(|s| s.bits)),
            cell(sim.map(|s| s.errors)),
            cell(exact),
            cell(approx),
        )?;
    }
    Ok(())
}
