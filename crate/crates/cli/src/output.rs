//! CSV and JSON artifacts. Keys are doubled magnetizations, so every file
//! joins losslessly for odd `N`; floats use Rust's shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spinnoise::chain::empirical_distribution;
use spinnoise::{JointDistribution, SectorDistribution, Trajectory};

/// Largest accepted deviation of a written distribution's mass from one.
pub const MASS_TOLERANCE: f64 = 1e-9;

fn check_mass(what: &str, probs: impl Iterator<Item = f64>) -> Result<()> {
    let total: f64 = probs.sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        bail!("{what}: probabilities sum to {total}; refusing to write");
    }
    Ok(())
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn write_trajectories(path: &Path, trajectories: &[Trajectory]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["trajectory_id", "step", "m_doubled"])?;
    for t in trajectories {
        for r in &t.records {
            w.write_record([
                t.id.to_string(),
                r.step.to_string(),
                r.outcome_doubled.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-step empirical histograms: `step, m_doubled, count, probability`.
pub fn write_histograms(path: &Path, n: usize, trajectories: &[Trajectory], steps: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "m_doubled", "count", "probability"])?;
    let total = trajectories.len() as f64;
    for step in 1..=steps {
        let hist = empirical_distribution(n, trajectories, step)?;
        check_mass(&format!("histogram at step {step}"), hist.probs().iter().copied())?;
        for (d, p) in hist.iter_doubled() {
            let count = (p * total).round() as u64;
            w.write_record([step.to_string(), d.to_string(), count.to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_distribution(path: &Path, q: &SectorDistribution) -> Result<()> {
    check_mass(&path.display().to_string(), q.probs().iter().copied())?;
    let mut w = writer(path)?;
    w.write_record(["m_doubled", "probability"])?;
    for (d, p) in q.iter_doubled() {
        w.write_record([d.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `m_i_doubled` is the later outcome, `m_j_doubled` the earlier one.
pub fn write_joint(path: &Path, joint: &JointDistribution) -> Result<()> {
    check_mass(&path.display().to_string(), joint.matrix().iter().copied())?;
    let n = joint.n() as i64;
    let mut w = writer(path)?;
    w.write_record(["m_i_doubled", "m_j_doubled", "probability"])?;
    for i in 0..=joint.n() {
        for j in 0..=joint.n() {
            w.write_record([
                (2 * i as i64 - n).to_string(),
                (2 * j as i64 - n).to_string(),
                joint.matrix()[(i, j)].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceRow {
    pub lag: usize,
    pub exact: f64,
    pub closed_form: Option<f64>,
    /// Estimate and standard error.
    pub empirical: Option<(f64, f64)>,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_covariance(path: &Path, rows: &[CovarianceRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["lag", "r_exact", "r_closed_form", "r_empirical", "stderr"])?;
    for r in rows {
        w.write_record([
            r.lag.to_string(),
            r.exact.to_string(),
            cell(r.closed_form),
            cell(r.empirical.map(|e| e.0)),
            cell(r.empirical.map(|e| e.1)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}
