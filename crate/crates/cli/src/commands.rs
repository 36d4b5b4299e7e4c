use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spinnoise::chain::covariance_empirical;
use spinnoise::oracle::{crosscheck_model, CrosscheckOptions, CrosscheckReport, MAX_ORACLE_N};
use spinnoise::{
    break_even_spin_count, covariance_closed_form, BreakEven, ChainModel, ChannelSpec,
    InitialState, MeasurementKernel, Trajectory, ENGINE_VERSION,
};

use crate::config::{LoadedRun, RunFile};
use crate::output::{
    write_covariance, write_distribution, write_histograms, write_joint, write_json,
    write_trajectories, CovarianceRow,
};

/// Largest ensemble `oracle-check` accepts from the command line.
pub const ORACLE_CLI_MAX_N: usize = 8;

pub const SIGN_CONVENTION: &str = "E[m2 | m1] = m1 (1 - alpha - beta) + (N/2) (beta - alpha)";

/// Options shared by the commands that read a run file.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub postselect_m1: Option<i64>,
}

impl Common {
    fn prepare(&self, run: &mut LoadedRun) -> Result<PathBuf> {
        if let Some(seed) = self.seed {
            run.config.seed = seed;
            run.file.seed = seed;
        }
        let dir = self.out.clone().unwrap_or_else(|| run.output_dir());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

#[derive(Debug, Serialize)]
struct ClosedForm {
    applies: bool,
    exact: bool,
    note: &'static str,
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    engine: &'static str,
    engine_version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a RunFile,
    /// Kernel width as text so `inf` survives JSON.
    kernel_width: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lags: Option<&'a [usize]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    postselect_m1_doubled: Option<i64>,
    magnetization_units: &'static str,
    sign_convention: &'static str,
    closed_form: ClosedForm,
    files: Vec<String>,
}

fn closed_form_status(run: &LoadedRun) -> ClosedForm {
    let c = &run.config;
    match c.channel {
        ChannelSpec::CollectiveDepolarizing { .. } | ChannelSpec::EpsilonPolarizing { .. } => {
            let exact = c.width == 0.0
                && matches!(c.channel, ChannelSpec::CollectiveDepolarizing { .. })
                && c.initial == InitialState::Mixed;
            ClosedForm {
                applies: true,
                exact,
                note: if exact {
                    "N/4 (1-lambda)^k; exact for a projective kernel and maximally mixed start"
                } else {
                    "N/4 (1-lambda)^k + (eta_k - 1) E1^2; reference value, the exact column is authoritative"
                },
            }
        }
        _ => ClosedForm {
            applies: false,
            exact: false,
            note: "no closed form for product maps; covariances come from the exact sector chain",
        },
    }
}

fn meta<'a>(
    run: &'a LoadedRun,
    command: &'static str,
    lags: Option<&'a [usize]>,
    postselect: Option<i64>,
    files: Vec<String>,
) -> RunMeta<'a> {
    RunMeta {
        engine: "spinnoise",
        engine_version: ENGINE_VERSION,
        command,
        seed: run.config.seed,
        config: &run.file,
        kernel_width: run.config.width.to_string(),
        lags,
        postselect_m1_doubled: postselect,
        magnetization_units: "m_doubled columns hold 2m; covariances are in units of m^2",
        sign_convention: SIGN_CONVENTION,
        closed_form: closed_form_status(run),
        files,
    }
}

fn sample_all(model: &ChainModel, run: &LoadedRun, postselect: Option<i64>) -> Result<Vec<Trajectory>> {
    Ok(model.sample(
        run.config.seed,
        run.config.trajectories,
        run.config.steps,
        postselect,
    )?)
}

pub fn sample(mut run: LoadedRun, common: &Common) -> Result<PathBuf> {
    let dir = common.prepare(&mut run)?;
    if run.config.trajectories == 0 {
        bail!("trajectories must be positive for sample");
    }
    let model = ChainModel::new(&run.config)?;
    let trajectories = sample_all(&model, &run, common.postselect_m1)?;
    write_trajectories(&dir.join("trajectories.csv"), &trajectories)?;
    write_histograms(
        &dir.join("histograms.csv"),
        run.config.n,
        &trajectories,
        run.config.steps,
    )?;
    let files = vec!["trajectories.csv".into(), "histograms.csv".into()];
    write_json(
        &dir.join("run_meta.json"),
        &meta(&run, "sample", None, common.postselect_m1, files),
    )?;
    Ok(dir)
}

/// Monte Carlo covariance between steps 1 and `1 + lag`.
fn anchored_empirical(trajectories: &[Trajectory], lag: usize) -> Option<(f64, f64)> {
    let pairs: Vec<Trajectory> = trajectories
        .iter()
        .filter(|t| t.records.len() > lag)
        .map(|t| Trajectory {
            id: t.id,
            records: if lag == 0 {
                vec![t.records[0]]
            } else {
                vec![t.records[0], t.records[lag]]
            },
        })
        .collect();
    let est = covariance_empirical(&pairs, lag.min(1)).ok()?;
    Some((est.estimate, est.stderr))
}

fn covariance_rows(model: &ChainModel, run: &LoadedRun, lags: &[usize]) -> Result<Vec<CovarianceRow>> {
    let trajectories = if run.config.trajectories >= 2 {
        sample_all(model, run, None)?
    } else {
        Vec::new()
    };
    let first_mean = model.outcome_marginal(1)?.moments().mean;
    let lambda = run.config.channel.mixing_parts(run.config.n).map(|(l, _)| l);
    lags.iter()
        .map(|&lag| {
            let exact = if lag == 0 {
                model.outcome_marginal(1)?.moments().variance()
            } else {
                model.exact_joint(1 + lag, 1)?.covariance()
            };
            let closed_form = match lambda {
                Some(l) if lag > 0 => Some(covariance_closed_form(
                    run.config.n,
                    l,
                    lag as u32,
                    first_mean,
                )),
                _ => None,
            };
            Ok(CovarianceRow {
                lag,
                exact,
                closed_form,
                empirical: anchored_empirical(&trajectories, lag),
            })
        })
        .collect()
}

pub fn exact(mut run: LoadedRun, common: &Common, lags: &[usize]) -> Result<PathBuf> {
    let dir = common.prepare(&mut run)?;
    let model = ChainModel::new(&run.config)?;
    let mut files = vec!["distribution.csv".to_string()];
    write_distribution(&dir.join("distribution.csv"), &model.outcome_marginal(1)?)?;
    for &lag in lags.iter().filter(|&&k| k > 0) {
        let name = format!("joint_{lag}.csv");
        write_joint(&dir.join(&name), &model.exact_joint(1 + lag, 1)?)?;
        files.push(name);
    }
    if let Some(m1) = common.postselect_m1 {
        write_distribution(&dir.join("conditional.csv"), &model.conditional_next(m1)?)?;
        files.push("conditional.csv".into());
    }
    write_covariance(&dir.join("covariance.csv"), &covariance_rows(&model, &run, lags)?)?;
    files.push("covariance.csv".into());
    write_json(
        &dir.join("run_meta.json"),
        &meta(&run, "exact", Some(lags), common.postselect_m1, files),
    )?;
    Ok(dir)
}

pub fn covariance(mut run: LoadedRun, common: &Common, lags: &[usize]) -> Result<PathBuf> {
    let dir = common.prepare(&mut run)?;
    let model = ChainModel::new(&run.config)?;
    write_covariance(&dir.join("covariance.csv"), &covariance_rows(&model, &run, lags)?)?;
    write_json(
        &dir.join("run_meta.json"),
        &meta(&run, "covariance", Some(lags), None, vec!["covariance.csv".into()]),
    )?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct OracleSummary<'a> {
    n: usize,
    rounds: usize,
    tolerance: f64,
    passed: bool,
    max_total_variation: f64,
    max_posterior_deviation: f64,
    total_variation_by_round: &'a [f64],
    posterior_deviation_by_round: &'a [f64],
    branches: usize,
    pruned: usize,
    corrupted_kernel: bool,
}

/// Runs the dense cross-check; `Ok(false)` means the tolerance was exceeded.
pub fn oracle_check(
    mut run: LoadedRun,
    common: &Common,
    rounds: Option<usize>,
    tolerance: f64,
    corrupt_kernel: bool,
) -> Result<(bool, CrosscheckReport)> {
    let n = run.config.n;
    if n > ORACLE_CLI_MAX_N {
        bail!(
            "oracle-check refuses n = {n}: the dense simulator is limited to n <= {ORACLE_CLI_MAX_N} \
             here (hard limit {MAX_ORACLE_N})"
        );
    }
    let dir = common.prepare(&mut run)?;
    let mut model = ChainModel::new(&run.config)?;
    if corrupt_kernel {
        model = corrupted(&model)?;
    }
    let options = CrosscheckOptions {
        rounds: rounds.unwrap_or(run.config.steps.min(3)),
        tolerance,
        ..CrosscheckOptions::default()
    };
    let report = crosscheck_model(&run.config, &model, options)?;
    let passed = report.total_variation_passed();
    write_json(
        &dir.join("oracle_report.json"),
        &OracleSummary {
            n,
            rounds: report.rounds,
            tolerance,
            passed,
            max_total_variation: report.max_total_variation(),
            max_posterior_deviation: report.max_posterior_deviation(),
            total_variation_by_round: &report.total_variation_by_round,
            posterior_deviation_by_round: &report.posterior_deviation_by_round,
            branches: report.branches,
            pruned: report.pruned,
            corrupted_kernel: corrupt_kernel,
        },
    )?;
    Ok((passed, report))
}

/// Negative control: the sector model with its two lowest outcome rows swapped.
fn corrupted(model: &ChainModel) -> Result<ChainModel> {
    let mut matrix = model.kernel().matrix().clone();
    matrix.swap_rows(0, 1);
    let kernel = MeasurementKernel::from_matrix(model.n(), matrix)?;
    Ok(ChainModel::from_parts(
        kernel,
        model.transition().clone(),
        model.initial().clone(),
    )?)
}

#[derive(Debug, Serialize)]
struct KernelSummary {
    n: usize,
    kernel_width: String,
    passed: bool,
    max_column_deviation: f64,
    interior_bound_doubled: i64,
    interior_violations: Vec<String>,
    boundary_warnings: usize,
    max_asymmetry: f64,
}

pub fn validate_kernel(mut run: LoadedRun, common: &Common) -> Result<bool> {
    let dir = common.prepare(&mut run)?;
    let kernel = MeasurementKernel::gaussian(run.config.n, run.config.width)?;
    let report = kernel.validate()?;
    let summary = KernelSummary {
        n: run.config.n,
        kernel_width: run.config.width.to_string(),
        passed: report.passed(),
        max_column_deviation: report.max_column_deviation,
        interior_bound_doubled: report.interior_bound_doubled,
        interior_violations: report.interior_violations.iter().map(|v| format!("{v:?}")).collect(),
        boundary_warnings: report.boundary_warnings.len(),
        max_asymmetry: report.max_asymmetry,
    };
    write_json(&dir.join("kernel_validation.json"), &summary)?;
    Ok(summary.passed)
}

pub fn break_even(angle: f64, polarization: f64) -> Result<String> {
    Ok(match break_even_spin_count(angle, polarization)? {
        BreakEven::Finite(n) => n.to_string(),
        BreakEven::Unbounded => "unbounded".to_string(),
    })
}

/// `"1,2,4,8"` → `[1, 2, 4, 8]`.
pub fn parse_lags(text: &str) -> Result<Vec<usize>> {
    let lags: Vec<usize> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().with_context(|| format!("bad lag {s:?}")))
        .collect::<Result<_>>()?;
    if lags.is_empty() {
        bail!("no lags given");
    }
    Ok(lags)
}

pub fn load(path: &Path) -> Result<LoadedRun> {
    crate::config::load(path)
}
