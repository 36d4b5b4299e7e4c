//! Run files: TOML documents describing one measurement chain.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use spinnoise::channels::lambda_from_interval;
use spinnoise::oracle::C64;
use spinnoise::{ChannelSpec, InitialState, RunConfig, SectorDistribution};

/// Tolerance on the total mass of distributions read from disk.
pub const FILE_MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub n: usize,
    pub kernel: KernelSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub steps: usize,
    #[serde(default)]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSection {
    Strong,
    /// `w = inf` selects the uniform kernel.
    Gaussian { w: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(rename = "type")]
    pub kind: ChannelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Evolution interval; together with `relaxation_time` an alternative to `lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_ref_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    CollectiveDepolarizing,
    EpsilonPolarizing,
    Product,
    DepolarizedRotation,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(rename = "type", default)]
    pub kind: InitialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Single-spin coherence as `[re, im]`; never affects statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Mixed,
    Product,
    SectorDensity,
}

/// A parsed run file together with the model it describes.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub file: RunFile,
    pub config: RunConfig,
    /// Directory relative paths in the file are resolved against.
    pub base_dir: PathBuf,
}

impl LoadedRun {
    pub fn output_dir(&self) -> PathBuf {
        match &self.file.output_dir {
            Some(p) => self.base_dir.join(p),
            None => self.base_dir.join("out"),
        }
    }

    pub fn channel_kind(&self) -> ChannelKind {
        self.file.channel.kind
    }
}

pub fn load(path: &Path) -> Result<LoadedRun> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse(&text, &base_dir).with_context(|| format!("in {}", path.display()))
}

pub fn parse(text: &str, base_dir: &Path) -> Result<LoadedRun> {
    let file: RunFile = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
    let config = resolve(&file, base_dir)?;
    Ok(LoadedRun {
        file,
        config,
        base_dir: base_dir.to_path_buf(),
    })
}

fn resolve(file: &RunFile, base_dir: &Path) -> Result<RunConfig> {
    let n = file.n;
    let width = match file.kernel {
        KernelSection::Strong => 0.0,
        KernelSection::Gaussian { w } => w,
    };
    let ch = &file.channel;
    let channel = match ch.kind {
        ChannelKind::CollectiveDepolarizing => {
            ChannelSpec::CollectiveDepolarizing { lambda: lambda_of(ch)? }
        }
        ChannelKind::EpsilonPolarizing => {
            let path = ch
                .q_ref_path
                .as_ref()
                .ok_or_else(|| anyhow!("channel.q_ref_path is required for epsilon_polarizing"))?;
            ChannelSpec::EpsilonPolarizing {
                lambda: lambda_of(ch)?,
                reference: read_distribution(n, &base_dir.join(path))?,
            }
        }
        ChannelKind::Product => ChannelSpec::ProductMap {
            alpha: required(ch.alpha, "channel.alpha")?,
            beta: required(ch.beta, "channel.beta")?,
        },
        ChannelKind::DepolarizedRotation => ChannelSpec::DepolarizedRotation {
            lambda: lambda_of(ch)?,
            theta: required(ch.theta, "channel.theta")?,
        },
    };
    let init = &file.initial;
    let initial = match init.kind {
        InitialKind::Mixed => InitialState::Mixed,
        InitialKind::Product => {
            let [re, im] = init.b.unwrap_or([0.0, 0.0]);
            InitialState::Product {
                up_probability: required(init.a, "initial.a")?,
                coherence: C64::new(re, im),
            }
        }
        InitialKind::SectorDensity => {
            let path = init
                .q0_path
                .as_ref()
                .ok_or_else(|| anyhow!("initial.q0_path is required for sector_density"))?;
            InitialState::SectorDensity(read_distribution(n, &base_dir.join(path))?)
        }
    };
    let config = RunConfig {
        n,
        width,
        channel,
        initial,
        steps: file.steps,
        trajectories: file.trajectories,
        seed: file.seed,
    };
    config.validate()?;
    Ok(config)
}

fn required(v: Option<f64>, key: &str) -> Result<f64> {
    v.ok_or_else(|| anyhow!("{key} is required"))
}

fn lambda_of(ch: &ChannelSection) -> Result<f64> {
    match (ch.lambda, ch.dt, ch.relaxation_time) {
        (Some(l), None, None) => Ok(l),
        (None, Some(dt), Some(t)) => Ok(lambda_from_interval(dt, t)?),
        (None, None, None) => bail!("channel needs either lambda or dt and relaxation_time"),
        _ => bail!("give either channel.lambda or channel.dt with channel.relaxation_time, not both"),
    }
}

/// Reads a `m_doubled,probability` CSV with a header row.
pub fn read_distribution(n: usize, path: &Path) -> Result<SectorDistribution> {
    let mut reader =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut weights = vec![0.0; n + 1];
    for (row, record) in reader.deserialize::<(i64, f64)>().enumerate() {
        let (d, p) = record.with_context(|| format!("{}: row {}", path.display(), row + 2))?;
        let idx = spinnoise::SectorIndex::from_doubled(n, d)
            .with_context(|| format!("{}: row {}", path.display(), row + 2))?
            .index();
        weights[idx] += p;
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > FILE_MASS_TOLERANCE {
        bail!("{}: probabilities sum to {total}, not 1", path.display());
    }
    Ok(SectorDistribution::from_weights(n, weights)?)
}
