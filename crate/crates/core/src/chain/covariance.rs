use super::Trajectory;
use crate::{Error, Result};

/// Monte Carlo estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Number of `(M_t, M_{t+k})` pairs pooled.
    pub pairs: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct PairSums {
    count: f64,
    x: f64,
    y: f64,
    xy: f64,
    xx: f64,
    yy: f64,
}

impl PairSums {
    fn of(t: &Trajectory, lag: usize) -> Self {
        let m: Vec<f64> = t.outcomes().map(|d| d as f64 / 2.0).collect();
        let mut s = Self::default();
        for w in m.windows(lag + 1) {
            let (x, y) = (w[0], w[lag]);
            s.count += 1.0;
            s.x += x;
            s.y += y;
            s.xy += x * y;
            s.xx += x * x;
            s.yy += y * y;
        }
        s
    }

    fn minus(&self, o: &Self) -> Self {
        Self {
            count: self.count - o.count,
            x: self.x - o.x,
            y: self.y - o.y,
            xy: self.xy - o.xy,
            xx: self.xx - o.xx,
            yy: self.yy - o.yy,
        }
    }

    fn add(&mut self, o: &Self) {
        self.count += o.count;
        self.x += o.x;
        self.y += o.y;
        self.xy += o.xy;
        self.xx += o.xx;
        self.yy += o.yy;
    }

    fn covariance(&self) -> f64 {
        let (mx, my) = (self.x / self.count, self.y / self.count);
        self.xy / self.count - mx * my
    }

    fn correlation(&self) -> f64 {
        let (mx, my) = (self.x / self.count, self.y / self.count);
        let vx = self.xx / self.count - mx * mx;
        let vy = self.yy / self.count - my * my;
        self.covariance() / (vx * vy).sqrt()
    }
}

fn pooled(trajectories: &[Trajectory], lag: usize) -> Result<(Vec<PairSums>, PairSums)> {
    if trajectories.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 trajectories, got {}",
            trajectories.len()
        )));
    }
    if let Some(t) = trajectories.iter().find(|t| t.len() <= lag) {
        return Err(Error::InsufficientData(format!(
            "trajectory {} has {} steps, lag {lag} needs more",
            t.id,
            t.len()
        )));
    }
    let per: Vec<PairSums> = trajectories.iter().map(|t| PairSums::of(t, lag)).collect();
    let mut total = PairSums::default();
    per.iter().for_each(|s| total.add(s));
    Ok((per, total))
}

fn jackknife(per: &[PairSums], total: &PairSums, stat: impl Fn(&PairSums) -> f64) -> CovarianceEstimate {
    let n = per.len() as f64;
    let leave_out: Vec<f64> = per.iter().map(|s| stat(&total.minus(s))).collect();
    let mean = leave_out.iter().sum::<f64>() / n;
    let spread: f64 = leave_out.iter().map(|v| (v - mean) * (v - mean)).sum();
    CovarianceEstimate {
        estimate: stat(total),
        stderr: ((n - 1.0) / n * spread).sqrt(),
        pairs: total.count as usize,
    }
}

/// Pooled lag-`k` sample covariance over every `(M_t, M_{t+k})` pair of
/// every trajectory, with a delete-one-trajectory jackknife error.
pub fn covariance_empirical(trajectories: &[Trajectory], lag: usize) -> Result<CovarianceEstimate> {
    let (per, total) = pooled(trajectories, lag)?;
    Ok(jackknife(&per, &total, PairSums::covariance))
}

/// Pooled lag-`k` Pearson correlation with jackknife error.
pub fn correlation_empirical(trajectories: &[Trajectory], lag: usize) -> Result<CovarianceEstimate> {
    let (per, total) = pooled(trajectories, lag)?;
    Ok(jackknife(&per, &total, PairSums::correlation))
}
