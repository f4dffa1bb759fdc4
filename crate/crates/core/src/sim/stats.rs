use super::{FilterKind, SimError, TrialRecord};

/// Percentile by linear interpolation between order statistics of a sorted
/// slice (rank `p·(n−1)`).
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let rank = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let w = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * w
}

/// 25th, 50th and 75th percentiles per time step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PercentileSeries {
    pub p25: Vec<f64>,
    pub p50: Vec<f64>,
    pub p75: Vec<f64>,
}

impl PercentileSeries {
    fn from_columns(columns: impl Iterator<Item = Vec<f64>>) -> Self {
        let mut s = PercentileSeries::default();
        for mut col in columns {
            col.sort_by(f64::total_cmp);
            s.p25.push(percentile(&col, 0.25));
            s.p50.push(percentile(&col, 0.5));
            s.p75.push(percentile(&col, 0.75));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRecord {
    pub t: Vec<f64>,
    pub angle: [PercentileSeries; 3],
    pub lyapunov: [PercentileSeries; 3],
}

impl AggregateRecord {
    /// Aggregate trials in the given order. The result does not depend on it.
    pub fn from_trials(trials: &[TrialRecord]) -> Result<Self, SimError> {
        let first = trials
            .first()
            .ok_or_else(|| SimError::InvalidConfig("no trials to aggregate".into()))?;
        let rows = first.t.len();
        if trials.iter().any(|r| r.t.len() != rows) {
            return Err(SimError::InvalidConfig("trials have different lengths".into()));
        }
        let series = |pick: &dyn Fn(&TrialRecord) -> &[f64]| {
            PercentileSeries::from_columns((0..rows).map(|k| trials.iter().map(|r| pick(r)[k]).collect()))
        };
        let angle = FilterKind::ALL.map(|f| series(&|r: &TrialRecord| r.angle_of(f)));
        let lyapunov = FilterKind::ALL.map(|f| series(&|r: &TrialRecord| r.lyapunov_of(f)));
        Ok(AggregateRecord { t: first.t.clone(), angle, lyapunov })
    }

    pub fn angle_of(&self, f: FilterKind) -> &PercentileSeries {
        &self.angle[f as usize]
    }

    pub fn lyapunov_of(&self, f: FilterKind) -> &PercentileSeries {
        &self.lyapunov[f as usize]
    }

    /// Mean of the median angle error over `t ∈ [t0, t1]`.
    pub fn mean_median_angle(&self, f: FilterKind, t0: f64, t1: f64) -> f64 {
        let tol = 1e-9;
        let vals: Vec<f64> = self
            .t
            .iter()
            .zip(&self.angle_of(f).p50)
            .filter(|(t, _)| **t >= t0 - tol && **t <= t1 + tol)
            .map(|(_, v)| *v)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

/// First time the series falls to half its initial value, linearly
/// interpolated between samples.
pub fn halving_time(t: &[f64], err: &[f64]) -> Option<f64> {
    let target = err.first()? * 0.5;
    for k in 1..err.len() {
        if err[k] <= target {
            let (e0, e1) = (err[k - 1], err[k]);
            let w = if e0 > e1 { (e0 - target) / (e0 - e1) } else { 1.0 };
            return Some(t[k - 1] + (t[k] - t[k - 1]) * w);
        }
    }
    None
}

/// Rate `λ` of the least-squares fit `ln e ≈ c − λt` over `t ∈ [t0, t1]`.
pub fn exponential_decay_rate(t: &[f64], err: &[f64], t0: f64, t1: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(err)
        .filter(|(ti, e)| **ti >= t0 && **ti <= t1 && **e > 0.0)
        .map(|(ti, e)| (*ti, e.ln()))
        .collect();
    least_squares_slope(&pts).map(|s| -s)
}

/// Slope of the least-squares line through `(ln x, ln y)`. Non-positive
/// points are skipped.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    least_squares_slope(&pts)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
