use rayon::prelude::*;

use super::{generate_trial, run_trial, AggregateRecord, SimConfig, SimError, TrialRecord};

/// Environment variable capping the worker count; 0 or unset means one
/// worker per core.
pub const THREADS_ENV: &str = "EQFKIT_THREADS";

pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub trial: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    pub aggregate: AggregateRecord,
    /// Successful trials with their indices, in index order.
    pub trials: Vec<(usize, TrialRecord)>,
    pub failures: Vec<TrialFailure>,
}

/// Run `cfg.trials` independent trials in parallel and aggregate them.
///
/// Failed trials are reported and left out of the aggregate; the batch only
/// fails when no trial succeeds.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<MonteCarloResult, SimError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;

    let results: Vec<(usize, Result<TrialRecord, SimError>)> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| (i, run_trial(cfg, &generate_trial(cfg, i), i)))
            .collect()
    });

    let mut trials = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results {
        match r {
            Ok(rec) => trials.push((i, rec)),
            Err(e) => failures.push(TrialFailure { trial: i, message: e.to_string() }),
        }
    }
    if trials.is_empty() {
        let first = failures.first().map(|f| f.message.clone()).unwrap_or_default();
        return Err(SimError::AllTrialsFailed(first));
    }
    let records: Vec<TrialRecord> = trials.iter().map(|(_, r)| r.clone()).collect();
    let aggregate = AggregateRecord::from_trials(&records)?;
    Ok(MonteCarloResult { aggregate, trials, failures })
}
