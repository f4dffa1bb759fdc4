use std::path::Path;

use super::{AggregateRecord, FilterKind, LinmapRow, SimError, TrialRecord};

// `{}` on f64 prints the shortest string that round-trips, so CSVs carry full
// precision and are byte-identical for identical inputs.

pub fn write_trial_csv(path: &Path, rec: &TrialRecord) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "ekf_angle", "eqf_angle", "eqfstar_angle", "ekf_lyap", "eqf_lyap", "eqfstar_lyap"])?;
    for k in 0..rec.t.len() {
        let mut row = vec![rec.t[k].to_string()];
        row.extend(rec.angle.iter().map(|s| s[k].to_string()));
        row.extend(rec.lyapunov.iter().map(|s| s[k].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, agg: &AggregateRecord) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "filter", "p25_angle", "p50_angle", "p75_angle", "p25_lyap", "p50_lyap", "p75_lyap"])?;
    for k in 0..agg.t.len() {
        for f in FilterKind::ALL {
            let a = agg.angle_of(f);
            let l = agg.lyapunov_of(f);
            w.write_record([
                agg.t[k].to_string(),
                f.label().to_string(),
                a.p25[k].to_string(),
                a.p50[k].to_string(),
                a.p75[k].to_string(),
                l.p25[k].to_string(),
                l.p50[k].to_string(),
                l.p75[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_linmap_csv(path: &Path, rows: &[LinmapRow]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["theta", "phi", "ekf_err", "eqf_err", "eqfstar_err"])?;
    for r in rows {
        w.write_record([r.theta, r.phi, r.ekf_err, r.eqf_err, r.eqfstar_err].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
