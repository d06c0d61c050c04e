use serde::{Deserialize, Serialize};

use super::{Axis, ResultRow};
use crate::policies::PolicyKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub p5: f64,
    pub p95: f64,
}

impl Stat {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Stat {
            mean: values[0] + values.iter().map(|v| v - values[0]).sum::<f64>() / values.len() as f64,
            p5: nearest_rank(&sorted, 5.0),
            p95: nearest_rank(&sorted, 95.0),
        })
    }
}

/// Nearest-rank percentile of an ascending, non-empty sample: the value of
/// rank `ceil(p / 100 * n)`, at least 1.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Statistics of one metric over the replications of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: PolicyKind,
    pub axis: Axis,
    pub axis_value: f64,
    pub metric: String,
    pub n: usize,
    pub stat: Stat,
}

/// Mean and 5%/95% nearest-rank percentiles of every metric, per (policy,
/// axis value), groups in order of first appearance. Non-finite values are
/// left out; a metric with no value left is omitted with a warning.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(PolicyKind, Axis, f64, Vec<&ResultRow>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|g| g.0 == r.policy && g.1 == r.axis && g.2.to_bits() == r.axis_value.to_bits())
        {
            Some(g) => g.3.push(r),
            None => groups.push((r.policy, r.axis, r.axis_value, vec![r])),
        }
    }
    let mut out = Vec::new();
    for (policy, axis, axis_value, members) in groups {
        let columns: Vec<Vec<(String, f64)>> = members.iter().map(|r| r.metrics()).collect();
        for (c, (name, _)) in columns[0].iter().enumerate() {
            let vals: Vec<f64> = columns
                .iter()
                .filter_map(|m| m.get(c).map(|p| p.1))
                .filter(|v| v.is_finite())
                .collect();
            match Stat::of(&vals) {
                Some(stat) => out.push(SummaryRow {
                    policy,
                    axis,
                    axis_value,
                    metric: name.clone(),
                    n: vals.len(),
                    stat,
                }),
                None => log::warn!("{policy} at {} = {axis_value}: no values for {name}, omitted", axis.name()),
            }
        }
    }
    out
}

/// Long-format summary table.
pub fn summary_to_csv(summary: &[SummaryRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = ["policy", "axis_name", "axis_value", "metric", "n", "mean", "p5", "p95"];
    w.write_record(header).expect("in-memory write");
    for s in summary {
        w.write_record([
            s.policy.name().to_string(),
            s.axis.name().to_string(),
            s.axis_value.to_string(),
            s.metric.clone(),
            s.n.to_string(),
            s.stat.mean.to_string(),
            s.stat.p5.to_string(),
            s.stat.p95.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}
