use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{modal_partition, nonempty};
use crate::error::Result;
use crate::trace::TraceRecord;

/// Scalar posterior summaries of one or more chains.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub retained: usize,
    pub observations: usize,
    /// Number of clusters (or states) -> number of sweeps.
    pub cluster_count_histogram: BTreeMap<usize, usize>,
    pub mean_clusters: f64,
    /// `None` when no graph move was proposed.
    pub mh_acceptance_rate: Option<f64>,
    pub alpha0_mean: f64,
    pub alpha_mean: Option<f64>,
    pub modal_partition_frequency: f64,
}

pub fn summarize(trace: &[TraceRecord]) -> Result<Summary> {
    let observations = nonempty(trace)?;
    let s = trace.len() as f64;
    let mut hist = BTreeMap::new();
    for r in trace {
        *hist.entry(r.num_clusters()).or_insert(0) += 1;
    }
    let proposed: usize = trace.iter().map(|r| r.mh_proposed).sum();
    let accepted: usize = trace.iter().map(|r| r.mh_accepted).sum();
    let alphas: Vec<f64> = trace.iter().filter_map(|r| r.alpha).collect();
    Ok(Summary {
        retained: trace.len(),
        observations,
        mean_clusters: trace.iter().map(|r| r.num_clusters() as f64).sum::<f64>() / s,
        cluster_count_histogram: hist,
        mh_acceptance_rate: (proposed > 0).then(|| accepted as f64 / proposed as f64),
        alpha0_mean: trace.iter().map(|r| r.alpha0).sum::<f64>() / s,
        alpha_mean: (alphas.len() == trace.len()).then(|| alphas.iter().sum::<f64>() / s),
        modal_partition_frequency: modal_partition(trace)?.1,
    })
}
