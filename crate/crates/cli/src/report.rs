//! Machine-readable JSON summaries. Maps are kept sorted and floats
//! serialized by serde_json's canonical formatter, so a summary is
//! byte-stable for identical runs.

use serde::Serialize;
use spikemix_core::analysis::{OccupiedCountDistribution, Partition};
use spikemix_core::trace::AllocationTrace;
use std::collections::BTreeMap;

#[derive(Serialize)]
pub struct OccupiedRow {
    pub occupied: usize,
    pub proportion: f64,
}

pub fn occupied_rows(dist: &OccupiedCountDistribution) -> Vec<OccupiedRow> {
    dist.table
        .iter()
        .map(|(&occupied, &proportion)| OccupiedRow { occupied, proportion })
        .collect()
}

#[derive(Serialize)]
pub struct RunSummary<C: Serialize> {
    pub schema: u32,
    pub model: String,
    pub n: usize,
    pub r: usize,
    pub kept_iterations: usize,
    pub burn_in: usize,
    pub occupied_distribution: Vec<OccupiedRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub swap_acceptance_rates: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub represented_components: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub concentration: Vec<f64>,
    pub config: C,
}

/// Cluster size table in decreasing order, the reporting layout for
/// optimal partitions.
#[derive(Serialize)]
pub struct PartitionTableRow {
    pub cluster: usize,
    pub count: usize,
    pub percent: f64,
}

pub fn partition_table(partition: &Partition) -> Vec<PartitionTableRow> {
    let n = partition.n() as f64;
    partition
        .sizes_desc()
        .into_iter()
        .enumerate()
        .map(|(i, count)| PartitionTableRow {
            cluster: i + 1,
            count,
            percent: 100.0 * count as f64 / n,
        })
        .collect()
}

/// Table-style side-by-side occupied distributions keyed by count.
pub fn occupied_side_by_side(
    ofm: &OccupiedCountDistribution,
    dpm: &OccupiedCountDistribution,
) -> Vec<BTreeMap<String, serde_json::Value>> {
    let mut counts: Vec<usize> = ofm.table.keys().chain(dpm.table.keys()).copied().collect();
    counts.sort_unstable();
    counts.dedup();
    counts
        .into_iter()
        .map(|c| {
            let mut row = BTreeMap::new();
            row.insert("occupied".to_string(), serde_json::json!(c));
            row.insert("ofm".to_string(), ofm.table.get(&c).map_or(serde_json::Value::Null, |&p| serde_json::json!(p)));
            row.insert("dpm".to_string(), dpm.table.get(&c).map_or(serde_json::Value::Null, |&p| serde_json::json!(p)));
            row
        })
        .collect()
}

pub fn trace_kept(trace: &AllocationTrace) -> usize {
    trace.len()
}
