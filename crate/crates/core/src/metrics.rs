//! Outage, leased cost, OPEX-reduction and active-cloud statistics.

use serde::{Deserialize, Serialize};

use crate::feasibility::{Assignment, CostModel};
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outage {
    pub overall: f64,
    /// Per MNO; NaN for an MNO owning no RU.
    pub per_mno: Vec<f64>,
}

pub fn outage(asg: &Assignment, topo: &Topology) -> Outage {
    let mut owned = vec![0usize; topo.n_mno];
    let mut dropped = vec![0usize; topo.n_mno];
    for ru in &topo.rus {
        owned[ru.mno] += 1;
        if asg.site_of(ru.id).is_none() {
            dropped[ru.mno] += 1;
        }
    }
    let total: usize = dropped.iter().sum();
    Outage {
        overall: if topo.n_rus() == 0 { 0.0 } else { total as f64 / topo.n_rus() as f64 },
        per_mno: owned
            .iter()
            .zip(&dropped)
            .map(|(&o, &d)| if o == 0 { f64::NAN } else { d as f64 / o as f64 })
            .collect(),
    }
}

/// Full link and compute cost of every active site.
pub fn total_leased_cost(asg: &Assignment, topo: &Topology, cost: &CostModel) -> f64 {
    asg.active_sites().iter().map(|&y| cost.site_cost(topo, y)).sum()
}

/// Per-MNO OPEX saving, in percent, against every assigned RU renting its
/// site alone. Unassigned RUs count in neither sum; an MNO with no assigned
/// RU gets NaN.
pub fn opex_reduction(asg: &Assignment, topo: &Topology, cost: &CostModel) -> Vec<f64> {
    let mut paid = vec![0.0; topo.n_mno];
    let mut alone = vec![0.0; topo.n_mno];
    for ru in &topo.rus {
        if let Some(y) = asg.site_of(ru.id) {
            paid[ru.mno] += asg.opex[ru.id];
            alone[ru.mno] += cost.standalone_opex(topo, ru.id, y);
        }
    }
    paid.iter()
        .zip(&alone)
        .map(|(&p, &a)| if a > 0.0 { 100.0 * (1.0 - p / a) } else { f64::NAN })
        .collect()
}

pub fn active_clouds(asg: &Assignment) -> usize {
    asg.active_sites().len()
}
