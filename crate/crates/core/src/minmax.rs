//! Min-max fair allocation: MNO-interleaved demand ordering followed by a
//! greedy pass that places each RU on the feasible site minimising its own
//! OPEX. The same skeleton, with a total-cost criterion, drives the VCG
//! allocation in [`crate::auction`].

use serde::{Deserialize, Serialize};

use crate::feasibility::{is_assignable, tentative_opex, Assignment, CostModel, Sharing};
use crate::topology::{quota_sequence, RadioUnit, Topology};

/// Relative slack under which two criterion values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Orders RUs by increasing `(max W, max Gamma, id)` within each MNO, then
/// interleaves MNOs in proportion to their RU counts.
pub fn sort_rus<'a>(rus: impl IntoIterator<Item = &'a RadioUnit>) -> Vec<usize> {
    let rus: Vec<&RadioUnit> = rus.into_iter().collect();
    if rus.is_empty() {
        return Vec::new();
    }
    let n_mno = rus.iter().map(|r| r.mno).max().unwrap_or(0) + 1;
    let mut per_mno: Vec<Vec<&RadioUnit>> = vec![Vec::new(); n_mno];
    for ru in &rus {
        per_mno[ru.mno].push(ru);
    }
    for group in &mut per_mno {
        group.sort_by(|a, b| {
            a.max_rate()
                .total_cmp(&b.max_rate())
                .then(a.max_gops().total_cmp(&b.max_gops()))
                .then(a.id.cmp(&b.id))
        });
    }
    let counts: Vec<usize> = per_mno.iter().map(Vec::len).collect();
    let n = rus.len() as f64;
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mut cursor = vec![0usize; n_mno];
    quota_sequence(&weights, rus.len(), Some(&counts))
        .into_iter()
        .map(|m| {
            let ru = per_mno[m][cursor[m]];
            cursor[m] += 1;
            ru.id
        })
        .collect()
}

/// Greedy placement rule after the first RU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// The RU's own OPEX after joining.
    DummyOpex,
    /// Cost of all sites active after joining.
    TotalCost,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyOptions {
    /// Stop the whole run when the first RU has no feasible site.
    #[serde(default)]
    pub strict_first: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub assignment: Assignment,
    /// Feasibility checks performed.
    pub checks: usize,
    /// Set when some RU found no feasible site while the system was empty.
    pub diagnostic: Option<String>,
}

/// Runs the greedy skeleton over the RUs flagged in `include` (all when
/// `None`); excluded RUs stay unassigned.
pub fn greedy_allocate(
    topo: &Topology,
    cost: &CostModel,
    criterion: Criterion,
    opts: GreedyOptions,
    include: Option<&[bool]>,
) -> GreedyOutcome {
    let n_y = topo.n_sites();
    let mut asg = Assignment::new(topo.n_rus());
    let mut checks = 0usize;
    let mut diagnostic = None;
    let order = sort_rus(
        topo.rus
            .iter()
            .filter(|ru| include.is_none_or(|inc| inc[ru.id])),
    );
    let mut active_cost = 0.0;
    let mut active = vec![false; n_y];

    for r in order {
        let empty = asg.n_assigned() == 0;
        let mut best: Option<(usize, f64)> = None;
        if empty {
            let mut sites: Vec<usize> = (0..n_y).filter(|&y| topo.z[r][y]).collect();
            sites.sort_by(|&a, &b| topo.dist[r][a].total_cmp(&topo.dist[r][b]).then(a.cmp(&b)));
            for y in sites {
                checks += 1;
                if is_assignable(&asg, topo, r, y) {
                    best = Some((y, 0.0));
                    break;
                }
            }
        } else {
            for y in (0..n_y).filter(|&y| topo.z[r][y]) {
                checks += 1;
                if !is_assignable(&asg, topo, r, y) {
                    continue;
                }
                let value = match criterion {
                    Criterion::DummyOpex => tentative_opex(&asg, topo, cost, r, y, Sharing::Proportional),
                    Criterion::TotalCost => {
                        active_cost + if active[y] { 0.0 } else { cost.site_cost(topo, y) }
                    }
                };
                if better(topo, r, (y, value), best) {
                    best = Some((y, value));
                }
            }
        }
        match best {
            Some((y, _)) => {
                asg.place(r, y);
                if !active[y] {
                    active[y] = true;
                    active_cost += cost.site_cost(topo, y);
                }
                asg.recompute(topo, cost, Sharing::Proportional);
            }
            None if empty => {
                diagnostic = Some(format!("RU {r} has no feasible site in an empty system"));
                if opts.strict_first {
                    break;
                }
            }
            None => {}
        }
    }
    GreedyOutcome {
        assignment: asg,
        checks,
        diagnostic,
    }
}

/// Smaller value wins; near-ties go to the shorter fiber path, then the lower id.
fn better(topo: &Topology, r: usize, cand: (usize, f64), best: Option<(usize, f64)>) -> bool {
    let Some((by, bv)) = best else { return true };
    let (cy, cv) = cand;
    let scale = cv.abs().max(bv.abs()).max(1.0);
    if cv < bv - TIE_TOLERANCE * scale {
        return true;
    }
    if cv > bv + TIE_TOLERANCE * scale {
        return false;
    }
    topo.dist[r][cy]
        .total_cmp(&topo.dist[r][by])
        .then(cy.cmp(&by))
        .is_lt()
}

/// Min-max fair allocation with default options.
pub fn allocate_minmax(topo: &Topology, cost: &CostModel) -> GreedyOutcome {
    allocate_minmax_with(topo, cost, GreedyOptions::default())
}

pub fn allocate_minmax_with(topo: &Topology, cost: &CostModel, opts: GreedyOptions) -> GreedyOutcome {
    greedy_allocate(topo, cost, Criterion::DummyOpex, opts, None)
}
