//! VCG mechanism: total-cost-minimising allocation over reported demands,
//! Clarke-style payments from per-RU re-solves, valuations and utilities.
//!
//! Payment of RU `r`:
//!
//! ```text
//! P_r = shared_r + C(-r) - C_others
//! ```
//!
//! where `shared_r` is r's equal share of its site cost, `C(-r)` the total
//! activated cost when the allocation is re-run without `r`, and `C_others`
//! the cost of the sites that host at least one other RU in the full
//! allocation. For an RU sharing its site this is the classic externality
//! `C(-r) - (C - shared_r)`; a sole tenant additionally pays for the site it
//! alone opened.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{Assignment, CostModel, LatencyReport, Sharing};
use crate::minmax::{greedy_allocate, Criterion, GreedyOptions};
use crate::topology::Topology;

/// An RU's reported demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub ru_id: usize,
    pub w_ul_hat: f64,
    pub w_dl_hat: f64,
    pub gamma_ul_hat: f64,
    pub gamma_dl_hat: f64,
}

impl Bid {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ru_id: self.ru_id,
            w_ul_hat: self.w_ul_hat * factor,
            w_dl_hat: self.w_dl_hat * factor,
            gamma_ul_hat: self.gamma_ul_hat * factor,
            gamma_dl_hat: self.gamma_dl_hat * factor,
        }
    }
}

pub fn truthful_bids(topo: &Topology) -> Vec<Bid> {
    topo.rus
        .iter()
        .map(|ru| Bid {
            ru_id: ru.id,
            w_ul_hat: ru.demand.w_ul,
            w_dl_hat: ru.demand.w_dl,
            gamma_ul_hat: ru.demand.gamma_ul,
            gamma_dl_hat: ru.demand.gamma_dl,
        })
        .collect()
}

/// Copy of `topo` whose datarate and DU-CU demands are the reported ones.
pub fn apply_bids(topo: &Topology, bids: &[Bid]) -> Result<Topology> {
    if bids.len() != topo.n_rus() {
        return Err(Error::InvalidParameter(format!(
            "expected {} bids, got {}",
            topo.n_rus(),
            bids.len()
        )));
    }
    let mut out = topo.clone();
    let mut seen = vec![false; topo.n_rus()];
    for bid in bids {
        let r = bid.ru_id;
        if r >= topo.n_rus() || seen[r] {
            return Err(Error::InvalidParameter(format!("bid for unknown or repeated RU {r}")));
        }
        let values = [bid.w_ul_hat, bid.w_dl_hat, bid.gamma_ul_hat, bid.gamma_dl_hat];
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("bid of RU {r} must be finite and >= 0")));
        }
        seen[r] = true;
        let d = &mut out.rus[r].demand;
        d.w_ul = bid.w_ul_hat;
        d.w_dl = bid.w_dl_hat;
        d.gamma_ul = bid.gamma_ul_hat;
        d.gamma_dl = bid.gamma_dl_hat;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcgAllocation {
    pub assignment: Assignment,
    /// Cost of all activated sites.
    pub total_cost: f64,
    /// Equal split of each site cost among its tenants.
    pub shared_costs: Vec<f64>,
    pub checks: usize,
    pub diagnostic: Option<String>,
}

fn activated_cost(asg: &Assignment, topo: &Topology, cost: &CostModel) -> f64 {
    asg.active_sites().iter().map(|&y| cost.site_cost(topo, y)).sum()
}

fn shared_costs(asg: &Assignment, topo: &Topology, cost: &CostModel) -> Vec<f64> {
    let mut tenants = vec![0usize; topo.n_sites()];
    for y in asg.x.iter().flatten() {
        tenants[*y] += 1;
    }
    asg.x
        .iter()
        .map(|s| s.map_or(0.0, |y| cost.site_cost(topo, y) / tenants[y] as f64))
        .collect()
}

/// Allocation on an already bid-substituted topology, restricted to the RUs
/// flagged in `include`.
fn allocate_on(topo: &Topology, cost: &CostModel, opts: GreedyOptions, include: Option<&[bool]>) -> VcgAllocation {
    let out = greedy_allocate(topo, cost, Criterion::TotalCost, opts, include);
    VcgAllocation {
        total_cost: activated_cost(&out.assignment, topo, cost),
        shared_costs: shared_costs(&out.assignment, topo, cost),
        assignment: out.assignment,
        checks: out.checks,
        diagnostic: out.diagnostic,
    }
}

pub fn allocate_vcg(topo: &Topology, bids: &[Bid], cost: &CostModel) -> Result<VcgAllocation> {
    allocate_vcg_with(topo, bids, cost, GreedyOptions::default())
}

pub fn allocate_vcg_with(topo: &Topology, bids: &[Bid], cost: &CostModel, opts: GreedyOptions) -> Result<VcgAllocation> {
    let reported = apply_bids(topo, bids)?;
    Ok(allocate_on(&reported, cost, opts, None))
}

fn payment_given(r: usize, reported: &Topology, full: &VcgAllocation, cost: &CostModel, opts: GreedyOptions) -> f64 {
    let Some(_) = full.assignment.site_of(r) else {
        return 0.0;
    };
    let mut include = vec![true; reported.n_rus()];
    include[r] = false;
    let reduced = allocate_on(reported, cost, opts, Some(&include));
    let others: f64 = full
        .assignment
        .active_sites()
        .iter()
        .filter(|&&y| full.assignment.members(y).any(|j| j != r))
        .map(|&y| cost.site_cost(reported, y))
        .sum();
    full.shared_costs[r] + reduced.total_cost - others
}

/// Payment of `r` under the given bids; 0 when `r` is left unassigned.
pub fn vcg_payment(r: usize, topo: &Topology, bids: &[Bid], cost: &CostModel) -> Result<f64> {
    let reported = apply_bids(topo, bids)?;
    let full = allocate_on(&reported, cost, GreedyOptions::default(), None);
    Ok(payment_given(r, &reported, &full, cost, GreedyOptions::default()))
}

/// Value `r` derives from the allocation: its site cost when the true
/// demands of everyone on that site meet all of r's latency bounds.
pub fn valuation(r: usize, asg: &Assignment, true_topo: &Topology, cost: &CostModel) -> f64 {
    let Some(y) = asg.site_of(r) else { return 0.0 };
    let load = asg.load(true_topo, y);
    if LatencyReport::under(true_topo, r, y, &load).violations(true_topo, r).is_empty() {
        cost.site_cost(true_topo, y)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    /// Allocation; its `opex` field holds default cost plus payment.
    pub assignment: Assignment,
    pub total_cost: f64,
    pub payments: Vec<f64>,
    pub shared_costs: Vec<f64>,
    pub utilities: Vec<f64>,
    pub valuations: Vec<f64>,
    pub checks: usize,
}

/// Full mechanism. `topo` carries the true demands used for valuations;
/// allocation and payments see only `bids`.
pub fn run_auction(topo: &Topology, bids: &[Bid], cost: &CostModel) -> Result<AuctionOutcome> {
    run_auction_with(topo, bids, cost, GreedyOptions::default())
}

pub fn run_auction_with(topo: &Topology, bids: &[Bid], cost: &CostModel, opts: GreedyOptions) -> Result<AuctionOutcome> {
    let reported = apply_bids(topo, bids)?;
    let full = allocate_on(&reported, cost, opts, None);
    let payments: Vec<f64> = (0..topo.n_rus())
        .into_par_iter()
        .map(|r| payment_given(r, &reported, &full, cost, opts))
        .collect();
    let valuations: Vec<f64> = (0..topo.n_rus())
        .map(|r| valuation(r, &full.assignment, topo, cost))
        .collect();
    let utilities = valuations.iter().zip(&payments).map(|(v, p)| v - p).collect();
    let mut assignment = full.assignment;
    assignment.recompute(&reported, cost, Sharing::Uniform);
    for (r, p) in payments.iter().enumerate() {
        assignment.opex[r] = if assignment.site_of(r).is_some() { cost.c_default + p } else { 0.0 };
    }
    Ok(AuctionOutcome {
        assignment,
        total_cost: full.total_cost,
        payments,
        shared_costs: full.shared_costs,
        utilities,
        valuations,
        checks: full.checks,
    })
}

/// Utility of `r` when truthful and when it scales its bid by `factor`,
/// everyone else truthful. Valuations always use true demands.
pub fn misreport_probe(topo: &Topology, cost: &CostModel, r: usize, factor: f64) -> Result<(f64, f64)> {
    let truthful = truthful_bids(topo);
    let mut lying = truthful.clone();
    lying[r] = truthful[r].scaled(factor);
    let honest = run_auction(topo, &truthful, cost)?;
    let misreport = run_auction(topo, &lying, cost)?;
    Ok((honest.utilities[r], misreport.utilities[r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::audit;
    use crate::feasibility::tests::{ru, site, topo};
    use crate::synth::{random_instance, InstanceShape};
    use proptest::prelude::*;

    fn cost() -> CostModel {
        CostModel::new(100.0, 0.5e-9, 1.5)
    }

    fn rel_eq(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn sole_ru_pays_site_cost() {
        let t = topo(vec![ru(0, 1e9, 1e9, 10.0, 10.0)], vec![site(0, 50e9, 1.5e4)], 1.0);
        let out = run_auction(&t, &truthful_bids(&t), &cost()).unwrap();
        let s = cost().site_cost(&t, 0);
        assert!(rel_eq(out.payments[0], s));
        assert!(rel_eq(out.total_cost, s));
        assert!(rel_eq(out.valuations[0], s));
        assert!(rel_eq(out.utilities[0], 0.0));
        assert!(rel_eq(out.assignment.opex[0], 100.0 + s));
    }

    #[test]
    fn two_rus_split_one_site() {
        let rus = vec![ru(0, 1e9, 1e9, 10.0, 10.0), ru(1, 1e9, 1e9, 10.0, 10.0)];
        let t = topo(rus, vec![site(0, 50e9, 1.5e4)], 1.0);
        let out = run_auction(&t, &truthful_bids(&t), &cost()).unwrap();
        let s = cost().site_cost(&t, 0);
        assert!(rel_eq(out.shared_costs[0], s / 2.0));
        assert!(rel_eq(out.payments[0], s / 2.0));
        assert!(rel_eq(out.payments[1], s / 2.0));
    }

    #[test]
    fn empty_bid_set() {
        let t = topo(vec![], vec![site(0, 50e9, 1.5e4)], 1.0);
        let out = run_auction(&t, &[], &cost()).unwrap();
        assert_eq!(out.total_cost, 0.0);
        assert!(out.payments.is_empty());
    }

    #[test]
    fn bids_must_match_rus() {
        let t = topo(vec![ru(0, 1e9, 1e9, 10.0, 10.0)], vec![site(0, 50e9, 1.5e4)], 1.0);
        assert!(apply_bids(&t, &[]).is_err());
        let mut bad = truthful_bids(&t);
        bad[0].w_ul_hat = -1.0;
        assert!(apply_bids(&t, &bad).is_err());
    }

    #[test]
    fn identity_misreport_changes_nothing() {
        let inst = random_instance(5, InstanceShape { n_rus: 5, n_sites: 3, n_mno: 2 });
        for r in 0..5 {
            let (a, b) = misreport_probe(&inst.topology, &inst.cost, r, 1.0).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn underbid_that_breaks_latency_has_zero_value() {
        // truthfully only one fits; RU 1 underbids its way in, then fails for real
        let rus = vec![ru(0, 2.2e9, 0.1e9, 1.0, 1.0), ru(1, 2.2e9, 0.1e9, 1.0, 1.0)];
        let t = topo(rus, vec![site(0, 25e9, 1.5e4)], 1.0);
        let honest = run_auction(&t, &truthful_bids(&t), &cost()).unwrap();
        assert_eq!(honest.assignment.n_assigned(), 1);
        let mut bids = truthful_bids(&t);
        let loser = (0..2).find(|&r| honest.assignment.site_of(r).is_none()).unwrap();
        bids[loser] = bids[loser].scaled(0.1);
        let lying = run_auction(&t, &bids, &cost()).unwrap();
        assert!(lying.assignment.site_of(loser).is_some());
        assert_eq!(lying.valuations[loser], 0.0);
        assert!(lying.utilities[loser] < 0.0);
        assert!(rel_eq(lying.utilities[loser], -lying.payments[loser]));
        assert!(!audit(&lying.assignment, &t).is_empty());
    }

    #[test]
    fn payment_matches_standalone_function() {
        let inst = random_instance(9, InstanceShape { n_rus: 6, n_sites: 3, n_mno: 3 });
        let bids = truthful_bids(&inst.topology);
        let out = run_auction(&inst.topology, &bids, &inst.cost).unwrap();
        for r in 0..6 {
            let p = vcg_payment(r, &inst.topology, &bids, &inst.cost).unwrap();
            assert!(rel_eq(p, out.payments[r]));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn shared_costs_sum_to_site_costs(seed in 0u64..10_000, n_r in 1usize..9, n_y in 1usize..5) {
            let inst = random_instance(seed, InstanceShape { n_rus: n_r, n_sites: n_y, n_mno: 3 });
            let t = &inst.topology;
            let out = run_auction(t, &truthful_bids(t), &inst.cost).unwrap();
            for y in out.assignment.active_sites() {
                let sum: f64 = out.assignment.members(y).map(|r| out.shared_costs[r]).sum();
                prop_assert!(rel_eq(sum, inst.cost.site_cost(t, y)));
            }
            let total: f64 = out.shared_costs.iter().sum();
            prop_assert!(rel_eq(total, out.total_cost));
            prop_assert!(audit(&out.assignment, t).is_empty());
        }

        #[test]
        fn payment_ignores_own_bid_when_partition_fixed(seed in 0u64..10_000, n_r in 2usize..7, factor in 0.9f64..1.1) {
            let inst = random_instance(seed, InstanceShape { n_rus: n_r, n_sites: 3, n_mno: 2 });
            let t = &inst.topology;
            let truthful = truthful_bids(t);
            let honest = run_auction(t, &truthful, &inst.cost).unwrap();
            for r in 0..n_r {
                let mut bids = truthful.clone();
                bids[r] = truthful[r].scaled(factor);
                let lying = run_auction(t, &bids, &inst.cost).unwrap();
                if lying.assignment.x == honest.assignment.x {
                    prop_assert!(rel_eq(lying.payments[r], honest.payments[r]));
                }
            }
        }
    }
}
