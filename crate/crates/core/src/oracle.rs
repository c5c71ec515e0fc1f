//! Exhaustive solvers for toy instances: exact min-max OPEX and exact
//! minimum activated cost, both subject to the full constraint system.
//!
//! Objectives are lexicographic: first maximise the number of assigned
//! RUs, then minimise the cost term. Without the first tier the empty
//! assignment would trivially win. Ties keep the lexicographically smallest
//! map, where "unassigned" sorts before every site.

use serde::{Deserialize, Serialize};

use crate::auction::{apply_bids, Bid};
use crate::error::{Error, Result};
use crate::feasibility::{is_assignable, Assignment, CostModel, Sharing};
use crate::topology::Topology;

/// Relative slack for "strictly better" objective comparisons.
const IMPROVEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleLimits {
    pub max_rus: usize,
    pub max_sites: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_rus: 8, max_sites: 4 }
    }
}

impl OracleLimits {
    pub fn admits(&self, topo: &Topology) -> bool {
        topo.n_rus() <= self.max_rus && topo.n_sites() <= self.max_sites
    }

    fn check(&self, topo: &Topology) -> Result<()> {
        if self.admits(topo) {
            Ok(())
        } else {
            Err(Error::InstanceTooLarge {
                rus: topo.n_rus(),
                sites: topo.n_sites(),
                max_rus: self.max_rus,
                max_sites: self.max_sites,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutcome {
    pub assignment: Assignment,
    /// Max per-RU OPEX, or total activated cost.
    pub objective: f64,
    /// Number of complete feasible maps inspected.
    pub leaves: u64,
}

/// Visits every feasible complete map in lexicographic order. Partial maps
/// that already violate a bound are pruned: congestion only grows as RUs
/// are added, so no completion can repair them.
fn enumerate(topo: &Topology, mut visit: impl FnMut(&Assignment)) {
    fn rec(topo: &Topology, r: usize, asg: &mut Assignment, visit: &mut dyn FnMut(&Assignment)) {
        if r == topo.n_rus() {
            visit(asg);
            return;
        }
        rec(topo, r + 1, asg, visit);
        for y in 0..topo.n_sites() {
            if is_assignable(asg, topo, r, y) {
                asg.place(r, y);
                rec(topo, r + 1, asg, visit);
                asg.remove(r);
            }
        }
    }
    let mut asg = Assignment::new(topo.n_rus());
    rec(topo, 0, &mut asg, &mut visit);
}

fn lexicographic_best(
    topo: &Topology,
    cost: &CostModel,
    objective: impl Fn(&Assignment) -> f64,
) -> ExactOutcome {
    let mut best: Option<(usize, f64, Vec<Option<usize>>)> = None;
    let mut leaves = 0u64;
    enumerate(topo, |asg| {
        leaves += 1;
        let count = asg.n_assigned();
        let improves = match &best {
            None => true,
            Some((bc, bv, _)) => {
                count > *bc || (count == *bc && {
                    let value = objective(asg);
                    value < bv - IMPROVEMENT_TOLERANCE * bv.abs().max(1.0)
                })
            }
        };
        if improves {
            best = Some((count, objective(asg), asg.x.clone()));
        }
    });
    let (_, value, x) = best.expect("the empty map is always feasible");
    ExactOutcome {
        assignment: Assignment::from_map(x, topo, cost, Sharing::Proportional),
        objective: value,
        leaves,
    }
}

fn max_opex_of(asg: &Assignment, topo: &Topology, cost: &CostModel) -> f64 {
    let mut full = asg.clone();
    full.recompute(topo, cost, Sharing::Proportional);
    full.max_opex()
}

fn activated_cost_of(asg: &Assignment, topo: &Topology, cost: &CostModel) -> f64 {
    asg.active_sites().iter().map(|&y| cost.site_cost(topo, y)).sum()
}

/// Exact min-max OPEX over maximum-cardinality feasible maps.
pub fn solve_minmax_exact(topo: &Topology, cost: &CostModel, limits: OracleLimits) -> Result<ExactOutcome> {
    limits.check(topo)?;
    Ok(lexicographic_best(topo, cost, |asg| max_opex_of(asg, topo, cost)))
}

/// Exact minimum activated cost over maximum-cardinality feasible maps,
/// judged on the reported demands.
pub fn solve_vcg_exact(topo: &Topology, bids: &[Bid], cost: &CostModel, limits: OracleLimits) -> Result<ExactOutcome> {
    limits.check(topo)?;
    let reported = apply_bids(topo, bids)?;
    Ok(lexicographic_best(&reported, cost, |asg| activated_cost_of(asg, &reported, cost)))
}

/// Summary of one maximum-cardinality feasible map, for dual checks.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSummary {
    pub x: Vec<Option<usize>>,
    pub total_shared_cost: f64,
    pub total_valuation: f64,
}

/// All maximum-cardinality feasible maps with their summed shared cost and
/// summed valuation (site cost of each assigned RU).
pub fn max_cardinality_maps(topo: &Topology, cost: &CostModel, limits: OracleLimits) -> Result<Vec<MapSummary>> {
    limits.check(topo)?;
    let mut best_count = 0;
    let mut maps = Vec::new();
    enumerate(topo, |asg| {
        let count = asg.n_assigned();
        if count < best_count {
            return;
        }
        if count > best_count {
            best_count = count;
            maps.clear();
        }
        let mut tenants = vec![0usize; topo.n_sites()];
        for y in asg.x.iter().flatten() {
            tenants[*y] += 1;
        }
        let total_shared_cost = asg
            .x
            .iter()
            .flatten()
            .map(|&y| cost.site_cost(topo, y) / tenants[y] as f64)
            .sum();
        let total_valuation = asg.x.iter().flatten().map(|&y| cost.site_cost(topo, y)).sum();
        maps.push(MapSummary {
            x: asg.x.clone(),
            total_shared_cost,
            total_valuation,
        });
    });
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::truthful_bids;
    use crate::feasibility::audit;
    use crate::feasibility::tests::{ru, site, topo};
    use crate::minmax::allocate_minmax;
    use crate::synth::{random_instance, InstanceShape};
    use proptest::prelude::*;

    fn cost() -> CostModel {
        CostModel::new(100.0, 0.5e-9, 1.5)
    }

    #[test]
    fn single_ru_single_site() {
        let t = topo(vec![ru(0, 1e9, 1e9, 10.0, 10.0)], vec![site(0, 50e9, 1.5e4)], 1.0);
        let out = solve_minmax_exact(&t, &cost(), OracleLimits::default()).unwrap();
        assert_eq!(out.assignment.x, vec![Some(0)]);
        assert!((out.objective - out.assignment.opex[0]).abs() < 1e-9);
    }

    #[test]
    fn two_identical_rus_share() {
        let rus = vec![ru(0, 1e9, 1e9, 10.0, 10.0), ru(1, 1e9, 1e9, 10.0, 10.0)];
        let t = topo(rus, vec![site(0, 50e9, 1.5e4)], 1.0);
        let out = solve_minmax_exact(&t, &cost(), OracleLimits::default()).unwrap();
        assert_eq!(out.assignment.x, vec![Some(0), Some(0)]);
        assert_eq!(out.leaves, 4);
        let shared = 100.0 + cost().site_cost(&t, 0) / 2.0;
        assert!((out.objective - shared).abs() < 1e-9 * shared);
    }

    #[test]
    fn vcg_exact_prefers_one_site_then_splits_when_forced() {
        let rus = vec![ru(0, 1e9, 1e9, 10.0, 10.0), ru(1, 1e9, 1e9, 10.0, 10.0)];
        let t = topo(rus.clone(), vec![site(0, 50e9, 1.5e4), site(1, 50e9, 1.4e4)], 1.0);
        let out = solve_vcg_exact(&t, &truthful_bids(&t), &cost(), OracleLimits::default()).unwrap();
        assert_eq!(out.assignment.active_sites(), vec![1]);
        assert!((out.objective - cost().site_cost(&t, 1)).abs() < 1e-9);

        // each site fits only one RU
        let big = vec![ru(0, 2.2e9, 0.1e9, 10.0, 10.0), ru(1, 2.2e9, 0.1e9, 10.0, 10.0)];
        let t = topo(big, vec![site(0, 25e9, 1.5e4), site(1, 25e9, 1.4e4)], 1.0);
        let out = solve_vcg_exact(&t, &truthful_bids(&t), &cost(), OracleLimits::default()).unwrap();
        let both = cost().site_cost(&t, 0) + cost().site_cost(&t, 1);
        assert_eq!(out.assignment.n_assigned(), 2);
        assert!((out.objective - both).abs() < 1e-9);
    }

    #[test]
    fn caps_enforced() {
        let rus: Vec<_> = (0..9).map(|i| ru(i, 1e8, 1e8, 1.0, 1.0)).collect();
        let t = topo(rus, vec![site(0, 50e9, 1.5e4)], 1.0);
        assert!(matches!(
            solve_minmax_exact(&t, &cost(), OracleLimits::default()),
            Err(Error::InstanceTooLarge { rus: 9, .. })
        ));
    }

    #[test]
    fn total_valuation_is_not_what_the_cost_optimum_maximises() {
        // Two RUs that cannot share: the cheapest full map uses the two
        // cheap sites, while summed valuation peaks on the expensive ones.
        let big = vec![ru(0, 2.2e9, 0.1e9, 10.0, 10.0), ru(1, 2.2e9, 0.1e9, 10.0, 10.0)];
        let t = topo(
            big,
            vec![site(0, 25e9, 1e3), site(1, 25e9, 1e4), site(2, 25e9, 1e3)],
            1.0,
        );
        let opt = solve_vcg_exact(&t, &truthful_bids(&t), &cost(), OracleLimits::default()).unwrap();
        let maps = max_cardinality_maps(&t, &cost(), OracleLimits::default()).unwrap();
        let max_value = maps.iter().map(|m| m.total_valuation).fold(f64::MIN, f64::max);
        let opt_value: f64 = opt.assignment.x.iter().flatten().map(|&y| cost().site_cost(&t, y)).sum();
        assert!(opt_value < max_value);
        let min_shared = maps.iter().map(|m| m.total_shared_cost).fold(f64::MAX, f64::min);
        assert!((opt.objective - min_shared).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn oracles_are_feasible_and_no_worse_than_heuristics(seed in 0u64..10_000, n_r in 1usize..7, n_y in 1usize..4) {
            let inst = random_instance(seed, InstanceShape { n_rus: n_r, n_sites: n_y, n_mno: 3 });
            let t = &inst.topology;
            let exact = solve_minmax_exact(t, &inst.cost, OracleLimits::default()).unwrap();
            prop_assert!(audit(&exact.assignment, t).is_empty());
            let heur = allocate_minmax(t, &inst.cost).assignment;
            prop_assert!(heur.n_assigned() <= exact.assignment.n_assigned());
            if heur.n_assigned() == exact.assignment.n_assigned() {
                prop_assert!(heur.max_opex() >= exact.objective * (1.0 - 1e-9));
            }
            let bids = truthful_bids(t);
            let exact_vcg = solve_vcg_exact(t, &bids, &inst.cost, OracleLimits::default()).unwrap();
            prop_assert!(audit(&exact_vcg.assignment, t).is_empty());
            let maps = max_cardinality_maps(t, &inst.cost, OracleLimits::default()).unwrap();
            let min_shared = maps.iter().map(|m| m.total_shared_cost).fold(f64::MAX, f64::min);
            prop_assert!((exact_vcg.objective - min_shared).abs() <= 1e-9 * min_shared.max(1.0));
        }
    }
}
