//! Reference allocators: nearest-first greedy and an epsilon-greedy
//! multi-arm bandit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasibility::{is_assignable, Assignment, CostModel, LatencyReport, Sharing};
use crate::minmax::sort_rus;
use crate::topology::Topology;

/// Floor on latencies in reward ratios, seconds.
const MIN_LATENCY: f64 = 1e-12;

/// Each RU, in demand order, joins the closest site that can take it.
pub fn allocate_nearest_first(topo: &Topology, cost: &CostModel, sharing: Sharing) -> Assignment {
    let mut asg = Assignment::new(topo.n_rus());
    for r in sort_rus(&topo.rus) {
        let mut sites: Vec<usize> = (0..topo.n_sites()).filter(|&y| topo.z[r][y]).collect();
        sites.sort_by(|&a, &b| topo.dist[r][a].total_cmp(&topo.dist[r][b]).then(a.cmp(&b)));
        if let Some(y) = sites.into_iter().find(|&y| is_assignable(&asg, topo, r, y)) {
            asg.place(r, y);
        }
    }
    asg.recompute(topo, cost, sharing);
    asg
}

/// Mean of latency-bound slack ratios for `r` at its current site; 0 when
/// `r` is not on `y` or any of its bounds is violated.
pub fn bandit_reward(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> f64 {
    if asg.site_of(r) != Some(y) {
        return 0.0;
    }
    let report = LatencyReport::under(topo, r, y, &asg.load(topo, y));
    if !report.violations(topo, r).is_empty() {
        return 0.0;
    }
    reward_from(topo, r, &report)
}

fn reward_from(topo: &Topology, r: usize, report: &LatencyReport) -> f64 {
    let ru = &topo.rus[r];
    let fh = report.fh_ul.max(report.fh_dl).max(MIN_LATENCY);
    let proc = (report.proc_ul.max(report.proc_dl) * topo.slot_duration).max(MIN_LATENCY);
    0.5 * ru.delta_h / fh + 0.5 * ru.delta_rdc / proc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_q: f64,
}

fn default_epsilon() -> f64 {
    0.3
}

fn default_episodes() -> usize {
    1000
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            epsilon: default_epsilon(),
            episodes: default_episodes(),
            seed: 0,
            initial_q: 0.0,
        }
    }
}

impl BanditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Validation(format!("epsilon must be in [0, 1], got {}", self.epsilon)));
        }
        if self.episodes == 0 {
            return Err(Error::Validation("episodes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Learned action values, one row per RU over its connected sites.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    pub arms: Vec<Vec<usize>>,
    pub q: Vec<Vec<f64>>,
    pub pulls: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditOutcome {
    pub assignment: Assignment,
    pub state: BanditState,
}

pub fn allocate_bandit(topo: &Topology, cost: &CostModel, bcfg: &BanditConfig, sharing: Sharing) -> Result<Assignment> {
    let q0 = vec![vec![bcfg.initial_q; topo.n_sites()]; topo.n_rus()];
    Ok(allocate_bandit_with_estimates(topo, cost, bcfg, sharing, &q0)?.assignment)
}

/// Bandit run from explicit initial estimates `q0[r][y]` (entries for
/// unconnected sites are ignored).
///
/// Every episode starts from an empty system and visits RUs in a seeded
/// random order; a join that violates any bound is refused and scores 0.
/// After training, one purely greedy episode produces the returned
/// assignment.
pub fn allocate_bandit_with_estimates(
    topo: &Topology,
    cost: &CostModel,
    bcfg: &BanditConfig,
    sharing: Sharing,
    q0: &[Vec<f64>],
) -> Result<BanditOutcome> {
    bcfg.validate()?;
    if q0.len() != topo.n_rus() || q0.iter().any(|row| row.len() != topo.n_sites()) {
        return Err(Error::InvalidParameter("initial estimates must be RUs x sites".into()));
    }
    let n_r = topo.n_rus();
    let arms: Vec<Vec<usize>> = (0..n_r)
        .map(|r| (0..topo.n_sites()).filter(|&y| topo.z[r][y]).collect())
        .collect();
    let mut state = BanditState {
        q: arms.iter().enumerate().map(|(r, a)| a.iter().map(|&y| q0[r][y]).collect()).collect(),
        pulls: arms.iter().map(|a| vec![0; a.len()]).collect(),
        arms,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(bcfg.seed);
    let mut order: Vec<usize> = (0..n_r).collect();

    for _ in 0..bcfg.episodes {
        order.shuffle(&mut rng);
        let mut asg = Assignment::new(n_r);
        for &r in &order {
            if state.arms[r].is_empty() {
                continue;
            }
            let arm = if rng.gen_bool(bcfg.epsilon) {
                rng.gen_range(0..state.arms[r].len())
            } else {
                greedy_arm(&state.q[r])
            };
            let y = state.arms[r][arm];
            let reward = if is_assignable(&asg, topo, r, y) {
                asg.place(r, y);
                bandit_reward(&asg, topo, r, y)
            } else {
                0.0
            };
            state.pulls[r][arm] += 1;
            state.q[r][arm] += (reward - state.q[r][arm]) / state.pulls[r][arm] as f64;
        }
    }

    order.shuffle(&mut rng);
    let mut asg = Assignment::new(n_r);
    for &r in &order {
        if state.arms[r].is_empty() {
            continue;
        }
        let y = state.arms[r][greedy_arm(&state.q[r])];
        if is_assignable(&asg, topo, r, y) {
            asg.place(r, y);
        }
    }
    asg.recompute(topo, cost, sharing);
    Ok(BanditOutcome { assignment: asg, state })
}

/// Highest estimate, lowest index on ties.
fn greedy_arm(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate() {
        if *v > q[best] {
            best = i;
        }
    }
    best
}
