//! Shared-resource and latency constraints for a candidate assignment,
//! proportional / uniform resource shares and per-RU OPEX.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{Topology, FIBER_SPEED_KM_PER_S};

/// Guard against empty-site division in proportional shares.
pub const SHARE_EPSILON: f64 = 1e-9;

/// Absolute slack on latency comparisons, seconds.
pub const LATENCY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sharing {
    /// Each RU gets capacity in proportion to its demand.
    #[default]
    Proportional,
    /// Capacity divided equally among co-sited RUs.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Default per-RU cost paid to the mediator.
    pub c_default: f64,
    /// Price per bit/s of leased link throughput.
    pub c_lambda: f64,
    /// Price per GOPS/slot of leased compute.
    pub c_p: f64,
    /// Compute discount per (RU, site); `None` means no discount anywhere.
    #[serde(default)]
    pub gamma: Option<Vec<Vec<f64>>>,
}

impl CostModel {
    pub fn new(c_default: f64, c_lambda: f64, c_p: f64) -> Self {
        Self {
            c_default,
            c_lambda,
            c_p,
            gamma: None,
        }
    }

    /// Discounts compute by `gamma0` where the RU and the Edge site belong
    /// to the same MNO.
    pub fn with_owner_discount(mut self, topo: &Topology, gamma0: f64) -> Self {
        self.gamma = Some(
            topo.rus
                .iter()
                .map(|ru| {
                    topo.clouds
                        .iter()
                        .map(|c| if c.owner_mno == Some(ru.mno) { gamma0 } else { 1.0 })
                        .collect()
                })
                .collect(),
        );
        self
    }

    pub fn gamma(&self, r: usize, y: usize) -> f64 {
        self.gamma.as_ref().map_or(1.0, |g| g[r][y])
    }

    pub fn validate(&self, topo: &Topology) -> Result<()> {
        for (name, v) in [("c_default", self.c_default), ("c_lambda", self.c_lambda), ("c_p", self.c_p)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if let Some(g) = &self.gamma {
            if g.len() != topo.n_rus() || g.iter().any(|row| row.len() != topo.n_sites()) {
                return Err(Error::Validation("gamma matrix shape must be RUs x sites".into()));
            }
            if g.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Validation("gamma entries must be in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Activation cost of a site: its full link and compute capacity.
    pub fn site_cost(&self, topo: &Topology, y: usize) -> f64 {
        let site = &topo.clouds[y];
        self.c_lambda * site.throughput() + self.c_p * site.gops()
    }

    /// OPEX of `r` as the only tenant of `y`.
    pub fn standalone_opex(&self, topo: &Topology, r: usize, y: usize) -> f64 {
        let site = &topo.clouds[y];
        self.c_default + self.c_lambda * site.throughput() + self.gamma(r, y) * self.c_p * site.gops()
    }
}

/// Aggregate demand placed on one site.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SiteLoad {
    pub w_ul: f64,
    pub w_dl: f64,
    pub gamma_ul: f64,
    pub gamma_dl: f64,
    pub count: usize,
}

impl SiteLoad {
    fn add(&mut self, topo: &Topology, r: usize) {
        let d = &topo.rus[r].demand;
        self.w_ul += d.w_ul;
        self.w_dl += d.w_dl;
        self.gamma_ul += d.gamma_ul;
        self.gamma_dl += d.gamma_dl;
        self.count += 1;
    }
}

/// Partial RU -> site map with cached shares and OPEX.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub x: Vec<Option<usize>>,
    /// Link-throughput share per RU, bit/s.
    pub shares_b: Vec<f64>,
    /// Compute share per RU, GOPS/slot.
    pub shares_g: Vec<f64>,
    pub opex: Vec<f64>,
}

impl Assignment {
    pub fn new(n_rus: usize) -> Self {
        Self {
            x: vec![None; n_rus],
            shares_b: vec![0.0; n_rus],
            shares_g: vec![0.0; n_rus],
            opex: vec![0.0; n_rus],
        }
    }

    /// Builds an assignment from a raw map and fills shares and OPEX.
    pub fn from_map(x: Vec<Option<usize>>, topo: &Topology, cost: &CostModel, sharing: Sharing) -> Self {
        let mut asg = Self::new(x.len());
        asg.x = x;
        asg.recompute(topo, cost, sharing);
        asg
    }

    pub fn n_rus(&self) -> usize {
        self.x.len()
    }

    pub fn site_of(&self, r: usize) -> Option<usize> {
        self.x[r]
    }

    pub fn members(&self, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.x
            .iter()
            .enumerate()
            .filter(move |(_, s)| **s == Some(y))
            .map(|(r, _)| r)
    }

    /// Active sites in increasing id order.
    pub fn active_sites(&self) -> Vec<usize> {
        let mut sites: Vec<usize> = self.x.iter().flatten().copied().collect();
        sites.sort_unstable();
        sites.dedup();
        sites
    }

    pub fn n_assigned(&self) -> usize {
        self.x.iter().filter(|s| s.is_some()).count()
    }

    pub fn place(&mut self, r: usize, y: usize) {
        self.x[r] = Some(y);
    }

    pub fn remove(&mut self, r: usize) {
        self.x[r] = None;
    }

    pub fn max_opex(&self) -> f64 {
        self.opex.iter().copied().fold(0.0, f64::max)
    }

    pub fn load(&self, topo: &Topology, y: usize) -> SiteLoad {
        let mut load = SiteLoad::default();
        for r in self.members(y) {
            load.add(topo, r);
        }
        load
    }

    /// Load of `y` if `r` were moved onto it.
    pub fn load_with(&self, topo: &Topology, y: usize, r: usize) -> SiteLoad {
        let mut load = SiteLoad::default();
        for j in self.members(y).filter(|&j| j != r) {
            load.add(topo, j);
        }
        load.add(topo, r);
        load
    }

    /// Refreshes every RU's shares and OPEX from the current map.
    pub fn recompute(&mut self, topo: &Topology, cost: &CostModel, sharing: Sharing) {
        let mut loads = vec![SiteLoad::default(); topo.n_sites()];
        for (r, s) in self.x.iter().enumerate() {
            if let Some(y) = s {
                loads[*y].add(topo, r);
            }
        }
        for r in 0..self.n_rus() {
            match self.x[r] {
                Some(y) => {
                    let (b, g) = shares_under(topo, r, y, &loads[y], sharing);
                    self.shares_b[r] = b;
                    self.shares_g[r] = g;
                    self.opex[r] = opex_from_shares(cost, r, y, b, g);
                }
                None => {
                    self.shares_b[r] = 0.0;
                    self.shares_g[r] = 0.0;
                    self.opex[r] = 0.0;
                }
            }
        }
    }
}

/// Link and compute shares of `r` on `y` given the site's total load.
pub fn shares_under(topo: &Topology, r: usize, y: usize, load: &SiteLoad, sharing: Sharing) -> (f64, f64) {
    let site = &topo.clouds[y];
    let d = &topo.rus[r].demand;
    match sharing {
        Sharing::Proportional => (
            d.w_ul * site.b_ul / (SHARE_EPSILON + load.w_ul) + d.w_dl * site.b_dl / (SHARE_EPSILON + load.w_dl),
            d.gamma_ul * site.g_ul / (SHARE_EPSILON + load.gamma_ul)
                + d.gamma_dl * site.g_dl / (SHARE_EPSILON + load.gamma_dl),
        ),
        Sharing::Uniform => {
            let n = load.count.max(1) as f64;
            (site.throughput() / n, site.gops() / n)
        }
    }
}

fn opex_from_shares(cost: &CostModel, r: usize, y: usize, b: f64, g: f64) -> f64 {
    cost.c_default + cost.c_lambda * b + cost.gamma(r, y) * cost.c_p * g
}

/// OPEX `r` would have if moved onto `y`, everyone else unchanged.
pub fn tentative_opex(asg: &Assignment, topo: &Topology, cost: &CostModel, r: usize, y: usize, sharing: Sharing) -> f64 {
    let load = asg.load_with(topo, y, r);
    let (b, g) = shares_under(topo, r, y, &load, sharing);
    opex_from_shares(cost, r, y, b, g)
}

fn require_on(asg: &Assignment, r: usize, y: usize) -> Result<()> {
    if asg.site_of(r) == Some(y) {
        Ok(())
    } else {
        Err(Error::NotAssigned { ru: r, site: y })
    }
}

pub fn share_throughput(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> Result<f64> {
    require_on(asg, r, y)?;
    Ok(shares_under(topo, r, y, &asg.load(topo, y), Sharing::Proportional).0)
}

pub fn share_gops(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> Result<f64> {
    require_on(asg, r, y)?;
    Ok(shares_under(topo, r, y, &asg.load(topo, y), Sharing::Proportional).1)
}

fn bursts_per_slot(topo: &Topology, y: usize) -> f64 {
    // guard against ratios like 500/31.25 landing one ulp above an integer
    (topo.slot_duration / topo.clouds[y].burst_interval - 1e-9).ceil()
}

fn fh_transport(topo: &Topology, r: usize, y: usize, total_w: f64, capacity: f64) -> f64 {
    topo.dist[r][y] / FIBER_SPEED_KM_PER_S
        + bursts_per_slot(topo, y) * total_w * topo.clouds[y].burst_interval / capacity
}

fn ul_latency_under(topo: &Topology, r: usize, y: usize, load: &SiteLoad) -> f64 {
    topo.queue_delay[r][y] + fh_transport(topo, r, y, load.w_ul, topo.clouds[y].b_ul)
}

fn dl_latency_under(topo: &Topology, r: usize, y: usize, load: &SiteLoad) -> f64 {
    fh_transport(topo, r, y, load.w_dl, topo.clouds[y].b_dl)
}

fn proc_ratio_under(topo: &Topology, r: usize, y: usize, load: &SiteLoad, dir: Direction) -> f64 {
    let d = &topo.rus[r].demand;
    let site = &topo.clouds[y];
    match dir {
        Direction::Uplink => d.eta_ul / d.h_ul + load.gamma_ul / site.g_ul,
        Direction::Downlink => d.eta_dl / d.h_dl + load.gamma_dl / site.g_dl,
    }
}

pub fn uplink_fh_latency(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> Result<f64> {
    require_on(asg, r, y)?;
    Ok(ul_latency_under(topo, r, y, &asg.load(topo, y)))
}

pub fn downlink_fh_latency(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> Result<f64> {
    require_on(asg, r, y)?;
    Ok(dl_latency_under(topo, r, y, &asg.load(topo, y)))
}

pub fn proc_latency_ratio(asg: &Assignment, topo: &Topology, r: usize, y: usize, dir: Direction) -> Result<f64> {
    require_on(asg, r, y)?;
    Ok(proc_ratio_under(topo, r, y, &asg.load(topo, y), dir))
}

/// Latency figures of `r` on `y` under the given site load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyReport {
    pub fh_ul: f64,
    pub fh_dl: f64,
    pub proc_ul: f64,
    pub proc_dl: f64,
}

impl LatencyReport {
    pub fn under(topo: &Topology, r: usize, y: usize, load: &SiteLoad) -> Self {
        Self {
            fh_ul: ul_latency_under(topo, r, y, load),
            fh_dl: dl_latency_under(topo, r, y, load),
            proc_ul: proc_ratio_under(topo, r, y, load, Direction::Uplink),
            proc_dl: proc_ratio_under(topo, r, y, load, Direction::Downlink),
        }
    }

    pub fn violations(&self, topo: &Topology, r: usize) -> Vec<Violation> {
        let ru = &topo.rus[r];
        let slot = topo.slot_duration;
        let mut out = Vec::new();
        if self.fh_ul > ru.delta_h + LATENCY_TOLERANCE {
            out.push(Violation::UplinkFronthaul(r));
        }
        if self.fh_dl > ru.delta_h + LATENCY_TOLERANCE {
            out.push(Violation::DownlinkFronthaul(r));
        }
        if self.proc_ul * slot > ru.delta_rdc + LATENCY_TOLERANCE {
            out.push(Violation::UplinkProcessing(r));
        }
        if self.proc_dl * slot > ru.delta_rdc + LATENCY_TOLERANCE {
            out.push(Violation::DownlinkProcessing(r));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// RU and site are not linked by any virtual PON.
    Connectivity { ru: usize, site: usize },
    UplinkFronthaul(usize),
    DownlinkFronthaul(usize),
    UplinkProcessing(usize),
    DownlinkProcessing(usize),
    /// RU mapped to a site index that does not exist.
    UnknownSite { ru: usize, site: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Connectivity { ru, site } => write!(f, "connectivity(ru {ru}, site {site})"),
            Violation::UplinkFronthaul(r) => write!(f, "uplink_fronthaul(ru {r})"),
            Violation::DownlinkFronthaul(r) => write!(f, "downlink_fronthaul(ru {r})"),
            Violation::UplinkProcessing(r) => write!(f, "uplink_processing(ru {r})"),
            Violation::DownlinkProcessing(r) => write!(f, "downlink_processing(ru {r})"),
            Violation::UnknownSite { ru, site } => write!(f, "unknown_site(ru {ru}, site {site})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Check {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Whether `r` can join `y`: connectivity plus every latency bound of every
/// RU that would be on `y`, incumbents included.
pub fn check_assignable(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> Check {
    if !topo.z[r][y] {
        return Check {
            ok: false,
            violations: vec![Violation::Connectivity { ru: r, site: y }],
        };
    }
    let load = asg.load_with(topo, y, r);
    let mut violations = Vec::new();
    for j in asg.members(y).filter(|&j| j != r).chain(std::iter::once(r)) {
        violations.extend(LatencyReport::under(topo, j, y, &load).violations(topo, j));
    }
    Check {
        ok: violations.is_empty(),
        violations,
    }
}

/// Cheap yes/no form of [`check_assignable`] that stops at the first failure.
pub fn is_assignable(asg: &Assignment, topo: &Topology, r: usize, y: usize) -> bool {
    if !topo.z[r][y] {
        return false;
    }
    let load = asg.load_with(topo, y, r);
    asg.members(y)
        .filter(|&j| j != r)
        .chain(std::iter::once(r))
        .all(|j| LatencyReport::under(topo, j, y, &load).violations(topo, j).is_empty())
}

pub fn ru_opex(asg: &Assignment, topo: &Topology, cost: &CostModel, r: usize) -> f64 {
    match asg.site_of(r) {
        Some(y) => {
            let (b, g) = shares_under(topo, r, y, &asg.load(topo, y), Sharing::Proportional);
            opex_from_shares(cost, r, y, b, g)
        }
        None => 0.0,
    }
}

/// Full post-hoc re-validation of an assignment.
pub fn audit(asg: &Assignment, topo: &Topology) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut loads = vec![SiteLoad::default(); topo.n_sites()];
    for (r, s) in asg.x.iter().enumerate() {
        if let Some(y) = *s {
            if y >= topo.n_sites() {
                out.push(Violation::UnknownSite { ru: r, site: y });
            } else {
                loads[y].add(topo, r);
            }
        }
    }
    for (r, s) in asg.x.iter().enumerate() {
        let Some(y) = *s else { continue };
        if y >= topo.n_sites() {
            continue;
        }
        if !topo.z[r][y] {
            out.push(Violation::Connectivity { ru: r, site: y });
        }
        out.extend(LatencyReport::under(topo, r, y, &loads[y]).violations(topo, r));
    }
    out
}
