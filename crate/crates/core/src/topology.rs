//! Physical deployment: radio units, reflective splitters, Edge/OLT-Cloud
//! sites, fiber-path distances and East-West / North-South reachability.
//!
//! Each central office roots a PON tree. Level-1 reflective splitters
//! aggregate RUs, a level-2 splitter aggregates level-1 splitters. An RU can
//! reach an Edge-Cloud that hangs off the same level-1 splitter, or off
//! another level-1 splitter under the same level-2 splitter. An RU reaches
//! only the OLT-Cloud of its own CO.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::BurstConfig;

/// Propagation speed of light in fiber, km/s.
pub const FIBER_SPEED_KM_PER_S: f64 = 2e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellType {
    Macro,
    Small,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceClass {
    Urllc,
    Embb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    Edge,
    Olt,
}

/// Per-RU resource demand vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuDemand {
    /// Uplink / downlink front/mid-haul datarate, bit/s.
    pub w_ul: f64,
    pub w_dl: f64,
    /// DU-CU processing demand, GOPS/slot.
    pub gamma_ul: f64,
    pub gamma_dl: f64,
    /// RU-side processing demand, GOPS/slot.
    pub eta_ul: f64,
    pub eta_dl: f64,
    /// RU-side processing capacity, GOPS/slot.
    pub h_ul: f64,
    pub h_dl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioUnit {
    pub id: usize,
    pub mno: usize,
    pub position: Point,
    pub cell: CellType,
    pub service: ServiceClass,
    #[serde(flatten)]
    pub demand: RuDemand,
    /// One-way front/mid-haul latency bound, seconds.
    pub delta_h: f64,
    /// RU-DU-CU processing latency bound, seconds.
    pub delta_rdc: f64,
}

impl RadioUnit {
    pub fn validate(&self) -> Result<()> {
        let d = &self.demand;
        let all = [
            d.w_ul, d.w_dl, d.gamma_ul, d.gamma_dl, d.eta_ul, d.eta_dl, d.h_ul, d.h_dl,
        ];
        if all.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Validation(format!("RU {}: demands must be finite and >= 0", self.id)));
        }
        if d.h_ul < d.eta_ul || d.h_dl < d.eta_dl {
            return Err(Error::Validation(format!(
                "RU {}: RU processing capacity below its own RU-side demand",
                self.id
            )));
        }
        if d.h_ul <= 0.0 || d.h_dl <= 0.0 {
            return Err(Error::Validation(format!("RU {}: RU processing capacity must be > 0", self.id)));
        }
        if !(self.delta_h > 0.0) || !(self.delta_rdc > 0.0) {
            return Err(Error::Validation(format!("RU {}: latency bounds must be > 0", self.id)));
        }
        Ok(())
    }

    pub fn max_rate(&self) -> f64 {
        self.demand.w_ul.max(self.demand.w_dl)
    }

    pub fn max_gops(&self) -> f64 {
        self.demand.gamma_ul.max(self.demand.gamma_dl)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudSite {
    pub id: usize,
    pub kind: SiteKind,
    pub position: Point,
    /// MNO owning the co-located macro cell, for Edge-Clouds.
    #[serde(default)]
    pub owner_mno: Option<usize>,
    /// Link throughput caps, bit/s.
    pub b_ul: f64,
    pub b_dl: f64,
    /// Compute caps, GOPS/slot.
    pub g_ul: f64,
    pub g_dl: f64,
    /// Burst interval of the PON uplink, seconds.
    pub burst_interval: f64,
}

impl CloudSite {
    pub fn validate(&self) -> Result<()> {
        let caps = [self.b_ul, self.b_dl, self.g_ul, self.g_dl];
        if caps.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::Validation(format!("site {}: capacities must be > 0", self.id)));
        }
        if !(self.burst_interval > 0.0) {
            return Err(Error::Validation(format!("site {}: burst interval must be > 0", self.id)));
        }
        Ok(())
    }

    pub fn throughput(&self) -> f64 {
        self.b_ul + self.b_dl
    }

    pub fn gops(&self) -> f64 {
        self.g_ul + self.g_dl
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Splitter {
    pub position: Point,
    /// RU ids for a level-1 splitter, level-1 indices for a level-2 one.
    pub members: Vec<usize>,
}

/// Where a cloud site attaches to the PON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    /// Edge-Cloud behind a level-1 splitter.
    Level1(usize),
    /// OLT-Cloud at a central office.
    Co(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PonGeometry {
    pub level1: Vec<Splitter>,
    pub level2: Vec<Splitter>,
    pub co_positions: Vec<Point>,
    /// Level-1 splitter of each RU.
    pub ru_level1: Vec<usize>,
    /// PON tree (CO index) of each RU.
    pub ru_co: Vec<usize>,
    pub site_attachment: Vec<Attachment>,
}

impl PonGeometry {
    fn level2_of(&self, l1: usize) -> Option<usize> {
        self.level2.iter().position(|s| s.members.contains(&l1))
    }

    fn connected(&self, r: usize, y: usize) -> bool {
        let l1 = self.ru_level1[r];
        match self.site_attachment[y] {
            Attachment::Co(co) => self.ru_co[r] == co,
            Attachment::Level1(site_l1) => {
                site_l1 == l1
                    || matches!(
                        (self.level2_of(l1), self.level2_of(site_l1)),
                        (Some(a), Some(b)) if a == b
                    )
            }
        }
    }

    /// Length of the tree path RU -> level-1 [-> level-2 -> level-1] -> site.
    fn path_length(&self, ru_pos: &Point, site_pos: &Point, r: usize, y: usize) -> Option<f64> {
        if !self.connected(r, y) {
            return None;
        }
        let l1 = self.ru_level1[r];
        let l1_pos = &self.level1[l1].position;
        let to_l1 = ru_pos.dist(l1_pos);
        match self.site_attachment[y] {
            Attachment::Level1(site_l1) if site_l1 == l1 => Some(to_l1 + l1_pos.dist(site_pos)),
            Attachment::Level1(site_l1) => {
                let l2_pos = &self.level2[self.level2_of(l1)?].position;
                let site_l1_pos = &self.level1[site_l1].position;
                Some(
                    to_l1
                        + l1_pos.dist(l2_pos)
                        + l2_pos.dist(site_l1_pos)
                        + site_l1_pos.dist(site_pos),
                )
            }
            Attachment::Co(_) => {
                let via_l2 = match self.level2_of(l1) {
                    Some(l2) => {
                        let l2_pos = &self.level2[l2].position;
                        l1_pos.dist(l2_pos) + l2_pos.dist(site_pos)
                    }
                    None => l1_pos.dist(site_pos),
                };
                Some(to_l1 + via_l2)
            }
        }
    }
}

/// A deployment ready for allocation. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub rus: Vec<RadioUnit>,
    pub clouds: Vec<CloudSite>,
    pub n_mno: usize,
    #[serde(default)]
    pub geometry: Option<PonGeometry>,
    /// Reachability flags, RU x site.
    pub z: Vec<Vec<bool>>,
    /// Fiber distance in km, RU x site. Unused where `z` is false.
    pub dist: Vec<Vec<f64>>,
    /// Uplink queuing delay at the ONU, seconds, RU x site.
    pub queue_delay: Vec<Vec<f64>>,
    /// Transmission time interval, seconds.
    pub slot_duration: f64,
}

impl Topology {
    /// Builds a topology from explicit matrices, with no PON geometry.
    pub fn from_matrices(
        rus: Vec<RadioUnit>,
        clouds: Vec<CloudSite>,
        n_mno: usize,
        z: Vec<Vec<bool>>,
        dist: Vec<Vec<f64>>,
        queue_delay: Vec<Vec<f64>>,
        slot_duration: f64,
    ) -> Result<Self> {
        let topo = Self {
            rus,
            clouds,
            n_mno,
            geometry: None,
            z,
            dist,
            queue_delay,
            slot_duration,
        };
        topo.validate()?;
        Ok(topo)
    }

    /// Builds a topology from PON geometry; `z` and `dist` are derived.
    pub fn from_geometry(
        rus: Vec<RadioUnit>,
        clouds: Vec<CloudSite>,
        n_mno: usize,
        geometry: PonGeometry,
        queue_delay: f64,
        slot_duration: f64,
    ) -> Result<Self> {
        let n_r = rus.len();
        let n_y = clouds.len();
        let mut topo = Self {
            rus,
            clouds,
            n_mno,
            geometry: Some(geometry),
            z: vec![vec![false; n_y]; n_r],
            dist: vec![vec![0.0; n_y]; n_r],
            queue_delay: vec![vec![queue_delay; n_y]; n_r],
            slot_duration,
        };
        topo.z = connectivity(&topo);
        for r in 0..n_r {
            for y in 0..n_y {
                if topo.z[r][y] {
                    topo.dist[r][y] = fiber_distance(&topo, r, y)?;
                }
            }
        }
        topo.validate()?;
        Ok(topo)
    }

    pub fn validate(&self) -> Result<()> {
        let n_r = self.rus.len();
        let n_y = self.clouds.len();
        for (i, ru) in self.rus.iter().enumerate() {
            if ru.id != i {
                return Err(Error::Validation(format!("RU at index {i} has id {}", ru.id)));
            }
            if ru.mno >= self.n_mno {
                return Err(Error::Validation(format!("RU {i} owned by unknown MNO {}", ru.mno)));
            }
            ru.validate()?;
        }
        for (i, site) in self.clouds.iter().enumerate() {
            if site.id != i {
                return Err(Error::Validation(format!("site at index {i} has id {}", site.id)));
            }
            site.validate()?;
        }
        let shape_ok = |rows: usize, cols: &dyn Fn(usize) -> usize| {
            rows == n_r && (0..n_r).all(|r| cols(r) == n_y)
        };
        if !shape_ok(self.z.len(), &|r| self.z[r].len())
            || !shape_ok(self.dist.len(), &|r| self.dist[r].len())
            || !shape_ok(self.queue_delay.len(), &|r| self.queue_delay[r].len())
        {
            return Err(Error::Validation(format!("matrices must be {n_r} x {n_y}")));
        }
        if self
            .dist
            .iter()
            .chain(self.queue_delay.iter())
            .flatten()
            .any(|v| !(*v >= 0.0))
        {
            return Err(Error::Validation("distances and queuing delays must be >= 0".into()));
        }
        if !(self.slot_duration > 0.0) {
            return Err(Error::Validation("slot duration must be > 0".into()));
        }
        if let Some(g) = &self.geometry {
            if g.ru_level1.len() != n_r || g.ru_co.len() != n_r || g.site_attachment.len() != n_y {
                return Err(Error::Validation("geometry does not match RU/site counts".into()));
            }
            if g.ru_level1.iter().any(|&l| l >= g.level1.len())
                || g.ru_co.iter().any(|&c| c >= g.co_positions.len())
            {
                return Err(Error::Validation("geometry references unknown splitter or CO".into()));
            }
        }
        Ok(())
    }

    pub fn n_rus(&self) -> usize {
        self.rus.len()
    }

    pub fn n_sites(&self) -> usize {
        self.clouds.len()
    }

    /// Number of RUs owned by each MNO.
    pub fn mno_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_mno];
        for ru in &self.rus {
            counts[ru.mno] += 1;
        }
        counts
    }

    /// Copy of this topology with every RU demand scaled by `factor`.
    /// RU-side processing capacity is hardware and stays fixed.
    pub fn with_scaled_demands(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for ru in &mut out.rus {
            let d = &mut ru.demand;
            d.w_ul *= factor;
            d.w_dl *= factor;
            d.gamma_ul *= factor;
            d.gamma_dl *= factor;
            d.eta_ul *= factor;
            d.eta_dl *= factor;
        }
        out
    }

    /// Copy of this topology with every RU's demand replaced by `demand`.
    pub fn with_uniform_demand(&self, demand: RuDemand) -> Self {
        let mut out = self.clone();
        for ru in &mut out.rus {
            ru.demand = demand;
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let topo: Topology = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        topo.validate()?;
        Ok(topo)
    }
}

/// Reachability matrix. Derived from the PON tree when geometry is known,
/// otherwise the stored flags.
pub fn connectivity(topo: &Topology) -> Vec<Vec<bool>> {
    match &topo.geometry {
        Some(g) => (0..topo.n_rus())
            .map(|r| (0..topo.n_sites()).map(|y| g.connected(r, y)).collect())
            .collect(),
        None => topo.z.clone(),
    }
}

/// Fiber path length between RU `r` and site `y`, km.
pub fn fiber_distance(topo: &Topology, r: usize, y: usize) -> Result<f64> {
    match &topo.geometry {
        Some(g) => g
            .path_length(&topo.rus[r].position, &topo.clouds[y].position, r, y)
            .ok_or(Error::NotConnected { ru: r, site: y }),
        None => {
            if topo.z[r][y] {
                Ok(topo.dist[r][y])
            } else {
                Err(Error::NotConnected { ru: r, site: y })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Grid,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeploymentSpec {
    /// Side of the square deployment area, km.
    pub area_side: f64,
    pub n_macro: usize,
    pub n_small: usize,
    pub mno_shares: Vec<f64>,
    pub n_level1: usize,
    pub seed: u64,
    pub placement: Placement,
}

impl Default for DeploymentSpec {
    fn default() -> Self {
        Self {
            area_side: 5.0,
            n_macro: 8,
            n_small: 30,
            mno_shares: vec![0.2, 0.3, 0.5],
            n_level1: 6,
            seed: 42,
            placement: Placement::Grid,
        }
    }
}

impl DeploymentSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.area_side > 0.0) {
            return Err(Error::Validation(format!("area_side must be > 0, got {}", self.area_side)));
        }
        if self.mno_shares.is_empty() || self.mno_shares.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Validation("mno_shares must be non-empty and >= 0".into()));
        }
        let total: f64 = self.mno_shares.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("mno_shares must sum to 1, got {total}")));
        }
        Ok(())
    }

    pub fn n_rus(&self) -> usize {
        self.n_macro + self.n_small
    }
}

/// Latency budgets and timing shared by every RU and site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkParams {
    /// One-way front/mid-haul bound, seconds.
    pub fronthaul_bound: f64,
    /// RU-DU-CU processing bound for uRLLC RUs, seconds.
    pub rdc_bound_urllc: f64,
    /// RU-DU-CU processing bound for eMBB RUs, seconds.
    pub rdc_bound_embb: f64,
    /// ONU uplink queuing delay, seconds.
    pub queue_delay: f64,
    /// Slot (TTI) duration, seconds.
    pub slot_duration: f64,
    /// Fraction of RUs serving uRLLC.
    pub urllc_fraction: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            fronthaul_bound: 100e-6,
            rdc_bound_urllc: 325e-6,
            rdc_bound_embb: 975e-6,
            queue_delay: 15e-6,
            slot_duration: 500e-6,
            urllc_fraction: 0.25,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fronthaul_bound", self.fronthaul_bound),
            ("rdc_bound_urllc", self.rdc_bound_urllc),
            ("rdc_bound_embb", self.rdc_bound_embb),
            ("slot_duration", self.slot_duration),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.queue_delay >= 0.0) {
            return Err(Error::Validation("queue_delay must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.urllc_fraction) {
            return Err(Error::Validation("urllc_fraction must be in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Total (uplink + downlink) capacities of one class of site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteCapacity {
    /// Aggregate link throughput, bit/s, split evenly between directions.
    pub throughput: f64,
    /// Aggregate compute, GOPS/slot, split evenly between directions.
    pub gops: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteCapacities {
    pub edge: SiteCapacity,
    pub olt: SiteCapacity,
}

/// Deterministic apportionment sequence: at position `k` (1-based) emit the
/// group with the largest deficit `k * weight - emitted`, lowest index on
/// ties, skipping groups whose `limit` is exhausted.
pub fn quota_sequence(weights: &[f64], n: usize, limits: Option<&[usize]>) -> Vec<usize> {
    let mut emitted = vec![0usize; weights.len()];
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut best: Option<(usize, f64)> = None;
        for (m, w) in weights.iter().enumerate() {
            if limits.is_some_and(|l| emitted[m] >= l[m]) {
                continue;
            }
            let deficit = k as f64 * w - emitted[m] as f64;
            if best.is_none_or(|(_, d)| deficit > d + 1e-12) {
                best = Some((m, deficit));
            }
        }
        let Some((m, _)) = best else { break };
        emitted[m] += 1;
        out.push(m);
    }
    out
}

fn grid_positions(n: usize, side: f64) -> Vec<Point> {
    if n == 0 {
        return Vec::new();
    }
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    (0..n)
        .map(|i| {
            let (c, r) = (i % cols, i / cols);
            Point::new(
                (c as f64 + 0.5) * side / cols as f64,
                (r as f64 + 0.5) * side / rows as f64,
            )
        })
        .collect()
}

/// Lloyd's k-means with index-spread seeding. Returns centroids and labels.
pub fn kmeans(points: &[Point], k: usize, seed: u64, max_iter: usize) -> (Vec<Point>, Vec<usize>) {
    let n = points.len();
    if k == 0 || n == 0 {
        return (Vec::new(), vec![0; n]);
    }
    let offset = ChaCha8Rng::seed_from_u64(seed).gen_range(0..n);
    let mut centroids: Vec<Point> = (0..k).map(|i| points[(offset + i * n / k) % n]).collect();
    let mut labels = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let d = p.dist(centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let (mut sx, mut sy, mut cnt) = (0.0, 0.0, 0usize);
            for (p, _) in points.iter().zip(&labels).filter(|(_, l)| **l == c) {
                sx += p.x;
                sy += p.y;
                cnt += 1;
            }
            if cnt > 0 {
                *centroid = Point::new(sx / cnt as f64, sy / cnt as f64);
            }
        }
    }
    (centroids, labels)
}

/// Generates a deployment: COs at `(0,0)` and `(D,D)`, macro and small cells
/// on a grid (or uniformly at random), k-means level-1 splitters, one level-2
/// splitter at the area centre, an Edge-Cloud at every macro cell and an
/// OLT-Cloud at each CO. Every RU starts with `demand`.
pub fn generate_topology(
    spec: &DeploymentSpec,
    demand: &RuDemand,
    burst: &BurstConfig,
    net: &NetworkParams,
    caps: &SiteCapacities,
) -> Result<Topology> {
    spec.validate()?;
    net.validate()?;
    burst.validate()?;
    let n = spec.n_rus();
    if spec.n_level1 > n {
        return Err(Error::InfeasibleSpec(format!(
            "{} level-1 splitters for {} RUs",
            spec.n_level1, n
        )));
    }
    if n > 0 && spec.n_level1 == 0 {
        return Err(Error::InfeasibleSpec("at least one level-1 splitter is needed".into()));
    }
    let side = spec.area_side;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut positions = match spec.placement {
        Placement::Grid => {
            let mut p = grid_positions(spec.n_macro, side);
            p.extend(grid_positions(spec.n_small, side));
            p
        }
        Placement::UniformRandom => (0..n)
            .map(|_| Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)))
            .collect(),
    };
    positions.truncate(n);

    // ownership and service class follow seeded permutations of the RUs
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut mno = vec![0; n];
    for (slot, owner) in order
        .iter()
        .zip(quota_sequence(&spec.mno_shares, n, None))
    {
        mno[*slot] = owner;
    }
    order.shuffle(&mut rng);
    let n_urllc = (net.urllc_fraction * n as f64).round() as usize;
    let mut service = vec![ServiceClass::Embb; n];
    for &r in order.iter().take(n_urllc) {
        service[r] = ServiceClass::Urllc;
    }

    let rus: Vec<RadioUnit> = (0..n)
        .map(|i| RadioUnit {
            id: i,
            mno: mno[i],
            position: positions[i],
            cell: if i < spec.n_macro { CellType::Macro } else { CellType::Small },
            service: service[i],
            demand: *demand,
            delta_h: net.fronthaul_bound,
            delta_rdc: match service[i] {
                ServiceClass::Urllc => net.rdc_bound_urllc,
                ServiceClass::Embb => net.rdc_bound_embb,
            },
        })
        .collect();

    let (centroids, labels) = kmeans(&positions, spec.n_level1, rng.gen(), 100);
    let level1: Vec<Splitter> = centroids
        .iter()
        .enumerate()
        .map(|(c, pos)| Splitter {
            position: *pos,
            members: (0..n).filter(|&i| labels[i] == c).collect(),
        })
        .collect();
    let level2 = vec![Splitter {
        position: Point::new(side / 2.0, side / 2.0),
        members: (0..level1.len()).collect(),
    }];
    let co_positions = vec![Point::new(0.0, 0.0), Point::new(side, side)];
    // on or below the main diagonal -> CO (0,0)
    let ru_co: Vec<usize> = positions.iter().map(|p| usize::from(p.y > p.x)).collect();

    let half = |c: &SiteCapacity| (c.throughput / 2.0, c.gops / 2.0);
    let mut clouds = Vec::new();
    let mut site_attachment = Vec::new();
    let (eb, eg) = half(&caps.edge);
    for ru in rus.iter().filter(|ru| ru.cell == CellType::Macro) {
        clouds.push(CloudSite {
            id: clouds.len(),
            kind: SiteKind::Edge,
            position: ru.position,
            owner_mno: Some(ru.mno),
            b_ul: eb,
            b_dl: eb,
            g_ul: eg,
            g_dl: eg,
            burst_interval: burst.burst_interval,
        });
        site_attachment.push(Attachment::Level1(labels[ru.id]));
    }
    let (ob, og) = half(&caps.olt);
    for (co, pos) in co_positions.iter().enumerate() {
        clouds.push(CloudSite {
            id: clouds.len(),
            kind: SiteKind::Olt,
            position: *pos,
            owner_mno: None,
            b_ul: ob,
            b_dl: ob,
            g_ul: og,
            g_dl: og,
            burst_interval: burst.burst_interval,
        });
        site_attachment.push(Attachment::Co(co));
    }

    let geometry = PonGeometry {
        level1,
        level2,
        co_positions,
        ru_level1: labels,
        ru_co,
        site_attachment,
    };
    Topology::from_geometry(
        rus,
        clouds,
        spec.mno_shares.len(),
        geometry,
        net.queue_delay,
        net.slot_duration,
    )
}
