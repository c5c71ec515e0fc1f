//! Batch execution of (seed x demand x mechanism) cells, CSV emission and
//! result comparison.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::auction::{run_auction_with, truthful_bids};
use crate::baselines::{allocate_bandit, allocate_nearest_first, BanditConfig};
use crate::error::{Error, Result};
use crate::feasibility::{audit, Assignment};
use crate::metrics::{active_clouds, opex_reduction, outage, total_leased_cost};
use crate::minmax::{allocate_minmax_with, GreedyOptions};
use crate::oracle::{solve_minmax_exact, solve_vcg_exact};
use crate::scenario::{Mechanism, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// Mechanism not applicable at this size (oracle caps).
    Skipped,
    Error,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Skipped => "skipped",
            RunStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub scenario: String,
    pub mechanism: Mechanism,
    pub demand_gbps: f64,
    pub seed: u64,
    pub status: RunStatus,
    pub outage_overall: f64,
    pub outage_mno: Vec<f64>,
    pub total_cost: f64,
    pub opex_red_mno: Vec<f64>,
    pub active_clouds: usize,
    pub config_hash: String,
    /// Constraint violations found when re-validating the output.
    pub violations: usize,
    /// Error text for failed cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Per-cell assignment detail for the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecord {
    pub mechanism: Mechanism,
    pub demand_gbps: f64,
    pub seed: u64,
    pub assignment: Option<Assignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payments: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub rows: Vec<MetricsRow>,
    pub records: Vec<CellRecord>,
}

impl RunReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.status == RunStatus::Error).count()
    }
}

struct CellResult {
    assignment: Assignment,
    payments: Option<Vec<f64>>,
}

fn run_cell(cfg: &ScenarioConfig, mech: Mechanism, level: f64, seed: u64) -> Result<Option<(crate::topology::Topology, CellResult)>> {
    let topo = cfg.topology_for(seed, level)?;
    let cost = cfg.cost.to_model(&topo);
    cost.validate(&topo)?;
    let opts = GreedyOptions { strict_first: cfg.strict_first };
    let result = match mech {
        Mechanism::Minmax => CellResult {
            assignment: allocate_minmax_with(&topo, &cost, opts).assignment,
            payments: None,
        },
        Mechanism::Vcg => {
            let out = run_auction_with(&topo, &truthful_bids(&topo), &cost, opts)?;
            CellResult {
                assignment: out.assignment,
                payments: Some(out.payments),
            }
        }
        Mechanism::NearestFirst => CellResult {
            assignment: allocate_nearest_first(&topo, &cost, cfg.sharing),
            payments: None,
        },
        Mechanism::Bandit => {
            let bcfg = BanditConfig { seed, ..cfg.bandit };
            CellResult {
                assignment: allocate_bandit(&topo, &cost, &bcfg, cfg.sharing)?,
                payments: None,
            }
        }
        Mechanism::Oracle => {
            if !cfg.oracle_limits.admits(&topo) {
                return Ok(None);
            }
            CellResult {
                assignment: solve_minmax_exact(&topo, &cost, cfg.oracle_limits)?.assignment,
                payments: None,
            }
        }
    };
    Ok(Some((topo, result)))
}

fn blank_row(cfg: &ScenarioConfig, hash: &str, mech: Mechanism, level: f64, seed: u64, status: RunStatus) -> MetricsRow {
    let n_mno = cfg.n_mno();
    MetricsRow {
        scenario: cfg.scenario.to_string(),
        mechanism: mech,
        demand_gbps: level / 1e9,
        seed,
        status,
        outage_overall: f64::NAN,
        outage_mno: vec![f64::NAN; n_mno],
        total_cost: f64::NAN,
        opex_red_mno: vec![f64::NAN; n_mno],
        active_clouds: 0,
        config_hash: hash.to_string(),
        violations: 0,
        message: None,
    }
}

/// Runs every (seed x demand x mechanism) cell on a pool of `jobs` workers
/// (rayon default when `None`). Rows come back ordered by demand level,
/// then seed, then mechanism, whatever the completion order.
pub fn run_scenario(cfg: &ScenarioConfig, jobs: Option<usize>) -> Result<RunReport> {
    cfg.validate()?;
    let hash = cfg.config_hash();
    let mut cells = Vec::new();
    for &level in &cfg.demand_sweep {
        for &seed in &cfg.seeds {
            for &mech in &cfg.mechanisms {
                cells.push((mech, level, seed));
            }
        }
    }
    let work = || -> Vec<(MetricsRow, CellRecord)> {
        cells
            .par_iter()
            .map(|&(mech, level, seed)| evaluate(cfg, &hash, mech, level, seed))
            .collect()
    };
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    let (rows, records) = results.into_iter().unzip();
    Ok(RunReport { rows, records })
}

fn evaluate(cfg: &ScenarioConfig, hash: &str, mech: Mechanism, level: f64, seed: u64) -> (MetricsRow, CellRecord) {
    let mut record = CellRecord {
        mechanism: mech,
        demand_gbps: level / 1e9,
        seed,
        assignment: None,
        payments: None,
    };
    let row = match run_cell(cfg, mech, level, seed) {
        Ok(Some((topo, result))) => {
            let cost = cfg.cost.to_model(&topo);
            let out = outage(&result.assignment, &topo);
            let row = MetricsRow {
                outage_overall: out.overall,
                outage_mno: out.per_mno,
                total_cost: total_leased_cost(&result.assignment, &topo, &cost),
                opex_red_mno: opex_reduction(&result.assignment, &topo, &cost),
                active_clouds: active_clouds(&result.assignment),
                violations: audit(&result.assignment, &topo).len(),
                ..blank_row(cfg, hash, mech, level, seed, RunStatus::Ok)
            };
            record.assignment = Some(result.assignment);
            record.payments = result.payments;
            row
        }
        Ok(None) => blank_row(cfg, hash, mech, level, seed, RunStatus::Skipped),
        Err(e) => MetricsRow {
            message: Some(e.to_string()),
            ..blank_row(cfg, hash, mech, level, seed, RunStatus::Error)
        },
    };
    (row, record)
}

pub fn csv_header(n_mno: usize) -> Vec<String> {
    let mut header: Vec<String> = ["scenario", "mechanism", "demand_gbps", "seed", "status", "outage_overall"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n_mno).map(|k| format!("outage_mno_{k}")));
    header.push("total_cost".into());
    header.extend((1..=n_mno).map(|k| format!("opex_red_mno_{k}")));
    header.push("active_clouds".into());
    header.push("config_hash".into());
    header
}

pub fn write_csv<W: Write>(rows: &[MetricsRow], n_mno: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(n_mno))?;
    for row in rows {
        let mut rec = vec![
            row.scenario.clone(),
            row.mechanism.to_string(),
            row.demand_gbps.to_string(),
            row.seed.to_string(),
            row.status.as_str().to_string(),
            row.outage_overall.to_string(),
        ];
        rec.extend(row.outage_mno.iter().map(f64::to_string));
        rec.push(row.total_cost.to_string());
        rec.extend(row.opex_red_mno.iter().map(f64::to_string));
        rec.push(row.active_clouds.to_string());
        rec.push(row.config_hash.clone());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_assignments<W: Write>(records: &[CellRecord], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, records)?;
    Ok(())
}

/// Per-demand-level averages of one side of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelStats {
    pub outage: f64,
    pub cost: f64,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareLine {
    pub demand_gbps: f64,
    pub a: LevelStats,
    pub b: LevelStats,
    /// `b - a`.
    pub outage_delta: f64,
    pub cost_delta: f64,
    pub a_outage_le_b: bool,
    pub a_cost_le_b: bool,
}

const REQUIRED_COLUMNS: [&str; 5] = ["mechanism", "demand_gbps", "status", "outage_overall", "total_cost"];

/// Averages `ok` rows of a results CSV by demand level, optionally keeping
/// only one mechanism.
pub fn summarize_csv<R: Read>(input: R, mechanism: Option<&str>) -> Result<BTreeMap<u64, (f64, LevelStats)>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))
    };
    let idx: Vec<usize> = REQUIRED_COLUMNS.iter().map(|c| col(c)).collect::<Result<_>>()?;
    let (i_mech, i_demand, i_status, i_outage, i_cost) = (idx[0], idx[1], idx[2], idx[3], idx[4]);
    let mut sums: BTreeMap<u64, (f64, f64, f64, usize)> = BTreeMap::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        if mechanism.is_some_and(|m| &rec[i_mech] != m) || &rec[i_status] != "ok" {
            continue;
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("row {}: {:?} is not a number", line + 2, &rec[i])))
        };
        let demand = num(i_demand)?;
        let entry = sums.entry(demand.to_bits()).or_insert((demand, 0.0, 0.0, 0));
        entry.1 += num(i_outage)?;
        entry.2 += num(i_cost)?;
        entry.3 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(k, (d, o, c, n))| {
            (k, (d, LevelStats { outage: o / n as f64, cost: c / n as f64, rows: n }))
        })
        .collect())
}

/// Joins two summaries on demand level; levels present on only one side
/// are dropped.
pub fn compare(
    a: &BTreeMap<u64, (f64, LevelStats)>,
    b: &BTreeMap<u64, (f64, LevelStats)>,
) -> Vec<CompareLine> {
    let mut lines: Vec<CompareLine> = a
        .iter()
        .filter_map(|(k, (demand, sa))| {
            let (_, sb) = b.get(k)?;
            Some(CompareLine {
                demand_gbps: *demand,
                a: *sa,
                b: *sb,
                outage_delta: sb.outage - sa.outage,
                cost_delta: sb.cost - sa.cost,
                a_outage_le_b: sa.outage <= sb.outage + 1e-12,
                a_cost_le_b: sa.cost <= sb.cost + 1e-9 * sb.cost.abs(),
            })
        })
        .collect();
    lines.sort_by(|x, y| x.demand_gbps.total_cmp(&y.demand_gbps));
    lines
}

/// Heuristic versus exact objectives for one (seed, demand) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleLine {
    pub demand_gbps: f64,
    pub seed: u64,
    pub minmax_assigned: usize,
    pub exact_minmax_assigned: usize,
    pub minmax_max_opex: f64,
    pub exact_max_opex: f64,
    pub vcg_assigned: usize,
    pub exact_vcg_assigned: usize,
    pub vcg_cost: f64,
    pub exact_vcg_cost: f64,
}

/// Runs both oracles against the heuristics on every (seed, demand) cell.
/// Fails with instance-too-large when the deployment exceeds the caps.
pub fn oracle_report(cfg: &ScenarioConfig) -> Result<Vec<OracleLine>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &level in &cfg.demand_sweep {
        for &seed in &cfg.seeds {
            cells.push((level, seed));
        }
    }
    cells
        .par_iter()
        .map(|&(level, seed)| {
            let topo = cfg.topology_for(seed, level)?;
            let cost = cfg.cost.to_model(&topo);
            let opts = GreedyOptions { strict_first: cfg.strict_first };
            let exact = solve_minmax_exact(&topo, &cost, cfg.oracle_limits)?;
            let heur = allocate_minmax_with(&topo, &cost, opts).assignment;
            let bids = truthful_bids(&topo);
            let exact_vcg = solve_vcg_exact(&topo, &bids, &cost, cfg.oracle_limits)?;
            let vcg = crate::auction::allocate_vcg_with(&topo, &bids, &cost, opts)?;
            Ok(OracleLine {
                demand_gbps: level / 1e9,
                seed,
                minmax_assigned: heur.n_assigned(),
                exact_minmax_assigned: exact.assignment.n_assigned(),
                minmax_max_opex: heur.max_opex(),
                exact_max_opex: exact.objective,
                vcg_assigned: vcg.assignment.n_assigned(),
                exact_vcg_assigned: exact_vcg.assignment.n_assigned(),
                vcg_cost: vcg.total_cost,
                exact_vcg_cost: exact_vcg.objective,
            })
        })
        .collect()
}
