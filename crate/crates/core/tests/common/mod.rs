//! Small hand-built instances shared by the integration tests.

#![allow(dead_code)]

use xhaul_alloc::feasibility::CostModel;
use xhaul_alloc::topology::{CellType, CloudSite, Point, RadioUnit, RuDemand, ServiceClass, SiteKind, Topology};

pub fn cost() -> CostModel {
    CostModel::new(100.0, 0.5e-9, 1.5)
}

/// eMBB RU with a light, symmetric demand.
pub fn ru(id: usize, w: f64, gamma: f64) -> RadioUnit {
    RadioUnit {
        id,
        mno: 0,
        position: Point::new(0.0, 0.0),
        cell: CellType::Small,
        service: ServiceClass::Embb,
        demand: RuDemand {
            w_ul: w,
            w_dl: w,
            gamma_ul: gamma,
            gamma_dl: gamma,
            eta_ul: 0.0,
            eta_dl: 0.0,
            h_ul: 1.0,
            h_dl: 1.0,
        },
        delta_h: 100e-6,
        delta_rdc: 975e-6,
    }
}

pub fn site(id: usize, b: f64, g: f64) -> CloudSite {
    CloudSite {
        id,
        kind: SiteKind::Edge,
        position: Point::new(0.0, 0.0),
        owner_mno: None,
        b_ul: b,
        b_dl: b,
        g_ul: g,
        g_dl: g,
        burst_interval: 31.25e-6,
    }
}

/// Topology with an explicit connectivity matrix and a flat 1 km distance.
pub fn topo_with(rus: Vec<RadioUnit>, sites: Vec<CloudSite>, z: Vec<Vec<bool>>) -> Topology {
    let (n_r, n_y) = (rus.len(), sites.len());
    Topology::from_matrices(
        rus,
        sites,
        1,
        z,
        vec![vec![1.0; n_y]; n_r],
        vec![vec![15e-6; n_y]; n_r],
        500e-6,
    )
    .expect("fixture topology is valid")
}

pub fn topo(rus: Vec<RadioUnit>, sites: Vec<CloudSite>) -> Topology {
    let z = vec![vec![true; sites.len()]; rus.len()];
    topo_with(rus, sites, z)
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
