//! Seeded desk-scale instances with explicit matrices, sized for the
//! exhaustive oracles.
//!
//! Each RU draws two independent scale factors, one for datarate and one for
//! compute, applied to fixed uplink/downlink profiles. Componentwise demand
//! order is then a pure function of those two factors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::feasibility::CostModel;
use crate::topology::{CellType, CloudSite, Point, RadioUnit, RuDemand, ServiceClass, SiteKind, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub n_rus: usize,
    pub n_sites: usize,
    pub n_mno: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub topology: Topology,
    pub cost: CostModel,
}

pub fn random_instance(seed: u64, shape: InstanceShape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let InstanceShape { n_rus, n_sites, n_mno } = shape;
    let n_mno = n_mno.max(1);

    let rus: Vec<RadioUnit> = (0..n_rus)
        .map(|id| {
            let sw: f64 = rng.gen_range(0.3..1.5);
            let sg: f64 = rng.gen_range(0.3..1.5);
            let urllc = rng.gen_bool(0.25);
            RadioUnit {
                id,
                mno: rng.gen_range(0..n_mno),
                position: Point::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)),
                cell: CellType::Small,
                service: if urllc { ServiceClass::Urllc } else { ServiceClass::Embb },
                demand: RuDemand {
                    w_ul: 2.37e9 * sw,
                    w_dl: 0.45e9 * sw,
                    gamma_ul: 165.0 * sg,
                    gamma_dl: 137.5 * sg,
                    eta_ul: 110.0 * sg,
                    eta_dl: 137.5 * sg,
                    h_ul: 550.0,
                    h_dl: 690.0,
                },
                delta_h: 100e-6,
                delta_rdc: if urllc { 325e-6 } else { 975e-6 },
            }
        })
        .collect();

    let clouds: Vec<CloudSite> = (0..n_sites)
        .map(|id| {
            let b = rng.gen_range(10e9..40e9);
            let g = rng.gen_range(400.0..2500.0);
            CloudSite {
                id,
                kind: if rng.gen_bool(0.5) { SiteKind::Edge } else { SiteKind::Olt },
                position: Point::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)),
                owner_mno: None,
                b_ul: b,
                b_dl: b * rng.gen_range(0.2..0.5),
                g_ul: g,
                g_dl: g,
                burst_interval: 31.25e-6,
            }
        })
        .collect();

    let mut z = vec![vec![false; n_sites]; n_rus];
    let mut dist = vec![vec![0.0; n_sites]; n_rus];
    for r in 0..n_rus {
        for y in 0..n_sites {
            z[r][y] = rng.gen_bool(0.75);
            dist[r][y] = rng.gen_range(0.0..6.0);
        }
        if n_sites > 0 && !z[r].iter().any(|&c| c) {
            z[r][rng.gen_range(0..n_sites)] = true;
        }
    }
    let queue_delay = vec![vec![15e-6; n_sites]; n_rus];
    let topology = Topology::from_matrices(rus, clouds, n_mno, z, dist, queue_delay, 500e-6)
        .expect("generated instance is valid");
    Instance {
        topology,
        cost: CostModel::new(100.0, 0.5e-9, 1.5),
    }
}

/// Shape drawn uniformly within the oracle caps.
pub fn random_shape(seed: u64, max_rus: usize, max_sites: usize) -> InstanceShape {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    InstanceShape {
        n_rus: rng.gen_range(2..=max_rus.max(2)),
        n_sites: rng.gen_range(1..=max_sites.max(1)),
        n_mno: rng.gen_range(1..=3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_valid() {
        let shape = InstanceShape { n_rus: 6, n_sites: 3, n_mno: 3 };
        let a = random_instance(11, shape);
        let b = random_instance(11, shape);
        assert_eq!(a, b);
        assert!(a.topology.validate().is_ok());
        for r in 0..6 {
            assert!(a.topology.z[r].iter().any(|&c| c));
        }
        assert_ne!(a, random_instance(12, shape));
    }
}
