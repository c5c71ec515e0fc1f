//! Hand-checked values through the public API only.

mod common;

use common::{cost, rel_close, ru, site, topo};
use xhaul_alloc::auction::{misreport_probe, run_auction, truthful_bids};
use xhaul_alloc::baselines::{allocate_nearest_first, bandit_reward};
use xhaul_alloc::feasibility::{ru_opex, share_throughput, Assignment, LatencyReport, Sharing};
use xhaul_alloc::minmax::allocate_minmax;
use xhaul_alloc::radio::{burst_frames, framed_rate, BurstConfig};

#[test]
fn sole_ru_opex_on_preset_site() {
    // 100 Gbps and 30000 GOPS in total, split evenly over the directions
    let t = topo(vec![ru(0, 1e9, 10.0)], vec![site(0, 50e9, 1.5e4)]);
    let asg = Assignment::from_map(vec![Some(0)], &t, &cost(), Sharing::Proportional);
    assert!(rel_close(ru_opex(&asg, &t, &cost(), 0), 45150.0, 1e-9));
    assert_eq!(ru_opex(&Assignment::new(1), &t, &cost(), 0), 0.0);
}

#[test]
fn equal_rus_share_one_of_two_sites() {
    let t = topo(vec![ru(0, 1e9, 10.0), ru(1, 1e9, 10.0)], vec![site(0, 50e9, 1.5e4), site(1, 50e9, 1.5e4)]);
    let out = allocate_minmax(&t, &cost());
    assert_eq!(out.assignment.active_sites().len(), 1);
    assert_eq!(out.assignment.n_assigned(), 2);
    assert!(out.checks <= 4);
}

#[test]
fn uniform_and_proportional_uplink_splits() {
    let t = topo(vec![ru(0, 1e9, 10.0), ru(1, 3e9, 10.0)], vec![site(0, 40e9, 1.5e4)]);
    let uniform = allocate_nearest_first(&t, &cost(), Sharing::Uniform);
    assert_eq!(uniform.shares_b[0], uniform.shares_b[1]);
    let prop = allocate_nearest_first(&t, &cost(), Sharing::Proportional);
    assert_eq!(prop.x, vec![Some(0), Some(0)]);
    let (a, b) = (share_throughput(&prop, &t, 0, 0).unwrap(), share_throughput(&prop, &t, 1, 0).unwrap());
    assert!(rel_close(b / a, 3.0, 1e-6));
}

#[test]
fn truthful_probe_is_identity() {
    let t = topo(vec![ru(0, 1e9, 10.0), ru(1, 1.5e9, 20.0)], vec![site(0, 50e9, 1.5e4)]);
    let (truth, same) = misreport_probe(&t, &cost(), 1, 1.0).unwrap();
    assert_eq!(truth, same);
    let out = run_auction(&t, &truthful_bids(&t), &cost()).unwrap();
    assert!(rel_close(out.utilities[1], truth, 1e-12));
}

#[test]
fn reward_is_positive_and_bounded_below_by_zero() {
    let t = topo(vec![ru(0, 1e9, 10.0)], vec![site(0, 50e9, 1.5e4)]);
    let mut asg = Assignment::new(1);
    asg.place(0, 0);
    let report = LatencyReport::under(&t, 0, 0, &asg.load(&t, 0));
    let healthy = bandit_reward(&asg, &t, 0, 0);
    assert!(report.violations(&t, 0).is_empty());
    assert!(healthy >= 1.0, "within bounds means each ratio is at least 1, got {healthy}");
}

#[test]
fn burst_framing_rounds_up_whole_frames() {
    let cfg = BurstConfig::default();
    // one payload per interval is exactly one frame
    let one = cfg.payload_bits / cfg.burst_interval;
    assert_eq!(burst_frames(one, &cfg), 1);
    assert_eq!(burst_frames(one * 1.01, &cfg), 2);
    assert!(rel_close(framed_rate(one, &cfg), cfg.frame_bits / cfg.burst_interval, 1e-12));
}
