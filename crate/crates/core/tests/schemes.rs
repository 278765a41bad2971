//! Scheme-level behaviour on the default scenario.

use relay_fbl::baselines::outage_prob_relay;
use relay_fbl::link_layer::msdr;
use relay_fbl::optimize::{linspace, maximize_unimodal, OptFlag};
use relay_fbl::relay::{
    bl_throughput_direct, bl_throughput_perfect_csi, bl_throughput_relay, expected_overall_error, relay_avg_csi,
    select_rate_avg_csi, DirectMode,
};
use relay_fbl::scenario::Scenario;
use relay_fbl::{LinkGains, SystemParams};

fn setup() -> (LinkGains, SystemParams) {
    Scenario::default().build().unwrap()
}

#[test]
fn relaying_beats_direct_transmission() {
    let (g, p) = setup();
    for eta in linspace(0.01, std::f64::consts::LN_2, 20) {
        let p = p.with_eta(eta);
        let relay = relay_avg_csi(&g, &p).unwrap();
        for mode in [
            DirectMode::MatchedRate {
                relay_rate: relay.coding_rate,
            },
            DirectMode::WeightedCsi,
        ] {
            let direct = bl_throughput_direct(2 * p.blocklength, &g, &p, mode).unwrap();
            assert!(relay.bl_throughput > direct.bl_throughput, "eta={eta} {mode:?}");
        }
    }
}

#[test]
fn throughput_is_concave_in_the_rate() {
    let (g, p) = setup();
    let top = select_rate_avg_csi(&g, &p.with_eta(std::f64::consts::LN_2))
        .unwrap()
        .rate;
    let f = |r: f64| bl_throughput_relay(r, p.blocklength, &g, &p).unwrap();
    for r in linspace(top / 20.0, top, 20) {
        let h = 0.05 * top;
        if r - h <= 0.0 {
            continue;
        }
        assert!(f(r) >= 0.5 * (f(r - h) + f(r + h)) - 1e-9, "r={r}");
    }
}

#[test]
fn optimal_weight_factor_exists_and_is_small() {
    let (g, p) = setup();
    let res = maximize_unimodal(
        |eta| relay_avg_csi(&g, &p.with_eta(eta)).unwrap().bl_throughput,
        0.01,
        std::f64::consts::LN_2,
        1e-4,
    );
    assert_eq!(res.flag, OptFlag::Converged);
    assert!((0.05..0.4).contains(&res.argmax), "{res:?}");
}

#[test]
fn perfect_csi_dominates_average_csi() {
    let (g, p) = setup();
    let p = p.with_eta(0.12);
    let avg = relay_avg_csi(&g, &p).unwrap().bl_throughput;
    let perfect = bl_throughput_perfect_csi(p.blocklength, &g, &p, 100_000, 9).unwrap();
    assert!(perfect.throughput.mean - 3.0 * perfect.throughput.std_err > avg);
    assert_eq!(perfect.optimizer_failures, 0);
}

#[test]
fn error_approaches_outage_monotonically() {
    let (g, p) = setup();
    let r = select_rate_avg_csi(&g, &p).unwrap().rate;
    let out = outage_prob_relay(r, &g, &p);
    let mut last = f64::INFINITY;
    for m in [1_000u64, 10_000, 1_000_000, 100_000_000] {
        let gap = (expected_overall_error(r, m, &g, &p.with_blocklength(m)).unwrap() - out).abs();
        assert!(gap < last, "m={m}");
        last = gap;
    }
    assert!(last < 1e-6);
}

#[test]
fn msdr_vanishes_when_the_period_exceeds_the_budget() {
    let (g, p) = setup();
    let qos = Scenario::default().qos;
    let m = (qos.d / 2.0) as u64 + 1;
    let p = p.with_blocklength(m);
    let relay = relay_avg_csi(&g, &p).unwrap();
    assert_eq!(msdr(relay.coding_rate, m, relay.expected_error, &qos).value, 0.0);
}
