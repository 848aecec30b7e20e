//! Quick internal consistency checks, a few seconds end to end.

use anyhow::Result;
use lrfhss_core::analytic::disconnection::normalization_series;
use lrfhss_core::analytic::{interference_counts, p_cap, p_disc, p_disc_numint, CaptureSeriesConfig, DataRate};
use lrfhss_core::channel::{Environment, ShadowedRiceParams};
use lrfhss_core::geometry::path_gain_at_ground_distance;
use lrfhss_core::mcsim::simulate;
use lrfhss_core::netcode::{decode_cluster, encode_cluster, mds_check, Gf4};
use lrfhss_core::specfun::SeriesControl;
use lrfhss_core::Scenario;

use crate::figures::capture_mc;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn netcode() -> Check {
    let mut failures = 0;
    for a in Gf4::all() {
        for b in Gf4::all() {
            for mask in 0u8..16 {
                if mask.count_ones() < 2 {
                    continue;
                }
                let mut cw = encode_cluster(&[a], &[b]).expect("equal lengths");
                cw.received_mask = std::array::from_fn(|i| mask >> i & 1 == 1);
                if decode_cluster(&cw).ok() != Some((vec![a], vec![b])) {
                    failures += 1;
                }
            }
        }
    }
    check(
        "netcode any-2-of-4",
        failures == 0 && mds_check(),
        format!("{failures} decode failures, mds {}", mds_check()),
    )
}

fn normalization() -> Result<Check> {
    let mut worst = 0.0f64;
    for env in Environment::ALL {
        let s = normalization_series(&ShadowedRiceParams::preset(env), &SeriesControl::default())?;
        worst = worst.max((s - 1.0).abs());
    }
    Ok(check(
        "normalization",
        worst < 1e-8,
        format!("max |sum - 1| = {worst:.2e}"),
    ))
}

fn disconnection() -> Result<Check> {
    let scn = Scenario::table_iii(DataRate::DR5);
    let g0 = path_gain_at_ground_distance(0.0, scn.link.frequency_mhz, &scn.geometry)?;
    let mut worst = 0.0f64;
    for p_t in [0.0, 10.0, 20.0, 30.0] {
        let mut link = scn.link;
        link.tx_power_dbm = p_t;
        let a = p_disc(&scn.fading, &link, g0, &SeriesControl::default())?;
        let b = p_disc_numint(&scn.fading, &link, g0)?;
        worst = worst.max((a - b).abs() / b);
    }
    Ok(check(
        "disconnection series",
        worst < 0.05,
        format!("max rel dev {worst:.2e}"),
    ))
}

fn capture() -> Result<Check> {
    let scn = Scenario::table_iii(DataRate::DR5);
    let g0 = path_gain_at_ground_distance(0.0, scn.link.frequency_mhz, &scn.geometry)?;
    let sir = scn.link.sir_threshold_linear();
    let mc = capture_mc(&scn.fading, sir, 3, 200_000, 7)?;
    let mut worst = 0.0f64;
    for k in 1..=3 {
        let a = p_cap(k, g0, &[g0; 3], &scn.fading, sir, &CaptureSeriesConfig::default())?;
        worst = worst.max((a - mc[k - 1]).abs() / mc[k - 1]);
    }
    Ok(check(
        "capture vs Monte Carlo",
        worst < 0.05,
        format!("max rel dev {worst:.2e}"),
    ))
}

fn interference() -> Result<Check> {
    let c = interference_counts(1e5, 1, 291.1, &DataRate::DR6.profile())?;
    Ok(check(
        "interference count",
        c.i_total == 670,
        format!("I = {}", c.i_total),
    ))
}

fn determinism() -> Result<Check> {
    let scn = Scenario::table_iii(DataRate::DR6).with_users(2_000_000).scaled(0.001)?;
    let a = simulate(&scn, 2)?;
    let b = simulate(&scn, 2)?;
    Ok(check(
        "simulation determinism",
        a == b && a.tracked > 0,
        format!("outage {:.4e} over {} packets", a.outage_estimate, a.tracked),
    ))
}

pub fn run_selftest() -> Result<Vec<Check>> {
    Ok(vec![
        netcode(),
        normalization()?,
        disconnection()?,
        capture()?,
        interference()?,
        determinism()?,
    ])
}
