//! Preset sweeps reproducing the published figure axes. Each recipe takes
//! the scenario, seed and engine settings from the configuration and
//! supplies its own sweep.

use std::path::PathBuf;

use anyhow::Result;
use lrfhss_core::analytic::averaging::outage_lrfhss_no_capture;
use lrfhss_core::analytic::{
    interference_counts, p_cap, p_d2d, p_disc, p_disc_numint, p_neighbor, DataRate, TaggedLocation,
};
use lrfhss_core::channel::{Environment, FadingSampler, ShadowedRiceParams};
use lrfhss_core::geometry::{
    elevation_from_ground_distance, ground_distance_from_slant, path_gain_at_ground_distance, slant_distance_km,
};
use lrfhss_core::rng::{derive_seed, stream_rng};
use lrfhss_core::specfun::SeriesControl;
use lrfhss_core::{Population, Scenario};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Scheme};
use crate::output::emit;
use crate::run::{analytic_outage, build_table, simulate_point, Budget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
        FigureId::Fig10,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::Fig10 => "fig10",
        }
    }
}

impl std::str::FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig4 to fig10)"))
    }
}

impl std::fmt::Display for FigureId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const FIG4_TX_POWER_DBM: [f64; 16] = [
    0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 22.0, 24.0, 26.0, 28.0, 30.0,
];
pub const FIG5_MAX_K: usize = 8;
pub const FIG5_MC_DRAWS: usize = 1_000_000;
pub const FIG6_USERS: [f64; 5] = [1e5, 2e5, 5e5, 1e6, 2e6];
pub const FIG7_USERS: [f64; 9] = [1e5, 2e5, 5e5, 1e6, 2e6, 5e6, 1e7, 2e7, 4e7];
pub const FIG8_DENSITY: [f64; 9] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0];
pub const FIG9_USERS: [f64; 14] = [1e5, 2e5, 3e5, 5e5, 7e5, 1e6, 1.5e6, 2e6, 3e6, 5e6, 7e6, 1e7, 1.5e7, 2e7];
pub const FIG10_POINTS: usize = 13;

#[derive(Debug, Clone, Serialize)]
pub struct Fig4Row {
    pub tx_power_dbm: f64,
    pub environment: Environment,
    pub p_disc_analytic: f64,
    pub p_disc_numint: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig5Row {
    pub k: usize,
    pub p_cap_analytic: f64,
    pub p_cap_mc: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig6Row {
    pub n_users: f64,
    pub data_rate: DataRate,
    pub i_total: u64,
    pub i_hdr: f64,
    pub i_pl: f64,
    pub frac_total: f64,
    pub frac_hdr: f64,
    pub frac_pl: f64,
    pub i_total_sim: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig7Row {
    pub n_users_equiv_fullscale: f64,
    pub data_rate: DataRate,
    pub outage_analytic: f64,
    pub outage_sim: f64,
    pub sim_stderr: f64,
    pub outage_analytic_nocapture: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig8Row {
    pub density_per_km2: f64,
    pub p_neighbor: f64,
    pub p_d2d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig9Row {
    pub n_users: f64,
    pub data_rate: DataRate,
    pub outage_lrfhss: f64,
    pub outage_d2d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Fig10Row {
    pub distance_km: f64,
    pub data_rate: DataRate,
    pub outage_d2d: f64,
    pub outage_lrfhss: f64,
}

fn disc_ctl(cfg: &ExperimentConfig) -> SeriesControl {
    cfg.averaging().disc_ctl
}

fn zenith_gain(scn: &Scenario) -> Result<f64> {
    Ok(path_gain_at_ground_distance(
        0.0,
        scn.link.frequency_mhz,
        &scn.geometry,
    )?)
}

/// Disconnection probability at zenith against transmit power, per
/// shadowing environment.
pub fn fig4(cfg: &ExperimentConfig) -> Result<Vec<Fig4Row>> {
    let base = cfg.base_scenario();
    let g0 = zenith_gain(&base)?;
    let ctl = disc_ctl(cfg);
    let mut rows = Vec::new();
    for env in Environment::ALL {
        let fading = ShadowedRiceParams::preset(env);
        for p_t in FIG4_TX_POWER_DBM {
            let mut link = base.link;
            link.tx_power_dbm = p_t;
            rows.push(Fig4Row {
                tx_power_dbm: p_t,
                environment: env,
                p_disc_analytic: p_disc(&fading, &link, g0, &ctl)?,
                p_disc_numint: p_disc_numint(&fading, &link, g0)?,
            });
        }
    }
    Ok(rows)
}

/// Monte-Carlo capture failure for k = 1..=k_max equal-gain interferers:
/// entry k-1 is Pr{h0 <= delta * (h1 + ... + hk)}.
pub fn capture_mc(
    fading: &ShadowedRiceParams,
    sir_linear: f64,
    k_max: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let sampler = FadingSampler::new(fading)?;
    let chunk = 10_000;
    let chunks = draws.div_ceil(chunk);
    let seed = derive_seed(seed, "capture-mc");
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let mut fails = vec![0u64; k_max];
            let n = chunk.min(draws - c * chunk);
            for _ in 0..n {
                let h0 = sampler.sample(&mut rng);
                let mut sum = 0.0;
                for f in fails.iter_mut() {
                    sum += sampler.sample(&mut rng);
                    if h0 <= sir_linear * sum {
                        *f += 1;
                    }
                }
            }
            fails
        })
        .reduce(
            || vec![0u64; k_max],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts.into_iter().map(|c| c as f64 / draws as f64).collect())
}

/// Capture failure against k equal-gain interferers at zenith.
pub fn fig5(cfg: &ExperimentConfig) -> Result<Vec<Fig5Row>> {
    let scn = cfg.base_scenario();
    let g0 = zenith_gain(&scn)?;
    let sir = scn.link.sir_threshold_linear();
    let capture = cfg.averaging().capture;
    let gains = vec![g0; FIG5_MAX_K];
    let mc = capture_mc(&scn.fading, sir, FIG5_MAX_K, FIG5_MC_DRAWS, cfg.seed)?;
    (1..=FIG5_MAX_K)
        .map(|k| {
            Ok(Fig5Row {
                k,
                p_cap_analytic: p_cap(k, g0, &gains, &scn.fading, sir, &capture)?,
                p_cap_mc: mc[k - 1],
            })
        })
        .collect()
}

/// Mean number of other packets starting less than one time-on-air away from
/// a tagged packet, for `n` devices with uniform starts over the slot.
pub fn simulated_overlaps(n: usize, toa: f64, slot_s: f64, seed: u64) -> f64 {
    let mut rng = stream_rng(derive_seed(seed, "overlap-count"), n as u64);
    let mut starts: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * slot_s).collect();
    starts.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (0usize, 0usize);
    let (mut total, mut tagged) = (0u64, 0u64);
    for &t in &starts {
        while starts[lo] <= t - toa {
            lo += 1;
        }
        while hi < n && starts[hi] < t + toa {
            hi += 1;
        }
        // edge packets see a truncated window
        if t >= toa && t <= slot_s - toa {
            total += (hi - lo - 1) as u64;
            tagged += 1;
        }
    }
    total as f64 / tagged.max(1) as f64
}

/// Interferer counts against population size.
pub fn fig6(cfg: &ExperimentConfig) -> Result<Vec<Fig6Row>> {
    let mut rows = Vec::new();
    for dr in DataRate::ALL {
        let prof = dr.profile();
        for n in FIG6_USERS {
            let c = interference_counts(n, 1, cfg.slot_s, &prof)?;
            let (i_hdr, i_pl) = (c.i_hdr(c.i_total)?, c.i_pl(c.i_total)?);
            rows.push(Fig6Row {
                n_users: n,
                data_rate: dr,
                i_total: c.i_total,
                i_hdr,
                i_pl,
                frac_total: c.i_total as f64 / n,
                frac_hdr: i_hdr / n,
                frac_pl: i_pl / n,
                i_total_sim: simulated_overlaps(n as usize, prof.toa_s(), cfg.slot_s, cfg.seed),
            });
        }
    }
    Ok(rows)
}

fn scenario_for(cfg: &ExperimentConfig, dr: DataRate, n_full: f64, area_scale: f64) -> Result<Scenario> {
    let mut scn = cfg.base_scenario();
    scn.data_rate = dr;
    scn.population = Population::Users(n_full.round() as u64);
    Ok(scn.scaled(area_scale)?)
}

/// Analytic and simulated LR-FHSS outage at `area_scale`, against the
/// full-scale-equivalent population.
pub fn fig7(cfg: &ExperimentConfig, budget: &Budget) -> Result<Vec<Fig7Row>> {
    fig7_with(cfg, budget, &FIG7_USERS, &DataRate::ALL)
}

pub fn fig7_with(cfg: &ExperimentConfig, budget: &Budget, users: &[f64], rates: &[DataRate]) -> Result<Vec<Fig7Row>> {
    let avg = cfg.averaging();
    let mut rows = Vec::new();
    for &dr in rates {
        let scns = users
            .iter()
            .map(|n| scenario_for(cfg, dr, *n, cfg.area_scale))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Scenario> = scns.iter().collect();
        let table = build_table(&refs, &[Scheme::Lrfhss], &avg, TaggedLocation::Footprint, cfg.seed)?;
        for (n, scn) in users.iter().zip(&scns) {
            budget.check(&format!("fig7 {dr} at {n}"))?;
            let a = analytic_outage(&table, scn, Scheme::Lrfhss, avg.batches)?;
            let nc = outage_lrfhss_no_capture(&table, scn, scn.n_users() as f64, avg.batches)?;
            let s = simulate_point(scn, cfg.trials, cfg.min_tracked_packets)?;
            rows.push(Fig7Row {
                n_users_equiv_fullscale: *n,
                data_rate: dr,
                outage_analytic: a.outage_estimate,
                outage_sim: s.outage_estimate,
                sim_stderr: s.std_error,
                outage_analytic_nocapture: nc,
            });
        }
    }
    Ok(rows)
}

/// Neighbour and D2D-link probabilities against device density.
pub fn fig8(cfg: &ExperimentConfig) -> Result<Vec<Fig8Row>> {
    Ok(FIG8_DENSITY
        .iter()
        .map(|&rho| {
            let p_ne = p_neighbor(rho, cfg.d2d.d_max_km);
            Fig8Row {
                density_per_km2: rho,
                p_neighbor: p_ne,
                p_d2d: p_d2d(cfg.d2d.p_lora_success, p_ne),
            }
        })
        .collect())
}

/// Full-scale analytic outage with and without cooperation.
pub fn fig9(cfg: &ExperimentConfig, budget: &Budget) -> Result<Vec<Fig9Row>> {
    fig9_with(cfg, budget, &FIG9_USERS)
}

pub fn fig9_with(cfg: &ExperimentConfig, budget: &Budget, users: &[f64]) -> Result<Vec<Fig9Row>> {
    let avg = cfg.averaging();
    let schemes = [Scheme::Lrfhss, Scheme::D2d];
    let mut rows = Vec::new();
    for dr in DataRate::ALL {
        let scns = users
            .iter()
            .map(|n| scenario_for(cfg, dr, *n, 1.0))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Scenario> = scns.iter().collect();
        let table = build_table(&refs, &schemes, &avg, TaggedLocation::Footprint, cfg.seed)?;
        for (n, scn) in users.iter().zip(&scns) {
            budget.check(&format!("fig9 {dr} at {n}"))?;
            rows.push(Fig9Row {
                n_users: *n,
                data_rate: dr,
                outage_lrfhss: analytic_outage(&table, scn, Scheme::Lrfhss, avg.batches)?.outage_estimate,
                outage_d2d: analytic_outage(&table, scn, Scheme::D2d, avg.batches)?.outage_estimate,
            });
        }
    }
    Ok(rows)
}

/// Slant ranges from the orbital height to the footprint edge.
pub fn fig10_distances(scn: &Scenario, points: usize) -> Result<Vec<f64>> {
    let geo = &scn.geometry;
    let edge = slant_distance_km(elevation_from_ground_distance(geo.footprint_radius_km, geo)?, geo)?;
    let h = geo.orbital_height_km;
    Ok((0..points)
        .map(|i| h + (edge - h) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Full-scale analytic outage of a device at a fixed slant range, with the
/// configured population.
pub fn fig10(cfg: &ExperimentConfig, budget: &Budget) -> Result<Vec<Fig10Row>> {
    let avg = cfg.averaging();
    let schemes = [Scheme::Lrfhss, Scheme::D2d];
    let mut rows = Vec::new();
    for dr in DataRate::ALL {
        let scn = scenario_for(cfg, dr, cfg.n_users as f64, 1.0)?;
        for d in fig10_distances(&scn, FIG10_POINTS)? {
            budget.check(&format!("fig10 {dr} at {d:.0} km"))?;
            let ground = ground_distance_from_slant(d, &scn.geometry)?;
            let table = build_table(
                &[&scn],
                &schemes,
                &avg,
                TaggedLocation::GroundDistance(ground),
                cfg.seed,
            )?;
            rows.push(Fig10Row {
                distance_km: d,
                data_rate: dr,
                outage_d2d: analytic_outage(&table, &scn, Scheme::D2d, avg.batches)?.outage_estimate,
                outage_lrfhss: analytic_outage(&table, &scn, Scheme::Lrfhss, avg.batches)?.outage_estimate,
            });
        }
    }
    Ok(rows)
}

/// Computes a recipe and writes `<out>/<id>.csv` with its manifest.
pub fn write_figure(id: FigureId, cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let budget = Budget::new(cfg.wall_time_cap_s);
    let dir = &cfg.output_path;
    let name = id.name();
    let started = budget.started();
    let path = match id {
        FigureId::Fig4 => emit(dir, name, name, cfg, &fig4(cfg)?, started)?,
        FigureId::Fig5 => emit(dir, name, name, cfg, &fig5(cfg)?, started)?,
        FigureId::Fig6 => emit(dir, name, name, cfg, &fig6(cfg)?, started)?,
        FigureId::Fig7 => emit(dir, name, name, cfg, &fig7(cfg, &budget)?, started)?,
        FigureId::Fig8 => emit(dir, name, name, cfg, &fig8(cfg)?, started)?,
        FigureId::Fig9 => emit(dir, name, name, cfg, &fig9(cfg, &budget)?, started)?,
        FigureId::Fig10 => emit(dir, name, name, cfg, &fig10(cfg, &budget)?, started)?,
    };
    Ok(path)
}
