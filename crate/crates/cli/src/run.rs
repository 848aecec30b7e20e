//! Analytic sweeps, simulation campaigns and their comparison.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Result};
use lrfhss_core::analytic::averaging::k_max_for;
use lrfhss_core::analytic::{
    outage_d2d_table, outage_lrfhss_table, p_d2d, p_neighbor, AveragingConfig, CaptureTable, DataRate, TaggedLocation,
};
use lrfhss_core::mcsim::simulate;
use lrfhss_core::{OutageReport, Scenario};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Mode, Scheme, SweepVariable};
use crate::output::{emit, read_csv, read_manifest};
use crate::report::{summarize, CompareSummary};

/// Row of the schema shared by analytic and simulate runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutageRow {
    pub sweep_value: f64,
    pub data_rate: DataRate,
    pub scheme: Scheme,
    pub outage: f64,
    pub std_error: f64,
    /// Location realizations (analytic) or tracked packets (simulate).
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub sweep_value: f64,
    pub data_rate: DataRate,
    pub scheme: Scheme,
    pub outage_analytic: f64,
    pub outage_sim: f64,
    pub sim_stderr: f64,
    pub rel_deviation: f64,
}

/// Wall-clock allowance for one run.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    started: Instant,
    cap_s: f64,
}

impl Budget {
    pub fn new(cap_s: f64) -> Self {
        Self {
            started: Instant::now(),
            cap_s,
        }
    }

    pub fn started(&self) -> Instant {
        self.started
    }

    pub fn check(&self, at: &str) -> Result<()> {
        let t = self.started.elapsed().as_secs_f64();
        if t > self.cap_s {
            bail!(
                "wall-time cap of {} s exceeded ({t:.1} s elapsed) before {at}",
                self.cap_s
            );
        }
        Ok(())
    }
}

fn n_tx(scheme: Scheme) -> u32 {
    match scheme {
        Scheme::Lrfhss => 1,
        Scheme::D2d => 2,
    }
}

/// Analytic outage of `scheme` against a prepared capture table.
pub fn analytic_outage(table: &CaptureTable, scn: &Scenario, scheme: Scheme, batches: usize) -> Result<OutageReport> {
    let n = scn.n_users() as f64;
    if n <= 0.0 {
        bail!("sweep point leaves no devices in the swept area");
    }
    Ok(match scheme {
        Scheme::Lrfhss => outage_lrfhss_table(table, scn, n, 1, batches)?,
        Scheme::D2d => {
            let p_ne = p_neighbor(scn.density_per_km2(), scn.d2d.d_max_km);
            outage_d2d_table(table, scn, n, p_d2d(scn.d2d.p_lora_success, p_ne), batches)?
        }
    })
}

/// Capture table covering every scheme at the given sweep points.
pub fn build_table(
    points: &[&Scenario],
    schemes: &[Scheme],
    avg: &AveragingConfig,
    tagged: TaggedLocation,
    seed: u64,
) -> Result<CaptureTable> {
    let scn = points.first().ok_or_else(|| anyhow!("no sweep points"))?;
    let mut k_max = 1;
    for s in schemes {
        for p in points {
            let n = p.n_users() as f64;
            if n > 0.0 {
                k_max = k_max.max(k_max_for(p, &[n], n_tx(*s), avg.max_interferers)?);
            }
        }
    }
    let cfg = AveragingConfig { tagged, ..*avg };
    Ok(CaptureTable::build(scn, &cfg, k_max, seed)?)
}

pub fn analytic_rows(cfg: &ExperimentConfig, budget: &Budget) -> Result<Vec<OutageRow>> {
    let avg = cfg.averaging();
    let points = cfg
        .sweep
        .values
        .iter()
        .map(|v| cfg.point(*v))
        .collect::<lrfhss_core::Result<Vec<_>>>()?;
    // population sweeps share one table; the others change the tagged point
    let shared = match cfg.sweep.variable {
        SweepVariable::NUsers | SweepVariable::Density => {
            let scns: Vec<&Scenario> = points.iter().map(|(s, _)| s).collect();
            Some(build_table(&scns, &cfg.schemes, &avg, points[0].1, cfg.seed)?)
        }
        _ => None,
    };
    let mut rows = Vec::new();
    for (value, (scn, tagged)) in cfg.sweep.values.iter().zip(&points) {
        budget.check(&format!("analytic point {value}"))?;
        let own;
        let table = match &shared {
            Some(t) => t,
            None => {
                own = build_table(&[scn], &cfg.schemes, &avg, *tagged, cfg.seed)?;
                &own
            }
        };
        for &scheme in &cfg.schemes {
            let r = analytic_outage(table, scn, scheme, avg.batches)?;
            rows.push(OutageRow {
                sweep_value: *value,
                data_rate: cfg.data_rate,
                scheme,
                outage: r.outage_estimate,
                std_error: r.std_error,
                count: r.trials as u64,
            });
        }
    }
    Ok(rows)
}

/// Simulates `trials` slots, adding slots until `min_tracked` packets have
/// been tracked. Slot t always uses stream t, so reruns are identical.
pub fn simulate_point(scn: &Scenario, trials: usize, min_tracked: u64) -> Result<OutageReport> {
    let mut n = trials.max(1);
    let mut r = simulate(scn, n)?;
    for _ in 0..4 {
        if r.tracked >= min_tracked {
            break;
        }
        let grow = if r.tracked == 0 {
            16.0
        } else {
            1.1 * min_tracked as f64 / r.tracked as f64
        };
        n = ((n as f64 * grow).ceil() as usize).max(n + 1);
        r = simulate(scn, n)?;
    }
    Ok(r)
}

pub fn simulate_rows(cfg: &ExperimentConfig, budget: &Budget) -> Result<Vec<OutageRow>> {
    if cfg.sweep.variable == SweepVariable::DistanceKm {
        bail!("distance_km sweeps are analytic-only: the simulator places devices over the whole footprint");
    }
    let mut rows = Vec::new();
    for &value in &cfg.sweep.values {
        let (scn, _) = cfg.point(value)?;
        for &scheme in &cfg.schemes {
            budget.check(&format!("simulation point {value} ({scheme})"))?;
            let mut s = scn.clone();
            s.d2d.enabled = scheme == Scheme::D2d;
            let r = simulate_point(&s, cfg.trials, cfg.min_tracked_packets)?;
            rows.push(OutageRow {
                sweep_value: value,
                data_rate: cfg.data_rate,
                scheme,
                outage: r.outage_estimate,
                std_error: r.std_error,
                count: r.tracked,
            });
        }
    }
    Ok(rows)
}

/// Joins analytic and simulated rows on (sweep value, data rate, scheme).
pub fn join(analytic: &[OutageRow], sim: &[OutageRow]) -> Vec<CompareRow> {
    analytic
        .iter()
        .filter_map(|a| {
            let s = sim.iter().find(|s| {
                s.sweep_value.to_bits() == a.sweep_value.to_bits() && s.data_rate == a.data_rate && s.scheme == a.scheme
            })?;
            let rel = if a.outage > 0.0 {
                (s.outage - a.outage) / a.outage
            } else if s.outage == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            Some(CompareRow {
                sweep_value: a.sweep_value,
                data_rate: a.data_rate,
                scheme: a.scheme,
                outage_analytic: a.outage,
                outage_sim: s.outage,
                sim_stderr: s.std_error,
                rel_deviation: rel,
            })
        })
        .collect()
}

pub struct CompareResult {
    pub rows: Vec<CompareRow>,
    pub summary: CompareSummary,
}

/// Compares the analytic and simulate runs stored in `dir`.
pub fn compare_dir(dir: &Path) -> Result<CompareResult> {
    let a_path = dir.join("analytic.csv");
    let s_path = dir.join("simulate.csv");
    let missing: Vec<&str> = [("analytic", &a_path), ("simulate", &s_path)]
        .iter()
        .filter(|(_, p)| !p.exists())
        .map(|(n, _)| *n)
        .collect();
    if !missing.is_empty() {
        bail!(
            "nothing to compare: no {} run found in {}",
            missing.join(" or "),
            dir.display()
        );
    }
    let analytic: Vec<OutageRow> = read_csv(&a_path)?;
    let sim: Vec<OutageRow> = read_csv(&s_path)?;
    let rows = join(&analytic, &sim);
    if rows.is_empty() {
        bail!("nothing to compare: the analytic and simulate runs share no sweep points");
    }
    let variable = read_manifest(&a_path)?.config.sweep.variable;
    let summary = summarize(&rows, variable);
    Ok(CompareResult { rows, summary })
}

/// Files written by a run and any human-readable report.
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub report: Option<String>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let budget = Budget::new(cfg.wall_time_cap_s);
    let dir = &cfg.output_path;
    match cfg.mode {
        Mode::Analytic => {
            let rows = analytic_rows(cfg, &budget)?;
            let path = emit(dir, "analytic", "analytic", cfg, &rows, budget.started())?;
            Ok(RunOutcome {
                files: vec![path],
                report: None,
            })
        }
        Mode::Simulate => {
            let rows = simulate_rows(cfg, &budget)?;
            let path = emit(dir, "simulate", "simulate", cfg, &rows, budget.started())?;
            Ok(RunOutcome {
                files: vec![path],
                report: None,
            })
        }
        Mode::Compare => {
            let res = compare_dir(dir)?;
            let path = emit(dir, "compare", "compare", cfg, &res.rows, budget.started())?;
            Ok(RunOutcome {
                files: vec![path],
                report: Some(res.summary.to_string()),
            })
        }
    }
}
