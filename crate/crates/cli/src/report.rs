//! Human-readable summary of an analytic/simulation comparison.

use std::fmt;

use lrfhss_core::analytic::capacity::interpolate_crossing;
use lrfhss_core::analytic::DataRate;

use crate::config::{Scheme, SweepVariable};
use crate::run::CompareRow;

/// Outage level at which capacity is read off, and below which simulated
/// curves are too sparse to compare.
pub const OUTAGE_TARGET: f64 = 1e-2;
/// Largest accepted relative deviation between the engines.
pub const DEVIATION_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSummary {
    pub data_rate: DataRate,
    pub scheme: Scheme,
    /// Points with analytic outage at or above the target.
    pub compared: usize,
    pub max_rel_deviation: f64,
    pub mean_rel_deviation: f64,
    pub capacity_analytic: Option<f64>,
    pub capacity_sim: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSummary {
    pub variable: SweepVariable,
    pub curves: Vec<CurveSummary>,
}

impl CompareSummary {
    pub fn pass(&self) -> bool {
        self.curves.iter().all(|c| c.pass)
    }

    pub fn curve(&self, data_rate: DataRate, scheme: Scheme) -> Option<&CurveSummary> {
        self.curves
            .iter()
            .find(|c| c.data_rate == data_rate && c.scheme == scheme)
    }
}

/// Deviation statistics per (data rate, scheme) curve. Points whose analytic
/// outage is below [`OUTAGE_TARGET`] are excluded unless no point reaches it.
pub fn summarize(rows: &[CompareRow], variable: SweepVariable) -> CompareSummary {
    let mut keys: Vec<(DataRate, Scheme)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.data_rate, r.scheme)) {
            keys.push((r.data_rate, r.scheme));
        }
    }
    let curves = keys
        .into_iter()
        .map(|(data_rate, scheme)| {
            let curve: Vec<&CompareRow> = rows
                .iter()
                .filter(|r| r.data_rate == data_rate && r.scheme == scheme)
                .collect();
            let mut used: Vec<&CompareRow> = curve
                .iter()
                .copied()
                .filter(|r| r.outage_analytic >= OUTAGE_TARGET)
                .collect();
            if used.is_empty() {
                used = curve.clone();
            }
            let devs: Vec<f64> = used.iter().map(|r| r.rel_deviation.abs()).collect();
            let max = devs.iter().copied().fold(0.0, f64::max);
            let mean = if devs.is_empty() {
                0.0
            } else {
                devs.iter().sum::<f64>() / devs.len() as f64
            };
            let capacity = |f: fn(&CompareRow) -> f64| {
                if variable != SweepVariable::NUsers {
                    return None;
                }
                let pts: Vec<(f64, f64)> = curve.iter().map(|r| (r.sweep_value, f(r))).collect();
                interpolate_crossing(&pts, OUTAGE_TARGET)
            };
            CurveSummary {
                data_rate,
                scheme,
                compared: used.iter().filter(|r| r.outage_analytic >= OUTAGE_TARGET).count(),
                max_rel_deviation: max,
                mean_rel_deviation: mean,
                capacity_analytic: capacity(|r| r.outage_analytic),
                capacity_sim: capacity(|r| r.outage_sim),
                pass: max <= DEVIATION_TOLERANCE,
            }
        })
        .collect();
    CompareSummary { variable, curves }
}

fn fmt_capacity(c: Option<f64>) -> String {
    match c {
        Some(n) => format!("{n:.0}"),
        None => "not reached".to_string(),
    }
}

impl fmt::Display for CompareSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "analytic vs simulation over {}", self.variable.name())?;
        for c in &self.curves {
            writeln!(
                f,
                "  {} {:<6} max dev {:6.2}%  mean dev {:6.2}%  ({} points >= {:e})  {}",
                c.data_rate,
                c.scheme,
                100.0 * c.max_rel_deviation,
                100.0 * c.mean_rel_deviation,
                c.compared,
                OUTAGE_TARGET,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
            if self.variable == SweepVariable::NUsers {
                writeln!(
                    f,
                    "      capacity at outage {:e}: analytic {}, simulated {}",
                    OUTAGE_TARGET,
                    fmt_capacity(c.capacity_analytic),
                    fmt_capacity(c.capacity_sim)
                )?;
            }
        }
        for dr in DataRate::ALL {
            let cap = |s| self.curve(dr, s).and_then(|c| c.capacity_analytic);
            if let (Some(l), Some(d)) = (cap(Scheme::Lrfhss), cap(Scheme::D2d)) {
                writeln!(f, "  {dr} cooperative capacity gain: {:.1}%", 100.0 * (d / l - 1.0))?;
            }
        }
        write!(f, "overall: {}", if self.pass() { "PASS" } else { "FAIL" })
    }
}
