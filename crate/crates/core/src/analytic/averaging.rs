//! Location averaging of the analytic outage.
//!
//! Capture failure depends on where the tagged device and its interferers
//! sit. A [`CaptureTable`] holds P_cap(k) for k = 1..=k_max over a set of
//! interferer-gain realizations, for one or more tagged positions. Outage
//! expressions are then evaluated against the table for any population size
//! without redrawing locations.
//!
//! Two averaging orders are offered. `Nested` averages P_cap over the
//! interferer realizations first and then averages the outage over tagged
//! positions placed on a Gauss-Legendre grid in the area coordinate (r/R)^2,
//! so the outage integrand sees the location-averaged capture curve.
//! `PerRealization` draws the tagged position together with its interferers
//! and averages the per-realization outage directly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::capture::{
    capture_failure, CaptureMethod, CaptureSeriesConfig, DesiredExpansion, DesiredMixture, DesiredTerms,
    InterferenceMixture,
};
use crate::analytic::d2d::outage_d2d;
use crate::analytic::disconnection::p_disc;
use crate::analytic::interference::{interference_counts, InterferenceCounts};
use crate::analytic::outage::{i_prime_range, packet_outage};
use crate::analytic::profile::DataRateProfile;
use crate::error::{invalid, Result};
use crate::geometry::{path_gain_at_ground_distance, sample_visible_ground_distance};
use crate::report::OutageReport;
use crate::rng::{derive_seed, stream_rng};
use crate::scenario::Scenario;
use crate::specfun::{binomial_pmf, gauss_legendre_unit, SeriesControl};

/// Where the tagged device sits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaggedLocation {
    /// Uniform over the visible footprint.
    Footprint,
    /// Fixed ground distance from the sub-satellite point, in km.
    GroundDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingMode {
    Nested,
    PerRealization,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingConfig {
    pub realizations: usize,
    /// Gauss-Legendre nodes over the footprint (nested mode).
    pub radial_nodes: usize,
    /// Batches for the nested-mode standard error.
    pub batches: usize,
    /// Upper bound on the tabulated interferer count.
    pub max_interferers: usize,
    pub mode: AveragingMode,
    pub tagged: TaggedLocation,
    pub capture: CaptureSeriesConfig,
    pub disc_ctl: SeriesControl,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        Self {
            realizations: 1000,
            radial_nodes: 24,
            batches: 10,
            max_interferers: 64,
            mode: AveragingMode::Nested,
            tagged: TaggedLocation::Footprint,
            capture: CaptureSeriesConfig::default(),
            disc_ctl: SeriesControl::default(),
        }
    }
}

impl AveragingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be at least 1"));
        }
        if self.radial_nodes == 0 {
            return Err(invalid("radial_nodes", "must be at least 1"));
        }
        if self.batches == 0 {
            return Err(invalid("batches", "must be at least 1"));
        }
        if self.max_interferers == 0 {
            return Err(invalid("max_interferers", "must be at least 1"));
        }
        if let TaggedLocation::GroundDistance(d) = self.tagged {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(invalid("distance_km", format!("must be nonnegative, got {d}")));
            }
        }
        self.capture.validate()?;
        self.disc_ctl.validate()?;
        Ok(())
    }
}

/// A tagged position with its quadrature weight, path gain and
/// disconnection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedPoint {
    pub ground_distance_km: f64,
    pub weight: f64,
    pub g0: f64,
    pub p_disc: f64,
}

impl TaggedPoint {
    pub fn at(scn: &Scenario, ground_distance_km: f64, weight: f64, ctl: &SeriesControl) -> Result<Self> {
        let g0 = path_gain_at_ground_distance(ground_distance_km, scn.link.frequency_mhz, &scn.geometry)?;
        Ok(Self {
            ground_distance_km,
            weight,
            g0,
            p_disc: p_disc(&scn.fading, &scn.link, g0, ctl)?,
        })
    }
}

/// Gauss-Legendre points in the area coordinate over the visible disk.
pub fn footprint_points(scn: &Scenario, nodes: usize, ctl: &SeriesControl) -> Result<Vec<TaggedPoint>> {
    let r = scn.geometry.footprint_radius_km;
    gauss_legendre_unit(nodes)
        .into_iter()
        .map(|(u, w)| TaggedPoint::at(scn, r * u.sqrt(), w, ctl))
        .collect()
}

/// Smallest k with Pr{Bin(K, 1/S) > k} below `tail`, where K is the largest
/// fragment-overlap count reachable at these interference counts.
pub fn required_k_max(dr: &DataRateProfile, counts: &InterferenceCounts, tail: f64) -> Result<usize> {
    let (lo, hi) = i_prime_range(counts.i_total, dr.groups);
    if hi < lo {
        return Ok(1);
    }
    let big_k = counts.k_hdr(hi)?.max(counts.k_pl(hi)?);
    let q = 1.0 / dr.carriers_per_group as f64;
    let mut cdf = 0.0;
    for k in 0..=big_k {
        cdf += binomial_pmf(big_k, k, q);
        if 1.0 - cdf < tail {
            return Ok((k as usize).max(1));
        }
    }
    Ok((big_k as usize).max(1))
}

/// Active (visible at their start time) devices for a population of `n_users`.
pub fn active_users(scn: &Scenario, n_users: f64) -> f64 {
    n_users * scn.visible_fraction()
}

/// Tabulated capture-failure curves.
#[derive(Debug, Clone)]
pub struct CaptureTable {
    pub mode: AveragingMode,
    pub k_max: usize,
    /// Nested: the shared tagged points. PerRealization: one per realization.
    pub points: Vec<TaggedPoint>,
    /// Nested: rows[r][p * k_max + k - 1]. PerRealization: rows[r][k - 1].
    rows: Vec<Vec<f64>>,
}

fn interferer_gains(scn: &Scenario, k: usize, rng: &mut impl rand::Rng) -> Result<Vec<f64>> {
    (0..k)
        .map(|_| {
            let d = sample_visible_ground_distance(rng, &scn.geometry);
            path_gain_at_ground_distance(d, scn.link.frequency_mhz, &scn.geometry)
        })
        .collect()
}

/// P_cap(1..=k_max) for every point against one interferer draw. Once a
/// point's curve reaches 1 it stays there: adding interferers never helps.
fn capture_rows(
    scn: &Scenario,
    cfg: &AveragingConfig,
    points: &[TaggedPoint],
    gains: &[f64],
    desired: &DesiredMixture,
    defect: f64,
) -> Result<Vec<f64>> {
    let k_max = gains.len();
    let sir = scn.link.sir_threshold_linear();
    let mut row = vec![1.0; points.len() * k_max];
    match cfg.capture.method {
        CaptureMethod::DesiredExpansion => {
            for (p, pt) in points.iter().enumerate() {
                let mut dual = DesiredExpansion::new(pt.g0, sir, &scn.fading, desired)?;
                for (k, &g) in gains.iter().enumerate() {
                    dual.add_interferer(g)?;
                    let v = dual.value();
                    row[p * k_max + k] = v;
                    if v >= 1.0 - 1e-12 {
                        break;
                    }
                }
            }
        }
        CaptureMethod::InterferenceMixture => {
            let mut saturated = vec![false; points.len()];
            for k in 1..=k_max {
                if saturated.iter().all(|s| *s) {
                    break;
                }
                let mut mix = InterferenceMixture::new(&gains[..k], &scn.fading, cfg.capture.alpha)?;
                for (p, pt) in points.iter().enumerate() {
                    if saturated[p] {
                        continue;
                    }
                    let mut terms = DesiredTerms::new(pt.g0, mix.alpha(), sir, &scn.fading)?;
                    let v = capture_failure(&mut mix, &mut terms, &cfg.capture.i_series_ctl, defect)?;
                    row[p * k_max + k - 1] = v;
                    if v >= 1.0 - 1e-12 {
                        saturated[p] = true;
                    }
                }
            }
        }
    }
    Ok(row)
}

impl CaptureTable {
    pub fn build(scn: &Scenario, cfg: &AveragingConfig, k_max: usize, seed: u64) -> Result<Self> {
        cfg.validate()?;
        scn.validate()?;
        let k_max = k_max.clamp(1, cfg.max_interferers);
        let defect = cfg.capture.normalization_defect(&scn.fading)?;
        let desired = DesiredMixture::new(&scn.fading, &cfg.capture.n_series_ctl)?;
        let seed = derive_seed(seed, "analytic-locations");
        match cfg.mode {
            AveragingMode::Nested => {
                let points = match cfg.tagged {
                    TaggedLocation::Footprint => footprint_points(scn, cfg.radial_nodes, &cfg.disc_ctl)?,
                    TaggedLocation::GroundDistance(d) => vec![TaggedPoint::at(scn, d, 1.0, &cfg.disc_ctl)?],
                };
                let rows = (0..cfg.realizations)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = stream_rng(seed, r as u64);
                        let gains = interferer_gains(scn, k_max, &mut rng)?;
                        capture_rows(scn, cfg, &points, &gains, &desired, defect)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self {
                    mode: cfg.mode,
                    k_max,
                    points,
                    rows,
                })
            }
            AveragingMode::PerRealization => {
                let w = 1.0 / cfg.realizations as f64;
                let per = (0..cfg.realizations)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = stream_rng(seed, r as u64);
                        let d = match cfg.tagged {
                            TaggedLocation::Footprint => sample_visible_ground_distance(&mut rng, &scn.geometry),
                            TaggedLocation::GroundDistance(d) => d,
                        };
                        let pt = TaggedPoint::at(scn, d, w, &cfg.disc_ctl)?;
                        let gains = interferer_gains(scn, k_max, &mut rng)?;
                        Ok((pt, capture_rows(scn, cfg, &[pt], &gains, &desired, defect)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (points, rows) = per.into_iter().unzip();
                Ok(Self {
                    mode: cfg.mode,
                    k_max,
                    points,
                    rows,
                })
            }
        }
    }

    pub fn realizations(&self) -> usize {
        self.rows.len()
    }

    /// Capture curve of point `p` averaged over realizations `range`, with
    /// index 0 holding P_cap(0) = 0.
    fn mean_curve(&self, p: usize, range: std::ops::Range<usize>) -> Vec<f64> {
        let k_max = self.k_max;
        let mut out = vec![0.0; k_max + 1];
        let n = range.len() as f64;
        for r in range {
            let row = &self.rows[r];
            let off = match self.mode {
                AveragingMode::Nested => p * k_max,
                AveragingMode::PerRealization => 0,
            };
            for k in 1..=k_max {
                out[k] += row[off + k - 1];
            }
        }
        for v in out.iter_mut().skip(1) {
            *v /= n;
        }
        out
    }

    /// P_cap(k) averaged over tagged positions and realizations; index k.
    pub fn location_averaged(&self) -> Vec<f64> {
        let r = self.rows.len();
        match self.mode {
            AveragingMode::Nested => {
                let mut out = vec![0.0; self.k_max + 1];
                for (p, pt) in self.points.iter().enumerate() {
                    for (o, v) in out.iter_mut().zip(self.mean_curve(p, 0..r)) {
                        *o += pt.weight * v;
                    }
                }
                out
            }
            AveragingMode::PerRealization => self.mean_curve(0, 0..r),
        }
    }

    /// Averages `f(point, capture curve)` over the table: returns the
    /// estimate and its standard error.
    pub fn evaluate<F>(&self, batches: usize, f: F) -> Result<(f64, f64)>
    where
        F: Fn(&TaggedPoint, &[f64]) -> Result<f64> + Sync,
    {
        let r = self.rows.len();
        match self.mode {
            AveragingMode::Nested => {
                let over = |range: std::ops::Range<usize>| -> Result<f64> {
                    let vals = (0..self.points.len())
                        .into_par_iter()
                        .map(|p| {
                            let pt = &self.points[p];
                            Ok(pt.weight * f(pt, &self.mean_curve(p, range.clone()))?)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(vals.iter().sum())
                };
                let estimate = over(0..r)?;
                let nb = batches.min(r);
                if nb < 2 {
                    return Ok((estimate, 0.0));
                }
                let batch_vals = (0..nb)
                    .map(|b| over(b * r / nb..(b + 1) * r / nb))
                    .collect::<Result<Vec<_>>>()?;
                Ok((estimate, standard_error(&batch_vals)))
            }
            AveragingMode::PerRealization => {
                let vals = (0..r)
                    .into_par_iter()
                    .map(|i| f(&self.points[i], &self.mean_curve(i, i..i + 1)))
                    .collect::<Result<Vec<_>>>()?;
                let mean = vals.iter().sum::<f64>() / r as f64;
                Ok((mean, if r < 2 { 0.0 } else { standard_error(&vals) }))
            }
        }
    }
}

fn standard_error(vals: &[f64]) -> f64 {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// LR-FHSS packet outage for a population of `n_users` devices, each making
/// `n_tx` transmissions per slot.
pub fn outage_lrfhss_table(
    table: &CaptureTable,
    scn: &Scenario,
    n_users: f64,
    n_tx: u32,
    batches: usize,
) -> Result<OutageReport> {
    let dr = scn.dr();
    let counts = interference_counts(active_users(scn, n_users), n_tx, scn.slot_s, &dr)?;
    let (o, se) = table.evaluate(batches, |pt, cap| packet_outage(&dr, pt.p_disc, cap, &counts))?;
    Ok(OutageReport::analytic(o, se, table.realizations()))
}

/// Same outage with capture disabled: every co-channel collision loses the
/// fragment.
pub fn outage_lrfhss_no_capture(table: &CaptureTable, scn: &Scenario, n_users: f64, batches: usize) -> Result<f64> {
    let dr = scn.dr();
    let counts = interference_counts(active_users(scn, n_users), 1, scn.slot_s, &dr)?;
    Ok(table
        .evaluate(batches, |pt, _| packet_outage(&dr, pt.p_disc, &[], &counts))?
        .0)
}

/// Cooperative outage. Every device makes two LR-FHSS transmissions (two
/// coded packets, or a packet and its retransmission), so the per-packet
/// outage is evaluated at twice the single-transmission traffic.
pub fn outage_d2d_table(
    table: &CaptureTable,
    scn: &Scenario,
    n_users: f64,
    p_d2d: f64,
    batches: usize,
) -> Result<OutageReport> {
    let dr = scn.dr();
    let counts = interference_counts(active_users(scn, n_users), 2, scn.slot_s, &dr)?;
    let (o, se) = table.evaluate(batches, |pt, cap| {
        Ok(outage_d2d(packet_outage(&dr, pt.p_disc, cap, &counts)?, p_d2d))
    })?;
    Ok(OutageReport::analytic(o, se, table.realizations()))
}

/// k_max covering every population in `n_users` at `n_tx` transmissions.
pub fn k_max_for(scn: &Scenario, n_users: &[f64], n_tx: u32, cap: usize) -> Result<usize> {
    let dr = scn.dr();
    let mut k = 1;
    for &n in n_users {
        let counts = interference_counts(active_users(scn, n), n_tx, scn.slot_s, &dr)?;
        k = k.max(required_k_max(&dr, &counts, 1e-12)?);
    }
    Ok(k.min(cap))
}

/// Location-averaged LR-FHSS outage at the scenario's population.
pub fn outage_lrfhss(scn: &Scenario, cfg: &AveragingConfig) -> Result<OutageReport> {
    let n = scn.n_users() as f64;
    let k_max = k_max_for(scn, &[n], 1, cfg.max_interferers)?;
    let table = CaptureTable::build(scn, cfg, k_max, scn.seed)?;
    outage_lrfhss_table(&table, scn, n, 1, cfg.batches)
}
