//! Header, payload and packet outage for one tagged device, given its
//! disconnection probability and the capture-failure curve k -> P_cap(k).

use crate::analytic::interference::InterferenceCounts;
use crate::analytic::profile::DataRateProfile;
use crate::error::Result;
use crate::specfun::{binomial_pmf, CompensatedSum};

/// Loss probability of one fragment that overlaps `k_trials` fragments, each
/// landing on the same carrier with probability 1/S.
///
/// `capture` holds P_cap(k) at index k (index 0 unused); counts beyond its end
/// are treated as certain capture failure.
pub fn fragment_loss(k_trials: u64, carriers: u32, p_disc: f64, capture: &[f64]) -> f64 {
    let s = carriers as f64;
    let q = 1.0 / s;
    let known = (capture.len().saturating_sub(1) as u64).min(k_trials);
    // pmf by forward recurrence from k = 0
    let mut pmf = ((s - 1.0) / s).powf(k_trials as f64);
    let mut cdf = pmf;
    let mut acc = CompensatedSum::new();
    for k in 1..=known {
        pmf *= (k_trials - k + 1) as f64 / k as f64 * q / (1.0 - q);
        cdf += pmf;
        acc.add(pmf * capture[k as usize]);
    }
    if k_trials > known {
        acc.add((1.0 - cdf).max(0.0));
    }
    let collided = acc.value().clamp(0.0, 1.0);
    (p_disc + (1.0 - p_disc) * collided).clamp(0.0, 1.0)
}

/// Probability that all header replicas are lost given `i_prime` same-group
/// interferers.
pub fn p_hdr(
    i_prime: u64,
    dr: &DataRateProfile,
    p_disc: f64,
    capture: &[f64],
    counts: &InterferenceCounts,
) -> Result<f64> {
    let per_replica = fragment_loss(counts.k_hdr(i_prime)?, dr.carriers_per_group, p_disc, capture);
    Ok(per_replica.powi(dr.n_hdr as i32))
}

/// Loss probability of a single payload fragment.
pub fn p_spf(
    i_prime: u64,
    dr: &DataRateProfile,
    p_disc: f64,
    capture: &[f64],
    counts: &InterferenceCounts,
) -> Result<f64> {
    Ok(fragment_loss(
        counts.k_pl(i_prime)?,
        dr.carriers_per_group,
        p_disc,
        capture,
    ))
}

/// Probability that at least omega of the payload fragments are lost.
pub fn p_pl(dr: &DataRateProfile, p_spf: f64) -> f64 {
    let n = dr.n_pl as u64;
    (dr.omega() as u64..=n)
        .map(|m| binomial_pmf(n, m, p_spf))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Loss from noise alone, weighted by the probability that no time-domain
/// interferer shares the tagged group.
pub fn p_ni(dr: &DataRateProfile, p_disc: f64, counts: &InterferenceCounts) -> f64 {
    let g = dr.groups as f64;
    let prefactor = ((g - 1.0) / g).powf(counts.i_total as f64);
    prefactor * noise_only_loss(dr, p_disc)
}

/// Packet loss when every fragment only faces noise.
pub fn noise_only_loss(dr: &DataRateProfile, p_disc: f64) -> f64 {
    let hdr = p_disc.powi(dr.n_hdr as i32);
    (hdr + (1.0 - hdr) * p_pl(dr, p_disc)).clamp(0.0, 1.0)
}

/// Range of I' summed for the packet outage. Above 10^4 time-domain
/// interferers the binomial is cut at 8 standard deviations around its mean.
pub fn i_prime_range(i_total: u64, groups: u32) -> (u64, u64) {
    if i_total == 0 {
        return (1, 0);
    }
    if i_total <= 10_000 {
        return (1, i_total);
    }
    let q = 1.0 / groups as f64;
    let mean = i_total as f64 * q;
    let sd = (i_total as f64 * q * (1.0 - q)).sqrt();
    let lo = (mean - 8.0 * sd).floor().max(1.0) as u64;
    let hi = ((mean + 8.0 * sd).ceil() as u64).min(i_total);
    (lo, hi)
}

/// Probability mass of I' = 0 plus the summed range; 1 up to truncation.
pub fn binomial_mass_covered(i_total: u64, groups: u32) -> f64 {
    let q = 1.0 / groups as f64;
    let (lo, hi) = i_prime_range(i_total, groups);
    let mut acc = CompensatedSum::new();
    acc.add(binomial_pmf(i_total, 0, q));
    for i in lo..=hi {
        acc.add(binomial_pmf(i_total, i, q));
    }
    acc.value()
}

/// Outage of one tagged packet: the I'-weighted header/payload loss plus the
/// no-interference branch.
pub fn packet_outage(dr: &DataRateProfile, p_disc: f64, capture: &[f64], counts: &InterferenceCounts) -> Result<f64> {
    let q = 1.0 / dr.groups as f64;
    let (lo, hi) = i_prime_range(counts.i_total, dr.groups);
    let mut acc = CompensatedSum::new();
    let mut cache_hdr = std::collections::HashMap::new();
    let mut cache_pl = std::collections::HashMap::new();
    for i_prime in lo..=hi {
        let w = binomial_pmf(counts.i_total, i_prime, q);
        if w == 0.0 {
            continue;
        }
        let k_h = counts.k_hdr(i_prime)?;
        let k_p = counts.k_pl(i_prime)?;
        let ph = *cache_hdr
            .entry(k_h)
            .or_insert_with(|| fragment_loss(k_h, dr.carriers_per_group, p_disc, capture).powi(dr.n_hdr as i32));
        let ppl = *cache_pl
            .entry(k_p)
            .or_insert_with(|| p_pl(dr, fragment_loss(k_p, dr.carriers_per_group, p_disc, capture)));
        acc.add(w * (ph + (1.0 - ph) * ppl));
    }
    acc.add(p_ni(dr, p_disc, counts));
    Ok(acc.value().clamp(0.0, 1.0))
}
