//! Outage of the cooperative (device-to-device) scheme.

/// Probability of at least one other device within `d_max_km`.
pub fn p_neighbor(density_per_km2: f64, d_max_km: f64) -> f64 {
    let x = density_per_km2.max(0.0) * std::f64::consts::PI * d_max_km * d_max_km;
    -(-x).exp_m1()
}

/// Probability that a device completes the D2D exchange: a neighbour exists
/// and the LoRa exchange succeeds.
pub fn p_d2d(p_lora_success: f64, p_ne: f64) -> f64 {
    (p_lora_success * p_ne).clamp(0.0, 1.0)
}

/// Outage when clustered devices relay through network-coded parities
/// (lost iff the own packet and at least two of the other three are lost),
/// and unclustered devices retransmit once.
pub fn outage_d2d(o_l: f64, p_d2d: f64) -> f64 {
    let o = o_l.clamp(0.0, 1.0);
    let p = p_d2d.clamp(0.0, 1.0);
    (p * o * (3.0 * o * o - 2.0 * o * o * o) + (1.0 - p) * o * o).clamp(0.0, 1.0)
}

/// Term-by-term evaluation of the published long-form expression with
/// individual packet outages (own, partner, own parity, partner parity).
/// Kept for comparison only: its bracket always requires the partner packet
/// lost, so it does not reduce to [`outage_d2d`] under equal outages.
pub fn outage_d2d_literal(o_one: f64, o_ne: f64, o_p0: f64, o_pne: f64, p_d2d: f64) -> f64 {
    let bracket = o_ne * (1.0 - o_p0) * (1.0 - o_pne) + o_ne * o_p0 * (1.0 - o_pne) + o_ne * o_p0 * o_pne;
    (p_d2d * o_one * bracket + (1.0 - p_d2d) * o_one * o_one).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_examples() {
        assert_eq!(p_neighbor(0.0, 1.5), 0.0);
        let v = p_neighbor(0.3, 1.5);
        assert!((v - (1.0 - (-0.3 * std::f64::consts::PI * 2.25f64).exp())).abs() < 1e-15);
        assert!((v - 0.880_04).abs() < 1e-5);
    }

    #[test]
    fn d2d_success_examples() {
        assert!((p_d2d(0.9, 1.0) - 0.9).abs() < 1e-15);
        assert_eq!(p_d2d(0.0, 0.7), 0.0);
        assert!((p_d2d(0.9, p_neighbor(0.3, 1.5)) - 0.792).abs() < 1e-3);
    }

    #[test]
    fn outage_examples() {
        assert!((outage_d2d(0.3, 0.0) - 0.09).abs() < 1e-15);
        assert!((outage_d2d(1.0, 0.4) - 1.0).abs() < 1e-15);
        assert!((outage_d2d(0.1, 0.8) - 0.00424).abs() < 1e-12);
    }

    #[test]
    fn literal_form_differs_from_definition() {
        let o = 0.2;
        let lit = outage_d2d_literal(o, o, o, o, 1.0);
        assert!((lit - outage_d2d(o, 1.0)).abs() > 1e-4);
    }
}
