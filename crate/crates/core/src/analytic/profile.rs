use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataRate {
    DR5,
    DR6,
}

impl DataRate {
    pub const ALL: [DataRate; 2] = [DataRate::DR5, DataRate::DR6];

    pub fn name(&self) -> &'static str {
        match self {
            DataRate::DR5 => "DR5",
            DataRate::DR6 => "DR6",
        }
    }

    pub fn profile(&self) -> DataRateProfile {
        DataRateProfile::for_rate(*self)
    }
}

impl std::str::FromStr for DataRate {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DR5" => Ok(DataRate::DR5),
            "DR6" => Ok(DataRate::DR6),
            other => Err(format!("unknown data rate '{other}' (expected DR5 or DR6)")),
        }
    }
}

impl std::fmt::Display for DataRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// LR-FHSS constants of one data rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataRateProfile {
    pub name: DataRate,
    pub n_hdr: u32,
    pub t_hdr_s: f64,
    pub n_pl: u32,
    pub t_pl_s: f64,
    /// Code rate as numerator / denominator.
    pub code_rate: (u32, u32),
    pub groups: u32,
    pub carriers_per_group: u32,
    pub obw_hz: f64,
}

impl DataRateProfile {
    pub fn for_rate(rate: DataRate) -> Self {
        let (n_hdr, code_rate) = match rate {
            DataRate::DR5 => (3, (1, 3)),
            DataRate::DR6 => (2, (2, 3)),
        };
        Self {
            name: rate,
            n_hdr,
            t_hdr_s: 0.233,
            n_pl: 5,
            t_pl_s: 0.102,
            code_rate,
            groups: 52,
            carriers_per_group: 60,
            obw_hz: 488.0,
        }
    }

    pub fn toa_s(&self) -> f64 {
        self.n_hdr as f64 * self.t_hdr_s + self.n_pl as f64 * self.t_pl_s
    }

    /// Smallest number of lost payload fragments that defeats the code,
    /// ceil((1 - kappa) N_PL).
    pub fn omega(&self) -> u32 {
        let (num, den) = self.code_rate;
        ((den - num) * self.n_pl).div_ceil(den)
    }

    pub fn fragments(&self) -> u32 {
        self.n_hdr + self.n_pl
    }

    pub fn channels(&self) -> u32 {
        self.groups * self.carriers_per_group
    }
}

/// Radio link parameters, in dB units as configured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_figure_db: f64,
    pub snr_threshold_db: f64,
    pub sir_threshold_db: f64,
    pub frequency_mhz: f64,
    pub obw_hz: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 30.0,
            tx_gain_dbi: 2.5,
            rx_gain_dbi: 22.6,
            noise_figure_db: 6.0,
            snr_threshold_db: 3.96,
            sir_threshold_db: 6.0,
            frequency_mhz: 905.4385,
            obw_hz: 488.0,
        }
    }
}

/// Thermal noise power (dBm) in the given bandwidth.
pub fn noise_power_dbm(noise_figure_db: f64, obw_hz: f64) -> f64 {
    -174.0 + noise_figure_db + 10.0 * obw_hz.log10()
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("tx_gain_dbi", self.tx_gain_dbi),
            ("rx_gain_dbi", self.rx_gain_dbi),
            ("noise_figure_db", self.noise_figure_db),
            ("snr_threshold_db", self.snr_threshold_db),
            ("sir_threshold_db", self.sir_threshold_db),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        if !(self.frequency_mhz > 0.0 && self.frequency_mhz.is_finite()) {
            return Err(invalid("frequency_mhz", "must be positive"));
        }
        if !(self.obw_hz > 0.0 && self.obw_hz.is_finite()) {
            return Err(invalid("obw_hz", "must be positive"));
        }
        Ok(())
    }

    /// P = P_t G_t G_r in mW.
    pub fn effective_power_mw(&self) -> f64 {
        db_to_linear(self.tx_power_dbm + self.tx_gain_dbi + self.rx_gain_dbi)
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(self.noise_figure_db, self.obw_hz)
    }

    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm())
    }

    pub fn snr_threshold_linear(&self) -> f64 {
        db_to_linear(self.snr_threshold_db)
    }

    pub fn sir_threshold_linear(&self) -> f64 {
        db_to_linear(self.sir_threshold_db)
    }

    /// Fading power below which a fragment at path gain `g0` is disconnected.
    pub fn disconnection_threshold(&self, g0: f64) -> f64 {
        self.snr_threshold_linear() * self.noise_mw() / (self.effective_power_mw() * g0)
    }
}

/// Time on air of a LoRa frame (s), standard Semtech formula.
pub fn lora_time_on_air_s(
    spreading_factor: u32,
    bandwidth_hz: f64,
    payload_bytes: u32,
    coding_rate_denominator_offset: u32,
    preamble_symbols: u32,
    low_data_rate_optimize: bool,
) -> f64 {
    let sf = spreading_factor as f64;
    let t_sym = 2f64.powi(spreading_factor as i32) / bandwidth_hz;
    let de = if low_data_rate_optimize { 1.0 } else { 0.0 };
    // explicit header, CRC on
    let num = 8.0 * payload_bytes as f64 - 4.0 * sf + 28.0 + 16.0;
    let den = 4.0 * (sf - 2.0 * de);
    let payload_symbols = 8.0 + ((num / den).ceil() * (coding_rate_denominator_offset as f64 + 4.0)).max(0.0);
    (preamble_symbols as f64 + 4.25 + payload_symbols) * t_sym
}
