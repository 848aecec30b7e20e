use serde::{Deserialize, Serialize};

use crate::analytic::profile::{lora_time_on_air_s, DataRate, DataRateProfile, LinkBudget};
use crate::channel::{Environment, ShadowedRiceParams};
use crate::error::{invalid, Result};
use crate::geometry::{footprint_area_km2, visible_fraction, SatelliteGeometry};

/// Device population, either as a count or as a density over the swept region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Users(u64),
    Density(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct D2dSettings {
    pub enabled: bool,
    pub d_max_km: f64,
    /// Probability that the LoRa exchange inside a cluster succeeds.
    pub p_lora_success: f64,
}

impl Default for D2dSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            d_max_km: 1.5,
            p_lora_success: 0.9,
        }
    }
}

/// LoRa frame used for the in-cluster exchange: SF12, 500 kHz, 30 bytes, CR 4/8.
pub fn d2d_exchange_airtime_s() -> f64 {
    lora_time_on_air_s(12, 500e3, 30, 4, 8, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: SatelliteGeometry,
    pub fading: ShadowedRiceParams,
    pub link: LinkBudget,
    pub data_rate: DataRate,
    pub slot_s: f64,
    pub population: Population,
    pub d2d: D2dSettings,
    pub seed: u64,
}

impl Scenario {
    pub fn table_iii(data_rate: DataRate) -> Self {
        Self {
            geometry: SatelliteGeometry::default(),
            fading: ShadowedRiceParams::preset(Environment::Average),
            link: LinkBudget::default(),
            data_rate,
            slot_s: 291.1,
            population: Population::Users(100_000),
            d2d: D2dSettings::default(),
            seed: 1,
        }
    }

    pub fn dr(&self) -> DataRateProfile {
        self.data_rate.profile()
    }

    pub fn footprint_area_km2(&self) -> f64 {
        footprint_area_km2(&self.geometry, self.slot_s)
    }

    pub fn visible_fraction(&self) -> f64 {
        visible_fraction(&self.geometry, self.slot_s)
    }

    pub fn n_users(&self) -> u64 {
        match self.population {
            Population::Users(n) => n,
            Population::Density(rho) => (rho * self.footprint_area_km2()).round() as u64,
        }
    }

    pub fn density_per_km2(&self) -> f64 {
        match self.population {
            Population::Users(n) => n as f64 / self.footprint_area_km2(),
            Population::Density(rho) => rho,
        }
    }

    pub fn with_users(&self, n: u64) -> Self {
        Self {
            population: Population::Users(n),
            ..self.clone()
        }
    }

    /// Shrinks the swept area by `area_scale`, keeping density, slot length
    /// and per-device behaviour.
    pub fn scaled(&self, area_scale: f64) -> Result<Self> {
        let geometry = self.geometry.scaled(area_scale)?;
        let population = match self.population {
            Population::Users(n) => Population::Users((n as f64 * area_scale).round() as u64),
            p @ Population::Density(_) => p,
        };
        Ok(Self {
            geometry,
            population,
            ..self.clone()
        })
    }

    /// Worst-case airtime of one device in a slot with cooperation on.
    pub fn d2d_airtime_s(&self) -> f64 {
        2.0 * DataRate::DR5.profile().toa_s() + d2d_exchange_airtime_s()
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.fading.validate()?;
        self.link.validate()?;
        if !(self.slot_s > 0.0 && self.slot_s.is_finite()) {
            return Err(invalid("slot_s", format!("must be positive, got {}", self.slot_s)));
        }
        if let Population::Density(rho) = self.population {
            if !(rho >= 0.0 && rho.is_finite()) {
                return Err(invalid("density", format!("must be nonnegative, got {rho}")));
            }
        }
        if !(self.d2d.d_max_km >= 0.0) {
            return Err(invalid("d_max_km", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.d2d.p_lora_success) {
            return Err(invalid("p_lora_success", "must lie in [0, 1]"));
        }
        // 1 ms slack: the published slot length is rounded down
        if self.d2d.enabled && self.d2d_airtime_s() > 0.01 * self.slot_s + 1e-3 {
            return Err(invalid(
                "slot_s",
                format!(
                    "1% duty cycle violated: {:.4} s of airtime in a {} s slot",
                    self.d2d_airtime_s(),
                    self.slot_s
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_iii_slot_meets_duty_cycle() {
        let mut s = Scenario::table_iii(DataRate::DR5);
        s.d2d.enabled = true;
        assert!(s.validate().is_ok());
        s.slot_s = 250.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn density_round_trip() {
        let s = Scenario::table_iii(DataRate::DR6);
        let rho = s.density_per_km2();
        let t = Scenario {
            population: Population::Density(rho),
            ..s.clone()
        };
        assert_eq!(t.n_users(), s.n_users());
    }

    #[test]
    fn scaling_preserves_density() {
        let s = Scenario::table_iii(DataRate::DR6).with_users(1_000_000);
        let t = s.scaled(0.01).unwrap();
        assert_eq!(t.n_users(), 10_000);
        assert!((t.density_per_km2() / s.density_per_km2() - 1.0).abs() < 1e-9);
    }
}
