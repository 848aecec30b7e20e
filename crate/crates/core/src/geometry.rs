//! Satellite-ground geometry, the rural shadowed path-loss model, and
//! device placement over the stadium-shaped coverage region.
//!
//! Coordinates are planar: along-track x (km) with the sub-satellite point at
//! (v t, 0), cross-track y (km). The region swept during one slot is a
//! rectangle of length v T capped by two half-disks of radius R_s.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const EARTH_RADIUS_KM: f64 = 6378.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SatelliteGeometry {
    pub orbital_height_km: f64,
    pub footprint_radius_km: f64,
    pub ground_speed_km_s: f64,
    pub earth_radius_km: f64,
}

impl Default for SatelliteGeometry {
    fn default() -> Self {
        Self {
            orbital_height_km: 780.0,
            footprint_radius_km: 2209.0,
            ground_speed_km_s: 7.4,
            earth_radius_km: EARTH_RADIUS_KM,
        }
    }
}

impl SatelliteGeometry {
    pub fn new(orbital_height_km: f64, footprint_radius_km: f64, ground_speed_km_s: f64) -> Result<Self> {
        let geo = Self {
            orbital_height_km,
            footprint_radius_km,
            ground_speed_km_s,
            earth_radius_km: EARTH_RADIUS_KM,
        };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("orbital_height_km", self.orbital_height_km),
            ("footprint_radius_km", self.footprint_radius_km),
            ("ground_speed_km_s", self.ground_speed_km_s),
            ("earth_radius_km", self.earth_radius_km),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.footprint_radius_km >= std::f64::consts::FRAC_PI_2 * self.earth_radius_km {
            return Err(invalid(
                "footprint_radius_km",
                "must be below a quarter of the Earth's circumference",
            ));
        }
        Ok(())
    }

    /// Shrinks the swept area by `area_scale` by scaling the footprint radius
    /// and the ground speed by its square root.
    pub fn scaled(&self, area_scale: f64) -> Result<Self> {
        if !(area_scale > 0.0 && area_scale <= 1.0) {
            return Err(invalid("area_scale", format!("must lie in (0, 1], got {area_scale}")));
        }
        let s = area_scale.sqrt();
        Ok(Self {
            footprint_radius_km: self.footprint_radius_km * s,
            ground_speed_km_s: self.ground_speed_km_s * s,
            ..*self
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePosition {
    pub along_track_km: f64,
    pub cross_track_km: f64,
}

impl DevicePosition {
    pub fn new(along_track_km: f64, cross_track_km: f64) -> Self {
        Self {
            along_track_km,
            cross_track_km,
        }
    }

    pub fn distance_km(&self, other: &DevicePosition) -> f64 {
        (self.along_track_km - other.along_track_km).hypot(self.cross_track_km - other.cross_track_km)
    }
}

fn check_elevation(elevation_deg: f64) -> Result<()> {
    if !(0.0..=90.0).contains(&elevation_deg) {
        return Err(Error::Domain {
            what: "elevation_deg",
            value: elevation_deg,
            constraint: "0 <= elevation <= 90",
        });
    }
    Ok(())
}

/// Slant range to the satellite seen at `elevation_deg`.
pub fn slant_distance_km(elevation_deg: f64, geo: &SatelliteGeometry) -> Result<f64> {
    check_elevation(elevation_deg)?;
    let re = geo.earth_radius_km;
    let a = elevation_deg.to_radians();
    let ratio = (geo.orbital_height_km + re) / re;
    Ok(re * ((ratio * ratio - a.cos().powi(2)).sqrt() - a.sin()))
}

/// Elevation angle (degrees) of the satellite from a point `ground_arc_km`
/// away from the sub-satellite point.
pub fn elevation_from_ground_distance(ground_arc_km: f64, geo: &SatelliteGeometry) -> Result<f64> {
    // allow round-off at the footprint edge
    if !(ground_arc_km >= 0.0) || ground_arc_km > geo.footprint_radius_km * (1.0 + 1e-12) {
        return Err(Error::Domain {
            what: "ground_arc_km",
            value: ground_arc_km,
            constraint: "0 <= ground arc <= footprint radius",
        });
    }
    if ground_arc_km == 0.0 {
        return Ok(90.0);
    }
    let re = geo.earth_radius_km;
    let theta = ground_arc_km / re;
    let num = theta.cos() - re / (re + geo.orbital_height_km);
    Ok(num.atan2(theta.sin()).to_degrees().clamp(0.0, 90.0))
}

/// Ground arc from the sub-satellite point to a device at slant range
/// `slant_km`; the inverse of [`slant_distance_km`] composed with
/// [`elevation_from_ground_distance`].
pub fn ground_distance_from_slant(slant_km: f64, geo: &SatelliteGeometry) -> Result<f64> {
    let re = geo.earth_radius_km;
    let rs = re + geo.orbital_height_km;
    let edge = slant_distance_km(elevation_from_ground_distance(geo.footprint_radius_km, geo)?, geo)?;
    let tol = 1e-9 * rs;
    if !(slant_km >= geo.orbital_height_km - tol && slant_km <= edge + tol) {
        return Err(Error::Domain {
            what: "slant_km",
            value: slant_km,
            constraint: "orbital height <= slant range <= slant range at the footprint edge",
        });
    }
    let d = slant_km.clamp(geo.orbital_height_km, edge);
    let sin_e = ((rs * rs - re * re - d * d) / (2.0 * re * d)).clamp(-1.0, 1.0);
    let e = sin_e.asin();
    let theta = std::f64::consts::FRAC_PI_2 - e - (re * e.cos() / rs).clamp(-1.0, 1.0).asin();
    Ok((re * theta).clamp(0.0, geo.footprint_radius_km))
}

/// Tree attenuation for rural shadowed sites, with the elevation-scaled
/// arguments taken in radians (90 deg maps to 1.57 and 3.937 rad).
pub fn tree_loss_db(elevation_deg: f64, frequency_mhz: f64) -> f64 {
    (25.8 * (-1.1 * elevation_deg * 1.57 / 90.0).exp() + 1.5 * (elevation_deg * 3.937 / 90.0).cos())
        * (frequency_mhz / 900.0).sqrt()
}

/// Atmospheric gas absorption; 0.2 dB at the horizon, 0.1 dB at zenith.
pub fn air_loss_db(elevation_deg: f64) -> f64 {
    0.1 * (1.0 + elevation_deg.to_radians().cos())
}

pub const RAIN_LOSS_DB: f64 = 0.1;
pub const FOG_LOSS_DB: f64 = 0.0;
/// Ionospheric scintillation plus Faraday rotation.
pub const IONO_FARADAY_LOSS_DB: f64 = 3.0;

pub fn free_space_loss_db(distance_km: f64, frequency_mhz: f64) -> f64 {
    32.44 + 20.0 * distance_km.log10() + 20.0 * frequency_mhz.log10()
}

/// Total path loss (dB) at the given elevation.
pub fn path_loss_db(elevation_deg: f64, frequency_mhz: f64, geo: &SatelliteGeometry) -> Result<f64> {
    if !(frequency_mhz > 0.0) {
        return Err(Error::Domain {
            what: "frequency_mhz",
            value: frequency_mhz,
            constraint: "frequency > 0",
        });
    }
    let d = slant_distance_km(elevation_deg, geo)?;
    Ok(free_space_loss_db(d, frequency_mhz)
        + air_loss_db(elevation_deg)
        + RAIN_LOSS_DB
        + tree_loss_db(elevation_deg, frequency_mhz)
        + FOG_LOSS_DB
        + IONO_FARADAY_LOSS_DB)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Linear power gain 10^(-L/10) of the path.
pub fn path_gain_linear(elevation_deg: f64, frequency_mhz: f64, geo: &SatelliteGeometry) -> Result<f64> {
    Ok(db_to_linear(-path_loss_db(elevation_deg, frequency_mhz, geo)?))
}

/// Linear path gain for a device `ground_arc_km` from the sub-satellite point.
pub fn path_gain_at_ground_distance(ground_arc_km: f64, frequency_mhz: f64, geo: &SatelliteGeometry) -> Result<f64> {
    let e = elevation_from_ground_distance(ground_arc_km, geo)?;
    path_gain_linear(e, frequency_mhz, geo)
}

/// Area of the region swept by the footprint during one slot.
pub fn footprint_area_km2(geo: &SatelliteGeometry, slot_seconds: f64) -> f64 {
    let r = geo.footprint_radius_km;
    2.0 * r * geo.ground_speed_km_s * slot_seconds + std::f64::consts::PI * r * r
}

/// Share of the swept region that is visible at any single instant.
pub fn visible_fraction(geo: &SatelliteGeometry, slot_seconds: f64) -> f64 {
    let r = geo.footprint_radius_km;
    std::f64::consts::PI * r * r / footprint_area_km2(geo, slot_seconds)
}

pub fn in_coverage(pos: &DevicePosition, geo: &SatelliteGeometry, slot_seconds: f64) -> bool {
    let r = geo.footprint_radius_km;
    let len = geo.ground_speed_km_s * slot_seconds;
    let x = pos.along_track_km;
    let y = pos.cross_track_km;
    let in_rect = (0.0..=len).contains(&x) && y.abs() <= r;
    in_rect || x.hypot(y) <= r || (x - len).hypot(y) <= r
}

/// Draws `count` positions uniformly over the swept region (rejection sampling).
pub fn sample_positions<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    geo: &SatelliteGeometry,
    slot_seconds: f64,
) -> Vec<DevicePosition> {
    let r = geo.footprint_radius_km;
    let len = geo.ground_speed_km_s * slot_seconds;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pos = DevicePosition::new(rng.random_range(-r..len + r), rng.random_range(-r..r));
        if in_coverage(&pos, geo, slot_seconds) {
            out.push(pos);
        }
    }
    out
}

/// Ground distance from a device to the sub-satellite point at time `t`.
pub fn satellite_ground_distance_at(t: f64, pos: &DevicePosition, geo: &SatelliteGeometry) -> f64 {
    (pos.along_track_km - geo.ground_speed_km_s * t).hypot(pos.cross_track_km)
}

/// Interval of [0, slot) during which the device lies inside the footprint,
/// or `None` if it is never visible.
pub fn visibility_window(pos: &DevicePosition, geo: &SatelliteGeometry, slot_seconds: f64) -> Option<(f64, f64)> {
    let r = geo.footprint_radius_km;
    let y = pos.cross_track_km;
    if y.abs() > r {
        return None;
    }
    let half = (r * r - y * y).sqrt();
    let v = geo.ground_speed_km_s;
    let lo = ((pos.along_track_km - half) / v).max(0.0);
    let hi = ((pos.along_track_km + half) / v).min(slot_seconds);
    (hi > lo).then_some((lo, hi))
}

/// Ground distance of a point drawn uniformly over the instantaneous footprint.
pub fn sample_visible_ground_distance<R: Rng + ?Sized>(rng: &mut R, geo: &SatelliteGeometry) -> f64 {
    geo.footprint_radius_km * rng.random::<f64>().sqrt()
}
