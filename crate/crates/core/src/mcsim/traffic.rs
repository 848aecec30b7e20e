use rand::Rng;

use crate::geometry::{sample_positions, visibility_window, DevicePosition};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub position: DevicePosition,
    /// Visibility interval within the slot.
    pub window: Option<(f64, f64)>,
}

impl Device {
    pub fn new(position: DevicePosition, scn: &Scenario) -> Self {
        Self {
            position,
            window: visibility_window(&position, &scn.geometry, scn.slot_s),
        }
    }

    /// Draws whether the device transmits in this slot.
    pub fn participates<R: Rng + ?Sized>(&self, rng: &mut R, slot_s: f64) -> bool {
        match self.window {
            Some((lo, hi)) => rng.random::<f64>() * slot_s < hi - lo,
            None => false,
        }
    }

    /// `count` sorted start times inside the window, kept at least `spacing`
    /// apart when the window allows it.
    pub fn draw_starts<R: Rng + ?Sized>(&self, rng: &mut R, count: usize, spacing: f64) -> Vec<f64> {
        let Some((lo, hi)) = self.window else {
            return Vec::new();
        };
        let fits = hi - lo >= count as f64 * spacing;
        let mut starts = Vec::with_capacity(count);
        for _ in 0..64 {
            starts.clear();
            starts.extend((0..count).map(|_| rng.random_range(lo..hi)));
            starts.sort_by(f64::total_cmp);
            if !fits || starts.windows(2).all(|w| w[1] - w[0] >= spacing) {
                break;
            }
        }
        starts
    }
}

/// Places the population over the swept region.
pub fn place_devices<R: Rng + ?Sized>(rng: &mut R, scn: &Scenario) -> Vec<Device> {
    sample_positions(rng, scn.n_users() as usize, &scn.geometry, scn.slot_s)
        .into_iter()
        .map(|p| Device::new(p, scn))
        .collect()
}

/// One start time per participating device: (device index, start).
pub fn generate_traffic<R: Rng + ?Sized>(rng: &mut R, scn: &Scenario, devices: &[Device]) -> Vec<(usize, f64)> {
    devices
        .iter()
        .enumerate()
        .filter_map(|(i, d)| {
            if d.participates(rng, scn.slot_s) {
                d.draw_starts(rng, 1, 0.0).first().map(|t| (i, *t))
            } else {
                None
            }
        })
        .collect()
}
