use rand::Rng;

use crate::analytic::profile::DataRateProfile;

/// Group and per-fragment carriers of one packet: headers first, then payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopSequence {
    pub group: u32,
    pub carriers: Vec<u32>,
}

/// Uniform group, i.i.d. uniform carriers within it.
pub fn generate_hops<R: Rng + ?Sized>(rng: &mut R, dr: &DataRateProfile) -> HopSequence {
    let group = rng.random_range(0..dr.groups);
    let carriers = (0..dr.n_hdr + dr.n_pl)
        .map(|_| rng.random_range(0..dr.carriers_per_group))
        .collect();
    HopSequence { group, carriers }
}
