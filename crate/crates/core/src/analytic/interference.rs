use crate::analytic::profile::DataRateProfile;
use crate::error::{invalid, Result};

/// Time-domain interference counts around a tagged packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceCounts {
    /// Devices starting within one time-on-air of the tagged start.
    pub i_total: u64,
    hdr_per_device: f64,
    pl_per_device: f64,
}

impl InterferenceCounts {
    /// Expected fragments overlapping one header replica when `i_prime`
    /// devices share the tagged group.
    pub fn i_hdr(&self, i_prime: u64) -> Result<f64> {
        check_i_prime(i_prime)?;
        Ok(self.hdr_per_device * i_prime as f64)
    }

    /// Expected fragments overlapping one payload fragment.
    pub fn i_pl(&self, i_prime: u64) -> Result<f64> {
        check_i_prime(i_prime)?;
        Ok(self.pl_per_device * i_prime as f64)
    }

    /// Binomial trial count ceil(i_hdr(I')).
    pub fn k_hdr(&self, i_prime: u64) -> Result<u64> {
        Ok(ceil_count(self.i_hdr(i_prime)?))
    }

    pub fn k_pl(&self, i_prime: u64) -> Result<u64> {
        Ok(ceil_count(self.i_pl(i_prime)?))
    }
}

fn check_i_prime(i_prime: u64) -> Result<()> {
    if i_prime == 0 {
        return Err(invalid(
            "i_prime",
            "zero interferers is the separate no-interference branch",
        ));
    }
    Ok(())
}

// ceil that does not round 14.000000000001 up to 15
fn ceil_count(x: f64) -> u64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil().max(0.0) as u64
}

/// Counts for `n_users` devices each sending `n_tx_per_slot` packets in a
/// slot of `slot_s` seconds.
pub fn interference_counts(
    n_users: f64,
    n_tx_per_slot: u32,
    slot_s: f64,
    dr: &DataRateProfile,
) -> Result<InterferenceCounts> {
    if !(n_users > 0.0 && n_users.is_finite()) {
        return Err(invalid("n_users", format!("must be positive, got {n_users}")));
    }
    if n_tx_per_slot == 0 {
        return Err(invalid("n_tx_per_slot", "must be at least 1"));
    }
    if !(slot_s > 0.0) {
        return Err(invalid("slot_s", "must be positive"));
    }
    let toa = dr.toa_s();
    let t_ave = slot_s / (n_tx_per_slot as f64 * n_users);
    let i_total = ((2.0 * toa / t_ave) - 1e-12).ceil().max(1.0) as u64 - 1;
    let (n_hdr, n_pl) = (dr.n_hdr as f64, dr.n_pl as f64);
    let (t_hdr, t_pl) = (dr.t_hdr_s, dr.t_pl_s);
    Ok(InterferenceCounts {
        i_total,
        hdr_per_device: (2.0 * t_hdr * n_hdr + (t_hdr + t_pl) * n_pl) / (2.0 * toa),
        pl_per_device: (2.0 * t_pl * n_pl + (t_pl + t_hdr) * n_hdr) / (2.0 * toa),
    })
}
