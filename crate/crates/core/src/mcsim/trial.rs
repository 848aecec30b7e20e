use rand::Rng;
use rayon::prelude::*;

use crate::analytic::profile::DataRateProfile;
use crate::channel::FadingSampler;
use crate::error::Result;
use crate::geometry::{path_gain_at_ground_distance, satellite_ground_distance_at};
use crate::mcsim::cluster::cluster_devices;
use crate::mcsim::fragments::{
    decode_packet, loss_cause, resolve_all, FragmentEvent, FragmentKind, FragmentOutcome, LossCause,
};
use crate::mcsim::hopping::generate_hops;
use crate::mcsim::traffic::{generate_traffic, place_devices, Device};
use crate::netcode::{bytes_to_symbols, decode_cluster, encode_cluster};
use crate::report::{LossBreakdown, OutageReport};
use crate::rng::{derive_seed, stream_rng};
use crate::scenario::Scenario;

/// Tracked and lost packet counts of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub tracked: u64,
    pub lost: u64,
    pub breakdown: LossBreakdown,
}

impl TrialOutcome {
    pub fn merge(&mut self, other: &TrialOutcome) {
        self.tracked += other.tracked;
        self.lost += other.lost;
        self.breakdown.merge(&other.breakdown);
    }

    fn record_loss(&mut self, cause: LossCause) {
        self.lost += 1;
        match cause {
            LossCause::Noise => self.breakdown.noise += 1,
            LossCause::Header => self.breakdown.header_loss += 1,
            LossCause::Payload => self.breakdown.payload_loss += 1,
        }
    }
}

/// Fragments on the air during one slot.
struct Air<'a> {
    scn: &'a Scenario,
    dr: DataRateProfile,
    sampler: FadingSampler,
    power_mw: f64,
    noise_mw: f64,
    frags: Vec<FragmentEvent>,
    /// Index of each packet's first fragment.
    packets: Vec<usize>,
}

impl<'a> Air<'a> {
    fn new(scn: &'a Scenario) -> Result<Self> {
        Ok(Self {
            scn,
            dr: scn.dr(),
            sampler: FadingSampler::new(&scn.fading)?,
            power_mw: scn.link.effective_power_mw(),
            noise_mw: scn.link.noise_mw(),
            frags: Vec::new(),
            packets: Vec::new(),
        })
    }

    fn transmit<R: Rng + ?Sized>(&mut self, rng: &mut R, owner: usize, device: &Device, start: f64) -> Result<usize> {
        let geo = &self.scn.geometry;
        let d = satellite_ground_distance_at(start, &device.position, geo).min(geo.footprint_radius_km);
        let gain = path_gain_at_ground_distance(d, self.scn.link.frequency_mhz, geo)?;
        let hops = generate_hops(rng, &self.dr);
        let id = self.packets.len();
        self.packets.push(self.frags.len());
        let mut t = start;
        for (f, &carrier) in hops.carriers.iter().enumerate() {
            let (kind, duration_s) = if f < self.dr.n_hdr as usize {
                (FragmentKind::Header, self.dr.t_hdr_s)
            } else {
                (FragmentKind::Payload, self.dr.t_pl_s)
            };
            let rx = self.power_mw * gain * self.sampler.sample(rng);
            self.frags.push(FragmentEvent {
                owner: owner as u32,
                packet: id as u32,
                kind,
                start_s: t,
                duration_s,
                group: hops.group,
                carrier,
                rx_power_mw: rx,
                snr_linear: rx / self.noise_mw,
            });
            t += duration_s;
        }
        Ok(id)
    }

    fn resolve(&self) -> Vec<FragmentOutcome> {
        resolve_all(&self.frags, &self.scn.link)
    }

    fn outcomes<'o>(&self, all: &'o [FragmentOutcome], packet: usize) -> &'o [FragmentOutcome] {
        let first = self.packets[packet];
        &all[first..first + self.dr.fragments() as usize]
    }
}

fn is_tracked(starts: &[f64], toa: f64, slot_s: f64) -> bool {
    starts.iter().all(|&t| t >= toa && t <= slot_s - 2.0 * toa)
}

/// One slot of plain LR-FHSS: each participating device sends one packet.
pub fn run_lrfhss_trial<R: Rng + ?Sized>(rng: &mut R, scn: &Scenario) -> Result<TrialOutcome> {
    let devices = place_devices(rng, scn);
    let traffic = generate_traffic(rng, scn, &devices);
    let mut air = Air::new(scn)?;
    let toa = air.dr.toa_s();
    let mut tracked = Vec::new();
    for &(dev, start) in &traffic {
        let id = air.transmit(rng, dev, &devices[dev], start)?;
        if is_tracked(&[start], toa, scn.slot_s) {
            tracked.push(id);
        }
    }
    let all = air.resolve();
    let mut out = TrialOutcome::default();
    for id in tracked {
        out.tracked += 1;
        let o = air.outcomes(&all, id);
        if !decode_packet(o, &air.dr) {
            out.record_loss(loss_cause(o, &air.dr));
        }
    }
    Ok(out)
}

enum Session {
    /// Network-coded: own original and parity, partner original and parity.
    Coded {
        own: [usize; 2],
        partner: [usize; 2],
        first: bool,
    },
    /// Own packet sent twice.
    Repeat([usize; 2]),
}

/// One slot of cooperative LR-FHSS. Clustered devices whose exchange works
/// send original then parity; the rest send their packet twice.
pub fn run_d2d_trial<R: Rng + ?Sized>(rng: &mut R, scn: &Scenario) -> Result<TrialOutcome> {
    let devices = place_devices(rng, scn);
    let positions: Vec<_> = devices.iter().map(|d| d.position).collect();
    let clusters = cluster_devices(&positions, scn.d2d.d_max_km);
    let mut air = Air::new(scn)?;
    let toa = air.dr.toa_s();
    let mut sessions: Vec<(Session, Vec<f64>)> = Vec::new();

    let repeat = |air: &mut Air, rng: &mut R, dev: usize| -> Result<(Session, Vec<f64>)> {
        let s = devices[dev].draw_starts(rng, 2, toa);
        let a = air.transmit(rng, dev, &devices[dev], s[0])?;
        let b = air.transmit(rng, dev, &devices[dev], s[1])?;
        Ok((Session::Repeat([a, b]), s))
    };

    for &(a, b) in &clusters.pairs {
        if !devices[a].participates(rng, scn.slot_s) {
            continue;
        }
        let partner_visible = devices[b].window.is_some();
        if partner_visible && rng.random::<f64>() < scn.d2d.p_lora_success {
            let sa = devices[a].draw_starts(rng, 2, toa);
            let sb = devices[b].draw_starts(rng, 2, toa);
            let oa = air.transmit(rng, a, &devices[a], sa[0])?;
            let pa = air.transmit(rng, a, &devices[a], sa[1])?;
            let ob = air.transmit(rng, b, &devices[b], sb[0])?;
            let pb = air.transmit(rng, b, &devices[b], sb[1])?;
            sessions.push((
                Session::Coded {
                    own: [oa, pa],
                    partner: [ob, pb],
                    first: true,
                },
                sa,
            ));
            sessions.push((
                Session::Coded {
                    own: [ob, pb],
                    partner: [oa, pa],
                    first: false,
                },
                sb,
            ));
        } else {
            sessions.push(repeat(&mut air, rng, a)?);
            if partner_visible {
                sessions.push(repeat(&mut air, rng, b)?);
            }
        }
    }
    for &s in &clusters.singles {
        if devices[s].participates(rng, scn.slot_s) {
            sessions.push(repeat(&mut air, rng, s)?);
        }
    }

    let all = air.resolve();
    let decoded = |p: usize| decode_packet(air.outcomes(&all, p), &air.dr);
    let mut out = TrialOutcome::default();
    for (session, starts) in &sessions {
        if !is_tracked(starts, toa, scn.slot_s) {
            continue;
        }
        out.tracked += 1;
        match *session {
            Session::Repeat([a, b]) => {
                if !decoded(a) && !decoded(b) {
                    out.lost += 1;
                    out.breakdown.d2d_unavailable += 1;
                }
            }
            Session::Coded { own, partner, first } => {
                if decoded(own[0]) {
                    continue;
                }
                if !recover_through_cluster(rng, own, partner, first, &decoded) {
                    out.record_loss(loss_cause(air.outcomes(&all, own[0]), &air.dr));
                }
            }
        }
    }
    Ok(out)
}

/// Runs the GF(4) decoder on the packets that made it through and checks
/// that the tagged device's payload comes back.
fn recover_through_cluster<R: Rng + ?Sized>(
    rng: &mut R,
    own: [usize; 2],
    partner: [usize; 2],
    own_is_first: bool,
    decoded: &impl Fn(usize) -> bool,
) -> bool {
    let mut payload = |_: ()| -> Vec<u8> { (0..4).map(|_| rng.random()).collect() };
    let (own_bytes, partner_bytes) = (payload(()), payload(()));
    // codeword order is (o0, o_ne, p0, p_ne) with the first device as o0
    let (o0, o_ne, mask) = if own_is_first {
        (
            &own_bytes,
            &partner_bytes,
            [
                decoded(own[0]),
                decoded(partner[0]),
                decoded(own[1]),
                decoded(partner[1]),
            ],
        )
    } else {
        (
            &partner_bytes,
            &own_bytes,
            [
                decoded(partner[0]),
                decoded(own[0]),
                decoded(partner[1]),
                decoded(own[1]),
            ],
        )
    };
    let mut cw = encode_cluster(&bytes_to_symbols(o0), &bytes_to_symbols(o_ne)).expect("equal lengths");
    cw.received_mask = mask;
    match decode_cluster(&cw) {
        Ok((r0, r1)) => {
            let want = bytes_to_symbols(&own_bytes);
            if own_is_first {
                r0 == want
            } else {
                r1 == want
            }
        }
        Err(_) => false,
    }
}

/// Pools trial outcomes; the standard error is binomial over tracked packets.
pub fn estimate(trials: &[TrialOutcome]) -> OutageReport {
    let mut total = TrialOutcome::default();
    for t in trials {
        total.merge(t);
    }
    let n = total.tracked as f64;
    let p = if total.tracked == 0 { 0.0 } else { total.lost as f64 / n };
    OutageReport {
        outage_estimate: p,
        std_error: if total.tracked == 0 {
            0.0
        } else {
            (p * (1.0 - p) / n).sqrt()
        },
        trials: trials.len(),
        tracked: total.tracked,
        lost: total.lost,
        loss_breakdown: total.breakdown,
    }
}

/// Runs `trials` independent slots, each on its own stream of `seed`.
pub fn simulate(scn: &Scenario, trials: usize) -> Result<OutageReport> {
    scn.validate()?;
    let seed = derive_seed(scn.seed, "mcsim");
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            if scn.d2d.enabled {
                run_d2d_trial(&mut rng, scn)
            } else {
                run_lrfhss_trial(&mut rng, scn)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(estimate(&outcomes))
}
