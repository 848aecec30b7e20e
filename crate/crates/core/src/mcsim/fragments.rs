use crate::analytic::profile::{DataRateProfile, LinkBudget};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragmentKind {
    Header,
    Payload,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragmentEvent {
    pub owner: u32,
    pub packet: u32,
    pub kind: FragmentKind,
    pub start_s: f64,
    pub duration_s: f64,
    pub group: u32,
    pub carrier: u32,
    pub rx_power_mw: f64,
    pub snr_linear: f64,
}

impl FragmentEvent {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    pub fn overlaps(&self, other: &FragmentEvent) -> bool {
        self.start_s < other.end_s() && other.start_s < self.end_s()
    }

    pub fn same_channel(&self, other: &FragmentEvent) -> bool {
        self.group == other.group && self.carrier == other.carrier
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FragmentOutcome {
    pub survived: bool,
    /// At least one co-channel fragment of another device overlapped.
    pub collided: bool,
}

fn survives(frag: &FragmentEvent, interference_mw: f64, collided: bool, link: &LinkBudget) -> bool {
    frag.snr_linear > link.snr_threshold_linear()
        && (!collided || frag.rx_power_mw / interference_mw > link.sir_threshold_linear())
}

/// Survival of `frag` against the given co-channel fragments. Entries that do
/// not share the channel, do not overlap, or belong to the same device are
/// ignored.
pub fn resolve_fragment(frag: &FragmentEvent, cochannel: &[FragmentEvent], link: &LinkBudget) -> bool {
    let hits = cochannel
        .iter()
        .filter(|o| o.owner != frag.owner && o.same_channel(frag) && o.overlaps(frag));
    let (mut sum, mut any) = (0.0, false);
    for o in hits {
        sum += o.rx_power_mw;
        any = true;
    }
    survives(frag, sum, any, link)
}

/// Resolves every fragment: one sort by (group, carrier, start) and a sweep
/// over each channel.
pub fn resolve_all(frags: &[FragmentEvent], link: &LinkBudget) -> Vec<FragmentOutcome> {
    let n = frags.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&frags[a], &frags[b]);
        (x.group, x.carrier)
            .cmp(&(y.group, y.carrier))
            .then(x.start_s.total_cmp(&y.start_s))
    });
    let mut interference = vec![0.0; n];
    let mut collided = vec![false; n];
    for a in 0..n {
        let i = order[a];
        let fi = &frags[i];
        let end = fi.end_s();
        for &j in &order[a + 1..] {
            let fj = &frags[j];
            if !fj.same_channel(fi) || fj.start_s >= end {
                break;
            }
            if fj.owner != fi.owner {
                interference[i] += fj.rx_power_mw;
                interference[j] += fi.rx_power_mw;
                collided[i] = true;
                collided[j] = true;
            }
        }
    }
    (0..n)
        .map(|i| FragmentOutcome {
            survived: survives(&frags[i], interference[i], collided[i], link),
            collided: collided[i],
        })
        .collect()
}

/// Decoded iff at least one header replica survives and fewer than omega
/// payload fragments are lost. `outcomes` lists headers first.
pub fn decode_packet(outcomes: &[FragmentOutcome], dr: &DataRateProfile) -> bool {
    let n_hdr = dr.n_hdr as usize;
    let header_ok = outcomes[..n_hdr].iter().any(|o| o.survived);
    let lost_pl = outcomes[n_hdr..].iter().filter(|o| !o.survived).count();
    header_ok && (lost_pl as u32) < dr.omega()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossCause {
    Noise,
    Header,
    Payload,
}

/// Why an undecoded packet was lost: noise when no fragment collided,
/// otherwise the decoding condition it failed (headers checked first).
pub fn loss_cause(outcomes: &[FragmentOutcome], dr: &DataRateProfile) -> LossCause {
    if !outcomes.iter().any(|o| o.collided) {
        return LossCause::Noise;
    }
    let n_hdr = dr.n_hdr as usize;
    if outcomes[..n_hdr].iter().all(|o| !o.survived) {
        LossCause::Header
    } else {
        LossCause::Payload
    }
}
