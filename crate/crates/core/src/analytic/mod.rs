//! Closed-form outage analysis.

pub mod averaging;
pub mod capacity;
pub mod capture;
pub mod d2d;
pub mod disconnection;
pub mod interference;
pub mod outage;
pub mod profile;

pub use averaging::{
    outage_d2d_table, outage_lrfhss, outage_lrfhss_table, AveragingConfig, AveragingMode, CaptureTable, TaggedLocation,
    TaggedPoint,
};
pub use capture::{p_cap, AlphaRule, CaptureMethod, CaptureSeriesConfig};
pub use d2d::{outage_d2d, p_d2d, p_neighbor};
pub use disconnection::{p_disc, p_disc_numint};
pub use interference::{interference_counts, InterferenceCounts};
pub use outage::{p_hdr, p_ni, p_pl, p_spf, packet_outage};
pub use profile::{DataRate, DataRateProfile, LinkBudget};
