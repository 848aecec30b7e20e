//! Event-level Monte Carlo simulation of one satellite pass.
//!
//! Devices are spread over the region swept during the slot. A device takes
//! part in the slot with probability |W|/T, where W is the interval it sees
//! the satellite, and places its transmissions uniformly inside W. For a
//! single transmission this is the same as drawing a start uniformly in
//! [0, T) and keeping it only if the device is visible then; it also keeps
//! the second transmission of a cooperating device inside the pass.
//!
//! Every packet is split into header and payload fragments that hop over the
//! carriers of one group. Fragments sharing group and carrier and overlapping
//! in time interfere; survival needs the SNR above psi and, when collided,
//! the SIR against the summed co-channel power above delta.

pub mod cluster;
pub mod fragments;
pub mod hopping;
pub mod traffic;
pub mod trial;

pub use cluster::{cluster_devices, Clustering};
pub use fragments::{decode_packet, resolve_fragment, FragmentEvent, FragmentKind, FragmentOutcome};
pub use hopping::{generate_hops, HopSequence};
pub use traffic::{generate_traffic, Device};
pub use trial::{estimate, run_d2d_trial, run_lrfhss_trial, simulate, TrialOutcome};
