use serde::Serialize;

/// Lost packets by cause. Causes are exclusive: a packet lost with any
/// co-channel collision is attributed to the header or payload condition it
/// failed, one that only saw noise to `noise`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LossBreakdown {
    pub noise: u64,
    pub header_loss: u64,
    pub payload_loss: u64,
    pub d2d_unavailable: u64,
}

impl LossBreakdown {
    pub fn total(&self) -> u64 {
        self.noise + self.header_loss + self.payload_loss + self.d2d_unavailable
    }

    pub fn merge(&mut self, other: &LossBreakdown) {
        self.noise += other.noise;
        self.header_loss += other.header_loss;
        self.payload_loss += other.payload_loss;
        self.d2d_unavailable += other.d2d_unavailable;
    }
}

/// Outage estimate from either engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageReport {
    pub outage_estimate: f64,
    pub std_error: f64,
    /// Simulation trials or analytic location realizations.
    pub trials: usize,
    /// Tracked packets (simulation only).
    pub tracked: u64,
    pub lost: u64,
    pub loss_breakdown: LossBreakdown,
}

impl OutageReport {
    pub fn analytic(outage_estimate: f64, std_error: f64, realizations: usize) -> Self {
        Self {
            outage_estimate,
            std_error,
            trials: realizations,
            tracked: 0,
            lost: 0,
            loss_breakdown: LossBreakdown::default(),
        }
    }
}
