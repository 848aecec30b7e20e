//! GF(4) network coding for two-device clusters.
//!
//! Each device sends its own packet and a parity packet. With originals
//! o0, o_ne the parities are p0 = o0 + o_ne and p_ne = o0 + 2 o_ne, so the
//! four packets have coefficient rows [1,0], [0,1], [1,1], [1,2]. Every pair
//! of rows is independent over GF(4), so any two received packets recover
//! both originals.

use thiserror::Error;

/// Element of GF(4) = GF(2)[x]/(x^2 + x + 1); 2 stands for x, 3 for x + 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf4(u8);

const MUL: [[u8; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
const INV: [u8; 4] = [0, 1, 3, 2];

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0);
    pub const ONE: Gf4 = Gf4(1);
    pub const X: Gf4 = Gf4(2);

    pub fn new(value: u8) -> Option<Self> {
        (value < 4).then_some(Gf4(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> [Gf4; 4] {
        [Gf4(0), Gf4(1), Gf4(2), Gf4(3)]
    }

    pub fn inverse(self) -> Option<Gf4> {
        (self.0 != 0).then(|| Gf4(INV[self.0 as usize]))
    }
}

impl std::ops::Add for Gf4 {
    type Output = Gf4;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf4) -> Gf4 {
        Gf4(self.0 ^ rhs.0)
    }
}

impl std::ops::Mul for Gf4 {
    type Output = Gf4;
    fn mul(self, rhs: Gf4) -> Gf4 {
        Gf4(MUL[self.0 as usize][rhs.0 as usize])
    }
}

pub fn gf4_add(a: Gf4, b: Gf4) -> Gf4 {
    a + b
}

pub fn gf4_mul(a: Gf4, b: Gf4) -> Gf4 {
    a * b
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetcodeError {
    #[error("payload lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("only {0} of the 4 cluster packets were received, need 2")]
    InsufficientPackets(usize),
}

/// Packet order within a cluster codeword.
pub const ROWS: [[Gf4; 2]; 4] = [[Gf4(1), Gf4(0)], [Gf4(0), Gf4(1)], [Gf4(1), Gf4(1)], [Gf4(1), Gf4(2)]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeMode {
    /// Parities combine both originals.
    Cooperative,
    /// Partner coefficients zeroed: both parities repeat o0.
    Retransmission,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterCodeword {
    pub o0: Vec<Gf4>,
    pub o_ne: Vec<Gf4>,
    pub p0: Vec<Gf4>,
    pub p_ne: Vec<Gf4>,
    /// Which of [o0, o_ne, p0, p_ne] survived.
    pub received_mask: [bool; 4],
}

impl ClusterCodeword {
    fn packet(&self, i: usize) -> &[Gf4] {
        match i {
            0 => &self.o0,
            1 => &self.o_ne,
            2 => &self.p0,
            _ => &self.p_ne,
        }
    }
}

pub fn encode_cluster(o0: &[Gf4], o_ne: &[Gf4]) -> Result<ClusterCodeword, NetcodeError> {
    encode_cluster_with(o0, o_ne, EncodeMode::Cooperative)
}

pub fn encode_cluster_with(o0: &[Gf4], o_ne: &[Gf4], mode: EncodeMode) -> Result<ClusterCodeword, NetcodeError> {
    if o0.len() != o_ne.len() {
        return Err(NetcodeError::LengthMismatch(o0.len(), o_ne.len()));
    }
    let combine = |row: [Gf4; 2]| -> Vec<Gf4> {
        let c_ne = match mode {
            EncodeMode::Cooperative => row[1],
            EncodeMode::Retransmission => Gf4::ZERO,
        };
        o0.iter().zip(o_ne).map(|(a, b)| row[0] * *a + c_ne * *b).collect()
    };
    Ok(ClusterCodeword {
        o0: o0.to_vec(),
        o_ne: o_ne.to_vec(),
        p0: combine(ROWS[2]),
        p_ne: combine(ROWS[3]),
        received_mask: [true; 4],
    })
}

/// Recovers (o0, o_ne) from any two received packets by eliminating over
/// GF(4). Only the masked-in packets are read.
pub fn decode_cluster(cw: &ClusterCodeword) -> Result<(Vec<Gf4>, Vec<Gf4>), NetcodeError> {
    let got: Vec<usize> = (0..4).filter(|&i| cw.received_mask[i]).collect();
    if got.len() < 2 {
        return Err(NetcodeError::InsufficientPackets(got.len()));
    }
    let (i, j) = (got[0], got[1]);
    let ([a, b], [c, d]) = (ROWS[i], ROWS[j]);
    let det = a * d + b * c;
    let inv = det.inverse().expect("MDS rows are pairwise independent");
    let (yi, yj) = (cw.packet(i), cw.packet(j));
    if yi.len() != yj.len() {
        return Err(NetcodeError::LengthMismatch(yi.len(), yj.len()));
    }
    // inverse of [[a, b], [c, d]] is det^-1 [[d, b], [c, a]] in characteristic 2
    let o0 = yi.iter().zip(yj).map(|(u, v)| inv * (d * *u + b * *v)).collect();
    let o_ne = yi.iter().zip(yj).map(|(u, v)| inv * (c * *u + a * *v)).collect();
    Ok((o0, o_ne))
}

/// True when every pair of coefficient rows has a nonzero determinant.
pub fn mds_check() -> bool {
    (0..4).all(|i| {
        (i + 1..4).all(|j| {
            let ([a, b], [c, d]) = (ROWS[i], ROWS[j]);
            a * d + b * c != Gf4::ZERO
        })
    })
}

/// Four symbols per byte, least significant bit pair first.
pub fn bytes_to_symbols(bytes: &[u8]) -> Vec<Gf4> {
    bytes
        .iter()
        .flat_map(|b| (0..4).map(move |s| Gf4((b >> (2 * s)) & 3)))
        .collect()
}

/// Inverse of [`bytes_to_symbols`]; a trailing partial byte is zero-padded.
pub fn symbols_to_bytes(symbols: &[Gf4]) -> Vec<u8> {
    symbols
        .chunks(4)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (s, g)| acc | (g.0 << (2 * s))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplication_table() {
        assert_eq!(Gf4(2) * Gf4(2), Gf4(3));
        assert_eq!(Gf4(2) * Gf4(3), Gf4(1));
        assert_eq!(Gf4(3) * Gf4(3), Gf4(2));
        assert_eq!(Gf4(1) + Gf4(2), Gf4(3));
    }

    #[test]
    fn encode_examples() {
        let cw = encode_cluster(&[Gf4(1)], &[Gf4(2)]).unwrap();
        assert_eq!(cw.p0, vec![Gf4(3)]);
        assert_eq!(cw.p_ne, vec![Gf4(2)]);
        assert!(encode_cluster(&[Gf4(1)], &[]).is_err());
    }

    #[test]
    fn parity_pair_decodes() {
        let mut cw = encode_cluster(&[Gf4(1)], &[Gf4(2)]).unwrap();
        cw.received_mask = [false, false, true, true];
        assert_eq!(decode_cluster(&cw).unwrap(), (vec![Gf4(1)], vec![Gf4(2)]));
        cw.received_mask = [false, true, false, false];
        assert_eq!(decode_cluster(&cw), Err(NetcodeError::InsufficientPackets(1)));
    }

    #[test]
    fn retransmission_mode_repeats_own_packet() {
        let cw = encode_cluster_with(&[Gf4(3), Gf4(1)], &[Gf4(2), Gf4(2)], EncodeMode::Retransmission).unwrap();
        assert_eq!(cw.p0, cw.o0);
        assert_eq!(cw.p_ne, cw.o0);
    }

    #[test]
    fn packing_round_trip() {
        let bytes: Vec<u8> = (0..=255).collect();
        assert_eq!(symbols_to_bytes(&bytes_to_symbols(&bytes)), bytes);
        assert_eq!(bytes_to_symbols(&[0b1110_0100]), vec![Gf4(0), Gf4(1), Gf4(2), Gf4(3)]);
    }
}
