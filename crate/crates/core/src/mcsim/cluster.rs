use std::collections::HashMap;

use crate::geometry::DevicePosition;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    pub pairs: Vec<(usize, usize)>,
    pub singles: Vec<usize>,
}

/// Greedy pairing: candidate pairs closer than `d_max_km` are taken in order
/// of increasing distance, each device joining at most one pair.
pub fn cluster_devices(positions: &[DevicePosition], d_max_km: f64) -> Clustering {
    let n = positions.len();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    if d_max_km > 0.0 {
        let cell = |p: &DevicePosition| {
            (
                (p.along_track_km / d_max_km).floor() as i64,
                (p.cross_track_km / d_max_km).floor() as i64,
            )
        };
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in positions.iter().enumerate() {
            grid.entry(cell(p)).or_default().push(i);
        }
        for (i, p) in positions.iter().enumerate() {
            let (cx, cy) = cell(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                        continue;
                    };
                    for &j in bucket {
                        if j > i {
                            let d = p.distance_km(&positions[j]);
                            if d < d_max_km {
                                candidates.push((d, i, j));
                            }
                        }
                    }
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut taken = vec![false; n];
    let mut out = Clustering::default();
    for (_, i, j) in candidates {
        if !taken[i] && !taken[j] {
            taken[i] = true;
            taken[j] = true;
            out.pairs.push((i, j));
        }
    }
    out.singles = (0..n).filter(|i| !taken[*i]).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_examples() {
        let p = |x, y| DevicePosition::new(x, y);
        assert_eq!(cluster_devices(&[p(0.0, 0.0), p(0.5, 0.0)], 1.5).pairs, vec![(0, 1)]);
        assert_eq!(cluster_devices(&[p(0.0, 0.0), p(5.0, 0.0)], 1.5).singles, vec![0, 1]);
        let c = cluster_devices(&[p(0.0, 0.0), p(0.3, 0.0), p(0.0, 0.4)], 1.5);
        assert_eq!(c.pairs, vec![(0, 1)]);
        assert_eq!(c.singles, vec![2]);
    }
}
