//! Reading off the largest population that meets an outage target.

use crate::error::{invalid, Result};

/// First upward crossing of `target` along a sweep of (population, outage)
/// pairs sorted by population, interpolated linearly in log-log space.
/// `None` when the sweep never crosses.
pub fn interpolate_crossing(sweep: &[(f64, f64)], target: f64) -> Option<f64> {
    if let Some(&(n0, o0)) = sweep.first() {
        if o0 >= target {
            return Some(n0);
        }
    }
    sweep.windows(2).find_map(|w| {
        let ((n0, o0), (n1, o1)) = (w[0], w[1]);
        if o0 < target && o1 >= target {
            if o0 <= 0.0 || n0 <= 0.0 {
                let t = (target - o0) / (o1 - o0);
                return Some(n0 + t * (n1 - n0));
            }
            let t = (target.ln() - o0.ln()) / (o1.ln() - o0.ln());
            Some((n0.ln() + t * (n1.ln() - n0.ln())).exp())
        } else {
            None
        }
    })
}

/// Bisection in log-population for the point where `outage(n)` reaches
/// `target`, assuming outage grows with n. Stops at relative width `rel_tol`.
pub fn bisect_capacity<F>(mut outage: F, lo: f64, hi: f64, target: f64, rel_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid(
            "capacity bracket",
            format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        ));
    }
    let (mut a, mut b) = (lo, hi);
    if outage(a)? >= target {
        return Err(invalid("capacity bracket", "outage already above target at lower end"));
    }
    if outage(b)? < target {
        return Err(invalid("capacity bracket", "outage below target at upper end"));
    }
    while b / a - 1.0 > rel_tol {
        let m = (a * b).sqrt();
        if outage(m)? < target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_crossing_is_exact() {
        // outage = (n / 1000)^2 crosses 1e-2 at n = 100
        let sweep: Vec<_> = [10.0, 50.0, 200.0, 1000.0]
            .iter()
            .map(|&n: &f64| (n, (n / 1000.0).powi(2)))
            .collect();
        let c = interpolate_crossing(&sweep, 1e-2).unwrap();
        assert!((c - 100.0).abs() < 1e-9);
        let b = bisect_capacity(|n| Ok((n / 1000.0).powi(2)), 1.0, 1e4, 1e-2, 1e-9).unwrap();
        assert!((b - 100.0).abs() < 1e-5);
    }

    #[test]
    fn no_crossing() {
        assert!(interpolate_crossing(&[(1.0, 1e-5), (2.0, 1e-4)], 1e-2).is_none());
    }
}
