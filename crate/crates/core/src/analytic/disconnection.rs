use crate::analytic::profile::LinkBudget;
use crate::channel::{power_pdf, ShadowedRiceParams};
use crate::error::{invalid, Result};
use crate::specfun::{regularized_lower_gamma, CompensatedSum, SeriesControl, SpecFunError};

/// Probability that the fading power falls below `x`, by the incomplete-gamma
/// series A sum (m)_n/(n! n!) C(n) B^-(n+1) gamma(n+1, B x).
pub fn fading_cdf_series(x: f64, p: &ShadowedRiceParams, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let k = p.series_constants();
    let bx = k.b_const * x;
    let y = k.ratio();
    // A/B (m)_n/n! y^n P(n+1, Bx): the n!'s of gamma(n+1, .) and of the
    // coefficient cancel into the regularized form.
    let mut coef = k.a_const / k.b_const;
    let mut acc = CompensatedSum::new();
    let limit = ctl.fixed_terms.unwrap_or(ctl.max_terms);
    for n in 0..limit {
        if n > 0 {
            coef *= (p.m + (n - 1) as f64) / n as f64 * y;
        }
        let term = coef * regularized_lower_gamma(n as f64 + 1.0, bx)?;
        acc.add(term);
        if ctl.fixed_terms.is_none() && n > 0 {
            if term == 0.0 || coef == 0.0 {
                return Ok(acc.value().clamp(0.0, 1.0));
            }
            // remaining terms are bounded by the geometric tail of coef
            let shrinking = (p.m + n as f64) / (n as f64 + 1.0) * y < 1.0;
            if shrinking && term.abs() <= ctl.rel_tolerance * acc.value().abs() {
                return Ok(acc.value().clamp(0.0, 1.0));
            }
        }
    }
    if ctl.fixed_terms.is_some() {
        return Ok(acc.value().clamp(0.0, 1.0));
    }
    Err(SpecFunError::NotConverged {
        name: "p_disc series",
        tolerance: ctl.rel_tolerance,
        max_terms: ctl.max_terms,
    }
    .into())
}

/// Probability that a fragment at path gain `g0` is received below the SNR
/// threshold.
pub fn p_disc(p: &ShadowedRiceParams, lb: &LinkBudget, g0: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(g0 > 0.0) {
        return Err(invalid("g0", format!("path gain must be positive, got {g0}")));
    }
    fading_cdf_series(lb.disconnection_threshold(g0), p, ctl)
}

/// The same probability by adaptive quadrature of the power density.
pub fn p_disc_numint(p: &ShadowedRiceParams, lb: &LinkBudget, g0: f64) -> Result<f64> {
    if !(g0 > 0.0) {
        return Err(invalid("g0", format!("path gain must be positive, got {g0}")));
    }
    let x = lb.disconnection_threshold(g0);
    let mean = p.mean_power();
    let upper = x.min(80.0 * mean);
    let f = |r: f64| power_pdf(r, p);
    // split at the mean so the adaptive rule sees the peak region
    let mid = upper.min(mean);
    let v = crate::specfun::integrate(&f, 0.0, mid, 1e-14) + crate::specfun::integrate(&f, mid, upper, 1e-14);
    Ok(v.clamp(0.0, 1.0))
}

/// A times the complete n-series: exactly 1 when summed to convergence.
pub fn normalization_series(p: &ShadowedRiceParams, ctl: &SeriesControl) -> Result<f64> {
    ctl.validate()?;
    let k = p.series_constants();
    let y = k.ratio();
    let mut coef = k.a_const / k.b_const;
    let mut acc = CompensatedSum::new();
    let limit = ctl.fixed_terms.unwrap_or(ctl.max_terms);
    for n in 0..limit {
        if n > 0 {
            coef *= (p.m + (n - 1) as f64) / n as f64 * y;
        }
        acc.add(coef);
        if ctl.fixed_terms.is_none()
            && n > 0
            && (coef == 0.0
                || ((p.m + n as f64) / (n as f64 + 1.0) * y < 1.0
                    && coef.abs() <= ctl.rel_tolerance * acc.value().abs()))
        {
            return Ok(acc.value());
        }
    }
    if ctl.fixed_terms.is_some() {
        return Ok(acc.value());
    }
    Err(SpecFunError::NotConverged {
        name: "normalization series",
        tolerance: ctl.rel_tolerance,
        max_terms: ctl.max_terms,
    }
    .into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Environment;

    #[test]
    fn limits() {
        let p = ShadowedRiceParams::preset(Environment::Average);
        let ctl = SeriesControl::default();
        assert_eq!(fading_cdf_series(0.0, &p, &ctl).unwrap(), 0.0);
        assert_eq!(fading_cdf_series(f64::INFINITY, &p, &ctl).unwrap(), 1.0);
        let big = fading_cdf_series(1e4, &p, &ctl).unwrap();
        assert!((big - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_gain() {
        let p = ShadowedRiceParams::preset(Environment::Average);
        assert!(p_disc(&p, &LinkBudget::default(), 0.0, &SeriesControl::default()).is_err());
    }
}
