//! Capture failure probability for a desired fragment against `k` co-channel
//! interferers with known path gains.
//!
//! The interference power X_k = sum g_i |h_i|^2 is written as a Gamma mixture
//! with rate 1/alpha: F_X(x) = sum_i w_i P(k + i, x / alpha), where the weights
//! w_i = D c_i come from expanding the product of shadowed-Rice MGFs around
//! alpha. Capture fails when g0 |h0|^2 <= delta X_k; conditioning on |h0|^2 and
//! integrating gives
//!
//!   P_cap = sum_i w_i L_{k+i},   L_j = A sum_{u<j} (II)_u,
//!
//! where (II)_u = beta^u B'^-(u+1) 2F1(m, u+1; 1; C(1)/B') with
//! beta = g0/(alpha delta) and B' = B + beta. The terms A (II)_u form a
//! probability mass over u, so L_j is a cumulative sum of positive numbers.
//!
//! The mixture needs on the order of (g_max/g_min) terms, which is
//! thousands once interferers spread over the footprint. The same probability
//! can be expanded on the desired side instead: with
//! Pr{|h0|^2 > x} = sum_n q_n Q(n + 1, B x) and s = B delta / g0,
//!
//!   1 - P_cap = sum_n q_n sum_{j<=n} phi_j,   phi_j = [tau^j] M_X(s (1 - tau)),
//!
//! where M_X is the Laplace transform of the interference power. Its
//! coefficients follow from the same log-derivative recursion with ratios
//! a_i s / (1 + a_i s) < 1, and the number of terms is that of the q_n,
//! independent of the interferer gains. [`CaptureMethod`] selects the form.

use crate::analytic::disconnection::normalization_series;
use crate::channel::ShadowedRiceParams;
use crate::error::{invalid, Error, Result};
use crate::specfun::{gauss_2f1, SeriesControl, SpecFunError};

/// Choice of the free Gamma-rate parameter alpha of the mixture. Any alpha
/// with every |zeta_i|, |delta_i| < 1 gives the same sum; the slowest of those
/// ratios sets how many terms are needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    /// alpha = factor * min_i(b0 g_i), factor in (0, 4).
    MinGainFactor(f64),
    /// Harmonic mean of the smallest and largest factor scales, which
    /// minimises the largest ratio magnitude.
    Balanced,
}

impl AlphaRule {
    pub fn validate(&self) -> Result<()> {
        if let AlphaRule::MinGainFactor(f) = *self {
            if !(f > 0.0 && f < 4.0) {
                return Err(Error::Domain {
                    what: "alpha_factor",
                    value: f,
                    constraint: "0 < alpha_factor < 4",
                });
            }
        }
        Ok(())
    }

    pub fn alpha(&self, interferer_gains: &[f64], fading: &ShadowedRiceParams) -> f64 {
        let g_min = interferer_gains.iter().fold(f64::INFINITY, |a, g| a.min(*g));
        match *self {
            AlphaRule::MinGainFactor(f) => f * fading.b0 * g_min,
            AlphaRule::Balanced => {
                let g_max = interferer_gains.iter().fold(0.0f64, |a, g| a.max(*g));
                let lo = 2.0 * fading.b0 * g_min;
                let hi = if fading.is_rayleigh() {
                    2.0 * fading.b0 * g_max
                } else {
                    (2.0 * fading.b0 + fading.omega / fading.m) * g_max
                };
                2.0 * lo * hi / (lo + hi)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaptureMethod {
    /// Gamma mixture of the interference power (i-series).
    InterferenceMixture,
    /// Gamma mixture of the desired power against the interference
    /// Laplace transform.
    DesiredExpansion,
}

/// Truncation and free-parameter settings for the capture series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureSeriesConfig {
    pub method: CaptureMethod,
    pub alpha: AlphaRule,
    pub i_series_ctl: SeriesControl,
    pub n_series_ctl: SeriesControl,
}

impl Default for CaptureSeriesConfig {
    fn default() -> Self {
        Self {
            method: CaptureMethod::DesiredExpansion,
            alpha: AlphaRule::Balanced,
            i_series_ctl: SeriesControl {
                rel_tolerance: 1e-8,
                max_terms: 20_000,
                fixed_terms: None,
            },
            n_series_ctl: SeriesControl::default(),
        }
    }
}

impl CaptureSeriesConfig {
    /// Ten-term series with alpha = 3.9999 min_i(b0 g_i).
    pub fn paper() -> Self {
        Self {
            method: CaptureMethod::InterferenceMixture,
            alpha: AlphaRule::MinGainFactor(3.9999),
            i_series_ctl: SeriesControl::paper(),
            n_series_ctl: SeriesControl::paper(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.i_series_ctl.validate()?;
        self.n_series_ctl.validate()?;
        Ok(())
    }

    /// A times the n-series of integral (I) minus one: zero when the series
    /// is summed to convergence, the truncation bias otherwise.
    pub fn normalization_defect(&self, p: &ShadowedRiceParams) -> Result<f64> {
        Ok(normalization_series(p, &self.n_series_ctl)? - 1.0)
    }
}

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_LN: f64 = 575.646_273_248_511_4; // ln(1e250)

/// Mixture weights of the interference power, extended on demand.
#[derive(Debug, Clone)]
pub struct InterferenceMixture {
    k: usize,
    alpha: f64,
    m: f64,
    ln_d: f64,
    zeta: Vec<f64>,
    delta: Vec<f64>,
    zeta_pow: Vec<f64>,
    delta_pow: Vec<f64>,
    /// p_j for j >= 1 stored at index j - 1.
    p: Vec<f64>,
    /// c_i scaled by exp(-ln_scale).
    c: Vec<f64>,
    ln_scale: f64,
    weights: Vec<f64>,
}

impl InterferenceMixture {
    pub fn new(interferer_gains: &[f64], fading: &ShadowedRiceParams, rule: AlphaRule) -> Result<Self> {
        rule.validate()?;
        if interferer_gains.is_empty() {
            return Err(invalid("interferer_gains", "at least one interferer is required"));
        }
        if let Some(g) = interferer_gains.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(invalid("interferer_gains", format!("gains must be positive, got {g}")));
        }
        let k = interferer_gains.len();
        let m = fading.m;
        let alpha = rule.alpha(interferer_gains, fading);
        let rayleigh = fading.is_rayleigh();
        let mut ln_d = k as f64 * alpha.ln();
        let mut zeta = Vec::with_capacity(k);
        let mut delta = Vec::with_capacity(k);
        for &g in interferer_gains {
            let two_b = 2.0 * fading.b0 * g;
            zeta.push(1.0 - alpha / two_b);
            if rayleigh {
                ln_d -= two_b.ln();
            } else {
                let total = two_b + fading.omega * g / m;
                delta.push(1.0 - alpha / total);
                ln_d += (m - 1.0) * two_b.ln() - m * total.ln();
            }
        }
        let zeta_pow = vec![1.0; zeta.len()];
        let delta_pow = vec![1.0; delta.len()];
        Ok(Self {
            k,
            alpha,
            m,
            ln_d,
            zeta,
            delta,
            zeta_pow,
            delta_pow,
            p: Vec::new(),
            c: vec![1.0],
            ln_scale: 0.0,
            weights: vec![ln_d.exp()],
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// D of the mixture, w_i = D c_i.
    pub fn d_const(&self) -> f64 {
        self.ln_d.exp()
    }

    pub fn ln_d(&self) -> f64 {
        self.ln_d
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn next_p(&mut self) -> f64 {
        let mut s = 0.0;
        if self.delta.is_empty() {
            // Rayleigh limit: each factor is (1 - zeta eta)^-1
            for (zp, z) in self.zeta_pow.iter_mut().zip(&self.zeta) {
                *zp *= z;
                s += *zp;
            }
        } else {
            for i in 0..self.zeta.len() {
                self.zeta_pow[i] *= self.zeta[i];
                self.delta_pow[i] *= self.delta[i];
                s += self.m * self.delta_pow[i] - (self.m - 1.0) * self.zeta_pow[i];
            }
        }
        s
    }

    fn extend(&mut self) {
        let i = self.c.len();
        let pj = self.next_p();
        self.p.push(pj);
        // c_i = (1/i) sum_{l<i} p_{i-l} c_l, with p_j at index j - 1
        let dot: f64 = self.c[..i]
            .iter()
            .zip(self.p[..i].iter().rev())
            .map(|(c, p)| c * p)
            .sum();
        let mut ci = dot / i as f64;
        if ci.abs() > RESCALE_ABOVE {
            for c in self.c.iter_mut() {
                *c /= RESCALE_ABOVE;
            }
            ci /= RESCALE_ABOVE;
            self.ln_scale += RESCALE_LN;
        }
        self.c.push(ci);
        let w = if ci == 0.0 {
            0.0
        } else {
            ci.signum() * (ci.abs().ln() + self.ln_scale + self.ln_d).exp()
        };
        self.weights.push(w);
    }

    /// Weight w_i, extending the recursion as needed.
    pub fn weight(&mut self, i: usize) -> f64 {
        while self.weights.len() <= i {
            self.extend();
        }
        self.weights[i]
    }

    /// Unscaled c_i (may overflow for large k).
    pub fn coefficient(&mut self, i: usize) -> f64 {
        self.weight(i);
        self.c[i] * self.ln_scale.exp()
    }

    /// CDF of the interference power, sum_i w_i P(k + i, x / alpha).
    pub fn interference_cdf(&mut self, x: f64, ctl: &SeriesControl) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let z = x / self.alpha;
        let mut acc = 0.0;
        let mut total_w = 0.0;
        let limit = ctl.fixed_terms.unwrap_or(ctl.max_terms);
        let mut settled = 0;
        for i in 0..limit {
            let w = self.weight(i);
            let cdf = crate::specfun::regularized_lower_gamma((self.k + i) as f64, z)?;
            acc += w * cdf;
            total_w += w;
            if ctl.fixed_terms.is_none() {
                if (1.0 - total_w).abs() + w.abs() <= ctl.rel_tolerance {
                    settled += 1;
                    if settled >= 3 {
                        return Ok(acc.clamp(0.0, 1.0));
                    }
                } else {
                    settled = 0;
                }
            }
        }
        if ctl.fixed_terms.is_some() {
            return Ok(acc.clamp(0.0, 1.0));
        }
        Err(not_converged(ctl))
    }
}

fn not_converged(ctl: &SeriesControl) -> Error {
    SpecFunError::NotConverged {
        name: "capture i-series",
        tolerance: ctl.rel_tolerance,
        max_terms: ctl.max_terms,
    }
    .into()
}

/// Cumulative mass L_j = A sum_{u<j} (II)_u of the desired-signal terms.
#[derive(Debug, Clone)]
pub struct DesiredTerms {
    m: f64,
    r: f64,
    y: f64,
    pis: Vec<f64>,
    lower: Vec<f64>,
}

impl DesiredTerms {
    pub fn new(g0: f64, alpha: f64, sir_threshold_linear: f64, fading: &ShadowedRiceParams) -> Result<Self> {
        if !(g0 > 0.0) {
            return Err(invalid("g0", format!("path gain must be positive, got {g0}")));
        }
        if !(sir_threshold_linear > 0.0) {
            return Err(invalid("sir_threshold", "linear threshold must be positive"));
        }
        let k = fading.series_constants();
        let beta = g0 / (alpha * sir_threshold_linear);
        let b_prime = k.b_const + beta;
        let y = k.c1 / b_prime;
        if !(y.abs() < 1.0) {
            return Err(Error::Domain {
                what: "C(1)/B'",
                value: y,
                constraint: "|C(1)/B'| < 1",
            });
        }
        let m = if fading.is_rayleigh() { 0.0 } else { fading.m };
        let ctl = SeriesControl::new(1e-15, 100_000)?;
        let pi0 = k.a_const / b_prime * gauss_2f1(m, 1.0, 1.0, y, &ctl)?.value;
        let pi1 = k.a_const * beta / (b_prime * b_prime) * gauss_2f1(m, 2.0, 1.0, y, &ctl)?.value;
        Ok(Self {
            m,
            r: beta / b_prime,
            y,
            pis: vec![pi0, pi1],
            lower: vec![0.0, pi0],
        })
    }

    fn extend(&mut self) {
        let u = self.pis.len() - 1;
        let uf = u as f64;
        let (m, r, y) = (self.m, self.r, self.y);
        // contiguous relation of 2F1(m, u+1; 1; y) in its second parameter
        let next = r / ((uf + 1.0) * (1.0 - y))
            * ((2.0 * uf + 1.0 + (m - uf - 1.0) * y) * self.pis[u] - uf * r * self.pis[u - 1]);
        let last = *self.lower.last().expect("nonempty");
        self.lower.push(last + self.pis[u]);
        self.pis.push(next.max(0.0));
    }

    /// L_j = A sum_{u<j} (II)_u.
    pub fn lower(&mut self, j: usize) -> f64 {
        while self.lower.len() <= j {
            self.extend();
        }
        self.lower[j].min(1.0)
    }

    /// A (II)_u, the probability mass of index u.
    pub fn mass(&mut self, u: usize) -> f64 {
        while self.pis.len() <= u {
            self.extend();
        }
        self.pis[u]
    }
}

/// Combines mixture weights and desired-signal terms into P_cap.
/// `defect` is A (I) - 1 for the configured n-series.
pub fn capture_failure(
    mix: &mut InterferenceMixture,
    desired: &mut DesiredTerms,
    ctl: &SeriesControl,
    defect: f64,
) -> Result<f64> {
    let k = mix.k();
    let mut acc = 0.0;
    let mut total_w = 0.0;
    if let Some(n) = ctl.fixed_terms {
        for i in 0..n {
            let w = mix.weight(i);
            acc += w * desired.lower(k + i);
            total_w += w;
        }
        return Ok((1.0 - (1.0 + defect) * total_w + acc).clamp(0.0, 1.0));
    }
    let mut settled = 0;
    for i in 0..ctl.max_terms {
        let w = mix.weight(i);
        acc += w * desired.lower(k + i);
        total_w += w;
        if (1.0 - total_w).abs() + w.abs() <= ctl.rel_tolerance {
            settled += 1;
            if settled >= 3 {
                let rest = (1.0 - total_w) * desired.lower(k + i + 1);
                return Ok((acc + rest - defect * total_w).clamp(0.0, 1.0));
            }
        } else {
            settled = 0;
        }
    }
    Err(not_converged(ctl))
}

/// Weights D and c_0, c_1, ... of the interference mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureCoefficients {
    pub alpha: f64,
    pub d_const: f64,
    pub c_seq: Vec<f64>,
}

/// D and the c-sequence, truncated when the weights D c_i have summed to one
/// within the i-series tolerance (or at the fixed term count).
pub fn capture_coefficients(
    k: usize,
    interferer_gains: &[f64],
    p: &ShadowedRiceParams,
    cfg: &CaptureSeriesConfig,
) -> Result<CaptureCoefficients> {
    cfg.validate()?;
    if interferer_gains.len() != k {
        return Err(invalid(
            "interferer_gains",
            format!("expected {k} gains, got {}", interferer_gains.len()),
        ));
    }
    let mut mix = InterferenceMixture::new(interferer_gains, p, cfg.alpha)?;
    let ctl = &cfg.i_series_ctl;
    let n = match ctl.fixed_terms {
        Some(n) => n,
        None => {
            let mut total = 0.0;
            let mut settled = 0;
            let mut end = None;
            for i in 0..ctl.max_terms {
                let w = mix.weight(i);
                total += w;
                if (1.0 - total).abs() + w.abs() <= ctl.rel_tolerance {
                    settled += 1;
                    if settled >= 3 {
                        end = Some(i + 1);
                        break;
                    }
                } else {
                    settled = 0;
                }
            }
            end.ok_or_else(|| not_converged(ctl))?
        }
    };
    let c_seq = (0..n).map(|i| mix.coefficient(i)).collect();
    Ok(CaptureCoefficients {
        alpha: mix.alpha(),
        d_const: mix.d_const(),
        c_seq,
    })
}

/// Capture failure probability of a desired fragment at gain `g0` against
/// interferers at `interferer_gains` (k = their count).
pub fn p_cap(
    k: usize,
    g0: f64,
    interferer_gains: &[f64],
    p: &ShadowedRiceParams,
    sir_threshold_linear: f64,
    cfg: &CaptureSeriesConfig,
) -> Result<f64> {
    cfg.validate()?;
    if k == 0 {
        return Ok(0.0);
    }
    if interferer_gains.len() < k {
        return Err(invalid(
            "interferer_gains",
            format!("need {k} gains, got {}", interferer_gains.len()),
        ));
    }
    match cfg.method {
        CaptureMethod::InterferenceMixture => {
            let mut mix = InterferenceMixture::new(&interferer_gains[..k], p, cfg.alpha)?;
            let mut desired = DesiredTerms::new(g0, mix.alpha(), sir_threshold_linear, p)?;
            let defect = cfg.normalization_defect(p)?;
            capture_failure(&mut mix, &mut desired, &cfg.i_series_ctl, defect)
        }
        CaptureMethod::DesiredExpansion => {
            let q = DesiredMixture::new(p, &cfg.n_series_ctl)?;
            let mut dual = DesiredExpansion::new(g0, sir_threshold_linear, p, &q)?;
            for &g in &interferer_gains[..k] {
                dual.add_interferer(g)?;
            }
            Ok(dual.value())
        }
    }
}

/// Weights q_n of the desired power as a Gamma mixture with rate B,
/// truncated by the n-series control.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredMixture {
    pub b_const: f64,
    pub q: Vec<f64>,
}

impl DesiredMixture {
    pub fn new(p: &ShadowedRiceParams, ctl: &SeriesControl) -> Result<Self> {
        ctl.validate()?;
        let k = p.series_constants();
        let y = k.ratio();
        let mut coef = k.a_const / k.b_const;
        let mut q = vec![coef];
        if y == 0.0 {
            return Ok(Self { b_const: k.b_const, q });
        }
        let limit = ctl.fixed_terms.unwrap_or(ctl.max_terms);
        let mut total = coef;
        for n in 1..limit {
            coef *= (p.m + (n - 1) as f64) / n as f64 * y;
            q.push(coef);
            total += coef;
            if ctl.fixed_terms.is_none() {
                let shrinking = (p.m + n as f64) / (n as f64 + 1.0) * y < 1.0;
                if shrinking && coef <= 1e-3 * ctl.rel_tolerance * total {
                    return Ok(Self { b_const: k.b_const, q });
                }
            }
        }
        if ctl.fixed_terms.is_some() {
            return Ok(Self { b_const: k.b_const, q });
        }
        Err(SpecFunError::NotConverged {
            name: "desired power mixture",
            tolerance: ctl.rel_tolerance,
            max_terms: ctl.max_terms,
        }
        .into())
    }
}

/// Desired-side evaluation of P_cap for one tagged gain, with interferers
/// added one at a time so that P_cap(1), P_cap(2), ... share the work.
#[derive(Debug, Clone)]
pub struct DesiredExpansion<'a> {
    q: &'a DesiredMixture,
    s: f64,
    m: f64,
    rayleigh: bool,
    two_b0: f64,
    total_scale: f64,
    ln_m0: f64,
    /// Power sums of the log-derivative, p_j at index j (index 0 unused).
    p: Vec<f64>,
    k: usize,
}

impl<'a> DesiredExpansion<'a> {
    pub fn new(g0: f64, sir_threshold_linear: f64, fading: &ShadowedRiceParams, q: &'a DesiredMixture) -> Result<Self> {
        if !(g0 > 0.0) {
            return Err(invalid("g0", format!("path gain must be positive, got {g0}")));
        }
        if !(sir_threshold_linear > 0.0) {
            return Err(invalid("sir_threshold", "linear threshold must be positive"));
        }
        let rayleigh = fading.is_rayleigh();
        let two_b0 = 2.0 * fading.b0;
        Ok(Self {
            q,
            s: q.b_const * sir_threshold_linear / g0,
            m: fading.m,
            rayleigh,
            two_b0,
            total_scale: if rayleigh {
                two_b0
            } else {
                two_b0 + fading.omega / fading.m
            },
            ln_m0: 0.0,
            p: vec![0.0; q.q.len()],
            k: 0,
        })
    }

    pub fn add_interferer(&mut self, gain: f64) -> Result<()> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(invalid(
                "interferer_gains",
                format!("gains must be positive, got {gain}"),
            ));
        }
        let a = self.two_b0 * gain * self.s;
        let u = a / (1.0 + a);
        if self.rayleigh {
            self.ln_m0 -= a.ln_1p();
            let mut up = 1.0;
            for pj in self.p.iter_mut().skip(1) {
                up *= u;
                *pj += up;
            }
        } else {
            let c = self.total_scale * gain * self.s;
            let v = c / (1.0 + c);
            let m = self.m;
            self.ln_m0 += (m - 1.0) * a.ln_1p() - m * c.ln_1p();
            let (mut up, mut vp) = (1.0, 1.0);
            for pj in self.p.iter_mut().skip(1) {
                up *= u;
                vp *= v;
                *pj += m * vp - (m - 1.0) * up;
            }
        }
        self.k += 1;
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// P_cap against the interferers added so far.
    pub fn value(&self) -> f64 {
        if self.k == 0 {
            return 0.0;
        }
        let n = self.q.q.len();
        // coefficients of M_X(s(1 - tau)) / M_X(s), rescaled against overflow
        let mut e = Vec::with_capacity(n);
        e.push(1.0);
        let mut ln_scale = 0.0;
        let mut success = 0.0;
        let mut cum = 0.0;
        let mut last_scale = f64::NAN;
        let mut factor = 0.0;
        for j in 0..n {
            if j > 0 {
                let mut acc = 0.0;
                for l in 1..=j {
                    acc += self.p[l] * e[j - l];
                }
                let mut ej = acc / j as f64;
                if ej > RESCALE_ABOVE {
                    for x in e.iter_mut() {
                        *x /= RESCALE_ABOVE;
                    }
                    ej /= RESCALE_ABOVE;
                    cum /= RESCALE_ABOVE;
                    ln_scale += RESCALE_LN;
                }
                e.push(ej);
            }
            cum += e[j];
            if ln_scale != last_scale {
                factor = (self.ln_m0 + ln_scale).exp();
                last_scale = ln_scale;
            }
            success += self.q.q[j] * (cum * factor).min(1.0);
        }
        (1.0 - success).clamp(0.0, 1.0)
    }
}
