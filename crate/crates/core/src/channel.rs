//! Shadowed-Rice fading: Table-style presets, densities, MGF and a sampler.
//!
//! The power |h|^2 of a shadowed-Rice channel has density
//! `A exp(-B r) 1F1(m; 1; C(1) r)` with A, B, C(n) given by
//! [`SeriesConstants`].

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::{kummer_1f1, ln_gamma, SeriesControl};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Environment {
    #[serde(alias = "infrequent_light")]
    Light,
    #[serde(alias = "frequent_heavy")]
    Heavy,
    Average,
}

impl Environment {
    pub const ALL: [Environment; 3] = [Environment::Light, Environment::Heavy, Environment::Average];

    pub fn name(&self) -> &'static str {
        match self {
            Environment::Light => "light",
            Environment::Heavy => "heavy",
            Environment::Average => "average",
        }
    }
}

impl std::str::FromStr for Environment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "light" | "infrequent_light" => Ok(Environment::Light),
            "heavy" | "frequent_heavy" => Ok(Environment::Heavy),
            "average" => Ok(Environment::Average),
            other => Err(format!(
                "unknown environment '{other}' (expected light, heavy or average)"
            )),
        }
    }
}

impl std::fmt::Display for Environment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shadowed-Rice triple: half scattered power `b0`, Nakagami shadowing `m`,
/// mean line-of-sight power `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShadowedRiceParams {
    pub b0: f64,
    pub m: f64,
    pub omega: f64,
}

/// Constants of the power density series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConstants {
    pub a_const: f64,
    pub b_const: f64,
    /// C(1); C(n) = C(1)^n.
    pub c1: f64,
}

impl SeriesConstants {
    pub fn c(&self, n: u32) -> f64 {
        self.c1.powi(n as i32)
    }

    /// C(1)/B = omega/(2 b0 m + omega), the geometric ratio of the n-series.
    pub fn ratio(&self) -> f64 {
        self.c1 / self.b_const
    }
}

impl ShadowedRiceParams {
    pub fn new(b0: f64, m: f64, omega: f64) -> Result<Self> {
        let p = Self { b0, m, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b0 > 0.0 && self.b0.is_finite()) {
            return Err(invalid("b0", format!("must be positive, got {}", self.b0)));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(invalid("m", format!("must be nonnegative, got {}", self.m)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(invalid("omega", format!("must be nonnegative, got {}", self.omega)));
        }
        Ok(())
    }

    pub fn preset(env: Environment) -> Self {
        match env {
            Environment::Light => Self {
                b0: 0.158,
                m: 19.4,
                omega: 1.29,
            },
            Environment::Heavy => Self {
                b0: 0.063,
                m: 0.739,
                omega: 8.97e-4,
            },
            Environment::Average => Self {
                b0: 0.126,
                m: 10.1,
                omega: 0.835,
            },
        }
    }

    /// m = 0 is the Rayleigh limit: no line-of-sight contribution.
    pub fn is_rayleigh(&self) -> bool {
        self.m == 0.0 || self.omega == 0.0
    }

    pub fn mean_power(&self) -> f64 {
        if self.m == 0.0 {
            2.0 * self.b0
        } else {
            2.0 * self.b0 + self.omega
        }
    }

    pub fn series_constants(&self) -> SeriesConstants {
        let two_b0 = 2.0 * self.b0;
        if self.is_rayleigh() {
            return SeriesConstants {
                a_const: 1.0 / two_b0,
                b_const: 1.0 / two_b0,
                c1: 0.0,
            };
        }
        let denom = two_b0 * self.m + self.omega;
        SeriesConstants {
            a_const: (two_b0 * self.m / denom).powf(self.m) / two_b0,
            b_const: 1.0 / two_b0,
            c1: self.omega / (two_b0 * denom),
        }
    }
}

/// Density of the power |h|^2 at `r`.
pub fn power_pdf(r: f64, p: &ShadowedRiceParams) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    let k = p.series_constants();
    if k.c1 == 0.0 {
        return k.a_const * (-k.b_const * r).exp();
    }
    let x = k.c1 * r;
    if x > 600.0 {
        // 1F1(m;1;x) ~ e^x x^(m-1) / Gamma(m) once the series would overflow
        let ln = k.a_const.ln() - (k.b_const - k.c1) * r + (p.m - 1.0) * x.ln() - ln_gamma(p.m);
        return ln.exp();
    }
    match kummer_1f1(
        p.m,
        1.0,
        x,
        &SeriesControl::new(1e-14, 100_000).expect("static control"),
    ) {
        Ok(s) => k.a_const * (-k.b_const * r).exp() * s.value,
        Err(_) => f64::NAN,
    }
}

/// Density of the envelope |h| at `h`.
pub fn envelope_pdf(h: f64, p: &ShadowedRiceParams) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let b0 = p.b0;
    let rayleigh = h / b0 * (-h * h / (2.0 * b0)).exp();
    if p.is_rayleigh() {
        return rayleigh;
    }
    let denom = 2.0 * b0 * p.m + p.omega;
    let lead = (2.0 * b0 * p.m / denom).powf(p.m);
    let arg = p.omega * h * h / (2.0 * b0 * denom);
    if arg > 600.0 {
        return 2.0 * h * power_pdf(h * h, p);
    }
    match kummer_1f1(
        p.m,
        1.0,
        arg,
        &SeriesControl::new(1e-14, 100_000).expect("static control"),
    ) {
        Ok(s) => lead * rayleigh * s.value,
        Err(_) => f64::NAN,
    }
}

/// Moment generating function E[exp(s |h|^2)].
pub fn power_mgf(s: f64, p: &ShadowedRiceParams) -> Result<f64> {
    let two_b0 = 2.0 * p.b0;
    let scattered = 1.0 - two_b0 * s;
    if p.is_rayleigh() {
        if scattered <= 0.0 {
            return Err(pole(s));
        }
        return Ok(1.0 / scattered);
    }
    let total = 1.0 - (two_b0 + p.omega / p.m) * s;
    if scattered <= 0.0 || total <= 0.0 {
        return Err(pole(s));
    }
    Ok(scattered.powf(p.m - 1.0) / total.powf(p.m))
}

fn pole(s: f64) -> Error {
    Error::Domain {
        what: "mgf argument",
        value: s,
        constraint: "s below the first pole 1/(2 b0 + omega/m)",
    }
}

/// Sampler for |h|^2: complex Gaussian scatter with per-dimension variance b0
/// plus a line-of-sight phasor whose power is Gamma(m, omega/m).
#[derive(Debug, Clone)]
pub struct FadingSampler {
    sigma: f64,
    los: Option<(Gamma<f64>, f64)>,
}

impl FadingSampler {
    pub fn new(p: &ShadowedRiceParams) -> Result<Self> {
        p.validate()?;
        let los = if p.is_rayleigh() {
            None
        } else {
            let g = Gamma::new(p.m, 1.0).map_err(|e| invalid("m", e.to_string()))?;
            Some((g, p.omega / p.m))
        };
        Ok(Self {
            sigma: p.b0.sqrt(),
            los,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x: f64 = rng.sample::<f64, _>(StandardNormal) * self.sigma;
        let y: f64 = rng.sample::<f64, _>(StandardNormal) * self.sigma;
        match &self.los {
            None => x * x + y * y,
            Some((gamma, scale)) => {
                let amp = (gamma.sample(rng) * scale).sqrt();
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let re = x + amp * phi.cos();
                let im = y + amp * phi.sin();
                re * re + im * im
            }
        }
    }
}

/// Draws one |h|^2 value.
pub fn sample_power<R: Rng + ?Sized>(rng: &mut R, p: &ShadowedRiceParams) -> Result<f64> {
    Ok(FadingSampler::new(p)?.sample(rng))
}
