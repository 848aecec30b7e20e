//! Test-side reference implementations, written independently of the
//! library: direct quadrature, physical-model sampling and table-free
//! finite-field arithmetic.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

/// Kummer 1F1(a; b; x) by plain term recursion, x >= 0.
pub fn hyp1f1(a: f64, b: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..20_000 {
        let n = n as f64;
        term *= (a + n) / (b + n) * x / (n + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && n > x {
            break;
        }
    }
    sum
}

fn ln_gamma(x: f64) -> f64 {
    // Stirling series with upward shift
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let x2 = x * x;
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

/// Shadowed-Rice power density written from the envelope model:
/// f(x) = (2 b0 m / (2 b0 m + Omega))^m / (2 b0) exp(-x / (2 b0))
///        1F1(m; 1; Omega x / (2 b0 (2 b0 m + Omega))).
pub fn power_density(x: f64, b0: f64, m: f64, omega: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let den = 2.0 * b0 * m + omega;
    let lead = m * (2.0 * b0 * m / den).ln() - (2.0 * b0).ln() - x / (2.0 * b0);
    let arg = omega * x / (2.0 * b0 * den);
    lead.exp() * hyp1f1(m, 1.0, arg)
}

/// Composite Simpson rule with `panels` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// CDF of the shadowed-Rice power by quadrature of the density. The range
/// is cut where the remaining tail is far below double precision.
pub fn power_cdf(x: f64, b0: f64, m: f64, omega: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let upper = x.min(80.0 * (2.0 * b0 + omega) + 80.0 * b0);
    simpson(|t| power_density(t, b0, m, omega), 0.0, upper, 4000).min(1.0)
}

/// One |h|^2 draw from the physical model: a Nakagami-m line-of-sight
/// amplitude with uniform phase plus complex Gaussian scatter.
pub struct PhysicalFading {
    b0: f64,
    los: Gamma<f64>,
}

impl PhysicalFading {
    pub fn new(b0: f64, m: f64, omega: f64) -> Self {
        Self {
            b0,
            los: Gamma::new(m, omega / m).unwrap(),
        }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let a = self.los.sample(rng).sqrt();
        let phase = rng.random::<f64>() * std::f64::consts::TAU;
        let s = self.b0.sqrt();
        let n1: f64 = StandardNormal.sample(rng);
        let n2: f64 = StandardNormal.sample(rng);
        let re = a * phase.cos() + s * n1;
        let im = a * phase.sin() + s * n2;
        re * re + im * im
    }
}

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

/// GF(4) = GF(2)[x] / (x^2 + x + 1), elements as 2-bit polynomials.
pub fn gf4_mul_poly(a: u8, b: u8) -> u8 {
    let mut prod = 0u8;
    for i in 0..2 {
        if b >> i & 1 == 1 {
            prod ^= a << i;
        }
    }
    if prod & 0b100 != 0 {
        prod ^= 0b111;
    }
    prod
}

/// Tabulated CDF (cumulative Simpson on a uniform grid) for fast lookup.
pub struct CdfTable {
    step: f64,
    values: Vec<f64>,
}

impl CdfTable {
    pub fn new(b0: f64, m: f64, omega: f64, x_max: f64, cells: usize) -> Self {
        let step = x_max / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = i as f64 * step;
            acc += simpson(|t| power_density(t, b0, m, omega), a, a + step, 2);
            values.push(acc);
        }
        Self { step, values }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let pos = x / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return *self.values.last().unwrap();
        }
        let f = pos - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Binomial pmf by direct log evaluation.
pub fn binom(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let ln = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    let lp = if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let lq = if n == k { 0.0 } else { (n - k) as f64 * (1.0 - p).ln() };
    (ln + lp + lq).exp()
}
