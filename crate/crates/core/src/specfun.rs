//! Special-function kernels: Pochhammer symbol, incomplete gamma, and the
//! confluent (1F1) and Gauss (2F1) hypergeometric series.
//!
//! Series terms are produced by multiplicative update and accumulated with
//! Neumaier summation. Truncation is governed by [`SeriesControl`].

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("{name}: argument {value} outside domain ({constraint})")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("{name}: relative tolerance {tolerance:e} not reached within {max_terms} terms")]
    NotConverged {
        name: &'static str,
        tolerance: f64,
        max_terms: usize,
    },
    #[error("invalid series control: {0}")]
    InvalidControl(&'static str),
}

/// Truncation rule for a power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tolerance: f64,
    pub max_terms: usize,
    /// When set, exactly this many terms are summed and the tolerance is ignored.
    pub fixed_terms: Option<usize>,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-10,
            max_terms: 10_000,
            fixed_terms: None,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tolerance: f64, max_terms: usize) -> Result<Self, SpecFunError> {
        let ctl = Self {
            rel_tolerance,
            max_terms,
            fixed_terms: None,
        };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn fixed(terms: usize) -> Self {
        Self {
            rel_tolerance: 1e-10,
            max_terms: terms.max(10_000),
            fixed_terms: Some(terms),
        }
    }

    /// Ten-term truncation used for the published figures.
    pub fn paper() -> Self {
        Self::fixed(10)
    }

    pub fn validate(&self) -> Result<(), SpecFunError> {
        if !(self.rel_tolerance > 0.0 && self.rel_tolerance < 1.0) {
            return Err(SpecFunError::InvalidControl("rel_tolerance must lie in (0, 1)"));
        }
        if self.max_terms == 0 {
            return Err(SpecFunError::InvalidControl("max_terms must be at least 1"));
        }
        if let Some(n) = self.fixed_terms {
            if n == 0 {
                return Err(SpecFunError::InvalidControl("fixed_terms must be at least 1"));
            }
            if n > self.max_terms {
                return Err(SpecFunError::InvalidControl("fixed_terms exceeds max_terms"));
            }
        }
        Ok(())
    }
}

/// Value of a truncated series together with the number of terms summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Rising factorial (a)_n = a(a+1)...(a+n-1).
pub fn pochhammer(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin();
        return (std::f64::consts::PI / s).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Gamma function for x > 0.
pub fn gamma(x: f64) -> f64 {
    if x == x.floor() && x > 0.0 && x <= 171.0 {
        return (1..x as u32).fold(1.0, |acc, i| acc * i as f64);
    }
    ln_gamma(x).exp()
}

/// ln of the binomial coefficient C(n, k).
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Binomial probability mass C(n,k) p^k (1-p)^(n-k).
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    if n <= 60 {
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        return c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 100_000;

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64, SpecFunError> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        Ok(1.0 - gamma_continued_fraction(a, x)?)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn regularized_upper_gamma(a: f64, x: f64) -> Result<f64, SpecFunError> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - gamma_series(a, x)?)
    } else {
        gamma_continued_fraction(a, x)
    }
}

/// Unnormalized lower incomplete gamma: integral of e^-t t^(a-1) over [0, x].
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64, SpecFunError> {
    check_gamma_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        // keep the small-x case out of exp(ln_gamma) round trips
        let (sum, _) = gamma_series_sum(a, x)?;
        Ok((a * x.ln() - x).exp() * sum)
    } else {
        Ok(gamma(a) * (1.0 - gamma_continued_fraction(a, x)?))
    }
}

fn check_gamma_args(a: f64, x: f64) -> Result<(), SpecFunError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecFunError::Domain {
            name: "incomplete_gamma",
            value: a,
            constraint: "a > 0",
        });
    }
    if !(x >= 0.0) {
        return Err(SpecFunError::Domain {
            name: "incomplete_gamma",
            value: x,
            constraint: "x >= 0",
        });
    }
    Ok(())
}

// sum_{n>=0} x^n / (a (a+1) ... (a+n)); gamma(a,x) = x^a e^-x * sum
fn gamma_series_sum(a: f64, x: f64) -> Result<(f64, usize), SpecFunError> {
    let mut term = 1.0 / a;
    let mut acc = CompensatedSum::new();
    acc.add(term);
    let mut ap = a;
    for n in 1..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        acc.add(term);
        if term.abs() < acc.value().abs() * GAMMA_EPS {
            return Ok((acc.value(), n + 1));
        }
    }
    Err(SpecFunError::NotConverged {
        name: "incomplete_gamma series",
        tolerance: GAMMA_EPS,
        max_terms: GAMMA_MAX_ITER,
    })
}

fn gamma_series(a: f64, x: f64) -> Result<f64, SpecFunError> {
    let (sum, _) = gamma_series_sum(a, x)?;
    Ok((a * x.ln() - x - ln_gamma(a)).exp() * sum)
}

// Q(a, x) by the modified Lentz continued fraction.
fn gamma_continued_fraction(a: f64, x: f64) -> Result<f64, SpecFunError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            return Ok((a * x.ln() - x - ln_gamma(a)).exp() * h);
        }
    }
    Err(SpecFunError::NotConverged {
        name: "incomplete_gamma continued fraction",
        tolerance: GAMMA_EPS,
        max_terms: GAMMA_MAX_ITER,
    })
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

// Shared driver for hypergeometric-type series: term_{n+1} = term_n * ratio(n).
fn hypergeometric_sum(
    name: &'static str,
    ctl: &SeriesControl,
    mut ratio: impl FnMut(f64) -> f64,
) -> Result<SeriesSum, SpecFunError> {
    ctl.validate()?;
    let mut acc = CompensatedSum::new();
    let mut term = 1.0;
    acc.add(term);
    if let Some(n) = ctl.fixed_terms {
        for k in 1..n {
            term *= ratio((k - 1) as f64);
            acc.add(term);
        }
        return Ok(SeriesSum {
            value: acc.value(),
            terms: n,
        });
    }
    for k in 1..ctl.max_terms {
        let r = ratio((k - 1) as f64);
        term *= r;
        acc.add(term);
        if term == 0.0 {
            return Ok(SeriesSum {
                value: acc.value(),
                terms: k + 1,
            });
        }
        let next = ratio(k as f64).abs();
        if term.abs() <= ctl.rel_tolerance * acc.value().abs() && next < 1.0 {
            return Ok(SeriesSum {
                value: acc.value(),
                terms: k + 1,
            });
        }
    }
    Err(SpecFunError::NotConverged {
        name,
        tolerance: ctl.rel_tolerance,
        max_terms: ctl.max_terms,
    })
}

/// Kummer's confluent hypergeometric series 1F1(a; b; x).
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctl: &SeriesControl) -> Result<SeriesSum, SpecFunError> {
    if is_nonpositive_integer(b) {
        return Err(SpecFunError::Domain {
            name: "kummer_1f1",
            value: b,
            constraint: "b not a nonpositive integer",
        });
    }
    hypergeometric_sum("kummer_1f1", ctl, |n| (a + n) / ((b + n) * (n + 1.0)) * x)
}

/// Gauss hypergeometric series 2F1(a, b; c; x) for |x| < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64, ctl: &SeriesControl) -> Result<SeriesSum, SpecFunError> {
    if !(x.abs() < 1.0) {
        return Err(SpecFunError::Domain {
            name: "gauss_2f1",
            value: x,
            constraint: "|x| < 1",
        });
    }
    if is_nonpositive_integer(c) {
        return Err(SpecFunError::Domain {
            name: "gauss_2f1",
            value: c,
            constraint: "c not a nonpositive integer",
        });
    }
    hypergeometric_sum("gauss_2f1", ctl, |n| (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x)
}

/// Adaptive Simpson quadrature of `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration from the Chebyshev-like initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}
