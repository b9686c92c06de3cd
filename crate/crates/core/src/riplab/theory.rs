//! Closed-form probability bounds for symmetric Toeplitz sensing matrices.
//!
//! With `q = 3m(6m-1)+1` and `c0(d) = d^2/16 - d^3/48`:
//!
//! * `f(k, m, d) = c0 k - 3m ln(12/d) - ln 2`
//! * per-subset bound: `1 - exp(-f(floor(k/q), m, d) + ln q)`
//! * union bound over all `3m`-subsets:
//!   `1 - exp(-c0 k/(18m^2) + 3m[ln(12/d) + ln(n/3m) + 1] + ln 2 + ln(18m^2) + c0)`
//! * simplified form `1 - exp(-c2 k/m^2)`, claimed for `k > c1 m^3 ln(n/m)`
//!   with `c3 = ln(12/d) + 2 ln 2 + c0 + 4` and any `c1 > 54 c3/(c0 - 18 c2)`.
//!
//! Bounds are reported raw (possibly negative, i.e. vacuous) next to their
//! exponent and a clamped display value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn q_for(m: usize) -> usize {
    3 * m * (6 * m - 1) + 1
}

pub fn c0(delta: f64) -> f64 {
    delta * delta / 16.0 - delta * delta * delta / 48.0
}

pub fn f_value(k: usize, m: usize, delta: f64) -> f64 {
    c0(delta) * k as f64 - 3.0 * m as f64 * (12.0 / delta).ln() - std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub delta: f64,
    /// Defaults to `c0/36`, half the largest admissible value.
    #[serde(default)]
    pub c2: Option<f64>,
    /// Defaults to the infimum `54 c3/(c0 - 18 c2)`.
    #[serde(default)]
    pub c1: Option<f64>,
}

impl TheoryParams {
    pub fn new(n: usize, m: usize, k: usize, delta: f64) -> Self {
        Self { n, m, k, delta, c2: None, c1: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub exponent: f64,
    /// `1 - exp(exponent)`, unclamped.
    pub raw: f64,
    pub clamped: f64,
    pub vacuous: bool,
}

impl Bound {
    fn from_exponent(exponent: f64) -> Self {
        let raw = -exponent.exp_m1();
        Self { exponent, raw, clamped: raw.clamp(0.0, 1.0), vacuous: raw <= 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryBounds {
    pub params: TheoryParams,
    pub q: usize,
    pub c0: f64,
    pub c2: f64,
    pub c3: f64,
    pub c1_min: f64,
    pub c1: f64,
    /// `f(k, m, delta)`
    pub f_value: f64,
    /// `f(floor(k/q), m, delta)`
    pub f_block: f64,
    pub lemma: Bound,
    pub union: Bound,
    pub simplified: Bound,
    /// `c1 m^3 ln(n/m)`
    pub k_threshold: f64,
    pub k_exceeds_threshold: bool,
}

pub fn theory_bounds(p: TheoryParams) -> Result<TheoryBounds> {
    if !(p.delta > 0.0 && p.delta < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1/3), got {}", p.delta)));
    }
    if p.m == 0 || p.k == 0 || p.n == 0 {
        return Err(Error::InvalidParameter("n, m, k must be positive".into()));
    }
    let c0v = c0(p.delta);
    let c2 = p.c2.unwrap_or(c0v / 36.0);
    if !(c2 > 0.0) || 18.0 * c2 >= c0v {
        return Err(Error::InvalidParameter(format!("need 0 < c2 < c0/18 = {}, got {c2}", c0v / 18.0)));
    }
    let ln12 = (12.0 / p.delta).ln();
    let c3 = ln12 + 2.0 * std::f64::consts::LN_2 + c0v + 4.0;
    let c1_min = 54.0 * c3 / (c0v - 18.0 * c2);
    let c1 = match p.c1 {
        Some(c1) if c1 < c1_min => {
            return Err(Error::InvalidParameter(format!("c1 must be at least {c1_min}, got {c1}")))
        }
        Some(c1) => c1,
        None => c1_min,
    };
    let q = q_for(p.m);
    let (n, m, k) = (p.n as f64, p.m as f64, p.k as f64);
    let f_block = f_value(p.k / q, p.m, p.delta);
    let lemma = Bound::from_exponent(-f_block + (q as f64).ln());
    let union_exp = -c0v * k / (18.0 * m * m)
        + 3.0 * m * (ln12 + (n / (3.0 * m)).ln() + 1.0)
        + std::f64::consts::LN_2
        + (18.0 * m * m).ln()
        + c0v;
    let k_threshold = c1 * m.powi(3) * (n / m).ln();
    Ok(TheoryBounds {
        params: p,
        q,
        c0: c0v,
        c2,
        c3,
        c1_min,
        c1,
        f_value: f_value(p.k, p.m, p.delta),
        f_block,
        lemma,
        union: Bound::from_exponent(union_exp),
        simplified: Bound::from_exponent(-c2 * k / (m * m)),
        k_threshold,
        k_exceeds_threshold: k > k_threshold,
    })
}
