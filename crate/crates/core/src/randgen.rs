//! Seed-reproducible generation of measurement entries and sparse test
//! signals.
//!
//! Every stream is a ChaCha8 keystream keyed by `master_seed` with the
//! ChaCha stream id set to `stream_id`, so streams are independent of each
//! other and of the order in which they are consumed. Gaussian entries use
//! the Marsaglia polar transform of 53-bit uniforms; the second value of each
//! accepted pair is kept and returned by the next draw.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SparseSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    /// N(0, 1/k).
    Gaussian,
    /// +-sqrt(1/k), each with probability 1/2.
    Rademacher,
    /// +-sqrt(3/k) with probability 1/6 each, 0 with probability 2/3.
    Ternary,
}

impl DistKind {
    pub const ALL: [DistKind; 3] = [DistKind::Gaussian, DistKind::Rademacher, DistKind::Ternary];

    pub fn name(self) -> &'static str {
        match self {
            DistKind::Gaussian => "gaussian",
            DistKind::Rademacher => "rademacher",
            DistKind::Ternary => "ternary",
        }
    }
}

impl std::str::FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(DistKind::Gaussian),
            "rademacher" => Ok(DistKind::Rademacher),
            "ternary" => Ok(DistKind::Ternary),
            other => Err(Error::InvalidParameter(format!("unknown distribution {other:?}"))),
        }
    }
}

/// Entry distribution with variance scaled to `1/k`, so that a column of
/// `k` such entries has unit squared norm in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub k: usize,
}

impl DistributionSpec {
    pub fn new(kind: DistKind, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("distribution scale k must be >= 1".into()));
        }
        Ok(Self { kind, k })
    }

    pub fn variance(&self) -> f64 {
        1.0 / self.k as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// A stream id derived from this one and a list of labels (trial index,
    /// matrix kind, ...). Distinct label lists give distinct streams with
    /// overwhelming probability.
    pub fn derive(&self, labels: &[u64]) -> SeedSpec {
        let mut h = splitmix64(self.stream_id ^ 0x5354_4353_5345_4544);
        for &l in labels {
            h = splitmix64(h ^ splitmix64(l.wrapping_add(0x9e37_79b9_7f4a_7c15)));
        }
        SeedSpec { master_seed: self.master_seed, stream_id: h }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn unit_uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Stateful sampler over one stream. Counts every scalar it hands out, which
/// is how the number of independent entries behind an operator is audited.
#[derive(Debug, Clone)]
pub struct EntrySampler {
    dist: DistributionSpec,
    scale: f64,
    rng: ChaCha8Rng,
    spare: Option<f64>,
    draws: usize,
}

impl EntrySampler {
    pub fn new(dist: DistributionSpec, seed: SeedSpec) -> Self {
        let scale = match dist.kind {
            DistKind::Ternary => (3.0 / dist.k as f64).sqrt(),
            _ => (1.0 / dist.k as f64).sqrt(),
        };
        Self { dist, scale, rng: seed.rng(), spare: None, draws: 0 }
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn next_entry(&mut self) -> f64 {
        self.draws += 1;
        match self.dist.kind {
            DistKind::Gaussian => self.scale * self.standard_normal(),
            DistKind::Rademacher => {
                if self.rng.next_u64() >> 63 == 0 {
                    self.scale
                } else {
                    -self.scale
                }
            }
            DistKind::Ternary => match self.rng.random_range(0..6u32) {
                0 => self.scale,
                1 => -self.scale,
                _ => 0.0,
            },
        }
    }

    pub fn fill(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_entry()).collect()
    }

    fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * unit_uniform(&mut self.rng) - 1.0;
            let v = 2.0 * unit_uniform(&mut self.rng) - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }
}

/// `n` independent entries from `dist`, fully determined by `seed`.
pub fn draw_sequence(dist: DistributionSpec, n: usize, seed: SeedSpec) -> Result<Vec<f64>> {
    if dist.k == 0 {
        return Err(Error::InvalidParameter("distribution scale k must be >= 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sequence length must be >= 1".into()));
    }
    Ok(EntrySampler::new(dist, seed).fill(n))
}

/// Uniformly random support of size `m` (partial Fisher-Yates) carrying
/// equiprobable +-1 values.
pub fn draw_rademacher_spikes(n: usize, m: usize, seed: SeedSpec) -> Result<SparseSignal> {
    if n == 0 || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = seed.rng();
    let mut support = sample_subset(&mut rng, n, m);
    support.sort_unstable();
    let values = (0..m)
        .map(|_| if rng.next_u64() >> 63 == 0 { 1.0 } else { -1.0 })
        .collect();
    SparseSignal::new(n, support, values)
}

/// `m` distinct indices from `0..n`, uniformly, in draw order.
pub fn sample_subset(rng: &mut impl Rng, n: usize, m: usize) -> Vec<usize> {
    debug_assert!(m <= n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn rademacher_values_are_half() {
        let d = DistributionSpec::new(DistKind::Rademacher, 4).unwrap();
        for stream in 0..10 {
            let x = draw_sequence(d, 3, SeedSpec::new(1, stream)).unwrap();
            assert!(x.iter().all(|v| *v == 0.5 || *v == -0.5));
        }
    }

    #[test]
    fn ternary_zero_fraction() {
        let d = DistributionSpec::new(DistKind::Ternary, 3).unwrap();
        let x = draw_sequence(d, 100_000, SeedSpec::new(7, 0)).unwrap();
        let zeros = x.iter().filter(|v| **v == 0.0).count() as f64 / x.len() as f64;
        assert!((zeros - 2.0 / 3.0).abs() < 0.01, "zero fraction {zeros}");
        assert!(x.iter().all(|v| *v == 0.0 || (v.abs() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn gaussian_variance() {
        let d = DistributionSpec::new(DistKind::Gaussian, 100).unwrap();
        let x = draw_sequence(d, 100_000, SeedSpec::new(11, 3)).unwrap();
        let (_, var) = moments(&x);
        assert!((var - 0.01).abs() < 0.0005, "variance {var}");
    }

    #[test]
    fn moment_checks_all_distributions() {
        let n = 100_000;
        for kind in DistKind::ALL {
            for k in [1usize, 10, 64] {
                let d = DistributionSpec::new(kind, k).unwrap();
                let x = draw_sequence(d, n, SeedSpec::new(99, k as u64)).unwrap();
                let (mean, var) = moments(&x);
                let target = 1.0 / k as f64;
                assert!(mean.abs() < 3.0 * (target / n as f64).sqrt(), "{kind:?} k={k} mean {mean}");
                assert!((var - target).abs() < 0.05 * target, "{kind:?} k={k} var {var}");
            }
        }
    }

    #[test]
    fn reproducible_and_stream_separated() {
        let d = DistributionSpec::new(DistKind::Gaussian, 5).unwrap();
        let a = draw_sequence(d, 64, SeedSpec::new(3, 1)).unwrap();
        let b = draw_sequence(d, 64, SeedSpec::new(3, 1)).unwrap();
        let c = draw_sequence(d, 64, SeedSpec::new(3, 2)).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_ne!(a, c);
    }

    #[test]
    fn parameter_errors() {
        assert!(DistributionSpec::new(DistKind::Gaussian, 0).is_err());
        let d = DistributionSpec { kind: DistKind::Gaussian, k: 0 };
        assert!(draw_sequence(d, 3, SeedSpec::default()).is_err());
        let d = DistributionSpec::new(DistKind::Gaussian, 2).unwrap();
        assert!(draw_sequence(d, 0, SeedSpec::default()).is_err());
        assert!(draw_rademacher_spikes(4, 5, SeedSpec::default()).is_err());
    }

    #[test]
    fn spikes_sweep_size() {
        let s = draw_rademacher_spikes(512, 20, SeedSpec::new(5, 0)).unwrap();
        assert_eq!(s.sparsity(), 20);
        assert!(s.values().iter().all(|v| v.abs() == 1.0));
    }

    #[test]
    fn spikes_full_support() {
        let s = draw_rademacher_spikes(5, 5, SeedSpec::new(5, 9)).unwrap();
        assert_eq!(s.support(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn spikes_uniform_single_index() {
        let mut counts = [0usize; 8];
        for t in 0..1000 {
            let s = draw_rademacher_spikes(8, 1, SeedSpec::new(0, t)).unwrap();
            counts[s.support()[0]] += 1;
        }
        // chi-square with 7 dof; 24.3 is the 0.999 quantile
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 125.0).powi(2) / 125.0).sum();
        assert!(chi2 < 24.3, "chi2 {chi2}, counts {counts:?}");
        assert!(counts.iter().all(|&c| (c as i64 - 125).abs() <= 40), "{counts:?}");
    }

    #[test]
    fn derived_streams_differ() {
        let base = SeedSpec::new(1, 0);
        assert_ne!(base.derive(&[0, 1]).stream_id, base.derive(&[1, 0]).stream_id);
        assert_eq!(base.derive(&[4, 2]), base.derive(&[4, 2]));
    }
}
