//! Ensemble statistics and per-realization random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Streaming mean/variance (Welford) with pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. parallel combination.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += d * nb / n as f64;
        self.m2 += other.m2 + d * d * na * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn estimate(&self) -> Estimate {
        Estimate {
            mean: self.mean(),
            std_error: self.std_error(),
            n: self.n,
        }
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Estimate {
    /// `|a - b| / sqrt(se_a^2 + se_b^2)`.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        (self.mean - other.mean).abs() / self.std_error.hypot(other.std_error)
    }

    /// Distance to an exact value in units of this estimate's standard error.
    pub fn z_against(&self, exact: f64) -> f64 {
        (self.mean - exact).abs() / self.std_error
    }

    pub fn scaled(&self, k: f64) -> Estimate {
        Estimate {
            mean: self.mean * k,
            std_error: self.std_error * k.abs(),
            n: self.n,
        }
    }
}

/// Which second phase-space coordinate an ensemble reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Velocity,
    Momentum,
}

/// Stationary second moments of an ensemble of linear-SDE trajectories.
///
/// Each trajectory contributes one time-averaged sample, so the standard
/// errors are over independent trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// `<x^2>`
    pub x2: Estimate,
    /// `<y^2>` where `y` is the velocity or momentum per `coordinate`.
    pub y2: Estimate,
    /// `<x y>` (classical samples, so already symmetric).
    pub xy: Estimate,
    pub coordinate: Coordinate,
    /// Mean squared `(dx/dt - p/m)` over the sampled steps, when reported.
    pub ehrenfest_residual: Option<Estimate>,
    pub seed: u64,
    pub n_traj: usize,
    pub samples_per_traj: usize,
}

/// Independent stream for realization `index` under a run seed.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fixed block size for parallel accumulation; merge order is by block index.
pub(crate) const BLOCK: usize = 256;

/// Runs `work(index)` for every index in `0..n`, merging the per-index
/// accumulators block by block in index order, so the result does not depend
/// on the thread count.
pub(crate) fn parallel_accumulate<const K: usize, F>(n: usize, work: F) -> crate::Result<[Welford; K]>
where
    F: Fn(u64) -> crate::Result<[f64; K]> + Sync,
{
    use rayon::prelude::*;
    let n_blocks = n.div_ceil(BLOCK);
    let blocks: Vec<crate::Result<[Welford; K]>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = [Welford::new(); K];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
                let v = work(i as u64)?;
                for (a, x) in acc.iter_mut().zip(v) {
                    a.push(x);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = [Welford::new(); K];
    for b in blocks {
        let b = b?;
        for (t, x) in total.iter_mut().zip(b.iter()) {
            t.merge(x);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1 + 1e6).collect();
        let mut w = Welford::new();
        xs.iter().for_each(|&x| w.push(x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((w.mean() - mean).abs() < 1e-9);
        assert!((w.variance() / var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn merge_equals_sequential() {
        let mut all = Welford::new();
        let mut a = Welford::new();
        let mut b = Welford::new();
        for i in 0..500 {
            let x = (i as f64).sin();
            all.push(x);
            if i < 123 { a.push(x) } else { b.push(x) }
        }
        a.merge(&b);
        assert_eq!(a.count(), all.count());
        assert!((a.mean() - all.mean()).abs() < 1e-14);
        assert!((a.variance() - all.variance()).abs() < 1e-13);
        let mut e = Welford::new();
        e.merge(&all);
        assert_eq!(e, all);
    }

    #[test]
    fn streams_are_distinct_and_reproducible() {
        let a: f64 = realization_rng(7, 0).random();
        let b: f64 = realization_rng(7, 1).random();
        let c: f64 = realization_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn parallel_accumulation_is_ordered() {
        let f = |i: u64| Ok([i as f64, (i * i) as f64]);
        let r = parallel_accumulate(1000, f).unwrap();
        assert_eq!(r[0].count(), 1000);
        assert!((r[0].mean() - 499.5).abs() < 1e-12);
        let again = parallel_accumulate(1000, f).unwrap();
        assert_eq!(r, again);
    }
}
