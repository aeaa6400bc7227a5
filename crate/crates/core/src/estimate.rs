//! Monte-Carlo estimate carriers and streaming moment accumulators.

use serde::{Deserialize, Serialize};

/// Streaming mean/variance accumulator (Welford), mergeable across workers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2
            + delta * delta * self.count as f64 * other.count as f64 / total as f64;
        self.count = total;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count as f64 - 1.0) / self.count as f64).sqrt()
    }
}

/// A real-valued Monte-Carlo integral with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl IntegralEstimate {
    pub fn from_moments(m: &Moments, seed: u64) -> Self {
        IntegralEstimate {
            value: m.mean(),
            stderr: m.stderr(),
            samples: m.count(),
            seed,
        }
    }
}

/// A complex-valued Monte-Carlo integral; componentwise standard errors.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: f64,
    pub im: f64,
    pub re_stderr: f64,
    pub im_stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl ComplexEstimate {
    pub fn from_moments(re: &Moments, im: &Moments, seed: u64) -> Self {
        ComplexEstimate {
            re: re.mean(),
            im: im.mean(),
            re_stderr: re.stderr(),
            im_stderr: im.stderr(),
            samples: re.count(),
            seed,
        }
    }

    pub fn value(&self) -> crate::C64 {
        crate::C64::new(self.re, self.im)
    }

    /// True when this estimate and `other` agree componentwise within
    /// `sigmas` combined standard errors.
    pub fn agrees_with(&self, other: crate::C64, own_extra_err: f64, sigmas: f64) -> bool {
        let re_tol = sigmas * (self.re_stderr.powi(2) + own_extra_err.powi(2)).sqrt();
        let im_tol = sigmas * (self.im_stderr.powi(2) + own_extra_err.powi(2)).sqrt();
        (self.re - other.re).abs() <= re_tol && (self.im - other.im).abs() <= im_tol
    }
}

/// Sampling budget and reproducibility parameters for a Monte-Carlo run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 100_000,
            seed: 1,
            workers: 1,
        }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Per-worker sample counts summing to the total budget.
    pub fn chunks(&self) -> Vec<u64> {
        let w = self.workers.max(1) as u64;
        let base = self.samples / w;
        let rem = self.samples % w;
        (0..w).map(|i| base + u64::from(i < rem)).collect()
    }
}
