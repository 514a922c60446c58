//! Substitute random sources for unit tests: scripted draw sequences and an
//! identity source that turns every stochastic transform into a no-op.

use crate::rng::{RandomSource, RandomStream, RngError};
use std::collections::VecDeque;

/// Returns 0 for ranges containing 0, the lower bound for everything else,
/// and the mean for Gaussians; together these make every corruption and
/// deformation transform the identity. Not suitable for ops that draw
/// unit-sphere points (the zero Gaussian triple would never terminate).
pub(crate) struct IdentityDraws {
    inner: RandomStream,
}

impl IdentityDraws {
    pub fn new(seed: u64) -> Self {
        IdentityDraws { inner: RandomStream::from_u64_seed(seed) }
    }
}

impl RandomSource for IdentityDraws {
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn next_uniform(&mut self, a: f64, b: f64) -> Result<f64, RngError> {
        if a >= b {
            return Err(RngError::InvalidRange { a, b });
        }
        Ok(if a <= 0.0 && b >= 0.0 { 0.0 } else { 1.0 })
    }

    fn next_gaussian(&mut self, mu: f64, _sigma: f64) -> Result<f64, RngError> {
        Ok(mu)
    }

    fn next_int_inclusive(&mut self, lo: i64, hi: i64) -> Result<i64, RngError> {
        if lo > hi {
            return Err(RngError::InvalidIntRange { lo, hi });
        }
        Ok(lo)
    }

    fn take_gaussian_spare(&mut self) -> Option<f64> {
        None
    }

    fn put_gaussian_spare(&mut self, _z: f64) {}

    fn split(&mut self) -> Self {
        IdentityDraws { inner: self.inner.split() }
    }
}

/// Plays back queued uniform/integer draws, then falls back to a real
/// stream. `gaussian_mean` makes every Gaussian return its mean.
pub(crate) struct Scripted {
    pub uniforms: VecDeque<f64>,
    pub ints: VecDeque<i64>,
    pub gaussian_mean: bool,
    inner: RandomStream,
}

impl Scripted {
    fn empty() -> Self {
        Scripted {
            uniforms: VecDeque::new(),
            ints: VecDeque::new(),
            gaussian_mean: false,
            inner: RandomStream::from_u64_seed(0xDEAD_BEEF),
        }
    }

    pub fn uniforms(values: Vec<f64>) -> Self {
        Scripted { uniforms: values.into(), ..Self::empty() }
    }

    pub fn ints(values: Vec<i64>) -> Self {
        Scripted { ints: values.into(), ..Self::empty() }
    }

    pub fn mean_gaussians() -> Self {
        Scripted { gaussian_mean: true, ..Self::empty() }
    }
}

impl RandomSource for Scripted {
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn next_uniform(&mut self, a: f64, b: f64) -> Result<f64, RngError> {
        match self.uniforms.pop_front() {
            Some(v) => Ok(v),
            None => self.inner.next_uniform(a, b),
        }
    }

    fn next_gaussian(&mut self, mu: f64, sigma: f64) -> Result<f64, RngError> {
        if self.gaussian_mean {
            Ok(mu)
        } else {
            self.inner.next_gaussian(mu, sigma)
        }
    }

    fn next_int_inclusive(&mut self, lo: i64, hi: i64) -> Result<i64, RngError> {
        match self.ints.pop_front() {
            Some(v) => Ok(v),
            None => self.inner.next_int_inclusive(lo, hi),
        }
    }

    fn take_gaussian_spare(&mut self) -> Option<f64> {
        if self.gaussian_mean {
            None
        } else {
            self.inner.take_gaussian_spare()
        }
    }

    fn put_gaussian_spare(&mut self, z: f64) {
        self.inner.put_gaussian_spare(z)
    }

    fn split(&mut self) -> Self {
        Scripted {
            uniforms: VecDeque::new(),
            ints: VecDeque::new(),
            gaussian_mean: self.gaussian_mean,
            inner: self.inner.split(),
        }
    }
}
