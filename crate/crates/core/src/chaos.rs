//! Logistic-map noise source for the chaotic generator variants.

use crate::error::{Error, Result};

/// Growth rate of the map. Fixed at 4, the fully chaotic regime.
pub const LAMBDA: f64 = 4.0;

/// Iterations discarded after seeding.
pub const BURN_IN: usize = 100;

const DEGENERATE_SEEDS: [f64; 3] = [0.25, 0.5, 0.75];

/// Iterates `x ← λ·x·(1 − x)` from a fixed seed.
#[derive(Debug, Clone)]
pub struct LogisticMap {
    seed: f64,
    state: f64,
    iterations: u64,
}

impl LogisticMap {
    /// Seeds the map and applies the burn-in.
    pub fn new(seed: f64) -> Result<Self> {
        if !(seed > 0.0 && seed < 1.0) || DEGENERATE_SEEDS.contains(&seed) {
            return Err(Error::InvalidSeed(seed));
        }
        let mut map = Self {
            seed,
            state: seed,
            iterations: 0,
        };
        for _ in 0..BURN_IN {
            map.step();
        }
        Ok(map)
    }

    /// Places the map at an arbitrary state with no burn-in.
    pub fn from_state(state: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&state) {
            return Err(Error::InvalidSeed(state));
        }
        Ok(Self {
            seed: state,
            state,
            iterations: 0,
        })
    }

    pub fn seed(&self) -> f64 {
        self.seed
    }

    pub fn state(&self) -> f64 {
        self.state
    }

    /// Total iterations applied, burn-in included.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    #[inline]
    fn step(&mut self) -> f64 {
        self.state = LAMBDA * (self.state * (1.0 - self.state));
        self.iterations += 1;
        self.state
    }

    pub fn next_value(&mut self) -> f64 {
        self.step()
    }

    /// `n` consecutive iterates.
    pub fn fill(&mut self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Domain("fill needs n >= 1".into()));
        }
        Ok((0..n).map(|_| self.step()).collect())
    }
}

impl Iterator for LogisticMap {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.step())
    }
}
