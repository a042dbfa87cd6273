//! Tolerances and work budgets shared by every query.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hermiticity and other exact-structure checks.
    pub structural: f64,
    /// Eigenvalue-level comparisons (PSD tests, pencil bounds).
    pub spectral: f64,
    /// Minimum separation before an IN/OUT verdict is issued.
    pub verdict_margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structural: 1e-12,
            spectral: 1e-9,
            verdict_margin: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Highest matrix level visited by sweeps.
    pub level_cap: usize,
    /// Multi-start count for the support-gap sweep.
    pub sweep_starts: usize,
    /// Projected ascent iterations per start.
    pub sweep_iters: usize,
    /// Alternating (seesaw) rounds for inner decompositions and pricing.
    pub seesaw_iters: usize,
    /// Number of sampled directions for witness tuples.
    pub witness_samples: usize,
    /// Largest real dimension accepted by net-based certification.
    pub net_dim_cap: usize,
    /// Net points per unit of real dimension.
    pub net_density: usize,
    /// Haar-sampled unitary conjugations per k-positive witness family.
    pub witness_unitaries: usize,
    /// Seed for every pseudo-random choice.
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            level_cap: 4,
            sweep_starts: 32,
            sweep_iters: 12,
            seesaw_iters: 8,
            witness_samples: 32,
            net_dim_cap: 3,
            net_density: 64,
            witness_unitaries: 64,
            seed: 7,
        }
    }
}

impl Budget {
    /// A light budget suitable for unit tests and quick CLI runs.
    pub fn quick() -> Self {
        Self {
            level_cap: 2,
            sweep_starts: 8,
            sweep_iters: 6,
            seesaw_iters: 4,
            witness_samples: 16,
            ..Self::default()
        }
    }
}
