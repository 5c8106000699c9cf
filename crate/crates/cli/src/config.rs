//! Run configuration shared by every subcommand.

use serde::{Deserialize, Serialize};

use reeb_fuller::continuation::ContinuationControls;
use reeb_fuller::index::IndexControls;
use reeb_fuller::models::ModelChecks;
use reeb_fuller::orbit::shooting::ShootingControls;
use reeb_fuller::orbit::FinderControls;
use reeb_fuller::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuationConfig {
    pub window: f64,
    pub period_cap: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        let c = ContinuationControls::default();
        Self {
            window: c.window,
            period_cap: c.period_cap,
            initial_step: c.initial_step,
            min_step: c.min_step,
            max_step: c.max_step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tol_orbit: f64,
    pub tol_match: f64,
    pub degeneracy_tol: f64,
    pub kernel_tol: f64,
    pub seeds: usize,
    pub samples: usize,
    pub segments: usize,
    pub shooting_steps: usize,
    pub index_steps: usize,
    /// Per-dimension grid for model validity checks.
    pub grid: usize,
    pub rng_seed: u64,
    pub continuation: ContinuationConfig,
    pub output: Option<String>,
    pub plot: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = FinderControls::default();
        let i = IndexControls::default();
        Self {
            tol_orbit: f.tol_orbit,
            tol_match: f.tol_match,
            degeneracy_tol: i.degeneracy_tol,
            kernel_tol: i.kernel_tol,
            seeds: f.seeds,
            samples: f.samples,
            segments: f.shooting.segments,
            shooting_steps: f.shooting.steps,
            index_steps: i.steps,
            grid: ModelChecks::default().grid,
            rng_seed: f.rng_seed,
            continuation: ContinuationConfig::default(),
            output: None,
            plot: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.continuation;
        let positive = [
            ("tol_orbit", self.tol_orbit),
            ("tol_match", self.tol_match),
            ("degeneracy_tol", self.degeneracy_tol),
            ("kernel_tol", self.kernel_tol),
            ("continuation.window", c.window),
            ("continuation.period_cap", c.period_cap),
            ("continuation.initial_step", c.initial_step),
            ("continuation.min_step", c.min_step),
            ("continuation.max_step", c.max_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("seeds", self.seeds),
            ("samples", self.samples),
            ("segments", self.segments),
            ("shooting_steps", self.shooting_steps),
            ("index_steps", self.index_steps),
            ("grid", self.grid),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        if c.min_step > c.initial_step || c.initial_step > c.max_step {
            return Err(Error::InvalidInput("continuation steps must satisfy min ≤ initial ≤ max".into()));
        }
        Ok(())
    }

    pub fn shooting(&self) -> ShootingControls {
        ShootingControls {
            segments: self.segments,
            steps: self.shooting_steps,
            period_cap: self.continuation.period_cap,
            ..ShootingControls::default()
        }
    }

    pub fn finder(&self) -> FinderControls {
        FinderControls {
            seeds: self.seeds,
            shooting: self.shooting(),
            samples: self.samples,
            tol_orbit: self.tol_orbit,
            tol_match: self.tol_match,
            rng_seed: self.rng_seed,
            degeneracy_tol: self.degeneracy_tol,
            ..FinderControls::default()
        }
    }

    pub fn index(&self) -> IndexControls {
        IndexControls {
            steps: self.index_steps,
            degeneracy_tol: self.degeneracy_tol,
            kernel_tol: self.kernel_tol,
            cz: true,
        }
    }

    pub fn checks(&self) -> ModelChecks {
        ModelChecks { grid: self.grid, ..ModelChecks::default() }
    }

    pub fn continuation(&self) -> ContinuationControls {
        let c = &self.continuation;
        ContinuationControls {
            initial_step: c.initial_step,
            min_step: c.min_step,
            max_step: c.max_step,
            window: c.window,
            period_cap: c.period_cap,
            shooting: ShootingControls { period_cap: c.period_cap, ..self.shooting() },
            samples: self.samples,
            tol_orbit: self.tol_orbit,
            ..ContinuationControls::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }

    #[test]
    fn non_positive_tolerance_is_rejected() {
        let c = RunConfig { tol_match: 0.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        let c = RunConfig { seeds: 0, ..RunConfig::default() };
        assert!(c.validate().is_err());
    }
}
